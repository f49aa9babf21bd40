#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sllab::cli {

/// One recognised configuration key. Every key has a command-line flag.
struct KeySpec {
    std::string key;
    std::string flag;
    std::string default_value;
    std::string help;
};

const std::vector<KeySpec>& key_table();

/// Flat key = value configuration with dotted section prefixes.
///
/// Values are kept as text and converted on access. Later sources override
/// earlier ones: defaults, then the environment, then a config file, then flags.
class Config {
public:
    Config();

    /// Throws for keys not in key_table().
    void set(const std::string& key, const std::string& value);
    void load_text(std::string_view text, const std::string& origin);
    void load_file(const std::filesystem::path& path);
    /// Applies SLLAB_OUTPUT_DIR when set.
    void load_environment();

    const std::string& raw(const std::string& key) const;
    bool has_value(const std::string& key) const { return !raw(key).empty(); }
    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::vector<int> integer_list(const std::string& key) const;

    /// Resolved configuration in the same syntax load_text accepts.
    std::string echo() const;
    nlohmann::json to_json() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace sllab::cli
