#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace sllab::cli {

/// %.17g, so every double round-trips.
std::string format_number(double value);

/// Long-format table with a fixed header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    /// Header line, then one record per line; fields quoted only when needed.
    std::string render() const;
};

std::string csv_field(const std::string& value);

/// Everything one subcommand produced.
struct RunResults {
    std::map<std::string, CsvTable> tables;
    nlohmann::json summary = nlohmann::json::object();
    /// Built-in check name -> passed.
    std::map<std::string, bool> checks;

    bool all_checks_pass() const;
};

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct OutputRequest {
    std::filesystem::path directory;
    bool csv = true;
    bool json = true;
    std::string subcommand;
    std::string config_echo;
    nlohmann::json config;
    std::string tool_version;
    double wall_seconds = 0.0;
};

/// Writes tables as <name>.csv, the summary as summary.json, the resolved
/// config as config.txt, and finally manifest.json. Returns the file names
/// written, manifest last.
std::vector<std::string> write_outputs(const RunResults& results, const OutputRequest& request);

}  // namespace sllab::cli
