#include "sllab/cli/outputs.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "sllab/error.hpp"

namespace sllab::cli {

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) throw Error("cli", "csv row width does not match the header");
    rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
    auto line = [](const std::vector<std::string>& fields) {
        std::string out;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) out += ',';
            out += csv_field(fields[i]);
        }
        return out + "\n";
    };
    std::string out = line(header);
    for (const auto& row : rows) out += line(row);
    return out;
}

bool RunResults::all_checks_pass() const {
    for (const auto& [name, ok] : checks) {
        if (!ok) return false;
    }
    return true;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cli", "cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw Error("cli", "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cli", "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<std::string> write_outputs(const RunResults& results, const OutputRequest& request) {
    std::error_code ec;
    std::filesystem::create_directories(request.directory, ec);
    if (ec || !std::filesystem::is_directory(request.directory)) {
        throw Error("cli", "cannot create output directory " + request.directory.string());
    }
    // A stale manifest would mark a half-written run as complete.
    std::filesystem::remove(request.directory / "manifest.json", ec);

    std::vector<std::string> files;
    auto emit = [&](const std::string& name, const std::string& contents) {
        write_file_atomic(request.directory / name, contents);
        files.push_back(name);
    };
    if (request.csv) {
        for (const auto& [name, table] : results.tables) emit(name + ".csv", table.render());
    }
    if (request.json) emit("summary.json", results.summary.dump(2) + "\n");
    emit("config.txt", request.config_echo);

    nlohmann::json manifest;
    manifest["subcommand"] = request.subcommand;
    manifest["tool_version"] = request.tool_version;
    manifest["config"] = request.config;
    manifest["wall_seconds"] = request.wall_seconds;
    manifest["files"] = files;
    manifest["checks"] = nlohmann::json::object();
    for (const auto& [name, ok] : results.checks) manifest["checks"][name] = ok;
    manifest["pass"] = results.all_checks_pass();
    emit("manifest.json", manifest.dump(2) + "\n");
    return files;
}

}  // namespace sllab::cli
