#include "sllab/cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sllab/error.hpp"

namespace sllab::cli {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
    throw Error("cli", "config key " + key + ": expected " + expected + ", got '" + value + "'");
}

}  // namespace

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"lattice.d", "--d", "1", "lattice dimension"},
        {"lattice.n1", "--n1", "11", "sites per axis (odd)"},
        {"lattice.a1", "--a1", "1", "lattice spacing"},
        {"lattice.l_cut", "--l-cut", "", "kernel cutoff half-width (default min(a1 sqrt 3, lattice half-extent))"},
        {"constants.hbar", "--hbar", "1", "reduced Planck constant"},
        {"constants.m_eff", "--m-eff", "1", "effective mass"},
        {"match.target", "--target", "discrete", "discrete|continuum_1d|ddim|heat|nls|generic"},
        {"match.mode", "--mode", "cutoff", "continuum_1d mode: cutoff|full_length"},
        {"match.length", "--match-length", "", "kernel half-width for full_length mode"},
        {"targets.e0", "--e0", "2", "on-site energy E0"},
        {"targets.a", "--a", "1", "hopping A"},
        {"targets.b", "--b", "1", "reference lattice spacing b"},
        {"targets.v", "--v", "const:0", "potential: const:<value> or harmonic:<k> (k x^2 / 2)"},
        {"targets.alpha", "--alpha", "1", "heat diffusivity"},
        {"targets.mu", "--mu", "0", "heat growth rate"},
        {"targets.kappa0", "--kappa0", "1", "nonlinear coefficient"},
        {"targets.kappa2", "--kappa2", "-0.5", "dispersive coefficient"},
        {"targets.f0_re", "--f0-re", "0", "generic F0, real part"},
        {"targets.f0_im", "--f0-im", "0", "generic F0, imaginary part"},
        {"targets.f2_re", "--f2-re", "-0.5", "generic F2, real part"},
        {"targets.f2_im", "--f2-im", "0", "generic F2, imaginary part"},
        {"noise.kind", "--noise", "additive_iid", "none|additive_iid|state_correlated"},
        {"noise.sigma", "--sigma", "0.3", "noise amplitude"},
        {"noise.hermitian", "--hermitian", "true", "use the Hermitian part of the noise"},
        {"noise.kernel", "--kernel", "adjacency", "noise direction: adjacency|onsite"},
        {"time.dt", "--dt", "0.001", "time step"},
        {"time.steps", "--steps", "1000", "number of steps"},
        {"time.stride", "--stride", "50", "sample every stride steps"},
        {"time.scheme", "--scheme", "euler", "euler|norm_preserving"},
        {"ensemble.r", "--r", "1000", "realization count"},
        {"ensemble.seed", "--seed", "1", "master seed"},
        {"ensemble.threads", "--threads", "0", "worker threads (0 = hardware)"},
        {"state.init", "--init", "plane:1", "plane:<mode> or gauss:<width>[:<mode>]"},
        {"evolve.kind", "--kind", "discrete_sl", "discrete_sl|continuum_sl|heat|nls"},
        {"dispersion.k_index", "--k-index", "1,10,25,50", "comma-separated mode numbers"},
        {"dispersion.tolerance", "--tolerance", "1e-4", "relative phase-rate tolerance"},
        {"moments.n_max", "--n-max", "10", "highest interval moment order"},
        {"moments.length", "--length", "1", "integration half-width"},
        {"remainder.l_min", "--l-min", "0.001", "smallest cutoff"},
        {"remainder.l_max", "--l-max", "1", "largest cutoff"},
        {"remainder.l_count", "--l-count", "13", "number of log-spaced cutoffs"},
        {"remainder.n_max", "--remainder-n-max", "6", "highest remainder order"},
        {"sums.n1_max", "--n1-max", "", "sweep odd n1 from 3 to this value"},
        {"output.dir", "--out", "", "output directory (env SLLAB_OUTPUT_DIR)"},
        {"output.formats", "--formats", "csv,json", "files to write: csv, json or both"},
    };
    return table;
}

Config::Config() {
    for (const KeySpec& spec : key_table()) values_[spec.key] = spec.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error("cli", "unknown config key '" + key + "'");
    it->second = trim(value);
}

void Config::load_text(std::string_view text, const std::string& origin) {
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string content = trim(line.substr(0, line.find('#')));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw Error("cli", origin + ":" + std::to_string(number) + ": expected key = value");
        }
        set(trim(content.substr(0, eq)), content.substr(eq + 1));
    }
}

void Config::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli", "cannot read config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    load_text(text.str(), path.string());
}

void Config::load_environment() {
    if (const char* dir = std::getenv("SLLAB_OUTPUT_DIR"); dir != nullptr && *dir != '\0') set("output.dir", dir);
}

const std::string& Config::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error("cli", "unknown config key '" + key + "'");
    return it->second;
}

double Config::number(const std::string& key) const {
    const std::string& value = raw(key);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "a number");
    return out;
}

int Config::integer(const std::string& key) const {
    const std::string& value = raw(key);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
    return out;
}

bool Config::boolean(const std::string& key) const {
    const std::string& value = raw(key);
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "true or false");
}

std::vector<int> Config::integer_list(const std::string& key) const {
    const std::string& value = raw(key);
    std::vector<int> out;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) bad_value(key, value, "integers");
        out.push_back(v);
    }
    if (out.empty()) bad_value(key, value, "at least one integer");
    return out;
}

std::string Config::echo() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
    return out;
}

nlohmann::json Config::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [key, value] : values_) out[key] = value;
    return out;
}

}  // namespace sllab::cli
