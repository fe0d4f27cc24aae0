#include "atomarray/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace atomarray {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_doubles(s)) out.push_back(static_cast<int>(std::llround(v)));
    return out;
}

}  // namespace

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::PrepareDark: return "prepare_dark";
        case Experiment::SelectivePrepare: return "selective_prepare";
        case Experiment::Iswap: return "iswap";
        case Experiment::DarkDecayScan: return "dark_decay_scan";
        case Experiment::KspaceTable: return "kspace_table";
        case Experiment::LambDickeCompare: return "lamb_dicke_compare";
        case Experiment::DriveGeometry: return "drive_geometry";
    }
    return "?";
}

Experiment experiment_from_string(const std::string& s) {
    for (int e = 0; e <= static_cast<int>(Experiment::DriveGeometry); ++e)
        if (s == to_string(static_cast<Experiment>(e))) return static_cast<Experiment>(e);
    throw std::invalid_argument("unknown experiment: " + s);
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "kind = " << to_string(experiment) << "\n\n";
    os << "[lattice]\n";
    os << "n_arrays = " << n_arrays << "\n";
    os << "polarization = " << polarization << "\n";
    os << "detuning_b = " << fmt(detuning_b) << "\n\n";
    os << "[scan]\n";
    os << "n_list = " << join(n_list) << "\n";
    os << "a_list = " << join(a_list) << "\n";
    os << "l_over_a_list = " << join(l_over_a_list) << "\n";
    os << "sigma_list = " << join(sigma_list) << "\n";
    os << "alpha_list = " << join(alpha_list) << "\n\n";
    os << "[motion]\n";
    os << "enabled = " << (motion_enabled ? "true" : "false") << "\n";
    os << "regime = " << motion_regime << "\n";
    os << "r0 = " << fmt(r0) << "\n";
    os << "omega_t = " << fmt(omega_t) << "\n";
    os << "n_th = " << fmt(n_th) << "\n";
    os << "n_realizations = " << n_realizations << "\n\n";
    os << "[numerics]\n";
    os << "n_max = " << n_max << "\n";
    os << "dense_cap = " << dense_cap << "\n";
    os << "dense_threshold = " << dense_threshold << "\n";
    os << "krylov_m = " << krylov_m << "\n";
    os << "seed = " << seed << "\n";
    os << "omega_points = " << omega_points << "\n";
    os << "omega_lo_factor = " << fmt(omega_lo_factor) << "\n";
    os << "omega_hi_factor = " << fmt(omega_hi_factor) << "\n";
    os << "time_points = " << time_points << "\n";
    os << "phonon_dim = " << phonon_dim << "\n\n";
    os << "[kspace]\n";
    os << "pol = " << kspace_pol << "\n";
    os << "p_ratio = " << fmt(p_ratio) << "\n\n";
    os << "[output]\n";
    os << "directory = " << output_directory << "\n";
    os << "format = " << output_format << "\n";
    return os.str();
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": malformed section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        const std::string skey = section + "." + key;
        try {
            if (skey == "experiment.kind") c.experiment = experiment_from_string(val);
            else if (skey == "lattice.n_arrays") c.n_arrays = std::stoi(val);
            else if (skey == "lattice.polarization") c.polarization = val;
            else if (skey == "lattice.detuning_b") c.detuning_b = std::stod(val);
            else if (skey == "scan.n_list") c.n_list = parse_ints(val);
            else if (skey == "scan.a_list") c.a_list = parse_doubles(val);
            else if (skey == "scan.l_over_a_list") c.l_over_a_list = parse_doubles(val);
            else if (skey == "scan.sigma_list") c.sigma_list = parse_doubles(val);
            else if (skey == "scan.alpha_list") c.alpha_list = parse_doubles(val);
            else if (skey == "motion.enabled") c.motion_enabled = (val == "true" || val == "1");
            else if (skey == "motion.regime") c.motion_regime = val;
            else if (skey == "motion.r0") c.r0 = std::stod(val);
            else if (skey == "motion.omega_t") c.omega_t = std::stod(val);
            else if (skey == "motion.n_th") c.n_th = std::stod(val);
            else if (skey == "motion.n_realizations") c.n_realizations = std::stoi(val);
            else if (skey == "numerics.n_max") c.n_max = std::stoi(val);
            else if (skey == "numerics.dense_cap") c.dense_cap = std::stoi(val);
            else if (skey == "numerics.dense_threshold") c.dense_threshold = std::stoi(val);
            else if (skey == "numerics.krylov_m") c.krylov_m = std::stoi(val);
            else if (skey == "numerics.seed") c.seed = std::stoull(val);
            else if (skey == "numerics.omega_points") c.omega_points = std::stoi(val);
            else if (skey == "numerics.omega_lo_factor") c.omega_lo_factor = std::stod(val);
            else if (skey == "numerics.omega_hi_factor") c.omega_hi_factor = std::stod(val);
            else if (skey == "numerics.time_points") c.time_points = std::stoi(val);
            else if (skey == "numerics.phonon_dim") c.phonon_dim = std::stoi(val);
            else if (skey == "kspace.pol") c.kspace_pol = val;
            else if (skey == "kspace.p_ratio") c.p_ratio = std::stod(val);
            else if (skey == "output.directory") c.output_directory = val;
            else if (skey == "output.format") c.output_format = val;
            else
                throw std::invalid_argument("unknown key '" + key + "' in section [" + section +
                                            "]");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + " (" + skey +
                                        "): " + e.what());
        }
    }
    c.validate_fields();
    return c;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

void RunConfig::validate_fields() const {
    if (n_arrays != 1 && n_arrays != 2)
        throw std::invalid_argument("config: n_arrays must be 1 or 2");
    if (n_list.empty() || a_list.empty())
        throw std::invalid_argument("config: n_list and a_list must be non-empty");
    if (output_format != "csv" && output_format != "json")
        throw std::invalid_argument("config: format must be csv or json");
    if (n_max < 1 || n_max > 3) throw std::invalid_argument("config: n_max must be 1..3");
    for (int n : n_list)
        if (n < 1) throw std::invalid_argument("config: N must be positive");
    for (double a : a_list)
        if (a <= 0) throw std::invalid_argument("config: a must be positive");
}

std::uint64_t RunConfig::hash() const {
    const std::string s = serialize();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string RunRecord::to_json(const RunConfig& config) const {
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["experiment"] = experiment;
    j["n_rows"] = n_rows;
    j["wall_seconds"] = wall_seconds;
    j["seed"] = seed;
    j["truncated"] = truncated;
    j["csv_header"] = csv_header;
    j["config"] = config.serialize();
    j["krylov_strategy"] = "smallest decay rates, complex-symmetric Lanczos";
    j["mc_substreams"] =
        "splitmix64 keyed by (seed, realization, atom); realizations reduced in blocks of 64";
    j["rotating_frame"] = "diagonal shifted by -(target energy + detuning) per excitation";
    nlohmann::json w = nlohmann::json::array();
    for (const auto& warning : warnings) w.push_back({{"code", warning.code}, {"message", warning.message}});
    j["warnings"] = w;
    return j.dump(2) + "\n";
}

}  // namespace atomarray
