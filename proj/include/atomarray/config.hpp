#pragma once

// Flat key = value run configurations (diff-able, hand-editable) and the
// run-record metadata written next to every result table.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace atomarray {

enum class Experiment {
    PrepareDark,
    SelectivePrepare,
    Iswap,
    DarkDecayScan,
    KspaceTable,
    LambDickeCompare,
    DriveGeometry,
};

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct RunConfig {
    Experiment experiment = Experiment::PrepareDark;

    // lattice
    int n_arrays = 1;
    std::string polarization = "z";
    double detuning_b = 0.0;

    // scan axes (cartesian product)
    std::vector<int> n_list{20};
    std::vector<double> a_list{0.25};
    std::vector<double> l_over_a_list{1.0};
    std::vector<double> sigma_list{0.0};  // units of lambda_e

    // motion
    bool motion_enabled = false;
    std::string motion_regime = "fast_motion_averaged";
    double r0 = 0.0;
    double omega_t = 100.0;
    double n_th = 0.0;
    int n_realizations = 100;

    // numerics
    int n_max = 2;
    int dense_cap = 6000;
    int dense_threshold = 700;
    int krylov_m = 30;
    std::uint64_t seed = 0;
    int omega_points = 40;
    double omega_lo_factor = 1e-3;
    double omega_hi_factor = 10.0;
    int time_points = 300;
    int phonon_dim = 2;

    // kspace / drive-geometry specifics
    std::string kspace_pol = "z";
    double p_ratio = 2.0;
    std::vector<double> alpha_list{0.0};

    // output
    std::string output_directory = "out";
    std::string output_format = "csv";  // csv | json (json mirrors the csv rows)

    // canonical serialization: fixed section and key order, all defaults
    // materialized; parse(serialize(c)) == c and the bytes are stable
    std::string serialize() const;
    static RunConfig parse(const std::string& text);
    static RunConfig parse_file(const std::string& path);

    std::uint64_t hash() const;  // FNV-1a over the canonical serialization
    void validate_fields() const;
};

struct Warning {
    std::string code;  // machine-readable: regime_guard, light_cone, ...
    std::string message;
};

struct RunRecord {
    std::uint64_t config_hash = 0;
    std::string version;
    std::string experiment;
    int n_rows = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<Warning> warnings;
    std::string csv_header;
    bool truncated = false;

    std::string to_json(const RunConfig& config) const;
};

inline constexpr const char* software_version = "0.1.0";

}  // namespace atomarray
