#include "atomarray/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "atomarray/couplings.hpp"
#include "atomarray/kspace.hpp"
#include "atomarray/motion.hpp"

namespace atomarray {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

int worker_count() {
    if (const char* env = std::getenv("ATOMARRAY_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct ScanPoint {
    int n = 0;
    double a = 0.0;
    double l_over_a = 0.0;
    double sigma = 0.0;
    double alpha = 0.0;
    int index = 0;
};

std::vector<ScanPoint> expand_scan(const RunConfig& c) {
    std::vector<ScanPoint> pts;
    const bool use_l = c.n_arrays == 2 || c.experiment == Experiment::KspaceTable ||
                       c.experiment == Experiment::LambDickeCompare;
    const bool use_sigma = c.motion_enabled || c.experiment == Experiment::DarkDecayScan;
    const bool use_alpha = c.experiment == Experiment::DriveGeometry;
    for (int n : c.n_list)
        for (double a : c.a_list)
            for (double l : (use_l ? c.l_over_a_list : std::vector<double>{0.0}))
                for (double s : (use_sigma ? c.sigma_list : std::vector<double>{0.0}))
                    for (double al : (use_alpha ? c.alpha_list : std::vector<double>{0.0})) {
                        ScanPoint p;
                        p.n = n;
                        p.a = a;
                        p.l_over_a = l;
                        p.sigma = s;
                        p.alpha = al;
                        p.index = static_cast<int>(pts.size());
                        pts.push_back(p);
                    }
    return pts;
}

LatticeSpec lattice_at(const RunConfig& c, const ScanPoint& p) {
    LatticeSpec lat;
    lat.n_atoms = p.n;
    lat.n_arrays = c.n_arrays;
    lat.spacing = p.a;
    lat.separation = c.n_arrays == 2 ? p.l_over_a * p.a : 0.0;
    lat.polarization = polarization_from_string(c.polarization);
    lat.detuning_b = c.detuning_b;
    return lat;
}

OmegaScan scan_of(const RunConfig& c) {
    OmegaScan s;
    s.points = c.omega_points;
    s.lo_factor = c.omega_lo_factor;
    s.hi_factor = c.omega_hi_factor;
    return s;
}

ProtocolOptions options_of(const RunConfig& c) {
    ProtocolOptions o;
    o.n_max = c.n_max;
    o.krylov_m = c.krylov_m;
    o.dense_threshold = c.dense_threshold;
    o.dense_cap = c.dense_cap;
    o.coarse_time_points = c.time_points;
    return o;
}

MotionParams motion_of(const RunConfig& c, double sigma) {
    MotionParams m;
    m.sigma = sigma;
    m.r0 = c.r0;
    m.omega_t = c.omega_t;
    m.n_th = c.n_th;
    m.n_realizations = c.n_realizations;
    m.seed = c.seed;
    m.regime = c.motion_regime == "lamb_dicke_perturbative"
                   ? MotionRegime::LambDickePerturbative
                   : MotionRegime::FastMotionAveraged;
    return m;
}

}  // namespace

std::string csv_header(Experiment e) {
    switch (e) {
        case Experiment::PrepareDark:
            return "N,a_over_lambda,omega0_opt,epsilon,t_star,P0,P2";
        case Experiment::SelectivePrepare:
            return "N,a_over_lambda,l_over_a,delta,omega0_opt,epsilon,t_star,leak_01,P2";
        case Experiment::Iswap:
            return "N,a_over_lambda,l_over_a,g_qa,gamma_qa,T_g,fidelity,error";
        case Experiment::DarkDecayScan:
            return "N,a_over_lambda,sigma,gamma_qa,gamma_qa_pinned";
        case Experiment::KspaceTable:
            return "k,l_over_a,a_over_lambda,pol,g_k,gamma_k,g_lattice,gamma_lattice,N";
        case Experiment::LambDickeCompare:
            return "N,a_over_lambda,l_over_a,r0,omega_t,eps_full,eps_effective,max_phonon";
        case Experiment::DriveGeometry:
            return "alpha,a_over_lambda,p,feasible,beta,K_z,K_x";
    }
    return "";
}

namespace {

std::string run_point(const RunConfig& c, const ScanPoint& p, std::vector<Warning>& warnings,
                      std::mutex& warn_mutex) {
    std::ostringstream row;
    row.precision(12);
    auto warn = [&](const std::string& code, const std::string& msg) {
        std::lock_guard<std::mutex> lock(warn_mutex);
        warnings.push_back({code, msg});
    };

    switch (c.experiment) {
        case Experiment::PrepareDark: {
            const LatticeSpec lat = lattice_at(c, p);
            if (!lat.subwavelength()) warn("subwavelength", "a >= lambda_e/2 at N=" + std::to_string(p.n));
            ProtocolOptions opt = options_of(c);
            DarkStatePrepResult r;
            if (c.motion_enabled)
                r = averaged_prepare(ProtocolKind::PrepareDark, lat, motion_of(c, p.sigma),
                                     scan_of(c), opt);
            else
                r = prepare_dark_state(lat, scan_of(c), opt);
            row << p.n << "," << num(p.a) << "," << num(r.optimal_omega0) << ","
                << num(r.error_epsilon) << "," << num(r.t_star) << "," << num(r.populations.ground)
                << "," << num(r.populations.two_excitation);
            break;
        }
        case Experiment::SelectivePrepare: {
            const LatticeSpec lat = lattice_at(c, p);
            ProtocolOptions opt = options_of(c);
            DarkStatePrepResult r;
            if (c.motion_enabled)
                r = averaged_prepare(ProtocolKind::SelectivePrepare, lat, motion_of(c, p.sigma),
                                     scan_of(c), opt);
            else
                r = selective_prepare(lat, scan_of(c), opt);
            for (const auto& w : r.warnings) warn("selective_prepare", w);
            row << p.n << "," << num(p.a) << "," << num(p.l_over_a) << "," << num(c.detuning_b)
                << "," << num(r.optimal_omega0) << "," << num(r.error_epsilon) << ","
                << num(r.t_star) << "," << num(r.leak_01) << ","
                << num(r.populations.two_excitation);
            break;
        }
        case Experiment::Iswap: {
            const LatticeSpec lat = lattice_at(c, p);
            GateReport r;
            if (c.motion_enabled)
                r = averaged_iswap(lat, motion_of(c, p.sigma), options_of(c));
            else
                r = iswap_gate(lat, options_of(c));
            row << p.n << "," << num(p.a) << "," << num(p.l_over_a) << "," << num(r.g_qa) << ","
                << num(r.gamma_qa) << "," << num(r.gate_time) << "," << num(r.fidelity) << ","
                << num(r.error_total);
            break;
        }
        case Experiment::DarkDecayScan: {
            const LatticeSpec lat = lattice_at(c, p);
            const CouplingMatrix avg =
                p.sigma > 0
                    ? motion_averaged_couplings(lat, p.sigma, c.n_realizations, c.seed)
                    : pinned_couplings(lat);
            const BiorthogonalSpectrum spec = single_excitation_spectrum(lat, avg);
            const double g = spec.decay_rate(spec.most_subradiant(1));
            const BiorthogonalSpectrum spec0 =
                single_excitation_spectrum(lat, pinned_couplings(lat));
            const double g0 = spec0.decay_rate(spec0.most_subradiant(1));
            row << p.n << "," << num(p.a) << "," << num(p.sigma) << "," << num(g) << ","
                << num(g0);
            break;
        }
        case Experiment::KspaceTable: {
            const double k = pi * p.n / (p.a * (p.n + 1));  // band edge for the given N
            const Polarization pol = polarization_from_string(c.kspace_pol);
            const double l = p.l_over_a * p.a;
            KCoupling an{0.0, 0.0};
            try {
                an = analytic_gk(k, l, p.a, pol);
            } catch (const std::domain_error& e) {
                warn("light_cone", e.what());
            }
            const KCoupling ls = lattice_sum_gk(k, p.a, l, pol, p.n);
            row << num(k) << "," << num(p.l_over_a) << "," << num(p.a) << "," << c.kspace_pol
                << "," << num(an.g) << "," << num(an.gamma) << "," << num(ls.g) << ","
                << num(ls.gamma) << "," << p.n;
            break;
        }
        case Experiment::LambDickeCompare: {
            LatticeSpec lat = lattice_at(c, p);
            MotionParams m = motion_of(c, p.sigma);
            m.sigma = MotionParams::sigma_from(c.r0, c.n_th);
            const LambDickePrepResult r =
                lamb_dicke_prepare(lat, m, scan_of(c), c.phonon_dim, options_of(c));
            row << p.n << "," << num(p.a) << "," << num(p.l_over_a) << "," << num(c.r0) << ","
                << num(c.omega_t) << "," << num(r.full.error_epsilon) << ","
                << num(r.effective.error_epsilon) << ","
                << num(r.mean_phonon.size() ? r.mean_phonon.maxCoeff() : 0.0);
            break;
        }
        case Experiment::DriveGeometry: {
            const auto geo = solve_drive_geometry(p.a, p.alpha, c.p_ratio, pi / p.a);
            if (geo) {
                row << num(p.alpha) << "," << num(p.a) << "," << num(c.p_ratio) << ",1,"
                    << num(geo->beta) << "," << num(geo->K_z) << "," << num(geo->K_x);
            } else {
                row << num(p.alpha) << "," << num(p.a) << "," << num(c.p_ratio)
                    << ",0,nan,nan,nan";
            }
            break;
        }
    }
    return row.str();
}

}  // namespace

RunResult run(const RunConfig& config, const std::string& out_dir_override,
              const std::function<void(const std::string&)>& progress) {
    config.validate_fields();
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<ScanPoint> points = expand_scan(config);

    const std::string dir = out_dir_override.empty() ? config.output_directory : out_dir_override;
    const bool to_disk = !dir.empty() && dir != "-";
    std::ofstream csv_stream;
    if (to_disk) {
        std::filesystem::create_directories(dir);
        csv_stream.open(dir + "/results.csv");
        csv_stream << csv_header(config.experiment) << "\n";
        csv_stream.flush();
    }

    std::vector<std::string> rows(points.size());
    std::vector<bool> done(points.size(), false);
    std::size_t flushed = 0;
    std::vector<Warning> warnings;
    std::mutex warn_mutex, write_mutex;

    // regime preview warnings
    if (config.motion_enabled && config.motion_regime == "fast_motion_averaged" &&
        config.omega_t < 10.0)
        warnings.push_back({"regime_guard", "omega_T/Gamma0 < 10 with fast_motion_averaged"});

    // rows stream to disk in scan order as soon as the contiguous prefix
    // completes, so an interrupted run leaves a valid partial CSV
    auto flush_ready = [&](int completed) {
        std::lock_guard<std::mutex> lock(write_mutex);
        done[completed] = true;
        while (flushed < done.size() && done[flushed]) {
            if (to_disk) {
                csv_stream << rows[flushed] << "\n";
                csv_stream.flush();
            }
            if (progress) progress(rows[flushed]);
            ++flushed;
        }
    };

    const int workers = std::min<int>(worker_count(), static_cast<int>(points.size()));
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex fail_mutex;
    auto work = [&] {
        int i;
        while ((i = next.fetch_add(1)) < static_cast<int>(points.size())) {
            if (failed.load()) return;
            try {
                rows[i] = run_point(config, points[i], warnings, warn_mutex);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                failure = e.what();
                failed.store(true);
                return;
            }
            flush_ready(i);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    RunResult out;
    out.record.config_hash = config.hash();
    out.record.version = software_version;
    out.record.experiment = to_string(config.experiment);
    out.record.n_rows = static_cast<int>(flushed);
    out.record.seed = config.seed;
    out.record.warnings = warnings;
    out.record.csv_header = csv_header(config.experiment);
    out.record.truncated = failed.load();
    out.record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    csv << out.record.csv_header << "\n";
    for (std::size_t i = 0; i < flushed; ++i) csv << rows[i] << "\n";
    out.csv = csv.str();
    out.json = out.record.to_json(config);

    if (to_disk) {
        csv_stream.close();
        std::ofstream(dir + "/run.json") << out.json;
    }
    if (failed.load()) throw std::runtime_error("run failed: " + failure);
    if (to_disk) {
        if (config.output_format == "json") {
            // mirror the rows as a JSON array of objects
            nlohmann::json jrows = nlohmann::json::array();
            std::istringstream is(out.csv);
            std::string header, line;
            std::getline(is, header);
            std::vector<std::string> cols;
            {
                std::stringstream hs(header);
                std::string c;
                while (std::getline(hs, c, ',')) cols.push_back(c);
            }
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                nlohmann::json obj;
                std::stringstream ls(line);
                std::string cell;
                for (std::size_t k = 0; k < cols.size() && std::getline(ls, cell, ','); ++k)
                    obj[cols[k]] = cell;
                jrows.push_back(obj);
            }
            std::ofstream(dir + "/results.json") << jrows.dump(2) << "\n";
        }
    }
    return out;
}

ValidationReport validate(const RunConfig& config) {
    config.validate_fields();
    ValidationReport rep;
    for (const ScanPoint& p : expand_scan(config)) {
        ValidationPoint vp;
        const int n_tot = config.n_arrays * p.n;
        vp.dimension = ExcitationBasis::dimension_for(n_tot, config.n_max);
        vp.route = vp.dimension <= config.dense_threshold ? "dense" : "krylov";
        vp.memory_mb = vp.route == "dense"
                           ? 16.0 * vp.dimension * vp.dimension / 1048576.0 * 3.0
                           : 16.0 * vp.dimension *
                                 (2.0 * n_tot + 12.0 * config.krylov_m) / 1048576.0;
        std::ostringstream label;
        label << to_string(config.experiment) << " N=" << p.n << " a=" << p.a;
        if (config.n_arrays == 2) label << " l/a=" << p.l_over_a;
        vp.label = label.str();
        if (config.motion_enabled && config.motion_regime == "fast_motion_averaged" &&
            config.omega_t < 10.0)
            vp.warnings.push_back({"regime_guard", "omega_T/Gamma0 < 10"});
        if (p.a >= 0.5) vp.warnings.push_back({"subwavelength", "a >= lambda_e/2"});
        if (config.experiment == Experiment::LambDickeCompare && n_tot > 4)
            vp.warnings.push_back({"guard", "Lamb-Dicke module restricted to n_total <= 4"});
        rep.points.push_back(vp);
    }
    return rep;
}

std::string ValidationReport::text() const {
    std::ostringstream os;
    for (const auto& p : points) {
        os << p.label << ": dim=" << p.dimension << " route=" << p.route << " mem~"
           << static_cast<long long>(p.memory_mb + 0.5) << "MB";
        for (const auto& w : p.warnings) os << " [" << w.code << ": " << w.message << "]";
        os << "\n";
    }
    return os.str();
}

}  // namespace atomarray
