#include "atomarray/motion.hpp"

#include <cmath>

#include "atomarray/couplings.hpp"

namespace atomarray {

namespace {

constexpr double k_e = 2.0 * pi;

double most_subradiant_decay(const LatticeSpec& lattice, const CouplingMatrix& cm) {
    const BiorthogonalSpectrum spec = single_excitation_spectrum(lattice, cm);
    return spec.decay_rate(spec.most_subradiant(1));
}

}  // namespace

MotionStudyResult averaged_dark_decay_study(const LatticeSpec& lattice_template,
                                            const std::vector<int>& n_values, double sigma,
                                            int n_realizations, std::uint64_t seed) {
    MotionStudyResult out;
    out.n_values = n_values;
    for (const int n : n_values) {
        LatticeSpec lat = lattice_template;
        lat.n_atoms = n;
        const CouplingMatrix avg =
            sigma > 0 ? motion_averaged_couplings(lat, sigma, n_realizations, seed)
                      : pinned_couplings(lat);
        out.decay_rates.push_back(most_subradiant_decay(lat, avg));
        out.pinned_decays.push_back(most_subradiant_decay(lat, pinned_couplings(lat)));
    }
    // least squares for Gamma(N) = c / N^3 + plateau
    const int m = static_cast<int>(n_values.size());
    Eigen::MatrixXd a(m, 2);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        a(i, 0) = 1.0 / std::pow(static_cast<double>(n_values[i]), 3);
        a(i, 1) = 1.0;
        b[i] = out.decay_rates[i];
    }
    const Eigen::Vector2d fit = a.colPivHouseholderQr().solve(b);
    out.n3_coefficient = fit[0];
    out.plateau = fit[1];
    return out;
}

DarkStatePrepResult averaged_prepare(ProtocolKind kind, const LatticeSpec& lattice,
                                     const MotionParams& motion, const OmegaScan& scan,
                                     ProtocolOptions options) {
    motion.check_regime();
    options.couplings =
        motion.sigma > 0
            ? motion_averaged_couplings(lattice, motion.sigma, motion.n_realizations, motion.seed)
            : pinned_couplings(lattice);
    switch (kind) {
        case ProtocolKind::PrepareDark:
            return prepare_dark_state(lattice, scan, options);
        case ProtocolKind::SelectivePrepare:
            return selective_prepare(lattice, scan, options);
        default:
            throw std::invalid_argument("averaged_prepare: use averaged_iswap for the gate");
    }
}

GateReport averaged_iswap(const LatticeSpec& lattice, const MotionParams& motion,
                          ProtocolOptions options) {
    motion.check_regime();
    options.couplings =
        motion.sigma > 0
            ? motion_averaged_couplings(lattice, motion.sigma, motion.n_realizations, motion.seed)
            : pinned_couplings(lattice);
    return iswap_gate(lattice, options);
}

// ---------------------------------------------------------------------------
// Lamb-Dicke protocols

namespace {

struct JointPrepContext {
    LatticeSpec lattice;
    MotionParams motion;
    int phonon_dim;
    ProtocolOptions options;
    double resonance = 0.0;      // dark energy of the eta-renormalized couplings
    Eigen::VectorXcd target10;   // internal |10>_L (or |q_a> for one array)
    double collective_factor = 1.0;
    int krylov_m = 40;
};

// target and resonance from the (1 - 2 eta^2)-scaled isolated array
JointPrepContext make_context(const LatticeSpec& lattice, const MotionParams& motion,
                              int phonon_dim, const ProtocolOptions& options) {
    JointPrepContext ctx{lattice, motion, phonon_dim, options};
    LatticeSpec isolated = lattice;
    isolated.n_arrays = 1;
    isolated.separation = 0.0;
    isolated.detuning_b = 0.0;
    const CouplingMatrix scaled = analytic_averaged_couplings(isolated, motion.r0);
    const DarkMode dm = dark_mode_target(single_excitation_spectrum(isolated, scaled), isolated);
    ctx.resonance = dm.energy.real();
    ctx.collective_factor = std::sqrt((lattice.n_atoms + 1) / 2.0);

    auto basis = std::make_shared<ExcitationBasis>(lattice.n_total(), options.n_max);
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(basis->dimension());
    for (int j = 0; j < lattice.n_atoms; ++j)
        t[basis->index_of_single(j)] = dm.site_amplitudes[j];
    ctx.target10 = t / t.norm();
    return ctx;
}

struct JointEval {
    double eps = 1.0;
    double t_star = 0.0;
};

JointEval eval_joint(const JointPrepContext& ctx, double omega0, Eigen::VectorXd* times_out,
                     Eigen::VectorXd* phonon_out) {
    DriveSpec drive;
    drive.rabi_omega0 = omega0;
    drive.k_z = band_edge_momentum(ctx.lattice);

    LambDickeParams ld;
    ld.r0 = ctx.motion.r0;
    ld.omega_t = ctx.motion.omega_t;
    ld.phonon_dim = ctx.phonon_dim;
    const LambDickeSystem sys = assemble_lamb_dicke_system(ctx.lattice, drive, ld, ctx.resonance,
                                                           ctx.options.n_max);

    const Eigen::VectorXcd target = sys.lift(ctx.target10);
    Eigen::VectorXcd ground = Eigen::VectorXcd::Zero(sys.joint_dim());
    ground[0] = 1.0;

    KrylovOptions kopt;
    kopt.seed = ground;
    kopt.target = "near_energy";  // vacuum phonon sector; trap sectors sit at +n omega_T
    const KrylovSpectrum spec = krylov_decompose(sys.op, ctx.krylov_m, kopt);

    const double rabi = omega0 * ctx.collective_factor;
    const double t_max = 2.5 * pi / (2.0 * rabi);
    const int coarse = ctx.options.coarse_time_points;

    JointEval ev;
    double lo = 0.0, hi = t_max;
    int points = coarse;
    for (int level = 0; level <= ctx.options.refine_levels; ++level) {
        Eigen::VectorXd times(points);
        for (int i = 0; i < points; ++i)
            times[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        const Eigen::VectorXcd amps = transition_amplitudes(spec, ground, target, times);
        int arg = 0;
        double fmax = -1.0;
        for (int i = 0; i < points; ++i)
            if (std::norm(amps[i]) > fmax) {
                fmax = std::norm(amps[i]);
                arg = i;
            }
        if (fmax > 1.0 - ev.eps) {
            ev.eps = 1.0 - fmax;
            ev.t_star = times[arg];
        }
        const double step = (hi - lo) / (points - 1);
        lo = std::max(0.0, times[arg] - step);
        hi = times[arg] + step;
        points = 21;
    }

    if (times_out && phonon_out) {
        const int nt = 60;
        times_out->resize(nt);
        phonon_out->resize(nt);
        for (int i = 0; i < nt; ++i)
            (*times_out)[i] = ev.t_star * static_cast<double>(i) / (nt - 1);
        const Eigen::MatrixXcd traj = evolve_state(spec, ground, *times_out);
        Eigen::VectorXcd tmp(sys.joint_dim());
        for (int i = 0; i < nt; ++i) {
            const Eigen::VectorXcd psi = traj.col(i);
            kern::csr_apply(sys.phonon_number, psi.data(), tmp.data());
            const double norm2 = psi.squaredNorm();
            (*phonon_out)[i] = norm2 > 0 ? psi.dot(tmp).real() / norm2 : 0.0;
        }
    }
    return ev;
}

double eval_effective(const JointPrepContext& ctx, double omega0, double* t_star) {
    DriveSpec drive;
    drive.rabi_omega0 = omega0;
    drive.k_z = band_edge_momentum(ctx.lattice);
    LambDickeParams ld;
    ld.r0 = ctx.motion.r0;
    ld.omega_t = ctx.motion.omega_t;
    ld.phonon_dim = ctx.phonon_dim;
    const NonHermitianOperator heff =
        adiabatic_eliminate_motion(ctx.lattice, drive, ld, ctx.resonance, ctx.options.n_max);
    const BiorthogonalSpectrum spec = dense_decompose(heff);
    Eigen::VectorXcd ground = Eigen::VectorXcd::Zero(heff.dim());
    ground[0] = 1.0;
    const double rabi = omega0 * ctx.collective_factor;
    const double t_max = 2.5 * pi / (2.0 * rabi);

    double best = 0.0, best_t = 0.0;
    double lo = 0.0, hi = t_max;
    int points = ctx.options.coarse_time_points;
    for (int level = 0; level <= ctx.options.refine_levels; ++level) {
        Eigen::VectorXd times(points);
        for (int i = 0; i < points; ++i)
            times[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        const Eigen::VectorXcd amps = transition_amplitudes(spec, ground, ctx.target10, times);
        int arg = 0;
        double fmax = -1.0;
        for (int i = 0; i < points; ++i)
            if (std::norm(amps[i]) > fmax) {
                fmax = std::norm(amps[i]);
                arg = i;
            }
        if (fmax > best) {
            best = fmax;
            best_t = times[arg];
        }
        const double step = (hi - lo) / (points - 1);
        lo = std::max(0.0, times[arg] - step);
        hi = times[arg] + step;
        points = 21;
    }
    if (t_star) *t_star = best_t;
    return 1.0 - best;
}

template <typename F>
std::pair<double, double> scan_omega(const LatticeSpec& lattice, const OmegaScan& scan, F&& eval) {
    const double base = std::pow(static_cast<double>(lattice.n_atoms), -2.5);
    const double lo = scan.lo_factor * base, hi = scan.hi_factor * base;
    double best_eps = 2.0, best_omega = lo;
    for (int i = 0; i < scan.points; ++i) {
        const double w = scan.points == 1
                             ? lo
                             : lo * std::pow(hi / lo, static_cast<double>(i) / (scan.points - 1));
        const double eps = eval(w);
        if (eps < best_eps) {
            best_eps = eps;
            best_omega = w;
        }
    }
    return {best_omega, best_eps};
}

}  // namespace

LambDickePrepResult lamb_dicke_prepare(const LatticeSpec& lattice, const MotionParams& motion,
                                       const OmegaScan& scan, int phonon_dim,
                                       ProtocolOptions options) {
    lattice.validate();
    if (lattice.n_total() > 4)
        throw std::invalid_argument("lamb_dicke_prepare: guarded to n_total <= 4");
    if (motion.n_th != 0.0)
        throw std::invalid_argument("lamb_dicke_prepare: ground-state motion only (n_th = 0)");
    MotionParams m = motion;
    m.sigma = MotionParams::sigma_from(motion.r0, 0.0);
    m.regime = MotionRegime::LambDickePerturbative;
    m.check_regime();

    const JointPrepContext ctx = make_context(lattice, m, phonon_dim, options);

    LambDickePrepResult out;
    {
        auto [w, eps] = scan_omega(lattice, scan,
                                   [&](double om) { return eval_joint(ctx, om, nullptr, nullptr).eps; });
        const JointEval ev = eval_joint(ctx, w, &out.times, &out.mean_phonon);
        out.full.error_epsilon = ev.eps;
        out.full.optimal_omega0 = w;
        out.full.t_star = ev.t_star;
        out.full.target_energy = ctx.resonance;
    }
    {
        auto [w, eps] = scan_omega(lattice, scan, [&](double om) { return eval_effective(ctx, om, nullptr); });
        double ts = 0.0;
        const double e = eval_effective(ctx, w, &ts);
        out.effective.error_epsilon = e;
        out.effective.optimal_omega0 = w;
        out.effective.t_star = ts;
        out.effective.target_energy = ctx.resonance;
    }
    return out;
}

LambDickeGateResult lamb_dicke_iswap(const LatticeSpec& lattice, const MotionParams& motion,
                                     int phonon_dim, ProtocolOptions options) {
    lattice.validate();
    if (lattice.n_arrays != 2) throw std::invalid_argument("lamb_dicke_iswap: two arrays required");
    if (lattice.n_total() > 4)
        throw std::invalid_argument("lamb_dicke_iswap: guarded to n_total <= 4");
    MotionParams m = motion;
    m.sigma = MotionParams::sigma_from(motion.r0, 0.0);
    m.regime = MotionRegime::LambDickePerturbative;
    m.check_regime();

    // gate time from the eta-renormalized couplings
    const CouplingMatrix scaled = analytic_averaged_couplings(lattice, m.r0);
    ProtocolOptions opt_eff = options;
    opt_eff.couplings = scaled;

    LambDickeGateResult out;
    out.effective = iswap_gate(lattice, opt_eff);

    // full joint gate: propagate the four computational states
    const ComputationalBasis cb = computational_basis(lattice, options.n_max);
    DriveSpec no_drive;
    no_drive.k_z = band_edge_momentum(lattice);
    LambDickeParams ld;
    ld.r0 = m.r0;
    ld.omega_t = m.omega_t;
    ld.phonon_dim = phonon_dim;
    // rotating frame at the dressed-pair carrier of the scaled couplings
    const BiorthogonalSpectrum spec1 = single_excitation_spectrum(lattice, scaled);
    const double carrier = inter_array_dark_pair(spec1, lattice).carrier;
    const LambDickeSystem sys =
        assemble_lamb_dicke_system(lattice, no_drive, ld, carrier, options.n_max);

    const double tg = out.effective.gate_time;
    const double sign = out.effective.g_qa > 0 ? 1.0 : -1.0;
    std::array<const Eigen::VectorXcd*, 4> comp{&cb.s00, &cb.s10, &cb.s01, &cb.s11};
    Eigen::Matrix4cd raw;
    Eigen::VectorXd tgv(1);
    tgv[0] = tg;
    for (int b = 0; b < 4; ++b) {
        const Eigen::VectorXcd seed = sys.lift(*comp[b]);
        KrylovOptions kopt;
        kopt.seed = seed;
        kopt.target = "near_energy";
        const KrylovSpectrum spec = krylov_decompose(sys.op, 40, kopt);
        const Eigen::VectorXcd psi = evolve_state(spec, seed, tgv).col(0);
        for (int a = 0; a < 4; ++a) raw(a, b) = sys.lift(*comp[a]).dot(psi);
    }
    const cplx mi(0.0, -sign);
    Eigen::Matrix4cd u0 = Eigen::Matrix4cd::Identity();
    const double s2 = 1.0 / std::sqrt(2.0);
    u0(1, 1) = s2;
    u0(2, 2) = s2;
    u0(1, 2) = mi * s2;
    u0(2, 1) = mi * s2;
    out.full.truth_table = u0.adjoint() * raw;
    out.full.fidelity = ((out.full.truth_table * out.full.truth_table.adjoint()).trace().real() +
                         std::norm(out.full.truth_table.trace())) /
                        20.0;
    out.full.error_total = 1.0 - out.full.fidelity;
    out.full.gate_time = tg;
    out.full.g_qa = out.effective.g_qa;
    out.full.gamma_qa = out.effective.gamma_qa;
    return out;
}

ValidityReport validity_check_lamb_dicke(const LatticeSpec& lattice, const MotionParams& motion,
                                         int phonon_dim) {
    lattice.validate();
    const double eta = motion.r0 * k_e;
    ValidityReport rep;
    const int n = lattice.n_total();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            const Vec3 r = lattice.site_position(i) - lattice.site_position(j);
            const cplx g = pair_coupling(r, lattice.polarization);
            const Eigen::Vector3cd grad = pair_coupling_grad(r, lattice.polarization);
            const Eigen::Matrix3cd hess = pair_coupling_hess(r, lattice.polarization);
            const double ag = std::abs(g);
            for (int a = 0; a < 3; ++a) {
                rep.max_grad_ratio =
                    std::max(rep.max_grad_ratio, eta * std::abs(grad[a]) / (k_e * ag));
                for (int b = 0; b < 3; ++b)
                    rep.max_hess_ratio = std::max(
                        rep.max_hess_ratio, eta * eta * std::abs(hess(a, b)) / (k_e * k_e * ag));
            }
        }
    }

    if (n <= 4 && motion.r0 > 0) {
        DriveSpec drive;
        drive.k_z = band_edge_momentum(lattice);
        LambDickeParams ld;
        ld.r0 = motion.r0;
        ld.omega_t = motion.omega_t > 0 ? motion.omega_t : 100.0;
        ld.phonon_dim = phonon_dim;
        const LambDickeSystem sys = assemble_lamb_dicke_system(lattice, drive, ld, 0.0, 2);
        if (sys.joint_dim() <= 1200) {
            const BiorthogonalSpectrum spec = dense_decompose(sys.op.to_dense());
            for (int nu = 0; nu < spec.dim(); ++nu)
                rep.max_positive_imag =
                    std::max(rep.max_positive_imag, spec.eigenvalues[nu].imag());
        } else {
            KrylovOptions kopt;
            kopt.target = "most_subradiant";
            const KrylovSpectrum spec = krylov_decompose(sys.op, 40, kopt);
            for (int j = 0; j < spec.dimension_m; ++j)
                if (spec.accepted[j])
                    rep.max_positive_imag =
                        std::max(rep.max_positive_imag, spec.ritz_values[j].imag());
        }
    }
    rep.flagged = rep.max_grad_ratio >= 0.5 || rep.max_hess_ratio >= 0.5 ||
                  rep.max_positive_imag > 1e-8;
    return rep;
}

}  // namespace atomarray
