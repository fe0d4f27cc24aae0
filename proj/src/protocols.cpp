#include "atomarray/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "atomarray/couplings.hpp"
#include "atomarray/kspace.hpp"

namespace atomarray {

namespace {

int worker_count() {
    if (const char* env = std::getenv("ATOMARRAY_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// evaluate f(i) for i in [0, n) on a small pool; results indexed, deterministic
template <typename F>
void parallel_for(int n, F&& f) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            int i;
            while ((i = next.fetch_add(1)) < n) f(i);
        });
    for (auto& t : pool) t.join();
}

struct TrajectoryEval {
    double max_fidelity = 0.0;
    double t_star = 0.0;
};

// max_t |amp(t)|^2 on [0, t_max]: uniform coarse grid plus refinement passes
template <typename Spec>
TrajectoryEval max_fidelity_over_time(const Spec& spec, const Eigen::VectorXcd& initial,
                                      const Eigen::VectorXcd& target, double t_max,
                                      int coarse_points, int refine_levels) {
    double lo = 0.0, hi = t_max;
    int points = coarse_points;
    TrajectoryEval best;
    for (int level = 0; level <= refine_levels; ++level) {
        Eigen::VectorXd times(points);
        for (int i = 0; i < points; ++i)
            times[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        const Eigen::VectorXcd amps = transition_amplitudes(spec, initial, target, times);
        int arg = 0;
        double fmax = -1.0;
        for (int i = 0; i < points; ++i) {
            const double f = std::norm(amps[i]);
            if (f > fmax) {
                fmax = f;
                arg = i;
            }
        }
        if (fmax > best.max_fidelity) {
            best.max_fidelity = fmax;
            best.t_star = times[arg];
        }
        const double step = (hi - lo) / (points - 1);
        lo = std::max(0.0, times[arg] - step);
        hi = times[arg] + step;
        points = 21;
    }
    return best;
}

Eigen::VectorXcd unit(Eigen::VectorXcd v) { return v / v.norm(); }

cplx bilinear(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a.array() * b.array()).sum();
}

}  // namespace

BiorthogonalSpectrum single_excitation_spectrum(const LatticeSpec& lattice,
                                                const CouplingMatrix& couplings) {
    auto basis = std::make_shared<ExcitationBasis>(lattice.n_total(), 1);
    return dense_decompose(assemble_hamiltonian(couplings, basis, lattice));
}

DarkMode dark_mode_target(const BiorthogonalSpectrum& spec, const LatticeSpec& lattice) {
    const int nu = spec.most_subradiant(1);
    const int n = lattice.n_total();
    DarkMode dm;
    dm.energy = spec.eigenvalues[nu];
    dm.site_amplitudes.resize(n);
    for (int i = 0; i < n; ++i) dm.site_amplitudes[i] = spec.right(1 + i, nu);  // singles offset 1
    dm.site_amplitudes.normalize();

    const double qa = band_edge_momentum(lattice);
    dm.ansatz.resize(n);
    for (int i = 0; i < n; ++i) {
        // ansatz lives on one array; zero on array B when present
        dm.ansatz[i] = lattice.site_in_array_b(i) && lattice.n_arrays == 2
                           ? 0.0
                           : std::sin(qa * lattice.site_z(i));
    }
    dm.ansatz *= std::sqrt(2.0 / (lattice.n_atoms + 1));
    const cplx overlap = dm.ansatz.dot(dm.site_amplitudes);
    dm.ansatz_overlap_error = 1.0 - std::norm(overlap) / dm.ansatz.squaredNorm();
    return dm;
}

namespace {

// shared machinery of prepare_dark_state / selective_prepare
struct PrepContext {
    LatticeSpec lattice;
    ProtocolOptions options;
    CouplingMatrix couplings;
    std::shared_ptr<const ExcitationBasis> basis;
    Eigen::VectorXcd target;       // embedded in the full basis, unit norm
    Eigen::VectorXcd leak_target;  // optional second projector (|01>_L)
    double resonance = 0.0;        // omega of the addressed dark state
    double target_decay = 0.0;
    double collective_factor = 1.0;  // sqrt((N+1)/2) Rabi enhancement
};

struct PrepPoint {
    double eps = 1.0;
    double t_star = 0.0;
    double fidelity = 0.0;
};

PrepPoint evaluate_omega(const PrepContext& ctx, double omega0, Populations* pops,
                         double* leak) {
    DriveSpec drive;
    drive.rabi_omega0 = omega0;
    drive.k_z = band_edge_momentum(ctx.lattice);
    drive.detuning_d = ctx.options.detuning_d;

    const double shift = ctx.resonance + ctx.options.detuning_d;
    const NonHermitianOperator driven =
        assemble_driven_system(ctx.couplings, ctx.basis, ctx.lattice, drive, DrivenArrays::Both,
                               shift, ctx.options.dense_threshold);

    const int dim = ctx.basis->dimension();
    Eigen::VectorXcd ground = Eigen::VectorXcd::Zero(dim);
    ground[0] = 1.0;

    const double rabi = omega0 * ctx.collective_factor;
    const double t_max = 2.5 * pi / (2.0 * rabi);

    PrepPoint out;
    auto finish = [&](const auto& spec) {
        const TrajectoryEval ev =
            max_fidelity_over_time(spec, ground, ctx.target, t_max,
                                   ctx.options.coarse_time_points, ctx.options.refine_levels);
        out.fidelity = ev.max_fidelity;
        out.eps = 1.0 - ev.max_fidelity;
        out.t_star = ev.t_star;
        if (pops) {
            Eigen::VectorXd tt(1);
            tt[0] = ev.t_star;
            const Eigen::VectorXcd psi = evolve_state(spec, ground, tt).col(0);
            Populations p;
            p.norm = psi.squaredNorm();
            p.ground = std::norm(psi[0]);
            p.target = std::norm(ctx.target.dot(psi));
            for (int i = 0; i < dim; ++i) {
                const int ne = ctx.basis->excitation_count(i);
                if (ne == 1) p.singles_other += std::norm(psi[i]);
                if (ne == 2) p.two_excitation += std::norm(psi[i]);
                if (ne == 3) p.three_excitation += std::norm(psi[i]);
            }
            p.singles_other = std::max(0.0, p.singles_other - p.target);
            *pops = p;
            if (leak && ctx.leak_target.size() == dim)
                *leak = std::norm(ctx.leak_target.dot(psi));
        }
    };

    if (driven.is_dense()) {
        finish(dense_decompose(driven, ctx.options.dense_cap));
    } else {
        KrylovOptions kopt;
        kopt.seed = ground;
        kopt.shift = 0.0;
        finish(krylov_decompose(driven, ctx.options.krylov_m, kopt));
    }
    return out;
}

DarkStatePrepResult run_prep(const PrepContext& ctx, const OmegaScan& scan) {
    if (scan.points < 1) throw std::invalid_argument("prepare_dark_state: empty Rabi scan");
    const int n = ctx.lattice.n_atoms;
    const double base = std::pow(static_cast<double>(n), -2.5);
    const double lo = scan.lo_factor * base, hi = scan.hi_factor * base;

    std::vector<double> omegas(scan.points);
    for (int i = 0; i < scan.points; ++i)
        omegas[i] = scan.points == 1
                        ? lo
                        : lo * std::pow(hi / lo, static_cast<double>(i) / (scan.points - 1));

    std::vector<PrepPoint> pts(scan.points);
    parallel_for(scan.points, [&](int i) { pts[i] = evaluate_omega(ctx, omegas[i], nullptr, nullptr); });

    int best = 0;
    for (int i = 1; i < scan.points; ++i)
        if (pts[i].eps < pts[best].eps) best = i;

    double omega_best = omegas[best];
    PrepPoint pt_best = pts[best];
    int evals = scan.points;

    if (scan.refine && scan.points >= 3) {
        // golden-section on log(omega) between the grid neighbours
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = std::log(omegas[std::max(0, best - 1)]);
        double b = std::log(omegas[std::min(scan.points - 1, best + 1)]);
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        PrepPoint f1 = evaluate_omega(ctx, std::exp(x1), nullptr, nullptr);
        PrepPoint f2 = evaluate_omega(ctx, std::exp(x2), nullptr, nullptr);
        evals += 2;
        for (int it = 0; it < 12 && (b - a) > 1e-3; ++it) {
            if (f1.eps < f2.eps) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = evaluate_omega(ctx, std::exp(x1), nullptr, nullptr);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = evaluate_omega(ctx, std::exp(x2), nullptr, nullptr);
            }
            ++evals;
        }
        const PrepPoint& fb = f1.eps < f2.eps ? f1 : f2;
        const double xb = f1.eps < f2.eps ? x1 : x2;
        if (fb.eps < pt_best.eps) {
            pt_best = fb;
            omega_best = std::exp(xb);
        }
    }

    DarkStatePrepResult res;
    Populations pops;
    double leak = 0.0;
    evaluate_omega(ctx, omega_best, &pops, &leak);
    ++evals;
    res.error_epsilon = pt_best.eps;
    res.optimal_omega0 = omega_best;
    res.t_star = pt_best.t_star;
    res.populations = pops;
    res.leak_01 = leak;
    res.target_energy = ctx.resonance;
    res.target_decay = ctx.target_decay;
    res.n_evaluations = evals;
    return res;
}

}  // namespace

DarkStatePrepResult prepare_dark_state(const LatticeSpec& lattice, const OmegaScan& scan,
                                       const ProtocolOptions& options) {
    lattice.validate();
    PrepContext ctx;
    ctx.lattice = lattice;
    ctx.options = options;
    ctx.couplings = options.couplings ? *options.couplings : pinned_couplings(lattice);

    const BiorthogonalSpectrum spec1 = single_excitation_spectrum(lattice, ctx.couplings);
    const DarkMode dm = dark_mode_target(spec1, lattice);
    ctx.resonance = dm.energy.real();
    ctx.target_decay = -2.0 * dm.energy.imag();

    ctx.basis = std::make_shared<ExcitationBasis>(lattice.n_total(), options.n_max);
    Eigen::VectorXcd target = Eigen::VectorXcd::Zero(ctx.basis->dimension());
    for (int i = 0; i < lattice.n_total(); ++i)
        target[ctx.basis->index_of_single(i)] = dm.site_amplitudes[i];
    ctx.target = unit(target);
    ctx.collective_factor = std::sqrt((lattice.n_atoms + 1) / 2.0);
    return run_prep(ctx, scan);
}

DarkStatePrepResult selective_prepare(const LatticeSpec& lattice, const OmegaScan& scan,
                                      const ProtocolOptions& options) {
    lattice.validate();
    if (lattice.n_arrays != 2)
        throw std::invalid_argument("selective_prepare: two arrays required");

    PrepContext ctx;
    ctx.lattice = lattice;
    ctx.options = options;
    ctx.couplings = options.couplings ? *options.couplings : pinned_couplings(lattice);

    // target: dark mode of the isolated array A, array B in the ground state
    LatticeSpec isolated = lattice;
    isolated.n_arrays = 1;
    isolated.separation = 0.0;
    isolated.detuning_b = 0.0;
    const BiorthogonalSpectrum spec_a =
        single_excitation_spectrum(isolated, pinned_couplings(isolated));
    const DarkMode dm = dark_mode_target(spec_a, isolated);
    ctx.resonance = dm.energy.real();
    ctx.target_decay = -2.0 * dm.energy.imag();

    ctx.basis = std::make_shared<ExcitationBasis>(lattice.n_total(), options.n_max);
    Eigen::VectorXcd t10 = Eigen::VectorXcd::Zero(ctx.basis->dimension());
    Eigen::VectorXcd t01 = Eigen::VectorXcd::Zero(ctx.basis->dimension());
    for (int j = 0; j < lattice.n_atoms; ++j) {
        t10[ctx.basis->index_of_single(j)] = dm.site_amplitudes[j];
        t01[ctx.basis->index_of_single(lattice.n_atoms + j)] = dm.site_amplitudes[j];
    }
    ctx.target = unit(t10);
    ctx.leak_target = unit(t01);
    ctx.collective_factor = std::sqrt((lattice.n_atoms + 1) / 2.0);

    DarkStatePrepResult res = run_prep(ctx, scan);
    if (lattice.detuning_b == 0.0)
        res.warnings.push_back(
            "delta = 0: arrays are indistinguishable under the symmetric drive");
    return res;
}

// Symmetric/antisymmetric dark pair of the coupled two-array system.  The
// partner of the most subradiant state is found by matching the intra-array
// mode profile (the second-most-subradiant state can belong to a different
// quasi-momentum when the inter-array splitting exceeds the mode spacing).
DarkPair inter_array_dark_pair(const BiorthogonalSpectrum& spec, const LatticeSpec& lattice) {
    const int n = lattice.n_atoms;
    const int first = spec.most_subradiant(1);

    // intra-array profile of the first state (dominant array block)
    Eigen::VectorXcd prof_a = spec.right.col(first).segment(1, n);
    Eigen::VectorXcd prof_b = spec.right.col(first).segment(1 + n, n);
    Eigen::VectorXcd c = prof_a.norm() > prof_b.norm() ? prof_a : prof_b;
    c /= c.norm();

    auto profile_score = [&](int nu) {
        const Eigen::VectorXcd va = spec.right.col(nu).segment(1, n);
        const Eigen::VectorXcd vb = spec.right.col(nu).segment(1 + n, n);
        return std::norm(c.dot(va)) + std::norm(c.dot(vb));
    };

    int partner = -1;
    double best = -1.0;
    for (int nu = 0; nu < spec.dim(); ++nu) {
        if (nu == first || spec.manifold[nu] != 1) continue;
        const double s = profile_score(nu);
        if (s > best) {
            best = s;
            partner = nu;
        }
    }
    if (partner < 0) throw std::runtime_error("inter_array_dark_pair: missing partner state");

    auto parity = [&](int nu) {
        cplx s = 0.0;
        for (int j = 0; j < n; ++j) {
            s += std::conj(spec.right(1 + j, nu)) * spec.right(1 + n + j, nu);
            s += std::conj(spec.right(1 + n + j, nu)) * spec.right(1 + j, nu);
        }
        return s.real();
    };
    const int sym = parity(first) > 0 ? first : partner;
    const int asym = sym == first ? partner : first;
    const cplx split = 0.5 * (spec.eigenvalues[sym] - spec.eigenvalues[asym]);

    DarkPair out;
    out.index_sym = sym;
    out.index_asym = asym;
    out.g = split.real();
    out.gamma = -2.0 * split.imag();
    out.carrier = 0.5 * (spec.eigenvalues[sym] + spec.eigenvalues[asym]).real();
    return out;
}

ComputationalBasis computational_basis(const LatticeSpec& lattice, int n_max) {
    if (lattice.n_arrays != 2)
        throw std::invalid_argument("computational_basis: two arrays required");
    if (n_max < 2) throw std::invalid_argument("computational_basis: n_max >= 2 required");

    LatticeSpec isolated = lattice;
    isolated.n_arrays = 1;
    isolated.separation = 0.0;
    isolated.detuning_b = 0.0;
    const DarkMode dm = dark_mode_target(
        single_excitation_spectrum(isolated, pinned_couplings(isolated)), isolated);

    ComputationalBasis cb;
    cb.basis = std::make_shared<ExcitationBasis>(lattice.n_total(), n_max);
    cb.dark_single = dm.site_amplitudes;
    const int dim = cb.basis->dimension();
    const int n = lattice.n_atoms;
    cb.s00 = Eigen::VectorXcd::Zero(dim);
    cb.s00[0] = 1.0;
    cb.s10 = Eigen::VectorXcd::Zero(dim);
    cb.s01 = Eigen::VectorXcd::Zero(dim);
    cb.s11 = Eigen::VectorXcd::Zero(dim);
    for (int j = 0; j < n; ++j) {
        cb.s10[cb.basis->index_of_single(j)] = dm.site_amplitudes[j];
        cb.s01[cb.basis->index_of_single(n + j)] = dm.site_amplitudes[j];
        for (int k = 0; k < n; ++k)
            cb.s11[cb.basis->index_of_pair(j, n + k)] =
                dm.site_amplitudes[j] * dm.site_amplitudes[k];
    }
    cb.s10 = unit(cb.s10);
    cb.s01 = unit(cb.s01);
    cb.s11 = unit(cb.s11);
    return cb;
}

GateReport iswap_gate(const LatticeSpec& lattice, const ProtocolOptions& options) {
    lattice.validate();
    if (lattice.n_arrays != 2) throw std::invalid_argument("iswap_gate: two arrays required");
    if (lattice.detuning_b != 0.0)
        throw std::invalid_argument("iswap_gate: no detuning during the gate");

    const CouplingMatrix cm = options.couplings ? *options.couplings : pinned_couplings(lattice);

    // inter-array coupling at q_a from the coupled single-excitation spectrum:
    // symmetric/antisymmetric dark pair splits by 2 (g - i gamma/2)
    const BiorthogonalSpectrum spec1 = single_excitation_spectrum(lattice, cm);
    const int n = lattice.n_atoms;
    double g_qa = 0.0, gamma_qa = 0.0, carrier = 0.0;
    {
        const DarkPair pair = inter_array_dark_pair(spec1, lattice);
        g_qa = pair.g;
        gamma_qa = pair.gamma;
        carrier = pair.carrier;
        (void)n;
    }
    if (options.use_analytic_gk) {
        const KCoupling kc = analytic_gk(band_edge_momentum(lattice), lattice.separation,
                                         lattice.spacing, lattice.polarization);
        g_qa = kc.g;
        gamma_qa = kc.gamma;
    }
    if (std::abs(g_qa) < 1e-12)
        throw std::domain_error("iswap_gate: arrays effectively decoupled (g_qa < 1e-12)");

    const double tg = pi / (4.0 * std::abs(g_qa));
    const double phase_sign = g_qa > 0 ? 1.0 : -1.0;

    const ComputationalBasis cb = computational_basis(lattice, options.n_max);
    const NonHermitianOperator h0 =
        assemble_hamiltonian(cm, cb.basis, lattice, carrier, options.dense_cap);
    const BiorthogonalSpectrum spec = dense_decompose(h0, options.dense_cap);

    std::array<const Eigen::VectorXcd*, 4> comp{&cb.s00, &cb.s10, &cb.s01, &cb.s11};
    Eigen::Matrix4cd raw;
    Eigen::VectorXd tgv(1);
    tgv[0] = tg;
    for (int b = 0; b < 4; ++b) {
        const Eigen::VectorXcd psi = evolve_state(spec, *comp[b], tgv).col(0);
        for (int a = 0; a < 4; ++a) raw(a, b) = comp[a]->dot(psi);
    }

    // ideal gate on {00, 10, 01, 11}; the exchange phase follows sign(g)
    const cplx mi(0.0, -phase_sign);
    Eigen::Matrix4cd u0 = Eigen::Matrix4cd::Identity();
    const double s2 = 1.0 / std::sqrt(2.0);
    u0(1, 1) = s2;
    u0(2, 2) = s2;
    u0(1, 2) = mi * s2;
    u0(2, 1) = mi * s2;

    GateReport rep;
    rep.truth_table = u0.adjoint() * raw;
    rep.fidelity =
        ((rep.truth_table * rep.truth_table.adjoint()).trace().real() +
         std::norm(rep.truth_table.trace())) /
        20.0;
    rep.error_total = 1.0 - rep.fidelity;
    rep.gate_time = tg;
    rep.g_qa = g_qa;
    rep.gamma_qa = gamma_qa;
    return rep;
}

EffectiveModel build_three_level_model(const LatticeSpec& lattice, double omega0,
                                       const ProtocolOptions& options) {
    lattice.validate();
    if (lattice.n_arrays != 1)
        throw std::invalid_argument("build_three_level_model: single array required");

    auto basis = std::make_shared<ExcitationBasis>(lattice.n_total(), 3);
    const CouplingMatrix cm = options.couplings ? *options.couplings : pinned_couplings(lattice);
    const NonHermitianOperator h0 = assemble_hamiltonian(cm, basis, lattice, 0.0, options.dense_cap);
    const BiorthogonalSpectrum spec = dense_decompose(h0, options.dense_cap);

    DriveSpec drive;
    drive.rabi_omega0 = omega0;
    drive.k_z = band_edge_momentum(lattice);
    const Eigen::MatrixXcd v = assemble_drive(drive, basis, lattice).to_dense();

    const int i1 = spec.most_subradiant(1);
    const int i2 = spec.most_subradiant(2);
    const double omega_d = spec.eigenvalues[i1].real();  // drive resonant with |1>

    // rotating-frame energies E_{n,mu} - n*omega_d
    auto erot = [&](int nu) {
        return spec.eigenvalues[nu] - cplx(spec.manifold[nu] * omega_d, 0.0);
    };
    const cplx e1 = erot(i1);
    const cplx e2 = erot(i2);
    const cplx ebar = (cplx(0.0) + e1 + e2) / 3.0;

    auto vmat = [&](int bra, int ket) -> cplx {
        return spec.left.col(bra).dot(v * spec.right.col(ket));
    };

    // second-order corrections from states outside {|0>, |1>, |2>}
    cplx corr1 = 0.0, corr2 = 0.0;
    for (int nu = 0; nu < spec.dim(); ++nu) {
        if (nu == i1 || nu == i2 || spec.manifold[nu] == 0) continue;
        const cplx den = erot(nu) - ebar;
        if (spec.manifold[nu] == 2) corr1 += vmat(i1, nu) * vmat(nu, i1) / den;
        if (spec.manifold[nu] == 1) corr2 += vmat(i2, nu) * vmat(nu, i2) / den;
        if (spec.manifold[nu] == 3) corr2 += vmat(i2, nu) * vmat(nu, i2) / den;
    }

    EffectiveModel model;
    model.kind = "three_level_single_array";
    model.labels = {"0", "1", "2"};
    model.delta1_corr = e1 - corr1;
    model.delta2_corr = e2 - corr2;
    model.matrix = Eigen::MatrixXcd::Zero(3, 3);
    model.matrix(0, 1) = vmat(0, i1);
    model.matrix(1, 0) = vmat(i1, 0);
    model.matrix(1, 1) = model.delta1_corr;
    model.matrix(1, 2) = vmat(i1, i2);
    model.matrix(2, 1) = vmat(i2, i1);
    model.matrix(2, 2) = model.delta2_corr;
    return model;
}

double effective_model_error(const EffectiveModel& model, double t_max, int time_points) {
    const BiorthogonalSpectrum spec = dense_decompose(model.matrix);
    Eigen::VectorXcd ground = Eigen::VectorXcd::Zero(model.matrix.rows());
    ground[0] = 1.0;
    Eigen::VectorXcd target = Eigen::VectorXcd::Zero(model.matrix.rows());
    target[1] = 1.0;
    const TrajectoryEval ev = max_fidelity_over_time(spec, ground, target, t_max, time_points, 3);
    return 1.0 - ev.max_fidelity;
}

LanczosChain build_lanczos_chain(const LatticeSpec& lattice, int chain_length,
                                 const ProtocolOptions& options) {
    lattice.validate();
    if (lattice.n_arrays != 2)
        throw std::invalid_argument("build_lanczos_chain: two arrays required");
    if (chain_length < 2) throw std::invalid_argument("build_lanczos_chain: chain length >= 2");

    const ComputationalBasis cb = computational_basis(lattice, 2);
    const CouplingMatrix cm = options.couplings ? *options.couplings : pinned_couplings(lattice);
    const Eigen::MatrixXcd h = assemble_hamiltonian(cm, cb.basis, lattice, 0.0, 4096).to_dense();

    // two-excitation block
    const int n_tot = lattice.n_total();
    const int pair_off = 1 + n_tot;
    const int n_pairs = cb.basis->dimension() - pair_off;
    const Eigen::MatrixXcd block = h.block(pair_off, pair_off, n_pairs, n_pairs);
    Eigen::VectorXcd phi0 = cb.s11.segment(pair_off, n_pairs);

    LanczosChain chain;
    chain.site_states.resize(n_pairs, chain_length);
    chain.energies.resize(chain_length);
    chain.hoppings.resize(chain_length - 1);

    Eigen::VectorXcd v = phi0;
    v /= std::sqrt(bilinear(v, v));
    int built = 0;
    for (int j = 0; j < chain_length; ++j) {
        chain.site_states.col(j) = v;
        ++built;
        Eigen::VectorXcd w = block * v;
        chain.energies[j] = bilinear(v, w);
        // full reorthogonalization in the bilinear form
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= j; ++i) {
                const cplx c = bilinear(chain.site_states.col(i), w);
                w -= c * chain.site_states.col(i);
            }
        if (j + 1 == chain_length) break;
        const cplx beta = std::sqrt(bilinear(w, w));
        if (std::abs(beta) < 1e-12) {
            chain.breakdown = true;
            break;
        }
        chain.hoppings[j] = beta;
        v = w / beta;
    }
    if (built < chain_length) {
        chain.site_states.conservativeResize(n_pairs, built);
        chain.energies.conservativeResize(built);
        chain.hoppings.conservativeResize(std::max(0, built - 1));
    }
    return chain;
}

}  // namespace atomarray
