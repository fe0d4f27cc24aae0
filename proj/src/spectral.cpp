#include "atomarray/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

extern "C" {
void zgeev_(const char* jobvl, const char* jobvr, const int* n, std::complex<double>* a,
            const int* lda, std::complex<double>* w, std::complex<double>* vl, const int* ldvl,
            std::complex<double>* vr, const int* ldvr, std::complex<double>* work,
            const int* lwork, double* rwork, int* info);
}

namespace atomarray {

namespace {

cplx bilinear(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a.array() * b.array()).sum();
}

void lapack_eig(Eigen::MatrixXcd a, bool want_left, Eigen::VectorXcd& w, Eigen::MatrixXcd& vr,
                Eigen::MatrixXcd& vl) {
    const int n = static_cast<int>(a.rows());
    w.resize(n);
    vr.resize(n, n);
    if (want_left) vl.resize(n, n);
    std::vector<double> rwork(2 * n);
    int lwork = -1, info = 0;
    cplx wkopt;
    zgeev_(want_left ? "V" : "N", "V", &n, a.data(), &n, w.data(),
           want_left ? vl.data() : nullptr, &n, vr.data(), &n, &wkopt, &lwork, rwork.data(),
           &info);
    lwork = static_cast<int>(wkopt.real());
    std::vector<cplx> work(lwork);
    zgeev_(want_left ? "V" : "N", "V", &n, a.data(), &n, w.data(),
           want_left ? vl.data() : nullptr, &n, vr.data(), &n, work.data(), &lwork, rwork.data(),
           &info);
    if (info != 0)
        throw std::runtime_error("zgeev failed to converge (info = " + std::to_string(info) +
                                 "); matrix may be ill-conditioned");
}

// sort key: (manifold, decay ascending, real part ascending)
std::vector<int> sort_order(const Eigen::VectorXcd& w, const Eigen::VectorXi& manifold) {
    std::vector<int> order(w.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (manifold[a] != manifold[b]) return manifold[a] < manifold[b];
        const double da = -2.0 * w[a].imag(), db = -2.0 * w[b].imag();
        if (da != db) return da < db;
        return w[a].real() < w[b].real();
    });
    return order;
}

Eigen::VectorXi classify_manifolds(const Eigen::MatrixXcd& right, const ExcitationBasis* basis) {
    const int n = static_cast<int>(right.cols());
    Eigen::VectorXi tags = Eigen::VectorXi::Constant(n, -1);
    if (!basis) return tags;
    const int nmax = basis->n_max();
    for (int nu = 0; nu < n; ++nu) {
        std::array<double, 4> weight{};
        for (int i = 0; i < right.rows(); ++i)
            weight[basis->excitation_count(i)] += std::norm(right(i, nu));
        int best = 0;
        for (int m = 1; m <= nmax; ++m)
            if (weight[m] > weight[best]) best = m;
        tags[nu] = best;
    }
    return tags;
}

BiorthogonalSpectrum finish_dense(Eigen::VectorXcd w, Eigen::MatrixXcd vr, Eigen::MatrixXcd vl,
                                  bool symmetric_shortcut, const ExcitationBasis* basis) {
    const int n = static_cast<int>(w.size());
    // normalize right vectors to unit norm, left to L^dag R = I
    for (int nu = 0; nu < n; ++nu) {
        vr.col(nu) /= vr.col(nu).norm();
        if (symmetric_shortcut) {
            const cplx q = bilinear(vr.col(nu), vr.col(nu));
            vl.col(nu) = vr.col(nu).conjugate() / std::conj(q);
        } else {
            const cplx d = vl.col(nu).dot(vr.col(nu));
            vl.col(nu) /= std::conj(d);
        }
    }
    BiorthogonalSpectrum spec;
    spec.manifold = classify_manifolds(vr, basis);
    const auto order = sort_order(w, spec.manifold);
    spec.eigenvalues.resize(n);
    spec.right.resize(vr.rows(), n);
    spec.left.resize(vr.rows(), n);
    Eigen::VectorXi sorted_tags(n);
    for (int k = 0; k < n; ++k) {
        spec.eigenvalues[k] = w[order[k]];
        spec.right.col(k) = vr.col(order[k]);
        spec.left.col(k) = vl.col(order[k]);
        sorted_tags[k] = spec.manifold[order[k]];
    }
    spec.manifold = sorted_tags;
    return spec;
}

}  // namespace

int BiorthogonalSpectrum::most_subradiant(int n_excitations) const {
    for (int nu = 0; nu < dim(); ++nu)
        if (manifold[nu] == n_excitations) return nu;  // sorted most subradiant first
    throw std::invalid_argument("no eigenpair tagged with excitation number " +
                                std::to_string(n_excitations));
}

double BiorthogonalSpectrum::biorthogonality_residual() const {
    const Eigen::MatrixXcd g = left.adjoint() * right;
    return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

BiorthogonalSpectrum dense_decompose(const NonHermitianOperator& op, int dense_cap) {
    if (op.dim() > dense_cap)
        throw std::invalid_argument("dense_decompose: dimension " + std::to_string(op.dim()) +
                                    " exceeds the dense cap " + std::to_string(dense_cap) +
                                    "; use krylov_decompose");
    Eigen::MatrixXcd m = op.to_dense();
    const double sym_defect = (m - m.transpose()).cwiseAbs().maxCoeff();
    Eigen::VectorXcd w;
    Eigen::MatrixXcd vr, vl;
    if (sym_defect < 1e-12) {
        lapack_eig(m, false, w, vr, vl);
        vl.resize(m.rows(), m.cols());
        return finish_dense(std::move(w), std::move(vr), std::move(vl), true, op.basis());
    }
    lapack_eig(m, true, w, vr, vl);
    return finish_dense(std::move(w), std::move(vr), std::move(vl), false, op.basis());
}

BiorthogonalSpectrum dense_decompose(const Eigen::MatrixXcd& m) {
    return dense_decompose(NonHermitianOperator(nullptr, m));
}

// ---------------------------------------------------------------------------
// Complex-symmetric Lanczos with full reorthogonalization

namespace {

struct LanczosResult {
    Eigen::MatrixXcd basis;     // dim x k, bilinearly orthonormal
    Eigen::VectorXcd alpha;     // k
    Eigen::VectorXcd beta;      // k-1 off-diagonals
    cplx beta_next = 0.0;       // residual coupling after the last step
    bool broke_down = false;
};

LanczosResult sym_lanczos(const NonHermitianOperator& op, const Eigen::VectorXcd& seed, int k_max) {
    const int dim = op.dim();
    LanczosResult r;
    r.basis.resize(dim, k_max);
    r.alpha.resize(k_max);
    r.beta.resize(std::max(0, k_max - 1));

    Eigen::VectorXcd v = seed;
    cplx q = kern::dotu(v.data(), v.data(), dim);
    if (std::abs(q) < 1e-300) throw std::runtime_error("sym_lanczos: seed is bilinearly null");
    v /= std::sqrt(q);

    Eigen::VectorXcd w(dim), coef(k_max);
    int k = 0;
    for (; k < k_max; ++k) {
        r.basis.col(k) = v;
        op.apply(v.data(), w.data());
        r.alpha[k] = kern::dotu(v.data(), w.data(), dim);
        // full reorthogonalization against all previous vectors (bilinear)
        kern::gemv_transu(r.basis.data(), dim, k + 1, w.data(), coef.data());
        kern::gemv_minus(r.basis.data(), dim, k + 1, coef.data(), w.data());
        kern::gemv_transu(r.basis.data(), dim, k + 1, w.data(), coef.data());
        kern::gemv_minus(r.basis.data(), dim, k + 1, coef.data(), w.data());
        const cplx q2 = kern::dotu(w.data(), w.data(), dim);
        const cplx beta = std::sqrt(q2);
        if (k + 1 < k_max) {
            if (std::abs(beta) < 1e-13 * std::abs(r.alpha[k]) + 1e-300) {
                r.broke_down = true;
                ++k;
                break;
            }
            r.beta[k] = beta;
            v = w / beta;
        } else {
            r.beta_next = beta;
        }
    }
    if (k < k_max) {
        r.basis.conservativeResize(dim, k);
        r.alpha.conservativeResize(k);
        r.beta.conservativeResize(std::max(0, k - 1));
        r.beta_next = 0.0;
    }
    return r;
}

Eigen::VectorXcd default_seed(int dim) {
    Eigen::VectorXcd v(dim);
    std::uint64_t s = 0x6d5c9f2be71a04d3ull;
    for (int i = 0; i < dim; ++i) {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        const double a = static_cast<double>(s >> 11) * 0x1.0p-53;
        v[i] = std::polar(1.0, 2.0 * pi * a);
    }
    return v / v.norm();
}

}  // namespace

KrylovSpectrum krylov_decompose(const NonHermitianOperator& op, int m, const KrylovOptions& opts) {
    const int dim = op.dim();
    if (m < 2) throw std::invalid_argument("krylov_decompose: subspace size m must be >= 2");
    if (m > dim) throw std::invalid_argument("krylov_decompose: m exceeds the operator dimension");
    if (op.symmetry_defect() > 1e-10)
        throw std::invalid_argument(
            "krylov_decompose: operator is not complex symmetric; use dense_decompose");

    Eigen::VectorXcd seed = opts.seed.size() == dim ? opts.seed : default_seed(dim);
    // the shift only recentres the decay-targeted region
    const cplx shift = opts.shift;

    const int hard_cap = std::min(dim, opts.max_steps > 0 ? opts.max_steps : std::max(12 * m, 360));
    int k = std::min(dim, std::max(3 * m, 90));
    if (opts.max_steps > 0) k = hard_cap;

    KrylovSpectrum out;
    out.strategy = opts.target + " (complex-symmetric Lanczos, full reorthogonalization)";

    double scale = 1.0;
    while (true) {
        LanczosResult lr = sym_lanczos(op, seed, k);
        const int kk = static_cast<int>(lr.alpha.size());
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(kk, kk);
        for (int i = 0; i < kk; ++i) {
            t(i, i) = lr.alpha[i];
            if (i + 1 < kk) {
                t(i, i + 1) = lr.beta[i];
                t(i + 1, i) = lr.beta[i];
            }
        }
        scale = std::max(1e-300, t.cwiseAbs().maxCoeff());

        Eigen::VectorXcd theta;
        Eigen::MatrixXcd s, dummy;
        lapack_eig(t, false, theta, s, dummy);

        // cheap residual estimate per Ritz pair from the Lanczos recursion
        Eigen::VectorXd est(kk);
        for (int j = 0; j < kk; ++j) {
            Eigen::VectorXcd y = s.col(j);
            const cplx q = bilinear(y, y);
            const double denom = std::sqrt(std::abs(q));
            est[j] = denom > 0 ? std::abs(lr.beta_next) * std::abs(y[kk - 1]) / (denom * scale)
                               : 1.0;
        }

        // rank by the target criterion; spurious pairs (unphysical growth or
        // unconverged) are pushed to the back
        std::vector<int> order(kk);
        std::iota(order.begin(), order.end(), 0);
        auto spurious = [&](int j) {
            return theta[j].imag() > 1e-9 * scale || est[j] > 1e-6;
        };
        auto rank_less = [&](int a, int b) {
            if (spurious(a) != spurious(b)) return !spurious(a);
            if (spurious(a)) return est[a] < est[b];
            if (opts.target == "near_energy")
                return std::abs(theta[a] - shift) < std::abs(theta[b] - shift);
            const double da = -theta[a].imag(), db = -theta[b].imag();
            if (da != db) return da < db;
            return std::abs(theta[a] - shift) < std::abs(theta[b] - shift);
        };
        std::stable_sort(order.begin(), order.end(), rank_less);

        const int take = std::min(m, kk);
        out.dimension_m = take;
        out.ritz_values.resize(take);
        out.ritz_right.resize(dim, take);
        out.ritz_left.resize(dim, take);
        out.residual_estimates.resize(take);
        out.accepted.assign(take, false);
        out.lanczos_steps = kk;

        Eigen::VectorXcd hx(dim);
        double worst = 0.0;
        for (int j = 0; j < take; ++j) {
            const int idx = order[j];
            Eigen::VectorXcd y = s.col(idx);
            y /= std::sqrt(bilinear(y, y));
            Eigen::VectorXcd rv = lr.basis * y;
            rv /= rv.norm();
            out.ritz_values[j] = theta[idx];
            out.ritz_right.col(j) = rv;
            const cplx qq = bilinear(rv, rv);
            out.ritz_left.col(j) = rv.conjugate() / std::conj(qq);
            op.apply(rv.data(), hx.data());
            const double res = (hx - theta[idx] * rv).norm() / scale;
            out.residual_estimates[j] = res;
            out.accepted[j] = res < opts.accept_tol;
            worst = std::max(worst, res);
        }
        if (worst < opts.accept_tol || kk >= hard_cap || lr.broke_down || kk == dim) {
            // accepted flags stay at the strict tolerance; unconverged pairs
            // still carry variational information for scan ranking, so the
            // hard failure is reserved for a genuinely useless subspace
            if (out.residual_estimates.minCoeff() > 1e-1 && kk >= hard_cap) {
                std::ostringstream os;
                os << "krylov_decompose: no Ritz pair converged after " << kk
                   << " steps; best residual " << out.residual_estimates.minCoeff();
                throw std::runtime_error(os.str());
            }
            break;
        }
        k = std::min(hard_cap, 2 * k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectral synthesis

namespace {

template <typename EV>
Eigen::VectorXcd phases_at(const EV& e, double t) {
    Eigen::VectorXcd ph(e.size());
    for (int nu = 0; nu < e.size(); ++nu) ph[nu] = std::exp(cplx(0.0, -1.0) * e[nu] * t);
    return ph;
}

}  // namespace

cplx transition_amplitude(const BiorthogonalSpectrum& spec, const Eigen::VectorXcd& initial,
                          const Eigen::VectorXcd& target, double t) {
    // weights: <target|nu> <nubar|initial>
    Eigen::VectorXcd w = (target.adjoint() * spec.right).transpose();
    w = w.cwiseProduct(spec.left.adjoint() * initial);
    return bilinear(w, phases_at(spec.eigenvalues, t));
}

Eigen::VectorXcd transition_amplitudes(const BiorthogonalSpectrum& spec,
                                       const Eigen::VectorXcd& initial,
                                       const Eigen::VectorXcd& target,
                                       const Eigen::VectorXd& times) {
    Eigen::VectorXcd w = (target.adjoint() * spec.right).transpose();
    w = w.cwiseProduct(spec.left.adjoint() * initial);
    Eigen::VectorXcd out(times.size());
    for (int i = 0; i < times.size(); ++i)
        out[i] = bilinear(w, phases_at(spec.eigenvalues, times[i]));
    return out;
}

cplx transition_amplitude(const KrylovSpectrum& spec, const Eigen::VectorXcd& initial,
                          const Eigen::VectorXcd& target, double t) {
    Eigen::VectorXcd w = (target.adjoint() * spec.ritz_right).transpose();
    w = w.cwiseProduct(spec.ritz_left.adjoint() * initial);
    return bilinear(w, phases_at(spec.ritz_values, t));
}

Eigen::VectorXcd transition_amplitudes(const KrylovSpectrum& spec, const Eigen::VectorXcd& initial,
                                       const Eigen::VectorXcd& target,
                                       const Eigen::VectorXd& times) {
    Eigen::VectorXcd w = (target.adjoint() * spec.ritz_right).transpose();
    w = w.cwiseProduct(spec.ritz_left.adjoint() * initial);
    Eigen::VectorXcd out(times.size());
    for (int i = 0; i < times.size(); ++i)
        out[i] = bilinear(w, phases_at(spec.ritz_values, times[i]));
    return out;
}

Eigen::MatrixXcd evolve_state(const BiorthogonalSpectrum& spec, const Eigen::VectorXcd& initial,
                              const Eigen::VectorXd& times) {
    const Eigen::VectorXcd c = spec.left.adjoint() * initial;  // <nubar|psi0>
    Eigen::MatrixXcd out(spec.right.rows(), times.size());
    for (int i = 0; i < times.size(); ++i)
        out.col(i) = spec.right * c.cwiseProduct(phases_at(spec.eigenvalues, times[i]));
    return out;
}

Eigen::MatrixXcd evolve_state(const KrylovSpectrum& spec, const Eigen::VectorXcd& initial,
                              const Eigen::VectorXd& times) {
    const Eigen::VectorXcd c = spec.ritz_left.adjoint() * initial;
    Eigen::MatrixXcd out(spec.ritz_right.rows(), times.size());
    for (int i = 0; i < times.size(); ++i)
        out.col(i) = spec.ritz_right * c.cwiseProduct(phases_at(spec.ritz_values, times[i]));
    return out;
}

}  // namespace atomarray
