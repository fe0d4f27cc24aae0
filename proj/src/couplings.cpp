#include "atomarray/couplings.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace atomarray {

namespace {

constexpr double k_e = 2.0 * pi;

// G^0_{ab}(r) = e^{ikr}/(4 pi k^2 r^3) [ (k^2 r^2 + i k r - 1) d_ab
//                                      - (k^2 r^2 + 3 i k r - 3) r_a r_b / r^2 ]
// split as A(r) + B(r) * r_a r_b / r^2.
struct GreenRadial {
    cplx a, b;        // A(r), B(r)
    cplx da, db;      // dA/dr, dB/dr
    cplx d2a, d2b;    // second derivatives
};

GreenRadial green_radial(double r, bool derivs) {
    const double kr = k_e * r;
    const cplx eikr = std::polar(1.0, kr);
    const cplx pref = eikr / (4.0 * pi * k_e * k_e);
    const cplx i1(0.0, 1.0);

    // A = pref * (k^2/r + i k/r^2 - 1/r^3), B = -pref * (k^2/r + 3 i k/r^2 - 3/r^3)
    GreenRadial g;
    const double r2 = r * r, r3 = r2 * r, r4 = r3 * r, r5 = r4 * r;
    const double k2 = k_e * k_e;

    const cplx pa = k2 / r + i1 * k_e / r2 - 1.0 / r3;
    const cplx pb = -(k2 / r + 3.0 * i1 * k_e / r2 - 3.0 / r3);
    g.a = pref * pa;
    g.b = pref * pb;
    if (!derivs) return g;

    // d/dr (e^{ikr} p(r)) = e^{ikr} (ik p + p')
    const cplx pa1 = -k2 / r2 - 2.0 * i1 * k_e / r3 + 3.0 / r4;
    const cplx pb1 = -(-k2 / r2 - 6.0 * i1 * k_e / r3 + 9.0 / r4);
    const cplx pa2 = 2.0 * k2 / r3 + 6.0 * i1 * k_e / r4 - 12.0 / r5;
    const cplx pb2 = -(2.0 * k2 / r3 + 18.0 * i1 * k_e / r4 - 36.0 / r5);

    g.da = pref * (i1 * k_e * pa + pa1);
    g.db = pref * (i1 * k_e * pb + pb1);
    g.d2a = pref * (-k2 * pa + 2.0 * i1 * k_e * pa1 + pa2);
    g.d2b = pref * (-k2 * pb + 2.0 * i1 * k_e * pb1 + pb2);
    return g;
}

void check_nonzero(const Vec3& r) {
    if (r.squaredNorm() == 0.0)
        throw std::domain_error("green_tensor: zero displacement (self-term handled separately)");
}

constexpr double coupling_prefactor = -3.0 * pi / k_e;  // J - i Gamma/2 = pref * d.G.d

// splitmix64; the basis of all Monte-Carlo substreams.
std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace

cplx green_tensor(const Vec3& r, int alpha, int beta) {
    check_nonzero(r);
    const double rn = r.norm();
    const GreenRadial g = green_radial(rn, false);
    const double u = r[alpha] * r[beta] / (rn * rn);
    return (alpha == beta ? g.a : cplx(0.0)) + g.b * u;
}

cplx green_projected(const Vec3& r, Polarization pol) {
    const int p = static_cast<int>(pol);
    return green_tensor(r, p, p);
}

cplx pair_coupling(const Vec3& r, Polarization pol) {
    return coupling_prefactor * green_projected(r, pol);
}

Eigen::Vector3cd pair_coupling_grad(const Vec3& r, Polarization pol) {
    check_nonzero(r);
    const int p = static_cast<int>(pol);
    const double rn = r.norm();
    const GreenRadial g = green_radial(rn, true);
    const Vec3 n = r / rn;
    const double q = n[p] * n[p];

    Eigen::Vector3cd grad;
    for (int a = 0; a < 3; ++a) {
        // d q / d r_a = (2 r_p delta_pa - 2 q r_a) / r^2
        const double dq = (2.0 * r[p] * (a == p ? 1.0 : 0.0) - 2.0 * q * r[a]) / (rn * rn);
        grad[a] = (g.da + g.db * q) * n[a] + g.b * dq;
    }
    return coupling_prefactor * grad;
}

Eigen::Matrix3cd pair_coupling_hess(const Vec3& r, Polarization pol) {
    check_nonzero(r);
    const int p = static_cast<int>(pol);
    const double rn = r.norm();
    const double rn2 = rn * rn;
    const GreenRadial g = green_radial(rn, true);
    const Vec3 n = r / rn;
    const double q = n[p] * n[p];

    std::array<double, 3> dq{};
    for (int a = 0; a < 3; ++a)
        dq[a] = (2.0 * r[p] * (a == p ? 1.0 : 0.0) - 2.0 * q * r[a]) / rn2;

    Eigen::Matrix3cd hess;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b <= a; ++b) {
            const double dab = (a == b) ? 1.0 : 0.0;
            const double dpa = (a == p) ? 1.0 : 0.0;
            const double dpb = (b == p) ? 1.0 : 0.0;
            // d^2 q / dr_a dr_b
            const double d2q = (2.0 * dpa * dpb - 2.0 * dq[b] * r[a] - 2.0 * q * dab) / rn2 -
                               2.0 * r[b] * dq[a] / rn2;
            const cplx f1 = g.da + g.db * q;  // coefficient of n_a in the gradient
            cplx h = (g.d2a + g.d2b * q) * n[a] * n[b] + f1 * (dab - n[a] * n[b]) / rn +
                     g.db * (n[a] * dq[b] + n[b] * dq[a]) + g.b * d2q;
            hess(a, b) = h;
            hess(b, a) = h;
        }
    }
    return coupling_prefactor * hess;
}

CouplingMatrix pinned_couplings(const LatticeSpec& lattice) {
    lattice.validate();
    const int n = lattice.n_total();
    CouplingMatrix cm;
    cm.c = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        cm.c(i, i) = cplx(0.0, -0.5);  // (J, Gamma) = (0, Gamma0)
        for (int j = 0; j < i; ++j) {
            const cplx v = pair_coupling(lattice.site_position(i) - lattice.site_position(j),
                                         lattice.polarization);
            cm.c(i, j) = v;
            cm.c(j, i) = v;
        }
    }
    return cm;
}

CouplingMatrix sampled_couplings(const LatticeSpec& lattice,
                                 const std::vector<Vec3>& displacements,
                                 const Vec3& raman_direction) {
    lattice.validate();
    const int n = lattice.n_total();
    if (static_cast<int>(displacements.size()) != n)
        throw std::invalid_argument("sampled_couplings: one displacement per atom required");
    const Vec3 kl = k_e * raman_direction.normalized();

    CouplingMatrix cm;
    cm.c = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        cm.c(i, i) = cplx(0.0, -0.5);
        for (int j = 0; j < i; ++j) {
            const Vec3 d = lattice.site_position(i) + displacements[i] -
                           lattice.site_position(j) - displacements[j];
            if (d.norm() < 1e-12)
                throw std::domain_error("sampled_couplings: atoms " + std::to_string(i) + " and " +
                                        std::to_string(j) + " coincide");
            const cplx base = pair_coupling(d, lattice.polarization);
            const double phase = kl.dot(displacements[i] - displacements[j]);
            cm.c(i, j) = base * std::polar(1.0, phase);
            cm.c(j, i) = base * std::polar(1.0, -phase);
        }
    }
    return cm;
}

Vec3 gaussian_displacement(std::uint64_t seed, std::uint64_t realization, int atom, double sigma) {
    // substream id: mix (seed, realization, atom) into one splitmix state
    std::uint64_t s = seed;
    s ^= 0x9e3779b97f4a7c15ull + realization;
    std::uint64_t state = splitmix64(s) ^ (0xc2b2ae3d27d4eb4full * (atom + 1));
    // Box-Muller, two pairs, keep three values
    const double u1 = uniform01(state), u2 = uniform01(state);
    const double u3 = uniform01(state), u4 = uniform01(state);
    const double r1 = std::sqrt(-2.0 * std::log(u1));
    const double r2 = std::sqrt(-2.0 * std::log(u3));
    return sigma * Vec3(r1 * std::cos(2.0 * pi * u2), r1 * std::sin(2.0 * pi * u2),
                        r2 * std::cos(2.0 * pi * u4));
}

CouplingMatrix motion_averaged_couplings(const LatticeSpec& lattice, double sigma, int n_samples,
                                         std::uint64_t seed) {
    lattice.validate();
    if (sigma < 0) throw std::invalid_argument("motion_averaged_couplings: sigma must be >= 0");
    if (n_samples < 1) throw std::invalid_argument("motion_averaged_couplings: n_samples must be >= 1");
    const int n = lattice.n_total();
    if (sigma == 0.0) return pinned_couplings(lattice);

    // fixed-size realization blocks summed in block order: the result is
    // bit-identical for any thread count or scheduling
    const int block_size = 64;
    const int n_blocks = (n_samples + block_size - 1) / block_size;
    std::vector<Eigen::MatrixXcd> blocks(n_blocks);
    std::atomic<int> next{0};
    auto worker = [&] {
        std::vector<Vec3> disp(n);
        int b;
        while ((b = next.fetch_add(1)) < n_blocks) {
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
            const int lo = b * block_size, hi = std::min(n_samples, lo + block_size);
            for (int r = lo; r < hi; ++r) {
                for (int a = 0; a < n; ++a) disp[a] = gaussian_displacement(seed, r, a, sigma);
                acc += sampled_couplings(lattice, disp).c;
            }
            blocks[b] = std::move(acc);
        }
    };
    const unsigned n_threads =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           n_blocks > 1 ? n_blocks : 1);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& b : blocks) mean += b;
    mean /= static_cast<double>(n_samples);

    // the exact position average is symmetric; symmetrize the estimator
    CouplingMatrix cm;
    cm.c = 0.5 * (mean + mean.transpose());
    for (int i = 0; i < n; ++i) cm.c(i, i) = cplx(0.0, -0.5);
    return cm;
}

CouplingMatrix analytic_averaged_couplings(const LatticeSpec& lattice, double sigma) {
    lattice.validate();
    if (sigma < 0) throw std::invalid_argument("analytic_averaged_couplings: sigma must be >= 0");
    const double eta = sigma * k_e;
    if (eta >= 0.3)
        throw std::domain_error("analytic_averaged_couplings: sigma*k_e = " + std::to_string(eta) +
                                " outside the Lamb-Dicke regime (< 0.3)");
    CouplingMatrix cm = pinned_couplings(lattice);
    const double scale = 1.0 - 2.0 * eta * eta;
    cm.c *= scale;
    for (int i = 0; i < cm.size(); ++i) cm.c(i, i) = cplx(0.0, -0.5);
    return cm;
}

}  // namespace atomarray
