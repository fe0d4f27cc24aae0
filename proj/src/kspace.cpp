#include "atomarray/kspace.hpp"

#include <cmath>

#include <gsl/gsl_sf_bessel.h>

#include "atomarray/couplings.hpp"

namespace atomarray {

namespace {

constexpr double k_e = 2.0 * pi;

struct BesselTriple {
    double b0, b1, b2;
};

BesselTriple bessel_k(double rho) {
    if (rho > 600.0) return {0.0, 0.0, 0.0};  // K_n underflows; coupling is exponentially dead
    return {gsl_sf_bessel_K0(rho), gsl_sf_bessel_K1(rho), gsl_sf_bessel_Kn(2, rho)};
}

BesselTriple bessel_j(double rho) {
    return {gsl_sf_bessel_J0(rho), gsl_sf_bessel_J1(rho), gsl_sf_bessel_Jn(2, rho)};
}

BesselTriple bessel_y(double rho) {
    return {gsl_sf_bessel_Y0(rho), gsl_sf_bessel_Y1(rho), gsl_sf_bessel_Yn(2, rho)};
}

}  // namespace

KCoupling analytic_gk(double k, double l, double a, Polarization pol) {
    if (l <= 0) throw std::invalid_argument("analytic_gk: l must be > 0");
    if (a <= 0) throw std::invalid_argument("analytic_gk: a must be > 0");
    if (std::abs(std::abs(k) - k_e) < 1e-6 * k_e)
        throw std::domain_error("analytic_gk: quasi-momentum within 1e-6 k_e of the light cone");

    const double kk = std::abs(k);
    const double kel2 = (k_e * l) * (k_e * l);
    KCoupling out;

    if (kk > k_e) {
        const double rho = l * std::sqrt(k * k - k_e * k_e);
        const auto [K0, K1, K2] = bessel_k(rho);
        double bracket = 0.0;
        switch (pol) {
            case Polarization::Z:
                bracket = (1.0 - k * k / (k_e * k_e)) * K0;
                break;
            case Polarization::X:
                bracket = K0 - rho * K1 / kel2;
                break;
            case Polarization::Y:
                bracket = K0 - rho * K1 / kel2 + rho * rho * K2 / kel2;
                break;
        }
        out.g = -3.0 * bracket / (k_e * a);
        out.gamma = 0.0;
        return out;
    }

    const double rho = l * std::sqrt(k_e * k_e - k * k);
    const auto [Y0, Y1, Y2] = bessel_y(rho);
    const auto [J0, J1, J2] = bessel_j(rho);
    double gy = 0.0, gj = 0.0;
    switch (pol) {
        case Polarization::Z:
            gy = (1.0 - k * k / (k_e * k_e)) * Y0;
            gj = (1.0 - k * k / (k_e * k_e)) * J0;
            break;
        case Polarization::X:
            gy = -(Y0 - rho * Y1 / kel2);
            gj = J0 - rho * J1 / kel2;
            break;
        case Polarization::Y:
            gy = Y0 - rho * Y1 / kel2 + rho * rho * Y2 / kel2;
            gj = J0 - rho * J1 / kel2 + rho * rho * J2 / kel2;
            break;
    }
    out.g = 3.0 * pi * gy / (4.0 * k_e * a);
    out.gamma = 3.0 * pi * gj / (2.0 * k_e * a);
    return out;
}

KCoupling lattice_sum_gk(double k, double a, double l, Polarization pol, int n_atoms) {
    if (n_atoms < 2) throw std::invalid_argument("lattice_sum_gk: N must be >= 2");
    // direct sum sum_j e^{i k Z_j} (g_{0j} - i gamma_{0j}/2), reference atom
    // at the centre of array A, symmetric window with trapezoid end weights
    // (halves the oscillatory truncation tail of the finite window)
    const int half = (n_atoms - 1) / 2;
    cplx sum = 0.0;
    for (int m = -half; m <= half; ++m) {
        const double w = std::abs(m) == half ? 0.5 : 1.0;
        const Vec3 r(0.0, l, a * m);
        sum += w * std::polar(1.0, k * a * m) * pair_coupling(r, pol);
    }
    return {sum.real(), -2.0 * sum.imag()};
}

KBlock kblock_from_lattice(double k, const LatticeSpec& lattice) {
    lattice.validate();
    if (lattice.n_arrays != 2)
        throw std::invalid_argument("kblock_from_lattice: two arrays required");
    const int n = lattice.n_atoms;

    // single-array dispersion: Rayleigh quotient of the intra-array block in
    // the quasi-momentum mode, including the self term -i Gamma0/2
    cplx omega = 0.0;
    const double norm = 2.0 / (n + 1);
    for (int i = 0; i < n; ++i) {
        const double si = std::sin(k * lattice.spacing * (i + 1));
        omega += si * si * cplx(0.0, -0.5);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double sj = std::sin(k * lattice.spacing * (j + 1));
            const Vec3 r = lattice.site_position(i) - lattice.site_position(j);
            omega += si * sj * pair_coupling(r, lattice.polarization);
        }
    }
    omega *= norm;

    const KCoupling gk =
        lattice_sum_gk(k, lattice.spacing, lattice.separation, lattice.polarization, n);

    KBlock b;
    b.k = k;
    b.omega_k = omega;
    b.g_k = gk.g;
    b.gamma_k = gk.gamma;
    b.delta = lattice.detuning_b;
    const cplx coupling(gk.g, -0.5 * gk.gamma);
    b.matrix << omega, coupling, coupling, omega + lattice.detuning_b;
    return b;
}

KBlockEigen kblock_diagonalize(const KBlock& block) {
    KBlockEigen out;
    // exact 2x2: E_pm = omega_k + delta/2 +- sqrt(delta^2 + 4 c^2)/2
    const cplx c(block.g_k, -0.5 * block.gamma_k);
    const cplx disc = std::sqrt(cplx(block.delta * block.delta) + 4.0 * c * c);
    const cplx ep = block.omega_k + 0.5 * block.delta + 0.5 * disc;
    const cplx em = block.omega_k + 0.5 * block.delta - 0.5 * disc;
    out.exact_values << ep, em;
    for (int i = 0; i < 2; ++i) {
        const cplx e = out.exact_values[i];
        Eigen::Vector2cd v(c, e - block.omega_k);
        if (v.norm() == 0.0) v << 1.0, 0.0;
        out.exact_vectors.col(i) = v / v.norm();
    }
    // first order in gamma_k: sqrt(delta^2 + 4(g - i gamma/2)^2)
    //   ~ Omega_k - 2 i g gamma / Omega_k  with Omega_k = sqrt(delta^2 + 4 g^2)
    const double omega_gap = std::sqrt(block.delta * block.delta + 4.0 * block.g_k * block.g_k);
    const cplx corr = omega_gap > 0 ? cplx(0.0, -1.0) * (block.g_k * block.gamma_k / omega_gap)
                                    : cplx(0.0, 0.0);
    out.perturbative << block.omega_k + 0.5 * block.delta + 0.5 * omega_gap + corr,
        block.omega_k + 0.5 * block.delta - 0.5 * omega_gap - corr;
    return out;
}

std::optional<DriveGeometry> solve_drive_geometry(double a, double alpha, double p_ratio,
                                                  double target_kz, double omega_g) {
    if (a <= 0) throw std::invalid_argument("solve_drive_geometry: a must be > 0");
    if (alpha < 0 || alpha > pi)
        throw std::invalid_argument("solve_drive_geometry: alpha must lie in [0, pi]");
    const double kz = target_kz != 0.0 ? target_kz : pi / a;
    const double ka = p_ratio * k_e;
    const double kb = ka - omega_g * k_e;
    if (kb <= 0) throw std::invalid_argument("solve_drive_geometry: k_b <= 0");
    const double cosb = (ka * std::cos(alpha) - kz) / kb;
    if (std::abs(cosb) > 1.0) return std::nullopt;
    DriveGeometry g;
    g.alpha = alpha;
    g.beta = std::acos(cosb);
    g.k_a = ka / k_e;
    g.k_b = kb / k_e;
    g.K_z = ka * std::cos(alpha) - kb * cosb;
    g.K_x = ka * std::sin(alpha) - kb * std::sin(g.beta);
    g.p_ratio = p_ratio;
    return g;
}

}  // namespace atomarray
