#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include "atomarray/couplings.hpp"

using namespace atomarray;

namespace {
constexpr double k_e = 2.0 * pi;
}

TEST_CASE("green tensor closed form on the dipole axis") {
    // for r = d z^, the zz component reduces to e^{ikd}(1 - ikd)/(2 pi k^2 d^3)
    for (double d : {0.11, 0.25, 0.8, 3.0}) {
        const cplx got = green_tensor(Vec3(0, 0, d), 2, 2);
        const cplx want = std::polar(1.0, k_e * d) * (1.0 - cplx(0, 1) * k_e * d) /
                          (2.0 * pi * k_e * k_e * d * d * d);
        CHECK(std::abs(got - want) < 1e-14 * std::abs(want) + 1e-18);
        // off-diagonal vanishes for axis-aligned displacement
        CHECK(std::abs(green_tensor(Vec3(0, 0, d), 0, 2)) < 1e-16);
    }
}

TEST_CASE("green tensor symmetry, reciprocity and rotational covariance") {
    const Vec3 r(0.13, -0.07, 0.21);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            CHECK(std::abs(green_tensor(r, a, b) - green_tensor(r, b, a)) < 1e-15);
            CHECK(std::abs(green_tensor(r, a, b) - green_tensor(-r, a, b)) < 1e-15);
        }
    // G(R r) = R G(r) R^T for a rotation R
    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(0.7, Vec3(1, 2, -1).normalized()).toRotationMatrix();
    Eigen::Matrix3cd g, gr;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            g(a, b) = green_tensor(r, a, b);
            gr(a, b) = green_tensor(rot * r, a, b);
        }
    const Eigen::Matrix3cd want = rot.cast<cplx>() * g * rot.transpose().cast<cplx>();
    CHECK((gr - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("green tensor rejects zero displacement") {
    CHECK_THROWS_AS(green_tensor(Vec3::Zero(), 0, 0), std::domain_error);
}

TEST_CASE("pair coupling closed forms for on-axis separation") {
    // z-polarized: J - i Gamma/2 = -(3/2) e^{ikd}(1 - ikd)/(kd)^3;
    // real and imaginary parts frozen from the symbolic reduction
    for (double d : {0.25, 0.5, 1.2}) {
        const double x = k_e * d;
        const cplx c = pair_coupling(Vec3(0, 0, d), Polarization::Z);
        const double j_want = -1.5 * (std::cos(x) / (x * x * x) + std::sin(x) / (x * x));
        const double gamma_want = 3.0 * (std::sin(x) / (x * x * x) - std::cos(x) / (x * x));
        CHECK(c.real() == doctest::Approx(j_want).epsilon(1e-12));
        CHECK(-2.0 * c.imag() == doctest::Approx(gamma_want).epsilon(1e-12));
    }
    // self-limit of the dissipative part is Gamma0: Gamma(d -> 0) -> 1
    const cplx tiny = pair_coupling(Vec3(0, 0, 1e-4), Polarization::Z);
    CHECK(-2.0 * tiny.imag() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("pinned couplings: diagonal, symmetry, PSD dissipation") {
    LatticeSpec lat;
    lat.n_atoms = 7;
    lat.n_arrays = 2;
    lat.spacing = 0.23;
    lat.separation = 0.41;
    lat.polarization = Polarization::Z;
    const CouplingMatrix cm = pinned_couplings(lat);
    const int n = cm.size();
    REQUIRE(n == 14);
    for (int i = 0; i < n; ++i) {
        CHECK(cm.c(i, i) == cplx(0.0, -0.5));  // (J, Gamma) = (0, Gamma0)
    }
    const Eigen::MatrixXd j = cm.j_part(), g = cm.gamma_part();
    CHECK((j - j.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    // dissipation matrix is positive semidefinite
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * g.cwiseAbs().maxCoeff());
    // N=2: Gamma eigenvalues are Gamma0 +- Gamma12, both nonnegative
    LatticeSpec two;
    two.n_atoms = 2;
    two.spacing = 0.25;
    const CouplingMatrix c2 = pinned_couplings(two);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(c2.gamma_part());
    CHECK(es2.eigenvalues()[0] == doctest::Approx(1.0 - std::abs(c2.gamma_part()(0, 1))));
    CHECK(es2.eigenvalues()[0] >= 0.0);
}

TEST_CASE("far-field falloff exponents by polarization") {
    // z-polarized: no 1/r radiation term along the dipole axis -> slope -2;
    // x-polarized: radiative 1/r term -> slope -1 (log-log envelope fit)
    auto envelope_slope = [](Polarization pol) {
        std::vector<double> lx, ly;
        for (double d = 2.0; d < 40.0; d *= 1.07) {
            // sample the oscillation envelope over one period
            double peak = 0.0;
            for (double frac = 0.0; frac < 1.0; frac += 0.05)
                peak = std::max(peak,
                                std::abs(pair_coupling(Vec3(0, 0, d + frac / k_e * 2 * pi), pol)
                                             .real()));
            lx.push_back(std::log(k_e * d));
            ly.push_back(std::log(peak));
        }
        const int m = static_cast<int>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < m; ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };
    CHECK(envelope_slope(Polarization::Z) == doctest::Approx(-2.0).epsilon(0.1));
    CHECK(envelope_slope(Polarization::X) == doctest::Approx(-1.0).epsilon(0.2));
}

TEST_CASE("gradient and hessian match finite differences") {
    const Vec3 r(0.07, 0.21, 0.33);
    const double h = 1e-5;
    for (auto pol : {Polarization::Z, Polarization::X, Polarization::Y}) {
        const Eigen::Vector3cd grad = pair_coupling_grad(r, pol);
        const Eigen::Matrix3cd hess = pair_coupling_hess(r, pol);
        for (int a = 0; a < 3; ++a) {
            Vec3 rp = r, rm = r;
            rp[a] += h;
            rm[a] -= h;
            const cplx fd = (pair_coupling(rp, pol) - pair_coupling(rm, pol)) / (2 * h);
            CHECK(std::abs(fd - grad[a]) < 1e-5 * std::abs(fd) + 1e-10);
            for (int b = 0; b < 3; ++b) {
                Vec3 pp = r, pm = r, mp = r, mm = r;
                pp[a] += h;
                pp[b] += h;
                pm[a] += h;
                pm[b] -= h;
                mp[a] -= h;
                mp[b] += h;
                mm[a] -= h;
                mm[b] -= h;
                const cplx fd2 = (pair_coupling(pp, pol) - pair_coupling(pm, pol) -
                                  pair_coupling(mp, pol) + pair_coupling(mm, pol)) /
                                 (4 * h * h);
                CHECK(std::abs(fd2 - hess(a, b)) < 2e-4 * std::abs(fd2) + 1e-8);
            }
        }
        // Helmholtz identity away from the source: laplacian = -k^2 f
        const cplx lap = hess(0, 0) + hess(1, 1) + hess(2, 2);
        const cplx f = pair_coupling(r, pol);
        CHECK(std::abs(lap + k_e * k_e * f) < 1e-10 * std::abs(k_e * k_e * f));
    }
}

TEST_CASE("sampled couplings reduce to pinned at zero displacement") {
    LatticeSpec lat;
    lat.n_atoms = 5;
    lat.spacing = 0.3;
    const std::vector<Vec3> zero(5, Vec3::Zero());
    const CouplingMatrix s = sampled_couplings(lat, zero);
    const CouplingMatrix p = pinned_couplings(lat);
    CHECK((s.c - p.c).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sampled couplings: exchange and single displaced pair") {
    LatticeSpec lat;
    lat.n_atoms = 2;
    lat.spacing = 0.3;
    const std::vector<Vec3> disp{Vec3(0.01, -0.02, 0.015), Vec3(-0.005, 0.01, -0.02)};
    const CouplingMatrix a = sampled_couplings(lat, disp);
    // the two orientations of one bond share the even coupling core and
    // carry conjugate Raman phases
    const double phase = 2.0 * pi * (disp[0].x() - disp[1].x());
    CHECK(std::abs(a.c(0, 1) * std::polar(1.0, -phase) -
                   a.c(1, 0) * std::polar(1.0, phase)) < 1e-14);

    // single pair: pulling one atom away along z matches the pair coupling
    // at separation a + dz with no Raman phase (displacement orthogonal to k_L)
    std::vector<Vec3> dz{Vec3(0, 0, -0.04), Vec3::Zero()};
    const CouplingMatrix c = sampled_couplings(lat, dz);
    const cplx want = pair_coupling(Vec3(0, 0, lat.spacing + 0.04), Polarization::Z);
    CHECK(std::abs(c.c(0, 1) - want) < 1e-14);
    // displacement along x picks up the Raman phase exp(i k_e dx)
    std::vector<Vec3> dx{Vec3(0.02, 0, 0), Vec3::Zero()};
    const CouplingMatrix d = sampled_couplings(lat, dx);
    const cplx base = pair_coupling(Vec3(0.02, 0, -lat.spacing), Polarization::Z);
    CHECK(std::abs(d.c(0, 1) - base * std::polar(1.0, k_e * 0.02)) < 1e-14);
}

TEST_CASE("sampled couplings reject coincident atoms") {
    LatticeSpec lat;
    lat.n_atoms = 2;
    lat.spacing = 0.3;
    std::vector<Vec3> disp{Vec3(0, 0, 0.3), Vec3::Zero()};  // atom 0 moved onto atom 1
    CHECK_THROWS_AS(sampled_couplings(lat, disp), std::domain_error);
}

TEST_CASE("motion averaged couplings: degenerate width and determinism") {
    LatticeSpec lat;
    lat.n_atoms = 4;
    lat.spacing = 0.25;
    const CouplingMatrix a = motion_averaged_couplings(lat, 0.0, 50, 3);
    CHECK((a.c - pinned_couplings(lat).c).cwiseAbs().maxCoeff() < 1e-15);
    const CouplingMatrix b = motion_averaged_couplings(lat, 0.01, 400, 3);
    const CouplingMatrix c = motion_averaged_couplings(lat, 0.01, 400, 3);
    CHECK((b.c - c.c).cwiseAbs().maxCoeff() == 0.0);  // bit-identical replay
    // and bit-identical under a different worker count
    setenv("ATOMARRAY_WORKERS", "1", 1);
    const CouplingMatrix d = motion_averaged_couplings(lat, 0.01, 400, 3);
    unsetenv("ATOMARRAY_WORKERS");
    CHECK((b.c - d.c).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 4; ++i) CHECK(b.c(i, i) == cplx(0.0, -0.5));
}

TEST_CASE("monte-carlo average approaches the Lamb-Dicke closed form") {
    LatticeSpec lat;
    lat.n_atoms = 4;
    lat.spacing = 0.25;
    const double sigma = 0.05 / k_e;  // sigma k_e = 0.05
    const int samples = 20000;
    const CouplingMatrix mc = motion_averaged_couplings(lat, sigma, samples, 17);
    const CouplingMatrix an = analytic_averaged_couplings(lat, sigma);
    // within 5 standard-error estimates entrywise (loose bound from replay)
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) {
            double var_re = 0, var_im = 0;
            cplx mean = 0;
            std::vector<cplx> vals(samples);
            for (int r = 0; r < samples; ++r) {
                std::vector<Vec3> disp(4);
                for (int a2 = 0; a2 < 4; ++a2)
                    disp[a2] = gaussian_displacement(17, r, a2, sigma);
                const CouplingMatrix s = sampled_couplings(lat, disp);
                vals[r] = 0.5 * (s.c(i, j) + s.c(j, i));
                mean += vals[r];
            }
            mean /= samples;
            for (const cplx v : vals) {
                var_re += std::pow(v.real() - mean.real(), 2);
                var_im += std::pow(v.imag() - mean.imag(), 2);
            }
            const double se_re = std::sqrt(var_re / samples / (samples - 1.0));
            const double se_im = std::sqrt(var_im / samples / (samples - 1.0));
            CHECK(std::abs(mc.c(i, j).real() - an.c(i, j).real()) < 5 * se_re);
            CHECK(std::abs(mc.c(i, j).imag() - an.c(i, j).imag()) < 5 * se_im);
        }
}

TEST_CASE("analytic averaged couplings: exact ratio and regime guard") {
    LatticeSpec lat;
    lat.n_atoms = 5;
    lat.spacing = 0.2;
    CHECK((analytic_averaged_couplings(lat, 0.0).c - pinned_couplings(lat).c)
              .cwiseAbs()
              .maxCoeff() < 1e-15);
    const double sigma = 0.03;
    const CouplingMatrix avg = analytic_averaged_couplings(lat, sigma);
    const CouplingMatrix pin = pinned_couplings(lat);
    const double scale = 1.0 - 2.0 * sigma * sigma * k_e * k_e;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            if (i == j) continue;
            CHECK(std::abs(avg.c(i, j) - scale * pin.c(i, j)) < 1e-15);
        }
    CHECK_THROWS_AS(analytic_averaged_couplings(lat, 0.3 / k_e), std::domain_error);
}

TEST_CASE("lattice spec validation and subwavelength flag") {
    LatticeSpec lat;
    lat.n_atoms = 0;
    CHECK_THROWS_AS(lat.validate(), std::invalid_argument);
    lat.n_atoms = 3;
    lat.n_arrays = 2;
    lat.separation = 0.0;
    CHECK_THROWS_AS(lat.validate(), std::invalid_argument);
    lat.separation = 0.3;
    CHECK_NOTHROW(lat.validate());
    CHECK(lat.subwavelength());
    lat.spacing = 0.6;
    CHECK(!lat.subwavelength());
}
