#pragma once

// Common scalar types, unit system and lattice geometry shared by all modules.
//
// Unit conventions (fixed, non-configurable):
//   - all rates are expressed in units of the single-atom decay rate Gamma0 = 1
//   - all lengths are expressed in units of the transition wavelength lambda_e = 1,
//     so the resonant wavenumber is k_e = 2*pi

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace atomarray {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = 3.14159265358979323846;

struct PhysicalScales {
    double gamma0 = 1.0;      // reference decay rate (unit of all rates)
    double k_e = 2.0 * pi;    // resonant wavenumber (lengths in lambda_e)
    double epsilon_sq = 1.0;  // bookkeeping only; absorbed into gamma0
};

inline constexpr PhysicalScales scales{};

enum class Polarization { X, Y, Z };

inline const char* to_string(Polarization p) {
    switch (p) {
        case Polarization::X: return "x";
        case Polarization::Y: return "y";
        case Polarization::Z: return "z";
    }
    return "?";
}

inline Polarization polarization_from_string(const std::string& s) {
    if (s == "x" || s == "X") return Polarization::X;
    if (s == "y" || s == "Y") return Polarization::Y;
    if (s == "z" || s == "Z") return Polarization::Z;
    throw std::invalid_argument("unknown polarization: " + s);
}

inline Vec3 polarization_axis(Polarization p) {
    switch (p) {
        case Polarization::X: return Vec3(1, 0, 0);
        case Polarization::Y: return Vec3(0, 1, 0);
        case Polarization::Z: return Vec3(0, 0, 1);
    }
    return Vec3::Zero();
}

// Geometry of one or two parallel 1D arrays along z.  Array A sits in the
// x = y = 0 line, array B (when present) is displaced by `separation` along y.
// Site positions are R_{A,j} = (0, 0, j*a) and R_{B,j} = (0, l, j*a), j = 1..N.
struct LatticeSpec {
    int n_atoms = 2;                         // atoms per array
    int n_arrays = 1;                        // 1 or 2
    double spacing = 0.25;                   // a, units of lambda_e
    double separation = 0.0;                 // l, units of lambda_e (two arrays)
    Polarization polarization = Polarization::Z;
    double detuning_b = 0.0;                 // detuning of every array-B atom, Gamma0

    int n_total() const { return n_arrays * n_atoms; }

    bool subwavelength() const { return spacing < 0.5; }

    void validate() const {
        if (n_atoms < 1) throw std::invalid_argument("LatticeSpec: n_atoms must be >= 1");
        if (n_arrays != 1 && n_arrays != 2)
            throw std::invalid_argument("LatticeSpec: n_arrays must be 1 or 2");
        if (spacing <= 0) throw std::invalid_argument("LatticeSpec: spacing must be > 0");
        if (n_arrays == 2 && separation <= 0)
            throw std::invalid_argument("LatticeSpec: separation must be > 0 for two arrays");
    }

    // Global site index: sites [0, N) are array A, [N, 2N) array B.
    bool site_in_array_b(int site) const { return site >= n_atoms; }

    Vec3 site_position(int site) const {
        const int arr = site / n_atoms;
        const int j = site % n_atoms + 1;  // 1-based within the array
        return Vec3(0.0, separation * arr, spacing * j);
    }

    double site_z(int site) const { return spacing * (site % n_atoms + 1); }
};

// Pairwise coupling rates between all sites, split into coherent (J) and
// dissipative (Gamma) parts.  The defining object is the complex matrix
// C = J - i*Gamma/2; for pinned and averaged atoms C is complex symmetric so
// the J/Gamma views are real symmetric.  Individual position realizations
// carry a Raman phase and are only symmetric on average.
struct CouplingMatrix {
    Eigen::MatrixXcd c;  // C_ij = J_ij - i*Gamma_ij/2

    int size() const { return static_cast<int>(c.rows()); }

    Eigen::MatrixXd j_part() const { return c.real(); }
    Eigen::MatrixXd gamma_part() const { return -2.0 * c.imag(); }

    cplx coupling(int i, int j) const { return c(i, j); }
};

}  // namespace atomarray
