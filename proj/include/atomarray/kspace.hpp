#pragma once

// Momentum-space couplings between parallel arrays (Bessel-family closed
// forms and finite-lattice sums), the two-array k-block, and the Raman
// drive-geometry solver.

#include <optional>

#include "atomarray/types.hpp"

namespace atomarray {

struct KCoupling {
    double g = 0.0;      // coherent part, Gamma0 units
    double gamma = 0.0;  // dissipative part, Gamma0 units
};

// Closed-form inter-array coupling of a spin wave with quasi-momentum k for
// infinitely long arrays at separation l and spacing a.  Outside the light
// cone (|k| > k_e) the coupling is purely coherent (gamma = 0, modified
// Bessel K family); inside it is lossy (Y and J families).
// Throws within |k - k_e| < 1e-6 k_e of the light cone.
KCoupling analytic_gk(double k, double l, double a, Polarization pol);

// Finite-array oracle: quasi-momentum mode matrix element of the inter-array
// coupling, (2/(N+1)) sum_{ij} sin(k z_i) sin(k z_j) (g_ij - i gamma_ij/2).
KCoupling lattice_sum_gk(double k, double a, double l, Polarization pol, int n_atoms);

// 2x2 single-excitation block on {|k 0>, |0 k>} for a finite two-array system.
struct KBlock {
    double k = 0.0;
    cplx omega_k = 0.0;  // single-array dispersion energy (complex: - i Gamma_k/2)
    double g_k = 0.0;
    double gamma_k = 0.0;
    double delta = 0.0;  // array-B detuning
    Eigen::Matrix2cd matrix;
};

KBlock kblock_from_lattice(double k, const LatticeSpec& lattice);

struct KBlockEigen {
    Eigen::Vector2cd exact_values;     // ground truth from 2x2 diagonalization
    Eigen::Matrix2cd exact_vectors;
    Eigen::Vector2cd perturbative;     // first order in gamma_k
};

KBlockEigen kblock_diagonalize(const KBlock& block);

// Raman drive geometry: laser angles and momenta that furnish K_z = target.
struct DriveGeometry {
    double alpha = 0.0;  // angle of laser a to the array axis
    double beta = 0.0;   // angle of laser b
    double k_a = 0.0;    // wavenumbers, units of k_e
    double k_b = 0.0;
    double K_z = 0.0;    // imparted momenta, units of 1/lambda_e
    double K_x = 0.0;
    double p_ratio = 2.0;
};

// Solves cos(beta) = (k_a cos(alpha) - target_Kz) / k_b with k_a = p * k_e
// and k_b = k_a - omega_g (omega_g in units of omega_e; default 0.1).
// Returns nullopt when |cos beta| > 1 (no matching geometry).
std::optional<DriveGeometry> solve_drive_geometry(double a, double alpha, double p_ratio,
                                                  double target_kz = 0.0,
                                                  double omega_g = 0.1);

}  // namespace atomarray
