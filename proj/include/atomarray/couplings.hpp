#pragma once

// Free-space electromagnetic Green's tensor and the pairwise dipole coupling
// rates it induces, for pinned, position-sampled and motion-averaged atoms.

#include <cstdint>
#include <optional>

#include "atomarray/types.hpp"

namespace atomarray {

// Component G^0_{alpha,beta}(r) of the free-space Green's tensor at the
// resonant wavenumber k_e.  Throws std::domain_error for |r| = 0 (the
// self-term is handled separately by the coupling constructors).
cplx green_tensor(const Vec3& r, int alpha, int beta);

// d . G^0(r) . d for a unit dipole along the given axis.
cplx green_projected(const Vec3& r, Polarization pol);

// Pair coupling J - i*Gamma/2 = -(3*pi*Gamma0/k_e) d.G^0(r).d  (units Gamma0).
cplx pair_coupling(const Vec3& r, Polarization pol);

// Analytic gradient and Hessian of pair_coupling with respect to r.
// Finite differences of pair_coupling serve as the test oracle.
Eigen::Vector3cd pair_coupling_grad(const Vec3& r, Polarization pol);
Eigen::Matrix3cd pair_coupling_hess(const Vec3& r, Polarization pol);

// Couplings between pinned atoms at the lattice sites.  Diagonal is
// (J, Gamma) = (0, Gamma0): the vacuum Lamb shift is absorbed upstream.
CouplingMatrix pinned_couplings(const LatticeSpec& lattice);

// Couplings for one realization of displaced atoms, including the Raman
// phase exp(i k_L . (r_i - r_j)) with |k_L| = k_e along raman_direction.
// With zero displacements and raman_direction = x^ this reduces exactly to
// pinned_couplings.  Throws std::domain_error on coincident positions.
CouplingMatrix sampled_couplings(const LatticeSpec& lattice,
                                 const std::vector<Vec3>& displacements,
                                 const Vec3& raman_direction = Vec3(1, 0, 0));

// Monte-Carlo average of sampled_couplings over i.i.d. Gaussian displacements
// of width sigma per axis.  Deterministic for fixed seed and independent of
// the number of worker threads.  The mean is symmetrized (the exact average
// is symmetric) and the diagonal pinned to (0, Gamma0).
CouplingMatrix motion_averaged_couplings(const LatticeSpec& lattice, double sigma,
                                         int n_samples, std::uint64_t seed);

// Closed-form Lamb-Dicke limit of motion_averaged_couplings: off-diagonals
// scaled by (1 - 2 k_e^2 sigma^2), diagonal (0, Gamma0).
// Requires sigma*k_e < 0.3.
CouplingMatrix analytic_averaged_couplings(const LatticeSpec& lattice, double sigma);

// Deterministic per-(seed, realization, atom) Gaussian displacement used by
// the Monte-Carlo average; exposed so the standard-error estimate in tests
// can replay the exact stream.
Vec3 gaussian_displacement(std::uint64_t seed, std::uint64_t realization, int atom,
                           double sigma);

}  // namespace atomarray
