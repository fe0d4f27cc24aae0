#pragma once

// Bi-orthogonal eigendecomposition of complex-symmetric non-Hermitian
// operators, Krylov-subspace Ritz decomposition, and spectral synthesis of
// transition amplitudes and trajectories.

#include <optional>
#include <string>

#include "atomarray/hilbert.hpp"

namespace atomarray {

// Right/left eigenpairs with <nbar_mu | m_nu> = delta delta and <n|n> = 1.
// Columns are sorted by (excitation manifold, decay rate ascending, real part
// ascending); the manifold tag is -1 when the operator mixes manifolds.
struct BiorthogonalSpectrum {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd right;
    Eigen::MatrixXcd left;
    Eigen::VectorXi manifold;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    double decay_rate(int nu) const { return -2.0 * eigenvalues[nu].imag(); }

    // index of the smallest-decay eigenpair with the given excitation tag
    int most_subradiant(int n_excitations) const;
    // bi-orthogonality residual max|L^dag R - I|
    double biorthogonality_residual() const;
};

struct KrylovOptions {
    // spectral region to converge: smallest decay rates around `shift`
    cplx shift = 0.0;
    std::string target = "most_subradiant";  // or "near_energy"
    // seed of the Krylov space; empty -> deterministic generic vector
    Eigen::VectorXcd seed;
    int max_steps = 0;          // 0 -> automatic (grows in stages)
    double accept_tol = 1e-10;  // relative residual for an accepted pair
};

struct KrylovSpectrum {
    int dimension_m = 0;
    Eigen::VectorXcd ritz_values;
    Eigen::MatrixXcd ritz_right;
    Eigen::MatrixXcd ritz_left;
    Eigen::VectorXd residual_estimates;  // relative backward-error per pair
    std::vector<bool> accepted;
    std::string strategy;
    int lanczos_steps = 0;
};

// Full dense decomposition (LAPACK zgeev).  Complex-symmetric operators use
// the transpose shortcut for the left family; anything else gets a two-sided
// solve.  Throws when dim exceeds `dense_cap`.
BiorthogonalSpectrum dense_decompose(const NonHermitianOperator& op, int dense_cap = 6000);

// Convenience: decomposition of a bare matrix (no basis attached).
BiorthogonalSpectrum dense_decompose(const Eigen::MatrixXcd& m);

// M Ritz pairs from a complex-symmetric Lanczos recursion with full
// reorthogonalization, targeting the smallest decay rates near opts.shift.
KrylovSpectrum krylov_decompose(const NonHermitianOperator& op, int m,
                                const KrylovOptions& opts = {});

// sum_nu <target|nu><nubar|initial> exp(-i E_nu t)
cplx transition_amplitude(const BiorthogonalSpectrum& spec, const Eigen::VectorXcd& initial,
                          const Eigen::VectorXcd& target, double t);
cplx transition_amplitude(const KrylovSpectrum& spec, const Eigen::VectorXcd& initial,
                          const Eigen::VectorXcd& target, double t);

Eigen::VectorXcd transition_amplitudes(const BiorthogonalSpectrum& spec,
                                       const Eigen::VectorXcd& initial,
                                       const Eigen::VectorXcd& target,
                                       const Eigen::VectorXd& times);
Eigen::VectorXcd transition_amplitudes(const KrylovSpectrum& spec, const Eigen::VectorXcd& initial,
                                       const Eigen::VectorXcd& target,
                                       const Eigen::VectorXd& times);

// Full state at each grid point via spectral synthesis (columns = times).
Eigen::MatrixXcd evolve_state(const BiorthogonalSpectrum& spec, const Eigen::VectorXcd& initial,
                              const Eigen::VectorXd& times);
Eigen::MatrixXcd evolve_state(const KrylovSpectrum& spec, const Eigen::VectorXcd& initial,
                              const Eigen::VectorXd& times);

}  // namespace atomarray
