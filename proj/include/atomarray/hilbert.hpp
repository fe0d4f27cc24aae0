#pragma once

// Truncated <= n_max excitation basis and assembly of the dense or sparse
// non-Hermitian Hamiltonians and driving operators acting on it.
//
// Phase convention: the drive is represented in the gauge where each excited
// site carries an extra phase factor, which turns i*(sigma+ - sigma-) into
// (sigma+ + sigma-).  All assembled operators are then complex symmetric;
// populations, fidelities and spectra are gauge-invariant.

#include <array>
#include <cstdint>
#include <memory>

#include "atomarray/kernels.hpp"
#include "atomarray/types.hpp"

namespace atomarray {

// Ordered enumeration of spin configurations with at most n_max excitations:
// ground state first, then singles ascending, then pairs lexicographic, then
// triples lexicographic.
class ExcitationBasis {
public:
    ExcitationBasis(int n_sites, int n_max);

    int n_sites() const { return n_sites_; }
    int n_max() const { return n_max_; }
    int dimension() const { return dim_; }

    // number of excited sites of state `idx`
    int excitation_count(int idx) const;
    // excited sites of state `idx`, ascending; only the first
    // excitation_count entries are meaningful
    std::array<int, 3> sites(int idx) const;

    int index_of_ground() const { return 0; }
    int index_of_single(int i) const;
    int index_of_pair(int i, int j) const;          // any order, i != j
    int index_of_triple(int i, int j, int k) const; // distinct

    static long long dimension_for(int n_sites, int n_max);

private:
    int n_sites_;
    int n_max_;
    int dim_;
    int singles_off_, pairs_off_, triples_off_;
};

// Dense or sparse complex operator on an ExcitationBasis (or on a custom
// joint space when `basis` is null).
class NonHermitianOperator {
public:
    NonHermitianOperator() = default;
    NonHermitianOperator(std::shared_ptr<const ExcitationBasis> basis, Eigen::MatrixXcd m);
    NonHermitianOperator(std::shared_ptr<const ExcitationBasis> basis, kern::Csr m);

    int dim() const { return dim_; }
    bool is_dense() const { return dense_.size() > 0; }
    const ExcitationBasis* basis() const { return basis_.get(); }

    const Eigen::MatrixXcd& dense() const;
    const kern::Csr& sparse() const;
    Eigen::MatrixXcd to_dense() const;

    // y = H x
    void apply(const cplx* x, cplx* y) const;
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

    Eigen::MatrixXcd hermitian_part() const;      // (H + H^dag)/2
    Eigen::MatrixXcd antihermitian_part() const;  // (H - H^dag)/2

    // max |H - H^T| entry; 0 for exactly complex-symmetric operators
    double symmetry_defect() const;

    NonHermitianOperator& operator+=(const NonHermitianOperator& other);

private:
    std::shared_ptr<const ExcitationBasis> basis_;
    Eigen::MatrixXcd dense_;
    kern::Csr sparse_;
    int dim_ = 0;
};

ExcitationBasis build_basis(int n_sites, int n_max);

struct DriveSpec {
    double rabi_omega0 = 0.0;  // Gamma0 units
    double k_z = 0.0;          // quasi-momentum, units 1/lambda_e
    double detuning_d = 0.0;   // offset from the target eigenenergy, Gamma0

    // sin(k_z * a * j) for j = 1..N
    std::vector<double> phase_profile(const LatticeSpec& lattice) const;
};

enum class DrivenArrays { A, B, Both };

// Band-edge quasi-momentum of a finite open array: q_a = pi*N / (a*(N+1)).
double band_edge_momentum(const LatticeSpec& lattice);

// Sum_{i,j} (J_ij - i Gamma_ij/2) sigma+_j sigma-_i restricted to the basis,
// with detuning_b added per array-B excitation and, optionally, a rotating
// frame shift of -rotating_shift per excitation.  Dense for small dimensions,
// CSR above `dense_threshold`.
NonHermitianOperator assemble_hamiltonian(const CouplingMatrix& couplings,
                                          std::shared_ptr<const ExcitationBasis> basis,
                                          const LatticeSpec& lattice,
                                          double rotating_shift = 0.0,
                                          int dense_threshold = 2048);

// Omega0 * sum_j sin(K_z z_j) (sigma+_j + sigma-_j) restricted to the basis
// (drive gauge, Hermitian and complex symmetric; couples adjacent manifolds).
NonHermitianOperator assemble_drive(const DriveSpec& drive,
                                    std::shared_ptr<const ExcitationBasis> basis,
                                    const LatticeSpec& lattice,
                                    DrivenArrays arrays = DrivenArrays::Both,
                                    int dense_threshold = 2048);

// H0 + V assembled in one pass (single CSR for large dimensions).
NonHermitianOperator assemble_driven_system(const CouplingMatrix& couplings,
                                            std::shared_ptr<const ExcitationBasis> basis,
                                            const LatticeSpec& lattice, const DriveSpec& drive,
                                            DrivenArrays arrays = DrivenArrays::Both,
                                            double rotating_shift = 0.0,
                                            int dense_threshold = 2048);

// ---------------------------------------------------------------------------
// Lamb-Dicke phonon coupling (guarded small systems)

struct LambDickeParams {
    double r0 = 0.0;       // zero-point length, units lambda_e
    double omega_t = 0.0;  // trap frequency, Gamma0 units
    int phonon_dim = 2;    // Fock cutoff per mode
    double k_x = 0.0;      // drive momentum transfer along x (eta_x = k_x*r0)
};

// Joint internal (x) phonon system: motional modes x and z per atom, y motion
// enters the couplings only through its ground-state second-order average.
// The x quadratures are represented in the rotated phase gauge so the joint
// operator is complex symmetric whenever eta_x = 0.
struct LambDickeSystem {
    std::shared_ptr<const ExcitationBasis> internal_basis;
    int n_modes = 0;       // 2 per atom (x, z)
    int phonon_dim = 2;
    int phonon_states = 0; // phonon_dim^n_modes
    NonHermitianOperator op;          // full joint operator (sparse)
    kern::Csr phonon_number;          // total phonon number operator on the joint space

    int joint_dim() const { return op.dim(); }
    int joint_index(int internal, int phonon) const { return internal * phonon_states + phonon; }
    // embed an internal state in the phonon vacuum
    Eigen::VectorXcd lift(const Eigen::VectorXcd& internal) const;
    // ground-phonon block of the joint operator (thermal trace at n_th = 0)
    Eigen::MatrixXcd ground_phonon_block() const;
};

LambDickeSystem assemble_lamb_dicke_system(const LatticeSpec& lattice, const DriveSpec& drive,
                                           const LambDickeParams& params,
                                           double rotating_shift = 0.0, int n_max = 2);

// Effective internal-only operator after adiabatic elimination of the motion:
// couplings scaled by (1 - 2 eta^2), drive scaled by
// 1 - eta^2 (K_z/k_e)^2 - eta^2 (K_x/k_e)^2, plus the motion-mediated
// second-order terms with energy denominators (omega_T + H_internal).
// Requires omega_T >= 10 * Gamma0.
NonHermitianOperator adiabatic_eliminate_motion(const LatticeSpec& lattice, const DriveSpec& drive,
                                                const LambDickeParams& params,
                                                double rotating_shift = 0.0, int n_max = 2);

}  // namespace atomarray
