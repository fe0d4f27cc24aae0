#pragma once

// The three experiments: dark-state preparation (single array and selective
// two-array addressing), the sqrt(iSWAP) entangling gate, and the effective
// few-level reductions (three-level model, Lanczos chain).

#include <optional>
#include <string>

#include "atomarray/spectral.hpp"

namespace atomarray {

struct Populations {
    double ground = 0.0;
    double target = 0.0;
    double singles_other = 0.0;
    double two_excitation = 0.0;
    double three_excitation = 0.0;  // populated only for n_max = 3
    double norm = 0.0;              // total squared norm at t_star (no-jump loss)
};

struct DarkStatePrepResult {
    double error_epsilon = 1.0;   // 1 - max_t |<target|psi(t)>|^2
    double optimal_omega0 = 0.0;  // Gamma0 units
    double t_star = 0.0;          // 1/Gamma0 units
    Populations populations;
    double leak_01 = 0.0;  // population in |01>_L at t_star (selective runs)
    double target_energy = 0.0;
    double target_decay = 0.0;
    int n_evaluations = 0;
    std::vector<std::string> warnings;
};

struct GateReport {
    double fidelity = 0.0;
    double error_total = 1.0;
    double gate_time = 0.0;  // T_g = pi / (4 g_qa)
    double g_qa = 0.0;
    double gamma_qa = 0.0;
    Eigen::Matrix4cd truth_table;  // M = P U0^dag U P on {00, 10, 01, 11}
};

struct EffectiveModel {
    std::string kind;  // "three_level_single_array"
    Eigen::MatrixXcd matrix;
    std::vector<std::string> labels;
    cplx delta1_corr, delta2_corr;  // corrected complex diagonals
};

struct LanczosChain {
    Eigen::MatrixXcd site_states;  // columns: chain states on the two-excitation block
    Eigen::VectorXcd hoppings;     // t_1 .. t_(M-1)
    Eigen::VectorXcd energies;     // delta_0 .. delta_(M-1)
    bool breakdown = false;
};

struct DarkMode {
    Eigen::VectorXcd site_amplitudes;  // N components, <v|v> = 1
    cplx energy;                       // omega_qa - i Gamma_qa / 2
    Eigen::VectorXcd ansatz;           // sqrt(2/(N+1)) sin(q_a z_j)
    double ansatz_overlap_error;       // 1 - |<ansatz|v>|^2
};

// Spectrum of the n_max = 1 operator (ground + single excitations).
BiorthogonalSpectrum single_excitation_spectrum(const LatticeSpec& lattice,
                                                const CouplingMatrix& couplings);

// Most subradiant single-excitation mode and the band-edge sin ansatz.
DarkMode dark_mode_target(const BiorthogonalSpectrum& spec, const LatticeSpec& lattice);

struct OmegaScan {
    double lo_factor = 1e-3;  // grid spans [lo, hi] * Gamma0 * N^(-5/2)
    double hi_factor = 10.0;
    int points = 40;
    bool refine = true;  // golden-section pass around the grid minimum
};

struct ProtocolOptions {
    int n_max = 2;
    double detuning_d = 0.0;  // drive offset from the target eigenenergy
    int krylov_m = 30;
    int dense_threshold = 700;  // full-spectrum route below, Krylov above
    int dense_cap = 6000;
    int coarse_time_points = 300;
    int refine_levels = 3;  // time-grid refinement passes (factor 10 each)
    std::optional<CouplingMatrix> couplings;  // override (e.g. motion-averaged)
    bool use_analytic_gk = false;             // T_g from Table-form coupling
};

// Drive the array from |0> into its most subradiant single-excitation state,
// optimizing the Rabi frequency over the scan.
DarkStatePrepResult prepare_dark_state(const LatticeSpec& lattice, const OmegaScan& scan,
                                       const ProtocolOptions& options = {});

// Two detuned arrays: prepare |10>_L = |q_a 0> and report the leak to |01>_L.
DarkStatePrepResult selective_prepare(const LatticeSpec& lattice, const OmegaScan& scan,
                                      const ProtocolOptions& options = {});

// Resonant inter-array exchange for T_g = pi/(4 g_qa); average gate fidelity
// F = (Tr[M M^dag] + |Tr M|^2) / 20 on the computational subspace.
GateReport iswap_gate(const LatticeSpec& lattice, const ProtocolOptions& options = {});

// Effective three-level model {|0>, |1>, |2>} with second-order corrected
// diagonals (requires the n_max = 3 spectrum).
EffectiveModel build_three_level_model(const LatticeSpec& lattice, double omega0,
                                       const ProtocolOptions& options = {});

// Preparation error predicted by an effective model, drive resonant with |1>.
double effective_model_error(const EffectiveModel& model, double t_max, int time_points = 2000);

// Symmetric Lanczos tridiagonalization of the two-excitation block seeded
// from |11>_L.
LanczosChain build_lanczos_chain(const LatticeSpec& lattice, int chain_length,
                                 const ProtocolOptions& options = {});

// Computational-basis helpers shared by the gate and the acceptance suite.
struct ComputationalBasis {
    std::shared_ptr<const ExcitationBasis> basis;
    Eigen::VectorXcd s00, s10, s01, s11;
    Eigen::VectorXcd dark_single;  // isolated-array dark amplitudes
};
ComputationalBasis computational_basis(const LatticeSpec& lattice, int n_max = 2);

// Symmetric/antisymmetric dark pair of a coupled two-array single-excitation
// spectrum: inter-array coupling g - i gamma/2 from the pair splitting.
struct DarkPair {
    int index_sym = -1;
    int index_asym = -1;
    double g = 0.0;
    double gamma = 0.0;
    double carrier = 0.0;  // mean real energy of the pair
};
DarkPair inter_array_dark_pair(const BiorthogonalSpectrum& spec, const LatticeSpec& lattice);

}  // namespace atomarray
