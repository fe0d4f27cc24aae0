// Joint internal-phonon Hamiltonian in the Lamb-Dicke expansion and the
// effective internal operator after adiabatic elimination of the motion.
//
// Motional modes are x and z per atom.  The x quadrature is represented in a
// rotated phase gauge, (b^dag + b) -> -i (b^dag - b), which makes the Raman
// recoil terms complex symmetric; expectation values are gauge-invariant.
// The y displacement has no dynamical mode: it contributes its ground-state
// second-order average to the couplings, which keeps the thermal trace of
// the joint operator exactly equal to the fast-motion-averaged Hamiltonian.

#include <cmath>

#include "atomarray/couplings.hpp"
#include "atomarray/hilbert.hpp"

namespace atomarray {

namespace {

constexpr double k_e = 2.0 * pi;

struct Triplet {
    int row, col;
    cplx val;
};

kern::Csr triplets_to_csr_joint(std::vector<Triplet>& t, int dim) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    kern::Csr m;
    m.rows = m.cols = static_cast<std::size_t>(dim);
    m.row_ptr.assign(dim + 1, 0);
    std::size_t i = 0;
    for (int r = 0; r < dim; ++r) {
        while (i < t.size() && t[i].row == r) {
            const int c = t[i].col;
            cplx v = 0.0;
            while (i < t.size() && t[i].row == r && t[i].col == c) v += t[i++].val;
            if (v != cplx(0.0)) {
                m.col.push_back(c);
                m.val.push_back(v);
            }
        }
        m.row_ptr[r + 1] = static_cast<std::int64_t>(m.col.size());
    }
    return m;
}

// sparse action of a single-mode ladder polynomial on the phonon register
struct PhononTerm {
    int state;
    double amp;
};

// Q = b^dag + b, P = b^dag - b on one mode of a base-d register.
// kind: 0 -> Q, 1 -> P
std::vector<PhononTerm> apply_ladder(int ph, int mode, int d, int kind) {
    std::vector<PhononTerm> out;
    int div = 1;
    for (int m = 0; m < mode; ++m) div *= d;
    const int occ = (ph / div) % d;
    if (occ + 1 < d) out.push_back({ph + div, std::sqrt(occ + 1.0)});
    if (occ > 0) out.push_back({ph - div, (kind == 0 ? 1.0 : -1.0) * std::sqrt(static_cast<double>(occ))});
    return out;
}

std::vector<PhononTerm> apply_poly(const std::vector<PhononTerm>& in, int mode, int d, int kind) {
    std::vector<PhononTerm> out;
    for (const auto& t : in)
        for (const auto& u : apply_ladder(t.state, mode, d, kind))
            out.push_back({u.state, t.amp * u.amp});
    return out;
}

struct InternalElem {
    int row, col;
    cplx val;
};

// sigma+_q sigma-_p (+/-) sigma+_p sigma-_q on the truncated basis
std::vector<InternalElem> pair_flip(const ExcitationBasis& b, int p, int q, double sign_qp) {
    std::vector<InternalElem> out;
    for (int idx = 0; idx < b.dimension(); ++idx) {
        const int ne = b.excitation_count(idx);
        if (ne == 0) continue;
        const auto occ = b.sites(idx);
        auto occupied = [&](int s) {
            for (int v = 0; v < ne; ++v)
                if (occ[v] == s) return true;
            return false;
        };
        auto hop_target = [&](int from, int to) {
            if (ne == 1) return b.index_of_single(to);
            if (ne == 2) {
                const int other = occ[0] == from ? occ[1] : occ[0];
                return b.index_of_pair(other, to);
            }
            int o1 = -1, o2 = -1;
            for (int v = 0; v < 3; ++v) {
                if (occ[v] == from) continue;
                (o1 < 0 ? o1 : o2) = occ[v];
            }
            return b.index_of_triple(o1, o2, to);
        };
        // sigma+_q sigma-_p : p occupied, q empty
        if (occupied(p) && !occupied(q)) out.push_back({hop_target(p, q), idx, cplx(1.0)});
        // sigma+_p sigma-_q with relative sign
        if (occupied(q) && !occupied(p)) out.push_back({hop_target(q, p), idx, cplx(sign_qp)});
    }
    return out;
}

// sigma+_j + sigma-_j (drive gauge)
std::vector<InternalElem> site_flip(const ExcitationBasis& b, int j) {
    std::vector<InternalElem> out;
    for (int idx = 0; idx < b.dimension(); ++idx) {
        const int ne = b.excitation_count(idx);
        if (ne == b.n_max()) continue;
        const auto occ = b.sites(idx);
        bool occupied = false;
        for (int v = 0; v < ne; ++v)
            if (occ[v] == j) occupied = true;
        if (occupied) continue;
        int tgt;
        if (ne == 0)
            tgt = b.index_of_single(j);
        else if (ne == 1)
            tgt = b.index_of_pair(occ[0], j);
        else
            tgt = b.index_of_triple(occ[0], occ[1], j);
        out.push_back({tgt, idx, cplx(1.0)});
        out.push_back({idx, tgt, cplx(1.0)});
    }
    return out;
}

}  // namespace

Eigen::VectorXcd LambDickeSystem::lift(const Eigen::VectorXcd& internal) const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(joint_dim());
    for (int i = 0; i < internal.size(); ++i) v[joint_index(i, 0)] = internal[i];
    return v;
}

Eigen::MatrixXcd LambDickeSystem::ground_phonon_block() const {
    const int nd = internal_basis->dimension();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nd, nd);
    const kern::Csr& s = op.sparse();
    for (int i = 0; i < nd; ++i) {
        const int r = joint_index(i, 0);
        for (auto k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
            const int c = s.col[k];
            if (c % phonon_states == 0) m(i, c / phonon_states) = s.val[k];
        }
    }
    return m;
}

LambDickeSystem assemble_lamb_dicke_system(const LatticeSpec& lattice, const DriveSpec& drive,
                                           const LambDickeParams& params, double rotating_shift,
                                           int n_max) {
    lattice.validate();
    const int n = lattice.n_total();
    if (n > 4) throw std::invalid_argument("assemble_lamb_dicke_system: guarded to n_total <= 4");
    if (params.phonon_dim < 2 || params.phonon_dim > 3)
        throw std::invalid_argument("assemble_lamb_dicke_system: phonon_dim must be 2 or 3");
    if (params.omega_t <= 0) throw std::invalid_argument("assemble_lamb_dicke_system: omega_t > 0 required");

    LambDickeSystem sys;
    sys.internal_basis = std::make_shared<ExcitationBasis>(n, n_max);
    sys.n_modes = 2 * n;  // (x, z) per atom
    sys.phonon_dim = params.phonon_dim;
    int ph_states = 1;
    for (int m = 0; m < sys.n_modes; ++m) ph_states *= params.phonon_dim;
    sys.phonon_states = ph_states;

    const ExcitationBasis& basis = *sys.internal_basis;
    const int nd = basis.dimension();
    const int dim = nd * ph_states;
    const int d = params.phonon_dim;
    const double r0 = params.r0;
    auto mode_x = [](int atom) { return 2 * atom; };
    auto mode_z = [](int atom) { return 2 * atom + 1; };

    std::vector<Triplet> trip;

    // zero order: internal Hamiltonian (pinned couplings) x phonon identity
    const CouplingMatrix pinned = pinned_couplings(lattice);
    const NonHermitianOperator h0 =
        assemble_hamiltonian(pinned, sys.internal_basis, lattice, rotating_shift);
    const Eigen::MatrixXcd h0d = h0.to_dense();
    for (int r = 0; r < nd; ++r)
        for (int c = 0; c < nd; ++c)
            if (h0d(r, c) != cplx(0.0))
                for (int ph = 0; ph < ph_states; ++ph)
                    trip.push_back({r * ph_states + ph, c * ph_states + ph, h0d(r, c)});

    // trap energy per phonon
    for (int ph = 0; ph < ph_states; ++ph) {
        int occ_total = 0, x = ph;
        for (int m = 0; m < sys.n_modes; ++m) {
            occ_total += x % d;
            x /= d;
        }
        if (occ_total > 0)
            for (int r = 0; r < nd; ++r)
                trip.push_back(
                    {r * ph_states + ph, r * ph_states + ph, cplx(params.omega_t * occ_total)});
    }

    // drive, zero order
    const NonHermitianOperator v0 = assemble_drive(drive, sys.internal_basis, lattice);
    const Eigen::MatrixXcd v0d = v0.to_dense();
    for (int r = 0; r < nd; ++r)
        for (int c = 0; c < nd; ++c)
            if (v0d(r, c) != cplx(0.0))
                for (int ph = 0; ph < ph_states; ++ph)
                    trip.push_back({r * ph_states + ph, c * ph_states + ph, v0d(r, c)});

    // interaction expansion terms, pair by pair
    // scatter helper: internal elements x one- or two-mode ladder polynomial
    auto scatter = [&](const std::vector<InternalElem>& internal, cplx coef,
                       const std::vector<std::pair<int, int>>& poly) {
        // poly: list of (mode, kind) applied right-to-left
        if (coef == cplx(0.0)) return;
        for (int ph = 0; ph < ph_states; ++ph) {
            std::vector<PhononTerm> terms{{ph, 1.0}};
            for (auto it = poly.rbegin(); it != poly.rend(); ++it)
                terms = apply_poly(terms, it->first, d, it->second);
            if (terms.empty()) continue;
            for (const auto& ie : internal)
                for (const auto& pt : terms)
                    trip.push_back(
                        {ie.row * ph_states + pt.state, ie.col * ph_states + ph, coef * ie.val * pt.amp});
        }
    };

    const int kQ = 0, kP = 1;
    for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
            const Vec3 rpq = lattice.site_position(p) - lattice.site_position(q);
            const cplx cpq = pair_coupling(rpq, lattice.polarization);
            const Eigen::Vector3cd grad = pair_coupling_grad(rpq, lattice.polarization);
            const Eigen::Matrix3cd hess = pair_coupling_hess(rpq, lattice.polarization);
            const auto sym = pair_flip(basis, p, q, +1.0);   // S_pq
            const auto asym = pair_flip(basis, p, q, -1.0);  // sigma+_q sigma-_p - sigma+_p sigma-_q

            // first order: gradient (z) and Raman recoil (x, gauged)
            // (z_p - z_q) dG/dz S_pq
            scatter(sym, r0 * grad[2], {{mode_z(p), kQ}});
            scatter(sym, -r0 * grad[2], {{mode_z(q), kQ}});
            // i k_e (x_p - x_q) G A_pq -> k_e r0 (P_p - P_q) G A_pq
            scatter(asym, k_e * r0 * cpq, {{mode_x(p), kP}});
            scatter(asym, -k_e * r0 * cpq, {{mode_x(q), kP}});

            // second order
            const double r2 = r0 * r0;
            // -(1/2) k_e^2 (x_p - x_q)^2 G S -> +(1/2) k_e^2 r0^2 (P_p - P_q)^2 G S
            const cplx cxx_raman = 0.5 * k_e * k_e * r2 * cpq;
            scatter(sym, cxx_raman, {{mode_x(p), kP}, {mode_x(p), kP}});
            scatter(sym, cxx_raman, {{mode_x(q), kP}, {mode_x(q), kP}});
            scatter(sym, -2.0 * cxx_raman, {{mode_x(p), kP}, {mode_x(q), kP}});
            // i k_e (x_p - x_q)(z_p - z_q) dG/dz A -> k_e r0^2 (P - P)(Q - Q) dG/dz A
            const cplx cxz = k_e * r2 * grad[2];
            scatter(asym, cxz, {{mode_x(p), kP}, {mode_z(p), kQ}});
            scatter(asym, -cxz, {{mode_x(p), kP}, {mode_z(q), kQ}});
            scatter(asym, -cxz, {{mode_x(q), kP}, {mode_z(p), kQ}});
            scatter(asym, cxz, {{mode_x(q), kP}, {mode_z(q), kQ}});
            // (1/2)(z_p - z_q)^2 d2G/dz2 S
            const cplx czz = 0.5 * r2 * hess(2, 2);
            scatter(sym, czz, {{mode_z(p), kQ}, {mode_z(p), kQ}});
            scatter(sym, czz, {{mode_z(q), kQ}, {mode_z(q), kQ}});
            scatter(sym, -2.0 * czz, {{mode_z(p), kQ}, {mode_z(q), kQ}});
            // (1/2)(x_p - x_q)^2 d2G/dx2 S -> -(1/2) r0^2 (P - P)^2 d2G/dx2 S
            const cplx cxx = -0.5 * r2 * hess(0, 0);
            scatter(sym, cxx, {{mode_x(p), kP}, {mode_x(p), kP}});
            scatter(sym, cxx, {{mode_x(q), kP}, {mode_x(q), kP}});
            scatter(sym, -2.0 * cxx, {{mode_x(p), kP}, {mode_x(q), kP}});
            // y motion: ground-state average of (1/2)(y_p - y_q)^2 d2G/dy2
            scatter(sym, r2 * hess(1, 1), {});
        }
    }

    // drive expansion: V1 (cos profile) and V2 (sin profile)
    const double eta_z = drive.k_z * r0;
    const double eta_x = params.k_x * r0;
    const cplx mi(0.0, -1.0);  // gauged (b^dag + b)_x = -i P_x
    for (int site = 0; site < n; ++site) {
        const double zj = lattice.site_z(site);
        const double cosj = std::cos(drive.k_z * zj);
        const double sinj = std::sin(drive.k_z * zj);
        const auto flip = site_flip(basis, site);
        // V1 = Omega0 cos(K_z z_j) [eta_z Q_z + eta_x (-i P_x)] (sigma+ + sigma-)
        scatter(flip, drive.rabi_omega0 * cosj * eta_z, {{mode_z(site), kQ}});
        scatter(flip, drive.rabi_omega0 * cosj * eta_x * mi, {{mode_x(site), kP}});
        // V2 = -(Omega0/2) sin(K_z z_j) [eta_z^2 Q_z^2 + 2 eta_z eta_x Q_z (-i P_x)
        //                                - eta_x^2 P_x^2] (sigma+ + sigma-)
        const double v2 = -0.5 * drive.rabi_omega0 * sinj;
        scatter(flip, v2 * eta_z * eta_z, {{mode_z(site), kQ}, {mode_z(site), kQ}});
        scatter(flip, v2 * 2.0 * eta_z * eta_x * mi, {{mode_z(site), kQ}, {mode_x(site), kP}});
        scatter(flip, -v2 * eta_x * eta_x, {{mode_x(site), kP}, {mode_x(site), kP}});
    }

    sys.op = NonHermitianOperator(sys.internal_basis, triplets_to_csr_joint(trip, dim));

    // total phonon number operator
    std::vector<Triplet> nt;
    for (int ph = 0; ph < ph_states; ++ph) {
        int occ_total = 0, x = ph;
        for (int m = 0; m < sys.n_modes; ++m) {
            occ_total += x % d;
            x /= d;
        }
        if (occ_total > 0)
            for (int r = 0; r < nd; ++r)
                nt.push_back({r * ph_states + ph, r * ph_states + ph, cplx(occ_total)});
    }
    sys.phonon_number = triplets_to_csr_joint(nt, dim);
    return sys;
}

NonHermitianOperator adiabatic_eliminate_motion(const LatticeSpec& lattice, const DriveSpec& drive,
                                                const LambDickeParams& params,
                                                double rotating_shift, int n_max) {
    lattice.validate();
    if (params.omega_t < 10.0)
        throw std::domain_error("adiabatic_eliminate_motion: requires omega_T >= 10 Gamma0");
    const int n = lattice.n_total();
    auto basis = std::make_shared<ExcitationBasis>(n, n_max);
    const int nd = basis->dimension();
    const double r0 = params.r0;
    const double eta_z = drive.k_z * r0;
    const double eta_x = params.k_x * r0;

    // H_eff,0: off-diagonal couplings scaled by (1 - 2 eta^2)
    const CouplingMatrix scaled = analytic_averaged_couplings(lattice, r0);
    Eigen::MatrixXcd heff =
        assemble_hamiltonian(scaled, basis, lattice, rotating_shift).to_dense();

    // V_eff: drive scaled by 1 - eta^2 (K_z/k_e)^2 - eta^2 (K_x/k_e)^2
    DriveSpec veff = drive;
    veff.rabi_omega0 *= 1.0 - eta_z * eta_z - eta_x * eta_x;
    heff += assemble_drive(veff, basis, lattice).to_dense();

    // W_eff = -sum_modes B_m (omega_T + H_rot)^(-1) B_m
    const CouplingMatrix pinned = pinned_couplings(lattice);
    const Eigen::MatrixXcd hrot =
        assemble_hamiltonian(pinned, basis, lattice, rotating_shift).to_dense();
    Eigen::MatrixXcd denom = hrot;
    denom.diagonal().array() += params.omega_t;
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(denom);

    auto to_dense_op = [&](const std::vector<InternalElem>& elems, cplx coef) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(nd, nd);
        for (const auto& e : elems) m(e.row, e.col) += coef * e.val;
        return m;
    };

    for (int atom = 0; atom < n; ++atom) {
        const double cosj = std::cos(drive.k_z * lattice.site_z(atom));
        // z mode of `atom`
        Eigen::MatrixXcd bz = Eigen::MatrixXcd::Zero(nd, nd);
        // x mode of `atom` (ungauged; the mode-resolved second-order product
        // is gauge-invariant)
        Eigen::MatrixXcd bx = Eigen::MatrixXcd::Zero(nd, nd);
        for (int q = 0; q < n; ++q) {
            if (q == atom) continue;
            const Vec3 rpq = lattice.site_position(atom) - lattice.site_position(q);
            const cplx cpq = pair_coupling(rpq, lattice.polarization);
            const Eigen::Vector3cd grad = pair_coupling_grad(rpq, lattice.polarization);
            bz += to_dense_op(pair_flip(*basis, atom, q, +1.0), r0 * grad[2]);
            bx += to_dense_op(pair_flip(*basis, atom, q, -1.0), cplx(0.0, k_e * r0) * cpq);
        }
        const auto flip = site_flip(*basis, atom);
        bz += to_dense_op(flip, drive.rabi_omega0 * cosj * eta_z);
        bx += to_dense_op(flip, drive.rabi_omega0 * cosj * eta_x);
        heff -= bz * lu.solve(bz);
        heff -= bx * lu.solve(bx);
    }

    return NonHermitianOperator(basis, std::move(heff));
}

}  // namespace atomarray
