#include "atomarray/hilbert.hpp"

#include <algorithm>
#include <cmath>

#include "atomarray/couplings.hpp"

namespace atomarray {

namespace {

constexpr double k_e = 2.0 * pi;

struct Triplet {
    int row, col;
    cplx val;
};

kern::Csr triplets_to_csr(std::vector<Triplet>& t, int dim) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    kern::Csr m;
    m.rows = m.cols = static_cast<std::size_t>(dim);
    m.row_ptr.assign(dim + 1, 0);
    m.col.reserve(t.size());
    m.val.reserve(t.size());
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

}  // namespace

// ---------------------------------------------------------------------------
// ExcitationBasis

long long ExcitationBasis::dimension_for(int n_sites, int n_max) {
    long long d = 1;
    long long binom = 1;
    for (int m = 1; m <= n_max; ++m) {
        binom = binom * (n_sites - m + 1) / m;
        d += binom;
    }
    return d;
}

ExcitationBasis::ExcitationBasis(int n_sites, int n_max) : n_sites_(n_sites), n_max_(n_max) {
    if (n_max < 1 || n_max > 3)
        throw std::invalid_argument("ExcitationBasis: n_max must be 1, 2 or 3");
    if (n_max > n_sites)
        throw std::invalid_argument("ExcitationBasis: n_max exceeds the number of sites");
    const long long d = dimension_for(n_sites, n_max);
    if (d > 1 << 28) throw std::invalid_argument("ExcitationBasis: dimension too large");
    dim_ = static_cast<int>(d);
    singles_off_ = 1;
    pairs_off_ = 1 + n_sites;
    triples_off_ = pairs_off_ + (n_max >= 2 ? n_sites * (n_sites - 1) / 2 : 0);
}

int ExcitationBasis::index_of_single(int i) const { return singles_off_ + i; }

int ExcitationBasis::index_of_pair(int i, int j) const {
    if (i > j) std::swap(i, j);
    // lexicographic rank of (i, j), i < j
    return pairs_off_ + i * n_sites_ - i * (i + 1) / 2 + (j - i - 1);
}

int ExcitationBasis::index_of_triple(int i, int j, int k) const {
    int a = i, b = j, c = k;
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    const int n = n_sites_;
    // rank of (a, b, c), a < b < c, lexicographic
    auto c2 = [](long long x) { return x * (x - 1) / 2; };
    long long rank = 0;
    for (int f = 0; f < a; ++f) rank += c2(n - 1 - f);
    rank += static_cast<long long>(b - a - 1) * (n - a - 1) -
            static_cast<long long>(b - a - 1) * (b - a) / 2 + (c - b - 1);
    return triples_off_ + static_cast<int>(rank);
}

int ExcitationBasis::excitation_count(int idx) const {
    if (idx < singles_off_) return 0;
    if (idx < pairs_off_) return 1;
    if (idx < triples_off_) return 2;
    return 3;
}

std::array<int, 3> ExcitationBasis::sites(int idx) const {
    std::array<int, 3> s{-1, -1, -1};
    const int n = n_sites_;
    if (idx < singles_off_) return s;
    if (idx < pairs_off_) {
        s[0] = idx - singles_off_;
        return s;
    }
    if (idx < triples_off_) {
        int r = idx - pairs_off_;
        int i = 0;
        while (r >= n - 1 - i) {
            r -= n - 1 - i;
            ++i;
        }
        s[0] = i;
        s[1] = i + 1 + r;
        return s;
    }
    int r = idx - triples_off_;
    int a = 0;
    auto c2 = [](int x) { return x * (x - 1) / 2; };
    while (r >= c2(n - 1 - a)) {
        r -= c2(n - 1 - a);
        ++a;
    }
    int b = a + 1;
    while (r >= n - 1 - b) {
        r -= n - 1 - b;
        ++b;
    }
    s[0] = a;
    s[1] = b;
    s[2] = b + 1 + r;
    return s;
}

ExcitationBasis build_basis(int n_sites, int n_max) { return ExcitationBasis(n_sites, n_max); }

// ---------------------------------------------------------------------------
// NonHermitianOperator

NonHermitianOperator::NonHermitianOperator(std::shared_ptr<const ExcitationBasis> basis,
                                           Eigen::MatrixXcd m)
    : basis_(std::move(basis)), dense_(std::move(m)) {
    dim_ = static_cast<int>(dense_.rows());
}

NonHermitianOperator::NonHermitianOperator(std::shared_ptr<const ExcitationBasis> basis, kern::Csr m)
    : basis_(std::move(basis)), sparse_(std::move(m)) {
    dim_ = static_cast<int>(sparse_.rows);
}

const Eigen::MatrixXcd& NonHermitianOperator::dense() const {
    if (!is_dense()) throw std::logic_error("operator stored sparse; use to_dense()");
    return dense_;
}

const kern::Csr& NonHermitianOperator::sparse() const {
    if (is_dense()) throw std::logic_error("operator stored dense");
    return sparse_;
}

Eigen::MatrixXcd NonHermitianOperator::to_dense() const {
    if (is_dense()) return dense_;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int r = 0; r < dim_; ++r)
        for (auto k = sparse_.row_ptr[r]; k < sparse_.row_ptr[r + 1]; ++k)
            m(r, sparse_.col[k]) = sparse_.val[k];
    return m;
}

void NonHermitianOperator::apply(const cplx* x, cplx* y) const {
    if (is_dense()) {
        Eigen::Map<const Eigen::VectorXcd> xv(x, dim_);
        Eigen::Map<Eigen::VectorXcd> yv(y, dim_);
        yv.noalias() = dense_ * xv;
    } else {
        kern::csr_apply(sparse_, x, y);
    }
}

Eigen::VectorXcd NonHermitianOperator::apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y(dim_);
    apply(x.data(), y.data());
    return y;
}

Eigen::MatrixXcd NonHermitianOperator::hermitian_part() const {
    const Eigen::MatrixXcd m = to_dense();
    return 0.5 * (m + m.adjoint());
}

Eigen::MatrixXcd NonHermitianOperator::antihermitian_part() const {
    const Eigen::MatrixXcd m = to_dense();
    return 0.5 * (m - m.adjoint());
}

double NonHermitianOperator::symmetry_defect() const {
    if (is_dense()) return (dense_ - dense_.transpose()).cwiseAbs().maxCoeff();
    double defect = 0.0;
    // compare each stored entry against its transposed counterpart
    const auto& s = sparse_;
    auto entry = [&](int r, int c) -> cplx {
        for (auto k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k)
            if (s.col[k] == c) return s.val[k];
        return 0.0;
    };
    for (std::size_t r = 0; r < s.rows; ++r)
        for (auto k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k)
            defect = std::max(defect, std::abs(s.val[k] - entry(s.col[k], static_cast<int>(r))));
    return defect;
}

NonHermitianOperator& NonHermitianOperator::operator+=(const NonHermitianOperator& other) {
    if (dim_ != other.dim_) throw std::invalid_argument("operator dimension mismatch");
    if (is_dense() && other.is_dense()) {
        dense_ += other.dense_;
        return *this;
    }
    throw std::logic_error("operator+= requires dense storage on both sides");
}

// ---------------------------------------------------------------------------
// Assembly

std::vector<double> DriveSpec::phase_profile(const LatticeSpec& lattice) const {
    std::vector<double> s(lattice.n_atoms);
    for (int j = 1; j <= lattice.n_atoms; ++j)
        s[j - 1] = std::sin(k_z * lattice.spacing * j);
    return s;
}

double band_edge_momentum(const LatticeSpec& lattice) {
    return pi * lattice.n_atoms / (lattice.spacing * (lattice.n_atoms + 1));
}

namespace {

// enumerate (state, excited sites) pairs and emit Hamiltonian elements
template <typename Emit>
void hamiltonian_elements(const CouplingMatrix& cm, const ExcitationBasis& basis,
                          const LatticeSpec& lattice, double rotating_shift, Emit&& emit) {
    const int dim = basis.dimension();
    const int n = basis.n_sites();
    for (int idx = 0; idx < dim; ++idx) {
        const int ne = basis.excitation_count(idx);
        const auto occ = basis.sites(idx);
        cplx diag = -rotating_shift * static_cast<double>(ne);
        for (int u = 0; u < ne; ++u) {
            diag += cm.coupling(occ[u], occ[u]);
            if (lattice.n_arrays == 2 && lattice.site_in_array_b(occ[u]))
                diag += lattice.detuning_b;
        }
        if (diag != cplx(0.0)) emit(idx, idx, diag);
        // hop the excitation at site occ[u] to any empty site j
        for (int u = 0; u < ne; ++u) {
            const int i = occ[u];
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                bool occupied = false;
                for (int v = 0; v < ne; ++v)
                    if (occ[v] == j) occupied = true;
                if (occupied) continue;
                int tgt;
                if (ne == 1) {
                    tgt = basis.index_of_single(j);
                } else if (ne == 2) {
                    const int other = occ[u == 0 ? 1 : 0];
                    tgt = basis.index_of_pair(other, j);
                } else {
                    const int o1 = occ[u == 0 ? 1 : 0];
                    const int o2 = occ[u == 2 ? 1 : 2];
                    tgt = basis.index_of_triple(o1, o2, j);
                }
                emit(tgt, idx, cm.coupling(j, i));
            }
        }
    }
}

template <typename Emit>
void drive_elements(const DriveSpec& drive, const ExcitationBasis& basis,
                    const LatticeSpec& lattice, DrivenArrays arrays, Emit&& emit) {
    const int dim = basis.dimension();
    const int n = basis.n_sites();
    const auto profile = drive.phase_profile(lattice);
    auto site_amp = [&](int site) -> double {
        const bool in_b = lattice.n_arrays == 2 && lattice.site_in_array_b(site);
        if (arrays == DrivenArrays::A && in_b) return 0.0;
        if (arrays == DrivenArrays::B && !in_b) return 0.0;
        return drive.rabi_omega0 * profile[site % lattice.n_atoms];
    };
    for (int idx = 0; idx < dim; ++idx) {
        const int ne = basis.excitation_count(idx);
        const auto occ = basis.sites(idx);
        if (ne == basis.n_max()) continue;  // emit upward couplings from the lower state
        for (int j = 0; j < n; ++j) {
            bool occupied = false;
            for (int v = 0; v < ne; ++v)
                if (occ[v] == j) occupied = true;
            if (occupied) continue;
            const double amp = site_amp(j);
            if (amp == 0.0) continue;
            int tgt;
            if (ne == 0)
                tgt = basis.index_of_single(j);
            else if (ne == 1)
                tgt = basis.index_of_pair(occ[0], j);
            else
                tgt = basis.index_of_triple(occ[0], occ[1], j);
            emit(tgt, idx, cplx(amp));
            emit(idx, tgt, cplx(amp));
        }
    }
}

}  // namespace

NonHermitianOperator assemble_hamiltonian(const CouplingMatrix& couplings,
                                          std::shared_ptr<const ExcitationBasis> basis,
                                          const LatticeSpec& lattice, double rotating_shift,
                                          int dense_threshold) {
    if (couplings.size() != basis->n_sites())
        throw std::invalid_argument("assemble_hamiltonian: coupling matrix does not match basis");
    const int dim = basis->dimension();
    if (dim <= dense_threshold) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        hamiltonian_elements(couplings, *basis, lattice, rotating_shift,
                             [&](int r, int c, cplx v) { m(r, c) += v; });
        return NonHermitianOperator(std::move(basis), std::move(m));
    }
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(dim) * (2 * basis->n_sites()));
    hamiltonian_elements(couplings, *basis, lattice, rotating_shift,
                         [&](int r, int c, cplx v) { t.push_back({r, c, v}); });
    return NonHermitianOperator(std::move(basis), triplets_to_csr(t, dim));
}

NonHermitianOperator assemble_drive(const DriveSpec& drive,
                                    std::shared_ptr<const ExcitationBasis> basis,
                                    const LatticeSpec& lattice, DrivenArrays arrays,
                                    int dense_threshold) {
    const int dim = basis->dimension();
    if (dim <= dense_threshold) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        drive_elements(drive, *basis, lattice, arrays,
                       [&](int r, int c, cplx v) { m(r, c) += v; });
        return NonHermitianOperator(std::move(basis), std::move(m));
    }
    std::vector<Triplet> t;
    drive_elements(drive, *basis, lattice, arrays,
                   [&](int r, int c, cplx v) { t.push_back({r, c, v}); });
    return NonHermitianOperator(std::move(basis), triplets_to_csr(t, dim));
}

NonHermitianOperator assemble_driven_system(const CouplingMatrix& couplings,
                                            std::shared_ptr<const ExcitationBasis> basis,
                                            const LatticeSpec& lattice, const DriveSpec& drive,
                                            DrivenArrays arrays, double rotating_shift,
                                            int dense_threshold) {
    if (couplings.size() != basis->n_sites())
        throw std::invalid_argument("assemble_driven_system: coupling matrix does not match basis");
    const int dim = basis->dimension();
    if (dim <= dense_threshold) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        auto emit = [&](int r, int c, cplx v) { m(r, c) += v; };
        hamiltonian_elements(couplings, *basis, lattice, rotating_shift, emit);
        drive_elements(drive, *basis, lattice, arrays, emit);
        return NonHermitianOperator(std::move(basis), std::move(m));
    }
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(dim) * (2 * basis->n_sites() + 4));
    auto emit = [&](int r, int c, cplx v) { t.push_back({r, c, v}); };
    hamiltonian_elements(couplings, *basis, lattice, rotating_shift, emit);
    drive_elements(drive, *basis, lattice, arrays, emit);
    return NonHermitianOperator(std::move(basis), triplets_to_csr(t, dim));
}

}  // namespace atomarray
