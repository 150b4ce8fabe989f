#include "quadhps/leaf_solver.hpp"

#include <cmath>

namespace quadhps {

namespace {
constexpr double kOrthoTol = 1e-12;
constexpr double kResonanceTol = 1e-12;
} // namespace

SineTransform::SineTransform(int s) : s_(s) {
    if (s < 2) throw std::invalid_argument("SineTransform: need at least 2 cells");
    const double pi = std::acos(-1.0);
    V_.resize(s, s);
    nu_.resize(s);
    for (int k = 0; k < s; ++k) {
        const double th = (k + 1) * pi / s;
        for (int i = 0; i < s; ++i) V_(i, k) = std::sin((i + 0.5) * th);
        const double sn = std::sin(0.5 * th);
        nu_[k] = -4.0 * sn * sn;
    }
    // Columns are orthogonal; squared norms are s/2 except s for the last mode.
    Eigen::VectorXd inv_norm(s);
    for (int k = 0; k < s; ++k) inv_norm[k] = (k == s - 1) ? 1.0 / s : 2.0 / s;
    Vinv_ = inv_norm.asDiagonal() * V_.transpose();
    const double err = (Vinv_ * V_ - Eigen::MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff();
    if (err > kOrthoTol)
        throw SolverError("SineTransform: eigenbasis orthogonality check failed");
}

Eigen::MatrixXd solve_leaf(const LeafDiscretization& d, const SineTransform& st,
                           const BoundaryVector* g, const Eigen::MatrixXd* F) {
    const int s = d.grid.s;
    if (st.size() != s) throw std::invalid_argument("solve_leaf: transform size mismatch");
    const double h = d.grid.cell_width();
    const double ih2 = 1.0 / (h * h);

    Eigen::MatrixXd rhs = F ? *F : Eigen::MatrixXd::Zero(s, s);
    if (g) {
        if (g->points_per_side() != s)
            throw std::invalid_argument("solve_leaf: boundary data size mismatch");
        const double c = 2.0 * ih2;
        rhs.row(0) -= c * g->side(Side::West).transpose();
        rhs.row(s - 1) -= c * g->side(Side::East).transpose();
        rhs.col(0) -= c * g->side(Side::South);
        rhs.col(s - 1) -= c * g->side(Side::North);
    }

    Eigen::MatrixXd hat = st.inverse_basis() * rhs * st.inverse_basis().transpose();
    const Eigen::VectorXd& nu = st.eigenvalues();
    const double guard = kResonanceTol * ih2;
    for (int j = 0; j < s; ++j) {
        for (int i = 0; i < s; ++i) {
            const double denom = (nu[i] + nu[j]) * ih2 + d.lambda;
            if (std::abs(denom) < guard) throw SolverError("solve_leaf: resonant patch");
            hat(i, j) /= denom;
        }
    }
    return st.basis() * hat * st.basis().transpose();
}

Eigen::MatrixXd solve_leaf(const LeafDiscretization& d, const BoundaryVector* g,
                           const Eigen::MatrixXd* F) {
    SineTransform st(d.grid.s);
    return solve_leaf(d, st, g, F);
}

Eigen::MatrixXd sample_cell_field(const PatchGrid& grid, const ScalarField& fn) {
    Eigen::MatrixXd F(grid.s, grid.s);
    for (int j = 0; j < grid.s; ++j)
        for (int i = 0; i < grid.s; ++i) F(i, j) = fn(grid.x_center(i), grid.y_center(j));
    return F;
}

Eigen::VectorXd boundary_ring(const Eigen::MatrixXd& U) {
    const int s = static_cast<int>(U.rows());
    Eigen::VectorXd r(4 * s);
    r.segment(0, s) = U.row(0).transpose();     // West: x-low cells
    r.segment(s, s) = U.row(s - 1).transpose(); // East
    r.segment(2 * s, s) = U.col(0);             // South
    r.segment(3 * s, s) = U.col(s - 1);         // North
    return r;
}

namespace {

/// Columns of the DtN for unit Dirichlet data on the listed boundary indices.
Eigen::MatrixXd dtn_columns(const LeafDiscretization& d, const SineTransform& st,
                            int col_begin, int col_count) {
    const int s = d.grid.s;
    const double h = d.grid.cell_width();
    Eigen::MatrixXd cols(4 * s, col_count);
    BoundaryVector g(s, TraceRole::Dirichlet);
    for (int c = 0; c < col_count; ++c) {
        const int k = col_begin + c;
        g.data().setZero();
        g.data()[k] = 1.0;
        Eigen::MatrixXd U = solve_leaf(d, st, &g, nullptr);
        Eigen::VectorXd v = -boundary_ring(U);
        v[k] += 1.0;
        cols.col(c) = (2.0 / h) * v;
    }
    return cols;
}

} // namespace

Eigen::MatrixXd build_dtn_leaf(const LeafDiscretization& d) {
    SineTransform st(d.grid.s);
    return dtn_columns(d, st, 0, 4 * d.grid.s);
}

Eigen::VectorXi boundary_perm_reflect_x(int s) {
    Eigen::VectorXi p(4 * s);
    for (int j = 0; j < s; ++j) {
        p[j] = s + j;                         // W -> E
        p[s + j] = j;                         // E -> W
        p[2 * s + j] = 2 * s + (s - 1 - j);   // S reversed
        p[3 * s + j] = 3 * s + (s - 1 - j);   // N reversed
    }
    return p;
}

Eigen::VectorXi boundary_perm_reflect_y(int s) {
    Eigen::VectorXi p(4 * s);
    for (int j = 0; j < s; ++j) {
        p[j] = s - 1 - j;                     // W reversed
        p[s + j] = s + (s - 1 - j);           // E reversed
        p[2 * s + j] = 3 * s + j;             // S -> N
        p[3 * s + j] = 2 * s + j;             // N -> S
    }
    return p;
}

Eigen::VectorXi boundary_perm_rotate(int s) {
    // (x,y) -> (-y,x): W -> S reversed, S -> E straight, E -> N reversed, N -> W straight.
    Eigen::VectorXi p(4 * s);
    for (int j = 0; j < s; ++j) {
        p[j] = 2 * s + (s - 1 - j);
        p[s + j] = 3 * s + (s - 1 - j);
        p[2 * s + j] = s + j;
        p[3 * s + j] = j;
    }
    return p;
}

Eigen::VectorXi boundary_perm_diagonal(int s) {
    Eigen::VectorXi p(4 * s);
    for (int j = 0; j < s; ++j) {
        p[j] = 2 * s + j;     // W -> S
        p[s + j] = 3 * s + j; // E -> N
        p[2 * s + j] = j;     // S -> W
        p[3 * s + j] = s + j; // N -> E
    }
    return p;
}

Eigen::MatrixXd build_dtn_leaf_fast(const LeafDiscretization& d, bool* fallback) {
    const int s = d.grid.s;
    SineTransform st(s);
    if (fallback) *fallback = false;

    // W-side columns carry all independent entries: [A1; A2; A3; A4] by row side.
    Eigen::MatrixXd colsW = dtn_columns(d, st, 0, s);

    // Consistency of the computed block: y-reflection equivariance forces
    // T(N_i, W_j) = T(S_i, W_{s-1-j}), i.e. the N-row block equals the S-row
    // block with its columns reversed.
    double scale = colsW.cwiseAbs().maxCoeff();
    double dev = 0.0;
    for (int j = 0; j < s; ++j)
        dev = std::max(dev, (colsW.block(3 * s, j, s, 1) -
                             colsW.block(2 * s, s - 1 - j, s, 1))
                                .cwiseAbs()
                                .maxCoeff());
    if (dev > 1e-10 * scale) {
        if (fallback) *fallback = true;
        return dtn_columns(d, st, 0, 4 * s);
    }

    Eigen::MatrixXd T(4 * s, 4 * s);
    T.block(0, 0, 4 * s, s) = colsW;
    const Eigen::VectorXi px = boundary_perm_reflect_x(s);
    const Eigen::VectorXi pd = boundary_perm_diagonal(s);
    // Symmetry equivariance: the column for a mapped unit trace is the mapped
    // W column, T e_{P a} = P (T e_a).
    for (int j = 0; j < s; ++j)
        for (int a = 0; a < 4 * s; ++a) T(px[a], s + j) = colsW(a, j); // E columns
    for (int j = 0; j < s; ++j)
        for (int a = 0; a < 4 * s; ++a) T(pd[a], 2 * s + j) = colsW(a, j); // S columns
    for (int j = 0; j < s; ++j)
        for (int a = 0; a < 4 * s; ++a) T(pd[a], 3 * s + j) = T(a, s + j); // N from E
    return T;
}

BoundaryVector build_h_leaf(const LeafDiscretization& d, const Eigen::MatrixXd& F) {
    SineTransform st(d.grid.s);
    Eigen::MatrixXd U = solve_leaf(d, st, nullptr, &F);
    const double h = d.grid.cell_width();
    return BoundaryVector(d.grid.s, TraceRole::InhomFlux, (-2.0 / h) * boundary_ring(U));
}

const SineTransform& LeafCache::transform(int s) {
    auto it = transforms_.find(s);
    if (it == transforms_.end())
        it = transforms_.emplace(s, std::make_unique<SineTransform>(s)).first;
    return *it->second;
}

std::shared_ptr<const Eigen::MatrixXd> LeafCache::dtn(const LeafDiscretization& d) {
    Key key{d.grid.s, d.grid.cell_width(), d.lambda};
    auto it = dtns_.find(key);
    if (it != dtns_.end()) {
        ++stats_.dtn_hits;
        return it->second;
    }
    bool fell_back = false;
    auto T = std::make_shared<Eigen::MatrixXd>(build_dtn_leaf_fast(d, &fell_back));
    ++stats_.dtn_builds;
    if (fell_back) ++stats_.fast_fallbacks;
    dtns_.emplace(key, T);
    return T;
}

void LeafCache::clear() {
    transforms_.clear();
    dtns_.clear();
    stats_ = Stats{};
}

} // namespace quadhps
