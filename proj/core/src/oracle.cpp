#include "quadhps/oracle.hpp"

#include <Eigen/SparseLU>
#include <vector>

#include "quadhps/leaf_solver.hpp"

namespace quadhps {

Eigen::SparseMatrix<double> assemble_uniform(const PatchGrid& grid, double lambda) {
    const int n = grid.s;
    const double h = grid.cell_width();
    const double ih2 = 1.0 / (h * h);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(5) * n * n);
    auto idx = [n](int i, int j) { return j * n + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double diag = -4.0 * ih2 + lambda;
            if (i > 0) trip.emplace_back(idx(i, j), idx(i - 1, j), ih2);
            else diag -= ih2;
            if (i < n - 1) trip.emplace_back(idx(i, j), idx(i + 1, j), ih2);
            else diag -= ih2;
            if (j > 0) trip.emplace_back(idx(i, j), idx(i, j - 1), ih2);
            else diag -= ih2;
            if (j < n - 1) trip.emplace_back(idx(i, j), idx(i, j + 1), ih2);
            else diag -= ih2;
            trip.emplace_back(idx(i, j), idx(i, j), diag);
        }
    }
    Eigen::SparseMatrix<double> A(n * n, n * n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

namespace {

Eigen::VectorXd assemble_rhs(const PatchGrid& grid, const ScalarField* f,
                             const BoundaryVector* g) {
    const int n = grid.s;
    const double h = grid.cell_width();
    const double c = 2.0 / (h * h);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n * n);
    auto idx = [n](int i, int j) { return j * n + i; };
    if (f)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) b[idx(i, j)] = (*f)(grid.x_center(i), grid.y_center(j));
    if (g) {
        for (int j = 0; j < n; ++j) {
            b[idx(0, j)] -= c * g->at(Side::West, j);
            b[idx(n - 1, j)] -= c * g->at(Side::East, j);
        }
        for (int i = 0; i < n; ++i) {
            b[idx(i, 0)] -= c * g->at(Side::South, i);
            b[idx(i, n - 1)] -= c * g->at(Side::North, i);
        }
    }
    return b;
}

Eigen::MatrixXd to_field(const Eigen::VectorXd& u, int n) {
    Eigen::MatrixXd U(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) U(i, j) = u[j * n + i];
    return U;
}

} // namespace

Eigen::MatrixXd solve_global_uniform(const PatchGrid& grid, double lambda,
                                     const ScalarField& f, const ScalarField& g) {
    const int n = grid.s;
    if (static_cast<double>(n) * n > 1e5)
        throw std::invalid_argument("solve_global_uniform: refusing more than 1e5 unknowns");
    Eigen::SparseMatrix<double> A = assemble_uniform(grid, lambda);
    BoundaryVector gv = BoundaryVector::sample(grid, TraceRole::Dirichlet, g);
    Eigen::VectorXd b = assemble_rhs(grid, &f, &gv);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success)
        throw SolverError("solve_global_uniform: factorization failed");
    Eigen::VectorXd u = lu.solve(b);
    const double scale = std::max(b.norm(), A.coeffs().cwiseAbs().maxCoeff() * u.norm());
    if (scale > 0.0 && (A * u - b).norm() > 1e-11 * scale)
        throw SolverError("solve_global_uniform: residual check failed");
    return to_field(u, n);
}

Eigen::MatrixXd brute_dtn_union(const PatchGrid& grid, double lambda) {
    const int n = grid.s;
    if (n > 64) throw std::invalid_argument("brute_dtn_union: refusing side counts above 64");
    const double h = grid.cell_width();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(assemble_uniform(grid, lambda));
    if (lu.info() != Eigen::Success)
        throw SolverError("brute_dtn_union: factorization failed");

    Eigen::MatrixXd T(4 * n, 4 * n);
    BoundaryVector g(n, TraceRole::Dirichlet);
    for (int k = 0; k < 4 * n; ++k) {
        g.data().setZero();
        g.data()[k] = 1.0;
        Eigen::VectorXd b = assemble_rhs(grid, nullptr, &g);
        Eigen::MatrixXd U = to_field(lu.solve(b), n);
        Eigen::VectorXd v = -boundary_ring(U);
        v[k] += 1.0;
        T.col(k) = (2.0 / h) * v;
    }
    return T;
}

} // namespace quadhps
