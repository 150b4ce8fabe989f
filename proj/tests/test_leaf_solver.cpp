#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "quadhps/leaf_solver.hpp"
#include "quadhps/oracle.hpp"

using namespace quadhps;

namespace {

// The 1D ghost-eliminated second-difference operator the sine basis diagonalizes.
Eigen::MatrixXd second_difference_1d(int s) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(s, s);
    for (int i = 0; i < s; ++i) {
        A(i, i) = -2.0;
        if (i > 0) A(i, i - 1) = 1.0;
        if (i + 1 < s) A(i, i + 1) = 1.0;
    }
    A(0, 0) = -3.0;
    A(s - 1, s - 1) = -3.0;
    return A;
}

bool is_permutation(const Eigen::VectorXi& p) {
    std::vector<int> v(p.data(), p.data() + p.size());
    std::sort(v.begin(), v.end());
    for (int k = 0; k < static_cast<int>(v.size()); ++k)
        if (v[k] != k) return false;
    return true;
}

Eigen::VectorXi compose(const Eigen::VectorXi& p, const Eigen::VectorXi& q) {
    Eigen::VectorXi r(p.size());
    for (int a = 0; a < p.size(); ++a) r[a] = p[q[a]];
    return r;
}

bool is_identity(const Eigen::VectorXi& p) {
    for (int a = 0; a < p.size(); ++a)
        if (p[a] != a) return false;
    return true;
}

} // namespace

TEST_CASE("sine basis diagonalizes the 1D ghost-eliminated operator") {
    for (int s : {4, 8, 16}) {
        SineTransform st(s);
        const Eigen::MatrixXd A = second_difference_1d(s);
        const auto& V = st.basis();
        const auto& nu = st.eigenvalues();
        REQUIRE(V.rows() == s);
        REQUIRE(V.cols() == s);
        for (int k = 0; k < s; ++k) {
            const Eigen::VectorXd res = A * V.col(k) - nu[k] * V.col(k);
            CHECK(res.cwiseAbs().maxCoeff() < 1e-12);
            CHECK(nu[k] == doctest::Approx(-4.0 * std::pow(std::sin((k + 1) * M_PI / (2.0 * s)), 2))
                               .epsilon(1e-13));
        }
        // Forward then inverse transform is the identity.
        CHECK((st.inverse_basis() * V - Eigen::MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("leaf solve matches the assembled reference system") {
    const PatchGrid grid({0.2, -0.3, 1.2, 0.7}, 16);
    auto u_fn = [](double x, double y) { return std::sin(2.0 * x) * std::cos(y) + 0.5 * x * y; };
    for (double lambda : {0.0, 0.3}) {
        auto f_fn = [lambda](double x, double y) {
            const double u = std::sin(2.0 * x) * std::cos(y) + 0.5 * x * y;
            return -5.0 * std::sin(2.0 * x) * std::cos(y) + lambda * u;
        };
        const LeafDiscretization d{grid, lambda};
        const auto g = BoundaryVector::sample(grid, TraceRole::Dirichlet, u_fn);
        const Eigen::MatrixXd F = sample_cell_field(grid, f_fn);
        const Eigen::MatrixXd U = solve_leaf(d, &g, &F);
        const Eigen::MatrixXd U_ref = solve_global_uniform(grid, lambda, f_fn, u_fn);
        CHECK((U - U_ref).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("leaf solve handles null boundary and null source") {
    const PatchGrid grid({0.0, 0.0, 1.0, 1.0}, 8);
    const LeafDiscretization d{grid, 0.0};
    const Eigen::MatrixXd U0 = solve_leaf(d, nullptr, nullptr);
    CHECK(U0.cwiseAbs().maxCoeff() == 0.0);
    // Constant Dirichlet data reproduces the constant exactly.
    BoundaryVector g(8, TraceRole::Dirichlet);
    g.data().setConstant(2.5);
    const Eigen::MatrixXd Uc = solve_leaf(d, &g, nullptr);
    CHECK((Uc.array() - 2.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("leaf trace-to-flux operator matches the assembled one") {
    const PatchGrid grid({-0.4, 0.1, 0.6, 1.1}, 8);
    for (double lambda : {0.0, 0.3}) {
        const LeafDiscretization d{grid, lambda};
        const Eigen::MatrixXd T = build_dtn_leaf(d);
        const Eigen::MatrixXd T_ref = brute_dtn_union(grid, lambda);
        const double scale = T_ref.cwiseAbs().maxCoeff();
        REQUIRE(T.rows() == 32);
        CHECK((T - T_ref).cwiseAbs().maxCoeff() < 1e-9 * scale);
        // Symmetric operator; rows sum to lambda-weighted mass only when lambda = 0.
        CHECK((T - T.transpose()).cwiseAbs().maxCoeff() < 1e-9 * scale);
        if (lambda == 0.0) CHECK(T.rowwise().sum().cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("symmetry-reduced trace-to-flux build equals the full build") {
    for (int s : {4, 10}) {
        const PatchGrid grid({0.3, 0.3, 1.3, 1.3}, s);
        const LeafDiscretization d{grid, 0.07};
        bool fallback = true;
        const Eigen::MatrixXd T_fast = build_dtn_leaf_fast(d, &fallback);
        const Eigen::MatrixXd T_full = build_dtn_leaf(d);
        CHECK_FALSE(fallback);
        CHECK((T_fast - T_full).cwiseAbs().maxCoeff() < 1e-11 * T_full.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("inhomogeneous boundary flux agrees with the zero-Dirichlet solve") {
    const PatchGrid grid({0.0, 0.0, 0.5, 0.5}, 8);
    const LeafDiscretization d{grid, 0.02};
    auto f_fn = [](double x, double y) { return std::exp(x - y) + 3.0 * x; };
    const Eigen::MatrixXd F = sample_cell_field(grid, f_fn);
    const BoundaryVector h = build_h_leaf(d, F);
    const Eigen::MatrixXd U = solve_leaf(d, nullptr, &F);
    const double inv_h = 1.0 / grid.cell_width();
    const Eigen::VectorXd ring = boundary_ring(U);
    // Outward flux of the zero-trace solution: (2/h)(0 - u_inner).
    CHECK((h.data() + 2.0 * inv_h * ring).cwiseAbs().maxCoeff() < 1e-12 * ring.cwiseAbs().maxCoeff());
    CHECK(h.role() == TraceRole::InhomFlux);
}

TEST_CASE("resonant shift is rejected") {
    const int s = 8;
    const PatchGrid grid({0.0, 0.0, 1.0, 1.0}, s);
    // lambda canceling the lowest eigenvalue pair makes the system singular.
    const double h = grid.cell_width();
    const double lambda_res = 8.0 * std::pow(std::sin(M_PI / (2.0 * s)), 2) / (h * h);
    const LeafDiscretization d{grid, lambda_res};
    const Eigen::MatrixXd F = Eigen::MatrixXd::Ones(s, s);
    CHECK_THROWS_AS(solve_leaf(d, nullptr, &F), SolverError);
}

TEST_CASE("boundary permutations compose as the square symmetries") {
    for (int s : {4, 6}) {
        const auto rx = boundary_perm_reflect_x(s);
        const auto ry = boundary_perm_reflect_y(s);
        const auto rot = boundary_perm_rotate(s);
        const auto dia = boundary_perm_diagonal(s);
        for (const auto* p : {&rx, &ry, &rot, &dia}) CHECK(is_permutation(*p));
        CHECK(is_identity(compose(rx, rx)));
        CHECK(is_identity(compose(ry, ry)));
        CHECK(is_identity(compose(dia, dia)));
        CHECK(is_identity(compose(rot, compose(rot, compose(rot, rot)))));
        // Reflection in x maps the first W entry to the first E entry.
        CHECK(rx[0] == s);
        // The diagonal swap maps W <-> S blockwise.
        CHECK(dia[0] == 2 * s);
    }
}

TEST_CASE("permutations transform the trace-to-flux operator consistently") {
    // T of a square patch is invariant under its symmetries: P T P^-1 = T.
    const PatchGrid grid({0.0, 0.0, 1.0, 1.0}, 6);
    const LeafDiscretization d{grid, 0.1};
    const Eigen::MatrixXd T = build_dtn_leaf(d);
    const double scale = T.cwiseAbs().maxCoeff();
    for (const auto& p :
         {boundary_perm_reflect_x(6), boundary_perm_reflect_y(6), boundary_perm_rotate(6),
          boundary_perm_diagonal(6)}) {
        Eigen::MatrixXd Tp(T.rows(), T.cols());
        for (int a = 0; a < T.rows(); ++a)
            for (int b = 0; b < T.cols(); ++b) Tp(p[a], p[b]) = T(a, b);
        CHECK((Tp - T).cwiseAbs().maxCoeff() < 1e-11 * scale);
    }
}

TEST_CASE("leaf cache shares operators across congruent patches") {
    LeafCache cache;
    const double h = 0.125;
    const LeafDiscretization a{PatchGrid({0.0, 0.0, 1.0, 1.0}, 8), 0.4};
    const LeafDiscretization b{PatchGrid({3.0, -2.0, 4.0, -1.0}, 8), 0.4};
    auto Ta = cache.dtn(a);
    auto Tb = cache.dtn(b);
    CHECK(cache.stats().dtn_builds == 1);
    CHECK(cache.stats().dtn_hits == 1);
    CHECK(Ta.get() == Tb.get()); // same shared operator
    CHECK(a.grid.cell_width() == doctest::Approx(h));
    // A different lambda is a different operator.
    const LeafDiscretization c{PatchGrid({0.0, 0.0, 1.0, 1.0}, 8), 0.5};
    cache.dtn(c);
    CHECK(cache.stats().dtn_builds == 2);
    // Transforms are cached per size.
    const SineTransform& t1 = cache.transform(8);
    const SineTransform& t2 = cache.transform(8);
    CHECK(&t1 == &t2);
    cache.clear();
    cache.dtn(a);
    CHECK(cache.stats().dtn_builds == 1);
}
