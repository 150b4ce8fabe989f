#include <doctest.h>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <memory>

#include "quadhps/hps.hpp"
#include "quadhps/oracle.hpp"

using namespace quadhps;

namespace {

// Four child discretizations on the quadrants of bounds, each s x s.
std::array<LeafDiscretization, 4> quadrants(const Rect& bounds, int s, double lambda) {
    const double xm = 0.5 * (bounds.x_lo + bounds.x_hi);
    const double ym = 0.5 * (bounds.y_lo + bounds.y_hi);
    return {LeafDiscretization{PatchGrid({bounds.x_lo, bounds.y_lo, xm, ym}, s), lambda},
            LeafDiscretization{PatchGrid({xm, bounds.y_lo, bounds.x_hi, ym}, s), lambda},
            LeafDiscretization{PatchGrid({bounds.x_lo, ym, xm, bounds.y_hi}, s), lambda},
            LeafDiscretization{PatchGrid({xm, ym, bounds.x_hi, bounds.y_hi}, s), lambda}};
}

Eigen::MatrixXd leaf_dtn_sized(int s) {
    // Any square patch; only the matrix dimension matters to adapt_children.
    return build_dtn_leaf({PatchGrid({0.0, 0.0, 1.0, 1.0}, s), 0.0});
}

double max_leaf_error(HpsTree& tree, const ScalarField& u_exact) {
    double e = 0.0;
    for (auto& [p, n] : tree.nodes()) {
        if (!tree.is_leaf(p)) continue;
        for (int j = 0; j < n.grid.s; ++j)
            for (int i = 0; i < n.grid.s; ++i)
                e = std::max(e,
                             std::abs(n.data.u(i, j) - u_exact(n.grid.x_center(i), n.grid.y_center(j))));
    }
    return e;
}

} // namespace

TEST_CASE("four-child merge reproduces the assembled operator of the union") {
    const Rect bounds{0.25, -0.75, 1.25, 0.25};
    for (double lambda : {0.0, 0.01}) {
        const auto quads = quadrants(bounds, 4, lambda);
        const Eigen::MatrixXd T0 = build_dtn_leaf(quads[0]);
        const Eigen::MatrixXd T1 = build_dtn_leaf(quads[1]);
        const Eigen::MatrixXd T2 = build_dtn_leaf(quads[2]);
        const Eigen::MatrixXd T3 = build_dtn_leaf(quads[3]);
        const FamilyOperators ops = merge_4to1(T0, T1, T2, T3, false);
        const Eigen::MatrixXd T_ref = brute_dtn_union(PatchGrid(bounds, 8), lambda);
        REQUIRE(ops.T->rows() == 32);
        const double scale = T_ref.cwiseAbs().maxCoeff();
        CHECK((*ops.T - T_ref).cwiseAbs().maxCoeff() < 1e-9 * scale);
        CHECK(ops.s == 4);
        CHECK(ops.X == nullptr); // only materialized for re-solves
    }
}

TEST_CASE("merged interface values reproduce the exact trace for affine data") {
    const Rect bounds{0.0, 0.0, 1.0, 1.0};
    const auto quads = quadrants(bounds, 4, 0.0);
    const FamilyOperators ops =
        merge_4to1(build_dtn_leaf(quads[0]), build_dtn_leaf(quads[1]), build_dtn_leaf(quads[2]),
                   build_dtn_leaf(quads[3]), false);
    auto affine = [](double x, double y) { return 0.4 - 0.9 * x + 1.7 * y; };
    const auto g = BoundaryVector::sample(PatchGrid(bounds, 8), TraceRole::Dirichlet, affine);
    const auto traces = split_1to4(*ops.S, Eigen::VectorXd::Zero(ops.S->rows()), g);
    for (int c = 0; c < 4; ++c) {
        const auto expected =
            BoundaryVector::sample(quads[c].grid, TraceRole::Dirichlet, affine);
        CHECK((traces[c].data() - expected.data()).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("inhomogeneous flux propagates through a merge") {
    const Rect bounds{0.0, 0.5, 1.0, 1.5};
    const double lambda = 0.02;
    auto f_fn = [](double x, double y) { return std::sin(3.0 * x) + y * y; };
    const auto quads = quadrants(bounds, 8, lambda);
    std::array<BoundaryVector, 4> h;
    std::array<const BoundaryVector*, 4> hp{};
    std::array<Eigen::MatrixXd, 4> T;
    for (int c = 0; c < 4; ++c) {
        T[c] = build_dtn_leaf(quads[c]);
        h[c] = build_h_leaf(quads[c], sample_cell_field(quads[c].grid, f_fn));
        hp[c] = &h[c];
    }
    const FamilyOperators ops = merge_4to1(T[0], T[1], T[2], T[3], false);
    const auto [w, h_parent] = merge_inhomogeneous(ops, hp);
    REQUIRE(w.size() == 4 * 8);
    const LeafDiscretization un{PatchGrid(bounds, 16), lambda};
    const BoundaryVector h_ref = build_h_leaf(un, sample_cell_field(un.grid, f_fn));
    const double scale = h_ref.data().cwiseAbs().maxCoeff();
    CHECK((h_parent.data() - h_ref.data()).cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("child equalization coarsens larger siblings to the smallest") {
    const auto T8 = std::make_shared<const Eigen::MatrixXd>(leaf_dtn_sized(8));
    const auto T16 = std::make_shared<const Eigen::MatrixXd>(leaf_dtn_sized(16));
    const auto T32 = std::make_shared<const Eigen::MatrixXd>(leaf_dtn_sized(32));

    auto one_up = adapt_children({T8, T8, T8, T16});
    CHECK(one_up.s_common == 8);
    CHECK(one_up.gaps == std::array<int, 4>{0, 0, 0, 1});
    CHECK(one_up.T[0].get() == T8.get()); // matching children pass through unchanged
    CHECK(one_up.T[3]->rows() == 32);

    auto two_up = adapt_children({T8, T32, T8, T8});
    CHECK(two_up.s_common == 8);
    CHECK(two_up.gaps == std::array<int, 4>{0, 2, 0, 0});
    CHECK(two_up.T[1]->rows() == 32);

    const auto T12 = std::make_shared<const Eigen::MatrixXd>(leaf_dtn_sized(12));
    CHECK_THROWS_AS(adapt_children({T8, T12, T8, T8}), SolverError);
}

TEST_CASE("coarsened operator keeps affine action and conservation") {
    const PatchGrid fine({0.0, 0.0, 1.0, 1.0}, 16);
    const Eigen::MatrixXd T16 = build_dtn_leaf({fine, 0.0});
    const Eigen::MatrixXd T8 = coarsen_dtn(T16);
    REQUIRE(T8.rows() == 32);
    // Constants stay in the kernel.
    CHECK((T8 * Eigen::VectorXd::Ones(32)).cwiseAbs().maxCoeff() < 1e-9);
    // The flux of an affine trace is the outward normal derivative; the
    // coarsened operator reproduces it at the coarse face midpoints.
    auto affine = [](double x, double y) { return 2.0 + 0.6 * x - 1.1 * y; };
    const PatchGrid coarse(fine.bounds, 8);
    const auto g = BoundaryVector::sample(coarse, TraceRole::Dirichlet, affine);
    const Eigen::VectorXd flux = T8 * g.data();
    BoundaryVector expected(8, TraceRole::NeumannFlux);
    expected.side(Side::West).setConstant(-0.6);
    expected.side(Side::East).setConstant(0.6);
    expected.side(Side::South).setConstant(1.1);
    expected.side(Side::North).setConstant(-1.1);
    CHECK((flux - expected.data()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("solver is exact for affine data on a two-level-gap tree") {
    // Family under the root has merged child resolutions {4M, M, M, M}: the
    // large child is coarsened twice for the merge and its trace prolonged
    // twice on the way down.
    HpsTree tree({0.0, 0.0, 1.0, 1.0}, 4);
    tree.subdivide("0");
    tree.subdivide("00");
    for (int d = 0; d < 4; ++d) tree.subdivide("00" + std::string(1, static_cast<char>('0' + d)));
    REQUIRE(tree.leaf_count() == 19);

    HpsSolver solver(tree, 0.0);
    auto zero = [](double, double) { return 0.0; };
    auto affine = [](double x, double y) { return 1.5 - 0.8 * x + 0.3 * y; };
    solver.build(zero);
    solver.solve(affine);
    CHECK(tree.at("00").merge_coarse_gap == 2);
    CHECK(tree.at("01").merge_coarse_gap == 0);
    CHECK(max_leaf_error(tree, affine) < 1e-10);
}

TEST_CASE("uniform meshes share one factorization per level") {
    auto tree = HpsTree::build({0.0, 0.0, 1.0, 1.0}, 8, 3,
                               [](const PatchGrid&) { return true; });
    REQUIRE(tree.leaf_count() == 64);
    HpsSolver solver(tree, 0.0);
    auto f = [](double x, double y) { return std::cos(x + 2.0 * y); };
    auto g = [](double x, double y) { return x * y; };
    solver.build(f);
    solver.solve(g);
    const HpsStats& st = solver.stats();
    CHECK(st.leaf_dtn_builds == 1);
    CHECK(st.leaf_dtn_cache_hits == 63);
    CHECK(st.family_merges == 3); // one interface factorization per level
    CHECK(st.family_cache_hits == 21 - 3);
    CHECK(st.leaf_solves == 64);
    CHECK(st.fast_dtn_fallbacks == 0);
}

TEST_CASE("retained factorization reproduces a fresh solve for a new source") {
    auto tree = HpsTree::build({-0.5, -0.5, 0.5, 0.5}, 8, 2,
                               [](const PatchGrid&) { return true; });
    const double lambda = 0.01;
    auto f1 = [](double x, double y) { return std::sin(4.0 * x) * std::cos(2.0 * y); };
    auto g1 = [](double x, double y) { return x + y; };
    auto f2 = [](double x, double y) { return std::exp(x) * (1.0 + y); };
    auto g2 = [](double x, double y) { return std::cos(3.0 * x * y); };

    HpsSolver solver(tree, lambda, {.multi_rhs = true});
    solver.build(f1);
    solver.upwards(f1);
    solver.solve(g1);
    const long merges = solver.stats().family_merges;
    const long builds = solver.stats().leaf_dtn_builds;
    const Eigen::MatrixXd u1 = tree.at("000").data.u;

    // Re-propagating the same source and data is a no-op numerically.
    solver.upwards(f1);
    solver.solve(g1);
    CHECK((tree.at("000").data.u - u1).cwiseAbs().maxCoeff() < 1e-12);

    // A new source reuses every factorization.
    solver.upwards(f2);
    solver.solve(g2);
    CHECK(solver.stats().family_merges == merges);
    CHECK(solver.stats().leaf_dtn_builds == builds);

    auto fresh_tree = HpsTree::build({-0.5, -0.5, 0.5, 0.5}, 8, 2,
                                     [](const PatchGrid&) { return true; });
    HpsSolver fresh(fresh_tree, lambda);
    fresh.build(f2);
    fresh.solve(g2);
    double diff = 0.0, scale = 0.0;
    for (auto& [p, n] : tree.nodes()) {
        if (!tree.is_leaf(p)) continue;
        diff = std::max(diff, (n.data.u - fresh_tree.at(p).data.u).cwiseAbs().maxCoeff());
        scale = std::max(scale, n.data.u.cwiseAbs().maxCoeff());
    }
    CHECK(diff < 1e-11 * scale);
}

TEST_CASE("interior operator reuse distinguishes unlike subtrees") {
    // Two same-level families whose subtree refinement differs must not share
    // interface operators; with correct keying the refined-quadrant solve
    // stays consistent with a fresh reference solve of the same mesh.
    HpsTree tree({0.0, 0.0, 1.0, 1.0}, 4);
    tree.subdivide("0");
    tree.subdivide("00"); // NW-vs-SW asymmetry
    tree.subdivide("000");
    tree.subdivide("03");
    tree.balance();
    HpsSolver solver(tree, 0.0);
    auto f = [](double x, double y) { return 10.0 * std::sin(5.0 * x + y); };
    auto u_bc = [](double x, double y) { return x * x - y; };
    solver.build(f);
    solver.solve(u_bc);
    // Distinct shapes force distinct factorizations.
    CHECK(solver.stats().family_merges >= 2);
    CHECK(tree.at("00").data.shape != "L");
    for (auto& [p, n] : tree.nodes())
        if (tree.is_leaf(p)) CHECK(n.data.shape == "L");
}
