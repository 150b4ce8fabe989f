#include "quadhps/verify.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "quadhps/hps.hpp"
#include "quadhps/leaf_solver.hpp"
#include "quadhps/oracle.hpp"
#include "quadhps/patch.hpp"
#include "quadhps/problems.hpp"

namespace quadhps {

namespace {

const ScalarField kZero = [](double, double) { return 0.0; };

// Small mesh with one coarse-fine interface layer: the SW quadrant is two
// levels deep, the rest one. Exercises coarsening, prolongation and the
// operator caches without being expensive.
HpsTree corner_refined_tree() {
    Rect dom{0.0, 0.0, 1.0, 1.0};
    auto t = HpsTree::build(dom, 8, 2, [](const PatchGrid& g) {
        return g.bounds.x_lo == 0.0 && g.bounds.y_lo == 0.0;
    });
    t.balance();
    return t;
}

HpsTree uniform_tree(const Rect& dom, int m, int level) {
    return HpsTree::build(dom, m, level, [](const PatchGrid&) { return true; });
}

// Outward flux on one side of a solved leaf, recomputed from the trace and
// the boundary-adjacent cells.
Eigen::VectorXd leaf_side_flux(const HpsTree::Node& leaf, Side sd) {
    const int s = leaf.grid.s;
    const double h = leaf.grid.cell_width();
    Eigen::VectorXd uin(s);
    switch (sd) {
        case Side::West: uin = leaf.data.u.row(0).transpose(); break;
        case Side::East: uin = leaf.data.u.row(s - 1).transpose(); break;
        case Side::South: uin = leaf.data.u.col(0); break;
        case Side::North: uin = leaf.data.u.col(s - 1); break;
    }
    return (2.0 / h) * (Eigen::VectorXd(leaf.data.g.side(sd)) - uin);
}

double rel_perm_invariance(const Eigen::MatrixXd& T, const Eigen::VectorXi& p) {
    const auto n = T.rows();
    double diff = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            diff = std::max(diff, std::abs(T(p[a], p[b]) - T(a, b)));
    return diff / T.cwiseAbs().maxCoeff();
}

VerifyCheck check_interpolation_affine() {
    VerifyCheck c{"interpolation_affine_exact", false, 0.0, 1e-13};
    for (int s : {4, 8, 16}) {
        auto at = [](int k, int n) { return (k + 0.5) / n; }; // face midpoints, unit side
        Eigen::VectorXd coarse(s), fine(2 * s);
        for (int k = 0; k < s; ++k) coarse[k] = 0.7 + 1.3 * at(k, s);
        for (int k = 0; k < 2 * s; ++k) fine[k] = 0.7 + 1.3 * at(k, 2 * s);
        c.metric = std::max(c.metric,
                            (make_prolongation(s) * coarse - fine).cwiseAbs().maxCoeff());
        c.metric = std::max(c.metric,
                            (make_restriction(2 * s) * fine - coarse).cwiseAbs().maxCoeff());
    }
    c.pass = c.metric <= c.threshold;
    return c;
}

VerifyCheck check_zero_row_sums() {
    VerifyCheck c{"dtn_zero_row_sum", false, 0.0, 1e-8};
    auto t = corner_refined_tree();
    HpsSolver solver(t, 0.0);
    solver.build(kZero);
    for (const auto& [path, node] : t.nodes()) {
        const Eigen::MatrixXd& T = *node.data.T;
        const double rowsum = (T * Eigen::VectorXd::Ones(T.cols())).cwiseAbs().maxCoeff();
        c.metric = std::max(c.metric, rowsum / T.cwiseAbs().maxCoeff());
    }
    c.pass = c.metric <= c.threshold;
    return c;
}

VerifyCheck check_reflection_equivariance() {
    VerifyCheck c{"dtn_reflection_equivariance", false, 0.0, 1e-10};
    const LeafDiscretization d{PatchGrid({0.0, 0.0, 1.0, 1.0}, 8), 0.3};
    const Eigen::MatrixXd T = build_dtn_leaf(d);
    c.metric = std::max(rel_perm_invariance(T, boundary_perm_reflect_x(d.grid.s)),
                        rel_perm_invariance(T, boundary_perm_reflect_y(d.grid.s)));
    c.pass = c.metric <= c.threshold;
    return c;
}

VerifyCheck check_rotation_equivariance() {
    VerifyCheck c{"dtn_rotation_equivariance", false, 0.0, 1e-10};
    const LeafDiscretization d{PatchGrid({0.0, 0.0, 1.0, 1.0}, 8), 0.3};
    const Eigen::MatrixXd T = build_dtn_leaf(d);
    c.metric = rel_perm_invariance(T, boundary_perm_rotate(d.grid.s));
    c.pass = c.metric <= c.threshold;
    return c;
}

VerifyCheck check_fast_dtn() {
    VerifyCheck c{"fast_dtn_equals_full", false, 0.0, 1e-11};
    bool fell_back = false;
    for (double lambda : {0.0, 0.01}) {
        for (int s : {8, 16}) {
            const LeafDiscretization d{PatchGrid({-1.0, -0.5, 1.0, 1.5}, s), lambda};
            const Eigen::MatrixXd full = build_dtn_leaf(d);
            bool fb = false;
            const Eigen::MatrixXd fast = build_dtn_leaf_fast(d, &fb);
            fell_back = fell_back || fb;
            c.metric = std::max(
                c.metric, (fast - full).cwiseAbs().maxCoeff() / full.cwiseAbs().maxCoeff());
        }
    }
    c.pass = !fell_back && c.metric <= c.threshold;
    return c;
}

VerifyCheck check_affine_pipeline() {
    VerifyCheck c{"pipeline_affine_exact", false, 0.0, 1e-10};
    auto affine = [](double x, double y) { return 0.25 + x + 2.0 * y; };
    auto t = corner_refined_tree();
    HpsSolver solver(t, 0.0);
    solver.build(kZero);
    solver.solve(affine);
    for (const auto& [path, node] : t.nodes()) {
        if (!t.is_leaf(path)) continue;
        for (int i = 0; i < node.grid.s; ++i)
            for (int j = 0; j < node.grid.s; ++j)
                c.metric = std::max(c.metric, std::abs(node.data.u(i, j) -
                                                       affine(node.grid.x_center(i),
                                                              node.grid.y_center(j))));
    }
    c.pass = c.metric <= c.threshold;
    return c;
}

// Same-size interface fluxes must cancel to solver precision on uniform
// meshes, where the interface unknowns coincide with the shared faces.
VerifyCheck check_flux_continuity() {
    VerifyCheck c{"interface_flux_continuity", false, 0.0, 1e-9};
    for (const char* name : {"poisson1", "helmholtz", "polar_star"}) {
        const ProblemSpec p = make_problem(name);
        auto t = uniform_tree(p.domain, 8, 2);
        HpsSolver solver(t, p.lambda);
        solver.build(p.f);
        solver.solve(p.u_exact);

        double max_flux = 0.0, max_mismatch = 0.0;
        const long n = 4; // leaves per side at level 2
        for (long iy = 0; iy < n; ++iy) {
            for (long ix = 0; ix < n; ++ix) {
                const auto& a = t.at(HpsTree::key_of(2, ix, iy));
                for (Side sd : {Side::West, Side::East, Side::South, Side::North})
                    max_flux = std::max(max_flux, leaf_side_flux(a, sd).cwiseAbs().maxCoeff());
                if (ix + 1 < n) {
                    const auto& b = t.at(HpsTree::key_of(2, ix + 1, iy));
                    max_mismatch = std::max(
                        max_mismatch, (leaf_side_flux(a, Side::East) + leaf_side_flux(b, Side::West))
                                          .cwiseAbs()
                                          .maxCoeff());
                }
                if (iy + 1 < n) {
                    const auto& b = t.at(HpsTree::key_of(2, ix, iy + 1));
                    max_mismatch = std::max(
                        max_mismatch,
                        (leaf_side_flux(a, Side::North) + leaf_side_flux(b, Side::South))
                            .cwiseAbs()
                            .maxCoeff());
                }
            }
        }
        c.metric = std::max(c.metric, max_mismatch / max_flux);
    }
    c.pass = c.metric <= c.threshold;
    return c;
}

VerifyCheck check_oracle_equivalence() {
    VerifyCheck c{"matches_assembled_solver", false, 0.0, 1e-10};
    for (const char* name : {"poisson1", "helmholtz", "polar_star"}) {
        const ProblemSpec p = make_problem(name);
        auto t = uniform_tree(p.domain, 8, 2);
        HpsSolver solver(t, p.lambda);
        solver.build(p.f);
        solver.solve(p.u_exact);

        const Eigen::MatrixXd ug =
            solve_global_uniform(PatchGrid(p.domain, 32), p.lambda, p.f, p.u_exact);
        const double scale = ug.cwiseAbs().maxCoeff();
        double diff = 0.0;
        for (const auto& [path, node] : t.nodes()) {
            if (!t.is_leaf(path)) continue;
            const auto coords = HpsTree::coords_of(path);
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j)
                    diff = std::max(diff, std::abs(node.data.u(i, j) -
                                                   ug(coords.ix * 8 + i, coords.iy * 8 + j)));
        }
        c.metric = std::max(c.metric, diff / scale);
    }
    c.pass = c.metric <= c.threshold;
    return c;
}

} // namespace

std::vector<VerifyCheck> run_verify_suite() {
    return {
        check_interpolation_affine(), check_zero_row_sums(),    check_reflection_equivariance(),
        check_rotation_equivariance(), check_fast_dtn(),        check_affine_pipeline(),
        check_flux_continuity(),       check_oracle_equivalence(),
    };
}

bool all_pass(const std::vector<VerifyCheck>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

} // namespace quadhps
