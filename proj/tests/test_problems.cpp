#include <doctest.h>

#include <cmath>
#include <random>

#include "quadhps/problems.hpp"

using namespace quadhps;

namespace {

// Largest scaled residual of grad^2 u + lambda u - f over random interior
// points, by central differences with step delta. The scale floor keeps the
// ratio meaningful where f passes through zero.
double max_fd_residual(const ProblemSpec& p, int n_points, double delta,
                       double center_exclusion = 0.0) {
    std::mt19937 rng(12345);
    const Rect& d = p.domain;
    std::uniform_real_distribution<double> ux(d.x_lo + 2 * delta, d.x_hi - 2 * delta);
    std::uniform_real_distribution<double> uy(d.y_lo + 2 * delta, d.y_hi - 2 * delta);
    double worst = 0.0;
    for (int k = 0; k < n_points; ++k) {
        const double x = ux(rng), y = uy(rng);
        if (center_exclusion > 0.0) {
            bool near = false;
            for (const auto& st : polar_star_shapes())
                near = near || std::hypot(x - st.x0, y - st.y0) < center_exclusion;
            if (near) continue; // radial profile is not smooth at a star center
        }
        const double lap = (p.u_exact(x + delta, y) + p.u_exact(x - delta, y) +
                            p.u_exact(x, y + delta) + p.u_exact(x, y - delta) -
                            4.0 * p.u_exact(x, y)) /
                           (delta * delta);
        const double f = p.f(x, y);
        const double resid = lap + p.lambda * p.u_exact(x, y) - f;
        worst = std::max(worst, std::abs(resid) / std::max(1.0, std::abs(f)));
    }
    return worst;
}

} // namespace

TEST_CASE("smooth benchmark closes under a difference check of its source") {
    const auto p = make_poisson1();
    CHECK(p.name == "poisson1");
    CHECK(p.lambda == 0.0);
    CHECK(p.domain.x_lo == -10.0);
    CHECK(p.domain.x_hi == 10.0);
    CHECK(p.refine_threshold == doctest::Approx(1.2));
    CHECK(p.u_exact(0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(p.f(M_PI / 2, M_PI / 2) == doctest::Approx(-2.0).epsilon(1e-13));
    CHECK(max_fd_residual(p, 1000, 1e-4) < 1e-6);
}

TEST_CASE("shifted benchmark closes under a difference check of its source") {
    const auto p = make_helmholtz();
    CHECK(p.name == "helmholtz");
    CHECK(p.lambda == doctest::Approx(0.01));
    CHECK(p.domain.width() == doctest::Approx(1.0));
    CHECK(p.refine_threshold == doctest::Approx(60.0));
    // Sharp peaks raise the fourth-derivative scale, so the difference check
    // carries a looser bound than the smooth benchmark.
    CHECK(max_fd_residual(p, 1000, 1e-4) < 1e-3);
}

TEST_CASE("star-field benchmark closes under a difference check of its source") {
    const auto p = make_polar_star();
    CHECK(p.name == "polar_star");
    CHECK(p.lambda == 0.0);
    CHECK(p.domain.x_lo == -1.0);
    CHECK(p.domain.x_hi == 1.0);
    CHECK(p.refine_threshold == doctest::Approx(10.0));
    CHECK(max_fd_residual(p, 1000, 1e-4, 0.02) < 0.05);
    // Far from every star the source vanishes to rounding.
    CHECK(std::abs(p.f(5.0, 5.0)) < 1e-10);
    // A wider interface stays consistent too.
    CHECK(max_fd_residual(make_polar_star(0.05), 1000, 1e-4, 0.02) < 0.01);
}

TEST_CASE("star parameters are pinned") {
    const auto& stars = polar_star_shapes();
    REQUIRE(stars.size() == 3);
    CHECK(stars[0].x0 == -0.5);
    CHECK(stars[0].y0 == -0.5);
    CHECK(stars[0].r0 == 0.2);
    CHECK(stars[0].r1 == 0.3);
    CHECK(stars[0].n == 3);
    CHECK(stars[1].x0 == 0.5);
    CHECK(stars[1].r0 == 0.3);
    CHECK(stars[1].r1 == 0.4);
    CHECK(stars[1].n == 4);
    CHECK(stars[2].y0 == 0.5);
    CHECK(stars[2].r0 == 0.4);
    CHECK(stars[2].r1 == 0.5);
    CHECK(stars[2].n == 5);
}

TEST_CASE("problem lookup by name") {
    CHECK(make_problem("poisson1").name == "poisson1");
    CHECK(make_problem("helmholtz").name == "helmholtz");
    CHECK(make_problem("polar_star").name == "polar_star");
    CHECK_THROWS_AS(make_problem("unknown"), std::invalid_argument);
}

TEST_CASE("magnitude refinement fires on any cell center above threshold") {
    auto f = [](double x, double) { return x; };
    auto pred = refine_by_magnitude(f, 0.5);
    // Centers of [0,1]^2 at M = 4 reach x = 0.875.
    CHECK(pred(PatchGrid({0.0, 0.0, 1.0, 1.0}, 4)));
    // Centers of [0,0.25]^2 stay below 0.22.
    CHECK_FALSE(pred(PatchGrid({0.0, 0.0, 0.25, 0.25}, 4)));
    // Negative values count by magnitude.
    CHECK(pred(PatchGrid({-1.0, 0.0, 0.0, 1.0}, 4)));
}

TEST_CASE("error norms weight cells by area") {
    HpsTree tree({0.0, 0.0, 2.0, 2.0}, 4);
    auto u_fn = [](double x, double y) { return x + 2.0 * y; };
    auto& leaf = tree.root();
    leaf.data.u.resize(4, 4);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i)
            leaf.data.u(i, j) = u_fn(leaf.grid.x_center(i), leaf.grid.y_center(j));
    auto exact = error_norms(tree, u_fn);
    CHECK(exact.linf < 1e-14);
    CHECK(exact.l1 < 1e-14);
    // One perturbed cell: max norm sees the full jump, the mean norm its
    // area fraction h^2 / |domain| = 0.25 / 4.
    leaf.data.u(1, 2) += 0.8;
    auto bumped = error_norms(tree, u_fn);
    CHECK(bumped.linf == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(bumped.l1 == doctest::Approx(0.8 * 0.25 / 4.0).epsilon(1e-12));
}
