#include "quadhps/problems.hpp"

#include <cmath>

namespace quadhps {

ProblemSpec make_poisson1() {
    ProblemSpec p;
    p.name = "poisson1";
    p.domain = {-10.0, -10.0, 10.0, 10.0};
    p.lambda = 0.0;
    p.refine_threshold = 1.2;
    p.u_exact = [](double x, double y) { return std::sin(x) + std::sin(y); };
    p.f = [](double x, double y) { return -(std::sin(x) + std::sin(y)); };
    return p;
}

ProblemSpec make_helmholtz() {
    ProblemSpec p;
    p.name = "helmholtz";
    p.domain = {-0.5, -0.5, 0.5, 0.5};
    p.lambda = 0.01;
    p.refine_threshold = 60.0;
    static constexpr double alpha = 50.0;
    static constexpr double cx[3] = {0.1, 0.0, -0.15};
    static constexpr double cy[3] = {0.1, 0.0, 0.1};
    p.u_exact = [](double x, double y) {
        double u = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double r2 = (x - cx[i]) * (x - cx[i]) + (y - cy[i]) * (y - cy[i]);
            u += std::exp(-alpha * r2);
        }
        return u;
    };
    const double lambda = p.lambda;
    p.f = [lambda](double x, double y) {
        double f = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double r2 = (x - cx[i]) * (x - cx[i]) + (y - cy[i]) * (y - cy[i]);
            f += std::exp(-alpha * r2) * (4.0 * alpha * alpha * r2 - 4.0 * alpha + lambda);
        }
        return f;
    };
    return p;
}

const std::vector<StarShape>& polar_star_shapes() {
    static const std::vector<StarShape> stars{
        {-0.5, -0.5, 0.2, 0.3, 3}, {0.5, -0.5, 0.3, 0.4, 4}, {0.0, 0.5, 0.4, 0.5, 5}};
    return stars;
}

ProblemSpec make_polar_star(double eps, double refine_threshold) {
    ProblemSpec p;
    p.name = "polar_star";
    p.domain = {-1.0, -1.0, 1.0, 1.0};
    p.lambda = 0.0;
    p.refine_threshold = refine_threshold;
    const auto stars = polar_star_shapes();

    p.u_exact = [stars, eps](double x, double y) {
        double u = 0.0;
        for (const auto& st : stars) {
            const double dx = x - st.x0, dy = y - st.y0;
            const double r = std::hypot(dx, dy);
            const double th = std::atan2(dy, dx);
            const double phi = (r - st.r0 * (st.r1 * std::cos(st.n * th) + 1.0)) / eps;
            u += 0.5 * (1.0 - std::tanh(phi));
        }
        return u;
    };
    // Exact Laplacian of the profile. In polar coordinates about each center,
    // with R(th) = r0 (r1 cos(n th) + 1) and phi = (r - R)/eps:
    //   lap u = sech^2(phi) [ tanh(phi) (1 + R'^2/r^2)/eps^2
    //                         - (1/r + n^2 r0 r1 cos(n th)/r^2)/(2 eps) ].
    p.f = [stars, eps](double x, double y) {
        double f = 0.0;
        for (const auto& st : stars) {
            const double dx = x - st.x0, dy = y - st.y0;
            const double r2 = dx * dx + dy * dy;
            const double r = std::sqrt(r2);
            const double th = std::atan2(dy, dx);
            const double cn = std::cos(st.n * th);
            const double phi = (r - st.r0 * (st.r1 * cn + 1.0)) / eps;
            const double ch = std::cosh(phi);
            const double sech2 = 1.0 / (ch * ch);
            const double t = std::tanh(phi);
            const double s3 = t * sech2 / (eps * eps);
            if (r < 1e-13) {
                // The angular terms have no limit at the exact center; only
                // the radial tanh curvature is kept at this measure-zero point.
                f += s3;
                continue;
            }
            const double pp = st.n * st.r0 * st.r1 * std::sin(st.n * th); // -R'(th)
            const double s1 = pp * pp * t * sech2 / (eps * eps);
            const double s2 = -st.n * st.n * st.r0 * st.r1 * cn * sech2 / (2.0 * eps);
            const double s4 = sech2 / (2.0 * r * eps);
            f += (s1 + s2) / r2 + s3 - s4;
        }
        return f;
    };
    return p;
}

ProblemSpec make_problem(const std::string& name) {
    if (name == "poisson1") return make_poisson1();
    if (name == "helmholtz") return make_helmholtz();
    if (name == "polar_star") return make_polar_star();
    throw std::invalid_argument("unknown problem: " + name);
}

std::function<bool(const PatchGrid&)> refine_by_magnitude(const ScalarField& f,
                                                          double threshold) {
    return [f, threshold](const PatchGrid& g) {
        for (int j = 0; j < g.s; ++j)
            for (int i = 0; i < g.s; ++i)
                if (std::abs(f(g.x_center(i), g.y_center(j))) > threshold) return true;
        return false;
    };
}

ErrorNorms error_norms(const HpsTree& tree, const ScalarField& u_exact) {
    ErrorNorms n;
    const double area = tree.domain().width() * tree.domain().height();
    double sum = 0.0;
    for (const auto& [path, node] : tree.nodes()) {
        if (!tree.is_leaf(path)) continue;
        if (node.data.u.size() == 0) throw std::logic_error("error_norms: leaf not solved");
        const double cell = node.grid.cell_width() * node.grid.cell_width();
        for (int j = 0; j < node.grid.s; ++j) {
            for (int i = 0; i < node.grid.s; ++i) {
                const double e =
                    std::abs(node.data.u(i, j) - u_exact(node.grid.x_center(i), node.grid.y_center(j)));
                n.linf = std::max(n.linf, e);
                sum += e * cell;
            }
        }
    }
    n.l1 = sum / area;
    return n;
}

} // namespace quadhps
