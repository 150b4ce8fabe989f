#ifndef QUADHPS_PROBLEMS_HPP
#define QUADHPS_PROBLEMS_HPP

#include <string>
#include <vector>

#include "quadhps/hps.hpp"

namespace quadhps {

/// A manufactured benchmark problem for grad^2 u + lambda u = f on a square,
/// with Dirichlet data supplied by the exact solution.
struct ProblemSpec {
    std::string name;
    Rect domain;
    double lambda = 0.0;
    /// Default adaptive refinement threshold on |f|.
    double refine_threshold = 0.0;
    ScalarField f;
    ScalarField u_exact;
};

/// Smooth Poisson benchmark: u = sin x + sin y on [-10,10]^2, lambda = 0.
ProblemSpec make_poisson1();

/// Sum of three sharp Gaussians on [-0.5,0.5]^2 with lambda = 0.01.
ProblemSpec make_helmholtz();

/// One lobed star of the star-field benchmark.
struct StarShape {
    double x0, y0; // center
    double r0;     // base radius
    double r1;     // lobe amplitude
    int n;         // lobe count
};
const std::vector<StarShape>& polar_star_shapes();

/// Three overlapping tanh-profile stars on [-1,1]^2, lambda = 0; eps sets the
/// interface width. The source is the exact Laplacian of the profile.
ProblemSpec make_polar_star(double eps = 0.015, double refine_threshold = 10.0);

ProblemSpec make_problem(const std::string& name);

/// Refinement criterion: fire when |f| exceeds threshold at any cell center
/// of the candidate patch.
std::function<bool(const PatchGrid&)> refine_by_magnitude(const ScalarField& f,
                                                          double threshold);

struct ErrorNorms {
    double linf = 0.0;
    double l1 = 0.0;
};

/// Error norms of the solved fields against the exact solution: max absolute
/// cell error and the cell-area-weighted mean absolute error (L1 divided by
/// the domain area).
ErrorNorms error_norms(const HpsTree& tree, const ScalarField& u_exact);

} // namespace quadhps

#endif
