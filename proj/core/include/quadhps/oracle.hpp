#ifndef QUADHPS_ORACLE_HPP
#define QUADHPS_ORACLE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "quadhps/patch.hpp"

namespace quadhps {

/// Reference solvers that assemble the full N^2 x N^2 system explicitly and
/// factor it directly. Deliberately simple and independent of the fast paths;
/// uniform meshes only.

/// The assembled operator on an N x N grid: interior rows (1,1,1,1,-4)/h^2
/// plus lambda on the diagonal; boundary-adjacent rows get an extra -1/h^2
/// per adjacent domain side from mirror-ghost elimination. Unknown ordering is
/// idx = j*N + i (x fastest).
Eigen::SparseMatrix<double> assemble_uniform(const PatchGrid& grid, double lambda);

/// Direct solve of the assembled system with Dirichlet data g sampled at wall
/// face midpoints and right-hand side f at cell centers. Returns the N x N
/// field (row = x index, column = y index). Refuses N^2 > 1e5; verifies the
/// residual to 1e-11 relative.
Eigen::MatrixXd solve_global_uniform(const PatchGrid& grid, double lambda,
                                     const ScalarField& f, const ScalarField& g);

/// Dirichlet-to-Neumann operator of the whole grid, built column by column
/// from assembled solves with no symmetry shortcuts. Side-major W,E,S,N,
/// outward-normal flux. Refuses s > 64.
Eigen::MatrixXd brute_dtn_union(const PatchGrid& grid, double lambda);

} // namespace quadhps

#endif
