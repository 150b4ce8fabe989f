#ifndef QUADHPS_LEAF_SOLVER_HPP
#define QUADHPS_LEAF_SOLVER_HPP

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <stdexcept>
#include <tuple>

#include "quadhps/patch.hpp"

namespace quadhps {

/// Numerical failure (resonant patch, singular merge system, residual blowup).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A leaf-level Helmholtz problem: 5-point cell-centered Laplacian plus lambda,
/// with Dirichlet data eliminated through mirror ghost cells
/// (u_ghost = 2 g - u_inner, which adds -1/h^2 to the diagonal per adjacent
/// boundary side and sends -(2/h^2) g to the right-hand side).
struct LeafDiscretization {
    PatchGrid grid;
    double lambda = 0.0;
};

/// Eigenbasis of the 1D ghost-eliminated second-difference operator
/// tridiag(1,-2,1) with -3 end diagonals (unit cell width):
///   v_k(i) = sin((i+1/2)(k+1)pi/s),  nu_k = -4 sin^2((k+1)pi/(2s)),  0-based.
/// The basis is orthogonal with squared norms s/2 (k < s-1) and s (k = s-1);
/// the inverse transform folds those norms in. Orthogonality is checked on
/// construction.
class SineTransform {
  public:
    explicit SineTransform(int s);

    int size() const { return s_; }
    const Eigen::MatrixXd& basis() const { return V_; }
    const Eigen::MatrixXd& inverse_basis() const { return Vinv_; }
    /// Eigenvalues for a unit cell width; scale by 1/h^2 for cell width h.
    const Eigen::VectorXd& eigenvalues() const { return nu_; }

  private:
    int s_;
    Eigen::MatrixXd V_, Vinv_;
    Eigen::VectorXd nu_;
};

/// Solves the leaf system for boundary data g (may be null => zero) and
/// right-hand side F sampled at cell centers (may be null => zero).
/// Returns the s x s solution field, row index = x cell, column index = y cell.
Eigen::MatrixXd solve_leaf(const LeafDiscretization& d, const SineTransform& st,
                           const BoundaryVector* g, const Eigen::MatrixXd* F);
Eigen::MatrixXd solve_leaf(const LeafDiscretization& d, const BoundaryVector* g,
                           const Eigen::MatrixXd* F);

/// Extracts the boundary-adjacent cell values of a field in side-major order.
Eigen::VectorXd boundary_ring(const Eigen::MatrixXd& U);

/// Samples fn at the cell centers of grid (row = x index, column = y index).
Eigen::MatrixXd sample_cell_field(const PatchGrid& grid, const ScalarField& fn);

/// Dirichlet-to-Neumann operator of a leaf, built column by column:
/// column k is the outward flux (2/h)(e_k - u_inner) of the harmonic extension
/// of the unit Dirichlet trace e_k. Rows and columns are side-major W,E,S,N.
Eigen::MatrixXd build_dtn_leaf(const LeafDiscretization& d);

/// Same operator from s solves instead of 4s: only the W-side columns are
/// computed; the remaining columns follow from the reflection symmetries of
/// the discretization. The construction is validated internally (the computed
/// N-row block must be the x-reversal of the S-row block); on validation
/// failure the full build runs instead and *fallback is flagged when provided.
Eigen::MatrixXd build_dtn_leaf_fast(const LeafDiscretization& d, bool* fallback = nullptr);

/// Outward flux of the zero-Dirichlet solution with right-hand side F:
/// h = -(2/h) * boundary ring of solve_leaf(0, F).
BoundaryVector build_h_leaf(const LeafDiscretization& d, const Eigen::MatrixXd& F);

/// Boundary-index permutations induced by the symmetries of a square patch,
/// as index maps p with (P v)[p[a]] = v[a].
Eigen::VectorXi boundary_perm_reflect_x(int s); // x -> -x: swaps W/E, reverses S,N
Eigen::VectorXi boundary_perm_reflect_y(int s); // y -> -y: swaps S/N, reverses W,E
Eigen::VectorXi boundary_perm_rotate(int s);    // quarter turn (x,y) -> (-y,x)
Eigen::VectorXi boundary_perm_diagonal(int s);  // (x,y) -> (y,x): swaps W/S and E/N

/// Caches leaf DtN operators keyed on (s, h, lambda) and the per-size sine
/// transforms. Populate during the build stage, then treat as frozen.
class LeafCache {
  public:
    struct Stats {
        long dtn_builds = 0;
        long dtn_hits = 0;
        long fast_fallbacks = 0;
    };

    const SineTransform& transform(int s);
    std::shared_ptr<const Eigen::MatrixXd> dtn(const LeafDiscretization& d);
    const Stats& stats() const { return stats_; }
    void clear();

  private:
    using Key = std::tuple<int, double, double>;
    std::map<int, std::unique_ptr<SineTransform>> transforms_;
    std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> dtns_;
    Stats stats_;
};

} // namespace quadhps

#endif
