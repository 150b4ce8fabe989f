#ifndef QUADHPS_PATCH_HPP
#define QUADHPS_PATCH_HPP

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

#include "quadhps/geometry.hpp"

namespace quadhps {

using ScalarField = std::function<double(double, double)>;

/// Uniform s x s cell-centered grid on a square patch.
/// Cell centers: x_i = x_lo + (i + 1/2) h, i = 0..s-1, and likewise in y.
struct PatchGrid {
    Rect bounds;
    int s = 0;

    PatchGrid() = default;
    PatchGrid(const Rect& b, int s_) : bounds(b), s(s_) {
        if (s < 1) throw std::invalid_argument("PatchGrid: cell count must be positive");
        if (!b.is_square()) throw std::invalid_argument("PatchGrid: cells must be square");
    }

    double cell_width() const { return bounds.width() / s; }
    double x_center(int i) const { return bounds.x_lo + (i + 0.5) * cell_width(); }
    double y_center(int j) const { return bounds.y_lo + (j + 0.5) * cell_width(); }
};

/// Sides in the canonical storage order.
enum class Side { West = 0, East = 1, South = 2, North = 3 };

constexpr int side_index(Side s) { return static_cast<int>(s); }

/// What the 4s values of a BoundaryVector represent.
enum class TraceRole { Dirichlet, NeumannFlux, InhomFlux };

/// One value per boundary face, stored side-major in the order W, E, S, N.
/// Within W/E entries run in increasing y; within S/N in increasing x.
/// NeumannFlux values are outward-normal on every side.
class BoundaryVector {
  public:
    BoundaryVector() = default;
    BoundaryVector(int s, TraceRole role)
        : s_(s), role_(role), data_(Eigen::VectorXd::Zero(4 * s)) {}
    BoundaryVector(int s, TraceRole role, Eigen::VectorXd data)
        : s_(s), role_(role), data_(std::move(data)) {
        if (data_.size() != 4 * s)
            throw std::invalid_argument("BoundaryVector: data must hold 4s values");
    }

    /// Samples fn at the boundary face midpoints of grid.
    static BoundaryVector sample(const PatchGrid& grid, TraceRole role, const ScalarField& fn);

    int points_per_side() const { return s_; }
    TraceRole role() const { return role_; }

    Eigen::VectorXd& data() { return data_; }
    const Eigen::VectorXd& data() const { return data_; }

    auto side(Side sd) { return data_.segment(side_index(sd) * s_, s_); }
    auto side(Side sd) const { return data_.segment(side_index(sd) * s_, s_); }

    double& at(Side sd, int j) { return data_[side_index(sd) * s_ + j]; }
    double at(Side sd, int j) const { return data_[side_index(sd) * s_ + j]; }

    bool empty() const { return s_ == 0; }

  private:
    int s_ = 0;
    TraceRole role_ = TraceRole::Dirichlet;
    Eigen::VectorXd data_;
};

/// Averaging restriction: maps s_fine values on a side to s_fine/2 coarse values.
/// Each coarse value is the mean of its two children. Exact for affine traces.
Eigen::MatrixXd make_restriction(int s_fine);

/// Linear prolongation: maps s_coarse values to 2*s_coarse fine values.
/// Interior fine values use the two nearest coarse values with weights (3/4, 1/4);
/// the end values extrapolate one-sided with weights (5/4, -1/4). Exact for affine traces.
Eigen::MatrixXd make_prolongation(int s_coarse);

/// Block-diagonal expansion of a per-side operator to all four sides.
Eigen::MatrixXd side_block4(const Eigen::MatrixXd& per_side);

/// Applies make_restriction side by side (Dirichlet traces and fluxes alike).
BoundaryVector restrict_boundary(const BoundaryVector& v);

/// Applies make_prolongation side by side.
BoundaryVector prolong_boundary(const BoundaryVector& v);

/// Coarsens a DtN operator one level: T' = L21B * T * L12B.
Eigen::MatrixXd coarsen_dtn(const Eigen::MatrixXd& T);

/// Coarsens an outward flux vector one level: h' = L21B * h.
BoundaryVector coarsen_flux(const BoundaryVector& h);

} // namespace quadhps

#endif
