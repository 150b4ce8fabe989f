#include "quadhps/patch.hpp"

namespace quadhps {

BoundaryVector BoundaryVector::sample(const PatchGrid& grid, TraceRole role,
                                      const ScalarField& fn) {
    const int s = grid.s;
    BoundaryVector out(s, role);
    for (int j = 0; j < s; ++j) {
        out.at(Side::West, j) = fn(grid.bounds.x_lo, grid.y_center(j));
        out.at(Side::East, j) = fn(grid.bounds.x_hi, grid.y_center(j));
    }
    for (int i = 0; i < s; ++i) {
        out.at(Side::South, i) = fn(grid.x_center(i), grid.bounds.y_lo);
        out.at(Side::North, i) = fn(grid.x_center(i), grid.bounds.y_hi);
    }
    return out;
}

Eigen::MatrixXd make_restriction(int s_fine) {
    if (s_fine < 2 || s_fine % 2 != 0)
        throw std::invalid_argument("make_restriction: fine count must be even and >= 2");
    const int sc = s_fine / 2;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(sc, s_fine);
    for (int j = 0; j < sc; ++j) {
        L(j, 2 * j) = 0.5;
        L(j, 2 * j + 1) = 0.5;
    }
    return L;
}

Eigen::MatrixXd make_prolongation(int s_coarse) {
    if (s_coarse < 2)
        throw std::invalid_argument("make_prolongation: coarse count must be >= 2");
    const int sf = 2 * s_coarse;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(sf, s_coarse);
    L(0, 0) = 1.25;
    L(0, 1) = -0.25;
    L(sf - 1, s_coarse - 1) = 1.25;
    L(sf - 1, s_coarse - 2) = -0.25;
    for (int k = 1; k < sf - 1; ++k) {
        int j = k / 2;
        if (k % 2 == 0) { // fine midpoint left of coarse midpoint j
            L(k, j - 1) = 0.25;
            L(k, j) = 0.75;
        } else { // right of coarse midpoint j
            L(k, j) = 0.75;
            L(k, j + 1) = 0.25;
        }
    }
    return L;
}

Eigen::MatrixXd side_block4(const Eigen::MatrixXd& per_side) {
    const auto r = per_side.rows(), c = per_side.cols();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4 * r, 4 * c);
    for (int k = 0; k < 4; ++k) B.block(k * r, k * c, r, c) = per_side;
    return B;
}

BoundaryVector restrict_boundary(const BoundaryVector& v) {
    const int s = v.points_per_side();
    Eigen::MatrixXd L = make_restriction(s);
    BoundaryVector out(s / 2, v.role());
    for (int k = 0; k < 4; ++k)
        out.side(static_cast<Side>(k)) = L * v.side(static_cast<Side>(k));
    return out;
}

BoundaryVector prolong_boundary(const BoundaryVector& v) {
    const int s = v.points_per_side();
    Eigen::MatrixXd L = make_prolongation(s);
    BoundaryVector out(2 * s, v.role());
    for (int k = 0; k < 4; ++k)
        out.side(static_cast<Side>(k)) = L * v.side(static_cast<Side>(k));
    return out;
}

Eigen::MatrixXd coarsen_dtn(const Eigen::MatrixXd& T) {
    const int s = static_cast<int>(T.rows()) / 4;
    if (T.rows() != 4 * s || T.cols() != 4 * s)
        throw std::invalid_argument("coarsen_dtn: operator must be square 4s x 4s");
    Eigen::MatrixXd L21B = side_block4(make_restriction(s));
    Eigen::MatrixXd L12B = side_block4(make_prolongation(s / 2));
    return L21B * T * L12B;
}

BoundaryVector coarsen_flux(const BoundaryVector& h) {
    return restrict_boundary(h);
}

} // namespace quadhps
