#ifndef QUADHPS_HPS_HPP
#define QUADHPS_HPS_HPP

#include <Eigen/Dense>
#include <array>
#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <utility>

#include "quadhps/leaf_solver.hpp"
#include "quadhps/quadtree.hpp"

namespace quadhps {

/// Per-node solver data. Matrices are shared with the per-level operator
/// cache wherever the constant-coefficient structure allows it.
struct HpsPayload {
    /// Dirichlet-to-Neumann operator, side-major W,E,S,N, outward flux.
    std::shared_ptr<const Eigen::MatrixXd> T;
    /// Interface solve operator: interface Dirichlet values from the node's
    /// exterior trace (rows in interface order, columns parent-canonical).
    std::shared_ptr<const Eigen::MatrixXd> S;
    /// Negated inverse of the interface system; retained in multi-RHS mode.
    std::shared_ptr<const Eigen::MatrixXd> X;
    /// Exterior-from-interface coupling block; retained in multi-RHS mode.
    std::shared_ptr<const Eigen::MatrixXd> B;
    /// Particular interface values for the current right-hand side.
    Eigen::VectorXd w;
    /// Outward inhomogeneous boundary flux for the current right-hand side.
    BoundaryVector h;
    /// Dirichlet trace, populated by the solve stage.
    BoundaryVector g;
    /// Leaf solution field at cell centers (leaves only).
    Eigen::MatrixXd u;
    /// Canonical signature of the subtree refinement pattern ("L" for a
    /// leaf, "(abcd)" for an interior node). Together with the level it
    /// determines the node's discretization, so it keys the operator cache.
    std::string shape;
};

using HpsTree = Quadtree<HpsPayload>;

/// Index bookkeeping for a 4-to-1 merge at common child resolution s.
/// Children: 0 = SW, 1 = SE, 2 = NW, 3 = NE. Interfaces: 0: SW-NW, 1: SE-NE,
/// 2: SW-SE, 3: NW-NE; interface values run with the shared coordinate.
struct MergeIndexMaps {
    struct IfaceMember {
        int child;
        Side side;
    };

    /// Exterior sides per child, in merged block order.
    static constexpr std::array<std::array<Side, 2>, 4> kExtSides{
        {{Side::West, Side::South},
         {Side::East, Side::South},
         {Side::West, Side::North},
         {Side::East, Side::North}}};

    /// The two children meeting at each interface and the side each presents.
    static constexpr std::array<std::array<IfaceMember, 2>, 4> kIfaces{
        {{{{0, Side::North}, {2, Side::South}}},
         {{{1, Side::North}, {3, Side::South}}},
         {{{0, Side::East}, {1, Side::West}}},
         {{{2, Side::East}, {3, Side::West}}}}};

    /// Merged exterior blocks [SW.W SW.S | SE.E SE.S | NW.W NW.N | NE.E NE.N]
    /// reordered to the parent canonical [W1 W2 E1 E2 S1 S2 N1 N2].
    static constexpr std::array<int, 8> kExtToCanonical{0, 4, 2, 6, 1, 3, 5, 7};

    explicit MergeIndexMaps(int s);

    int s;
    /// Per child: the 2s boundary indices of its exterior sides, block order.
    std::array<Eigen::VectorXi, 4> ext;
    /// Parent-canonical entry a reads merged-local entry perm[a].
    Eigen::VectorXi perm;
};

/// Operators produced by one 4-to-1 merge. T and S are in parent-canonical
/// ordering; B and the interface factorization stay in merged-local ordering
/// and are consumed by merge_inhomogeneous.
struct FamilyOperators {
    int s = 0; // common child resolution
    std::shared_ptr<const Eigen::MatrixXd> T;
    std::shared_ptr<const Eigen::MatrixXd> S;
    std::shared_ptr<const Eigen::MatrixXd> X; // multi-RHS only
    std::shared_ptr<const Eigen::MatrixXd> B;
    std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXd>> luD;
};

/// Merges four child DtN operators (all 4s x 4s at the same resolution) by
/// eliminating the interior interface values under flux continuity. With
/// multi_rhs set, the negated interface inverse X is materialized as well.
FamilyOperators merge_4to1(const Eigen::MatrixXd& T_sw, const Eigen::MatrixXd& T_se,
                           const Eigen::MatrixXd& T_nw, const Eigen::MatrixXd& T_ne,
                           bool multi_rhs);

/// Propagates the particular data of the four children through a merge:
/// accumulates the interface flux mismatch, solves for the particular
/// interface values w, and returns w plus the parent's outward flux h.
std::pair<Eigen::VectorXd, BoundaryVector> merge_inhomogeneous(
    const FamilyOperators& ops, const std::array<const BoundaryVector*, 4>& h_children);

/// Equalizes a family of child DtN operators to the smallest resolution
/// present: a child at 2^k times that resolution is coarsened k levels.
/// Resolutions that are not power-of-two multiples of the smallest are
/// rejected ("unbalanced family").
struct AdaptedFamily {
    int s_common = 0;
    std::array<std::shared_ptr<const Eigen::MatrixXd>, 4> T;
    /// Levels of coarsening applied per child (0 for the smallest).
    std::array<int, 4> gaps{};
};
AdaptedFamily adapt_children(const std::array<std::shared_ptr<const Eigen::MatrixXd>, 4>& T_children);

/// Recovers the four child Dirichlet traces from the parent trace:
/// interface values from S * g_parent + w, exterior values scattered from the
/// parent canonical blocks. Children are returned at the merge resolution;
/// coarsened children must be prolonged afterwards.
std::array<BoundaryVector, 4> split_1to4(const Eigen::MatrixXd& S, const Eigen::VectorXd& w,
                                         const BoundaryVector& g_parent);

struct HpsOptions {
    /// Retain X and B on every interior node so new right-hand sides can be
    /// propagated without refactorization.
    bool multi_rhs = false;
};

struct HpsStats {
    long leaf_dtn_builds = 0;
    long leaf_dtn_cache_hits = 0;
    long family_merges = 0; // interface factorizations
    long family_cache_hits = 0;
    long fast_dtn_fallbacks = 0;
    long leaf_solves = 0;
};

/// Three-stage direct solver on a balanced quadtree:
///   build   - bottom-up DtN merge sweep (single-pass mode also carries the
///             particular data for the given right-hand side),
///   upwards - re-propagates particular data for a new right-hand side
///             without refactorization (multi-RHS mode),
///   solve   - top-down trace split followed by the leaf solves.
/// Interior operators are cached per (level, subtree shape), which is exact:
/// equal level and refinement pattern imply an identical discretization for
/// a constant-coefficient operator. On uniform meshes every node of a level
/// shares one entry, collapsing the build to one leaf factorization and one
/// merge per level.
class HpsSolver {
  public:
    HpsSolver(HpsTree& tree, double lambda, HpsOptions opt = {});

    void build(const ScalarField& f);
    void upwards(const ScalarField& f);
    void solve(const ScalarField& g);

    const HpsStats& stats() const { return stats_; }
    double lambda() const { return lambda_; }
    HpsTree& tree() { return tree_; }

  private:
    struct FamilyKey {
        int level;
        std::string shape;
        bool operator<(const FamilyKey& o) const {
            return std::tie(level, shape) < std::tie(o.level, o.shape);
        }
    };

    void merge_family(HpsTree::Node& parent, const std::array<HpsTree::Node*, 4>& children,
                      bool with_particular);
    std::shared_ptr<const Eigen::MatrixXd> coarsened_dtn_of(const HpsTree::Node& child, int gap);

    HpsTree& tree_;
    double lambda_;
    HpsOptions opt_;
    LeafCache leaf_cache_;
    std::map<FamilyKey, FamilyOperators> family_cache_;
    std::map<std::tuple<int, std::string, int>, std::shared_ptr<const Eigen::MatrixXd>>
        coarsened_cache_;
    ScalarField f_;
    HpsStats stats_;
    bool built_ = false;
    bool particular_ready_ = false;
};

} // namespace quadhps

#endif
