#ifndef QUADHPS_QUADTREE_HPP
#define QUADHPS_QUADTREE_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "quadhps/geometry.hpp"
#include "quadhps/patch.hpp"

namespace quadhps {

/// Nodes are addressed by digit strings: "0" is the root and each further
/// digit appends a child index. Child order: 0 = SW, 1 = SE, 2 = NW, 3 = NE
/// (bit 0 = east half, bit 1 = north half).
using PathKey = std::string;

template <typename Data>
struct QuadtreeNode {
    PathKey path;
    int level = 0;
    int child_index = -1; // digit in the parent; -1 at the root
    Rect bounds;
    /// Leaf resolution at construction; interior nodes are overwritten with
    /// their merged (virtual) resolution by the build stage.
    PatchGrid grid;
    /// Levels of trace coarsening applied to this node's operator data for
    /// the parent merge (0 when it already matched the smallest sibling).
    int merge_coarse_gap = 0;
    Data data{};
};

template <typename Data>
class Quadtree {
  public:
    using Node = QuadtreeNode<Data>;
    using NodeMap = std::map<PathKey, Node>;

    Quadtree(const Rect& domain, int cells_per_side) : domain_(domain), m_(cells_per_side) {
        if (m_ < 2 || m_ % 2 != 0)
            throw std::invalid_argument("Quadtree: cells per side must be even and >= 2");
        if (!domain.is_square()) throw std::invalid_argument("Quadtree: domain must be square");
        Node root;
        root.path = "0";
        root.bounds = domain;
        root.grid = PatchGrid(domain, m_);
        nodes_.emplace("0", std::move(root));
    }

    /// Builds by recursive refinement: a leaf below max_level is subdivided
    /// whenever its level is below min_level or the predicate fires on its
    /// grid. The result is *not* balanced; call balance() before solving.
    static Quadtree build(const Rect& domain, int cells_per_side, int max_level,
                          const std::function<bool(const PatchGrid&)>& refine,
                          int min_level = 0) {
        if (max_level < 0) throw std::invalid_argument("Quadtree: max_level must be >= 0");
        Quadtree t(domain, cells_per_side);
        t.refine_recursive("0", max_level, refine, min_level);
        return t;
    }

    const Rect& domain() const { return domain_; }
    int cells_per_side() const { return m_; }
    NodeMap& nodes() { return nodes_; }
    const NodeMap& nodes() const { return nodes_; }

    Node& at(const PathKey& p) {
        auto it = nodes_.find(p);
        if (it == nodes_.end()) throw std::logic_error("Quadtree: missing node " + p);
        return it->second;
    }
    const Node& at(const PathKey& p) const {
        auto it = nodes_.find(p);
        if (it == nodes_.end()) throw std::logic_error("Quadtree: missing node " + p);
        return it->second;
    }
    Node& root() { return at("0"); }
    const Node& root() const { return at("0"); }
    bool contains(const PathKey& p) const { return nodes_.count(p) > 0; }

    bool is_leaf(const PathKey& p) const { return nodes_.count(p + "0") == 0; }
    bool is_leaf(const Node& n) const { return is_leaf(n.path); }

    /// Splits a leaf into its four children.
    void subdivide(const PathKey& p) {
        Node& parent = at(p);
        if (!is_leaf(p)) throw std::logic_error("Quadtree: subdivide on interior node " + p);
        auto [lvl, ix, iy] = coords_of(p);
        for (int d = 0; d < 4; ++d) {
            Node c;
            c.path = p + static_cast<char>('0' + d);
            c.level = lvl + 1;
            c.child_index = d;
            c.bounds = cell_bounds(lvl + 1, 2 * ix + (d & 1), 2 * iy + (d >> 1));
            c.grid = PatchGrid(c.bounds, m_);
            nodes_.emplace(c.path, std::move(c));
        }
        (void)parent;
    }

    /// Refinement-only balancing: enforces the 2:1 rule across leaf edges and
    /// additionally equalizes the shallowest leaf depth within every family
    /// to a spread of one level. The second condition bounds sibling merged
    /// resolutions to a factor of two (a sibling's merged size is set by its
    /// shallowest leaf anywhere in the quadrant, so edge adjacency alone does
    /// not bound it), which keeps ancestor interfaces crossing a refined
    /// region from being represented at a much coarser resolution.
    void balance() {
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<PathKey> leaves;
            for (const auto& [p, n] : nodes_)
                if (is_leaf(p)) leaves.push_back(p);
            for (const auto& p : leaves) {
                if (!contains(p) || !is_leaf(p)) continue;
                auto [lvl, ix, iy] = coords_of(p);
                const long span = 1L << lvl;
                const std::array<std::array<long, 2>, 4> nbrs{
                    {{ix - 1, iy}, {ix + 1, iy}, {ix, iy - 1}, {ix, iy + 1}}};
                for (const auto& nb : nbrs) {
                    if (nb[0] < 0 || nb[0] >= span || nb[1] < 0 || nb[1] >= span) continue;
                    PathKey q = deepest_existing(key_of(lvl, nb[0], nb[1]));
                    const Node& qn = at(q);
                    if (qn.level < lvl - 1 && is_leaf(q)) {
                        subdivide(q);
                        changed = true;
                    }
                }
            }
            if (family_balance_pass()) changed = true;
        }
    }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t leaf_count() const {
        std::size_t c = 0;
        for (const auto& [p, n] : nodes_)
            if (is_leaf(p)) ++c;
        return c;
    }
    long total_dofs() const { return static_cast<long>(leaf_count()) * m_ * m_; }
    int max_leaf_level() const {
        int l = 0;
        for (const auto& [p, n] : nodes_)
            if (is_leaf(p)) l = std::max(l, n.level);
        return l;
    }

    /// Post-order sweep: leaves fire the leaf callback; each interior node
    /// fires the family callback strictly after all four children finished.
    template <typename LeafCb, typename FamilyCb>
    void merge_traversal(LeafCb&& leaf_cb, FamilyCb&& family_cb) {
        merge_visit(root(), leaf_cb, family_cb);
    }

    /// Two-phase sweep: all family callbacks run first in pre-order (parent
    /// before children), then every leaf callback runs.
    template <typename FamilyCb, typename LeafCb>
    void split_traversal(FamilyCb&& family_cb, LeafCb&& leaf_cb) {
        for (auto& [p, n] : nodes_) { // map order is pre-order
            if (is_leaf(p)) continue;
            family_cb(n, family_of(p));
        }
        for (auto& [p, n] : nodes_)
            if (is_leaf(p)) leaf_cb(n);
    }

    std::array<Node*, 4> family_of(const PathKey& p) {
        std::array<Node*, 4> c{};
        for (int d = 0; d < 4; ++d) {
            auto it = nodes_.find(p + static_cast<char>('0' + d));
            if (it == nodes_.end())
                throw std::logic_error("Quadtree: incomplete family under " + p);
            c[d] = &it->second;
        }
        return c;
    }

    /// One line per node, `path level x_lo y_lo x_hi y_hi is_leaf`, in path order.
    std::string dump() const {
        std::string out;
        char line[256];
        for (const auto& [p, n] : nodes_) {
            std::snprintf(line, sizeof line, "%s %d %.15g %.15g %.15g %.15g %d\n", p.c_str(),
                          n.level, n.bounds.x_lo, n.bounds.y_lo, n.bounds.x_hi, n.bounds.y_hi,
                          is_leaf(p) ? 1 : 0);
            out += line;
        }
        return out;
    }

    struct Coords {
        int level;
        long ix, iy;
    };
    static Coords coords_of(const PathKey& p) {
        if (p.empty() || p[0] != '0') throw std::invalid_argument("Quadtree: bad path " + p);
        Coords c{0, 0, 0};
        for (std::size_t k = 1; k < p.size(); ++k) {
            int d = p[k] - '0';
            if (d < 0 || d > 3) throw std::invalid_argument("Quadtree: bad path " + p);
            c.ix = 2 * c.ix + (d & 1);
            c.iy = 2 * c.iy + (d >> 1);
            ++c.level;
        }
        return c;
    }
    static PathKey key_of(int level, long ix, long iy) {
        PathKey p(static_cast<std::size_t>(level) + 1, '0');
        for (int k = level; k >= 1; --k) {
            p[k] = static_cast<char>('0' + ((ix & 1) | ((iy & 1) << 1)));
            ix >>= 1;
            iy >>= 1;
        }
        return p;
    }
    static PathKey parent_of(const PathKey& p) {
        if (p.size() < 2) throw std::invalid_argument("Quadtree: root has no parent");
        return p.substr(0, p.size() - 1);
    }

  private:
    template <typename LeafCb, typename FamilyCb>
    void merge_visit(Node& n, LeafCb& leaf_cb, FamilyCb& family_cb) {
        if (is_leaf(n.path)) {
            leaf_cb(n);
            return;
        }
        auto fam = family_of(n.path);
        for (Node* c : fam) merge_visit(*c, leaf_cb, family_cb);
        family_cb(n, fam);
    }

    Rect cell_bounds(int level, long ix, long iy) const {
        // Power-of-two scaling keeps same-level widths bit-identical.
        const double wx = domain_.width() * std::ldexp(1.0, -level);
        const double wy = domain_.height() * std::ldexp(1.0, -level);
        Rect r;
        r.x_lo = domain_.x_lo + ix * wx;
        r.x_hi = (ix + 1 == (1L << level)) ? domain_.x_hi : domain_.x_lo + (ix + 1) * wx;
        r.y_lo = domain_.y_lo + iy * wy;
        r.y_hi = (iy + 1 == (1L << level)) ? domain_.y_hi : domain_.y_lo + (iy + 1) * wy;
        return r;
    }

    /// One sweep of family depth equalization: wherever sibling min leaf
    /// depths spread by two or more, the shallowest leaves of the lagging
    /// siblings are subdivided. Returns whether anything changed. Terminates
    /// because subdividing a shallowest leaf never raises the maximum depth.
    bool family_balance_pass() {
        std::map<PathKey, int> md; // shallowest leaf depth below each node
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            if (is_leaf(it->first)) {
                md[it->first] = 0;
                continue;
            }
            int m = md.at(it->first + '0');
            for (int d = 1; d < 4; ++d)
                m = std::min(m, md.at(it->first + static_cast<char>('0' + d)));
            md[it->first] = 1 + m;
        }
        std::vector<PathKey> to_split;
        for (const auto& [p, depth] : md) {
            if (depth != 0) continue; // only leaves can need splitting
            // Walk up: a leaf lags if any ancestor family spreads by >= 2
            // relative to this leaf's branch.
            const Node& leaf = at(p);
            for (PathKey anc = p; anc.size() > 1;) {
                const PathKey par = parent_of(anc);
                int lo = md.at(par + '0'), hi = lo;
                for (int d = 1; d < 4; ++d) {
                    const int v = md.at(par + static_cast<char>('0' + d));
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                const int local = leaf.level - at(par).level - 1; // depth within anc's sibling
                if (hi - lo >= 2 && local == lo) {
                    to_split.push_back(p);
                    break;
                }
                anc = par;
            }
        }
        for (const auto& p : to_split)
            if (is_leaf(p)) subdivide(p);
        return !to_split.empty();
    }

    PathKey deepest_existing(const PathKey& target) const {
        PathKey p = "0";
        for (std::size_t k = 1; k < target.size(); ++k) {
            PathKey q = p + target[k];
            if (!nodes_.count(q)) break;
            p = std::move(q);
        }
        return p;
    }

    void refine_recursive(const PathKey& p, int max_level,
                          const std::function<bool(const PatchGrid&)>& refine, int min_level) {
        Node& n = at(p);
        if (n.level >= max_level) return;
        if (n.level < min_level || refine(n.grid)) {
            subdivide(p);
            for (int d = 0; d < 4; ++d)
                refine_recursive(p + static_cast<char>('0' + d), max_level, refine, min_level);
        }
    }

    Rect domain_;
    int m_;
    NodeMap nodes_;
};

} // namespace quadhps

#endif
