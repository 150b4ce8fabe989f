#include "quadhps/hps.hpp"

#include "quadhps/patch.hpp"

namespace quadhps {

MergeIndexMaps::MergeIndexMaps(int s_) : s(s_) {
    for (int c = 0; c < 4; ++c) {
        ext[c].resize(2 * s);
        for (int b = 0; b < 2; ++b)
            for (int r = 0; r < s; ++r)
                ext[c][b * s + r] = side_index(kExtSides[c][b]) * s + r;
    }
    perm.resize(8 * s);
    for (int b = 0; b < 8; ++b)
        for (int r = 0; r < s; ++r) perm[b * s + r] = kExtToCanonical[b] * s + r;
}

namespace {

Eigen::MatrixXd sub(const Eigen::MatrixXd& T, const Eigen::VectorXi& rows, Side col_side, int s) {
    Eigen::MatrixXd out(rows.size(), s);
    const int c0 = side_index(col_side) * s;
    for (int r = 0; r < rows.size(); ++r) out.row(r) = T.block(rows[r], c0, 1, s);
    return out;
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& T, Side row_side, const Eigen::VectorXi& cols, int s) {
    Eigen::MatrixXd out(s, cols.size());
    const int r0 = side_index(row_side) * s;
    for (int c = 0; c < cols.size(); ++c) out.col(c) = T.block(r0, cols[c], s, 1);
    return out;
}

Eigen::MatrixXd block(const Eigen::MatrixXd& T, Side rs, Side cs, int s) {
    return T.block(side_index(rs) * s, side_index(cs) * s, s, s);
}

} // namespace

FamilyOperators merge_4to1(const Eigen::MatrixXd& T_sw, const Eigen::MatrixXd& T_se,
                           const Eigen::MatrixXd& T_nw, const Eigen::MatrixXd& T_ne,
                           bool multi_rhs) {
    const std::array<const Eigen::MatrixXd*, 4> T{&T_sw, &T_se, &T_nw, &T_ne};
    const int s = static_cast<int>(T_sw.rows()) / 4;
    for (const auto* t : T)
        if (t->rows() != 4 * s || t->cols() != 4 * s)
            throw std::invalid_argument("merge_4to1: children must share one 4s x 4s resolution");
    const MergeIndexMaps maps(s);

    // Exterior system A g_ext + B g_int + h_ext = v_ext, interface system
    // C g_ext + D g_int + dh = 0 (outward fluxes summed across each interface).
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(8 * s, 8 * s);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(8 * s, 4 * s);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(4 * s, 8 * s);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(4 * s, 4 * s);

    for (int c = 0; c < 4; ++c) {
        const Eigen::VectorXi& e = maps.ext[c];
        Eigen::MatrixXd Tee(2 * s, 2 * s);
        for (int r = 0; r < 2 * s; ++r)
            for (int q = 0; q < 2 * s; ++q) Tee(r, q) = (*T[c])(e[r], e[q]);
        A.block(2 * s * c, 2 * s * c, 2 * s, 2 * s) = Tee;
    }
    for (int i = 0; i < 4; ++i) {
        for (const auto& m : MergeIndexMaps::kIfaces[i]) {
            B.block(2 * s * m.child, s * i, 2 * s, s) = sub(*T[m.child], maps.ext[m.child], m.side, s);
            C.block(s * i, 2 * s * m.child, s, 2 * s) = sub(*T[m.child], m.side, maps.ext[m.child], s);
        }
    }
    // Interface rows: each interface side couples to the child's other
    // interface side as well as to itself.
    for (int i = 0; i < 4; ++i) {
        for (const auto& m : MergeIndexMaps::kIfaces[i]) {
            D.block(s * i, s * i, s, s) += block(*T[m.child], m.side, m.side, s);
            for (int j = 0; j < 4; ++j) {
                if (j == i) continue;
                for (const auto& o : MergeIndexMaps::kIfaces[j])
                    if (o.child == m.child)
                        D.block(s * i, s * j, s, s) = block(*T[m.child], m.side, o.side, s);
            }
        }
    }

    FamilyOperators ops;
    ops.s = s;
    auto lu = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(D);
    {
        const auto diag = lu->matrixLU().diagonal().cwiseAbs();
        if (diag.minCoeff() <= 1e-14 * diag.maxCoeff())
            throw SolverError("merge_4to1: singular merge system");
    }
    Eigen::MatrixXd S_loc = -lu->solve(C);
    Eigen::MatrixXd T_loc = A + B * S_loc;

    auto T_par = std::make_shared<Eigen::MatrixXd>(4 * 2 * s, 4 * 2 * s);
    auto S_par = std::make_shared<Eigen::MatrixXd>(4 * s, 8 * s);
    for (int b = 0; b < 8 * s; ++b) {
        S_par->col(b) = S_loc.col(maps.perm[b]);
        for (int a = 0; a < 8 * s; ++a) (*T_par)(a, b) = T_loc(maps.perm[a], maps.perm[b]);
    }

    ops.T = std::move(T_par);
    ops.S = std::move(S_par);
    ops.B = std::make_shared<Eigen::MatrixXd>(std::move(B));
    ops.luD = std::move(lu);
    if (multi_rhs)
        ops.X = std::make_shared<Eigen::MatrixXd>(-ops.luD->inverse());
    return ops;
}

std::pair<Eigen::VectorXd, BoundaryVector> merge_inhomogeneous(
    const FamilyOperators& ops, const std::array<const BoundaryVector*, 4>& h_children) {
    const int s = ops.s;
    for (const auto* h : h_children)
        if (!h || h->points_per_side() != s)
            throw std::invalid_argument("merge_inhomogeneous: flux resolution mismatch");
    const MergeIndexMaps maps(s);

    Eigen::VectorXd dh(4 * s);
    for (int i = 0; i < 4; ++i) {
        const auto& m = MergeIndexMaps::kIfaces[i];
        dh.segment(s * i, s) =
            h_children[m[0].child]->side(m[0].side) + h_children[m[1].child]->side(m[1].side);
    }

    Eigen::VectorXd w = ops.X ? Eigen::VectorXd(*ops.X * dh) : Eigen::VectorXd(ops.luD->solve(-dh));

    Eigen::VectorXd h_loc(8 * s);
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 2 * s; ++r) h_loc[2 * s * c + r] = h_children[c]->data()[maps.ext[c][r]];
    h_loc += *ops.B * w;

    BoundaryVector h_par(2 * s, TraceRole::InhomFlux);
    for (int a = 0; a < 8 * s; ++a) h_par.data()[a] = h_loc[maps.perm[a]];
    return {std::move(w), std::move(h_par)};
}

AdaptedFamily adapt_children(
    const std::array<std::shared_ptr<const Eigen::MatrixXd>, 4>& T_children) {
    AdaptedFamily out;
    std::array<int, 4> size{};
    int s_min = 0;
    for (int c = 0; c < 4; ++c) {
        if (!T_children[c]) throw std::invalid_argument("adapt_children: missing child operator");
        size[c] = static_cast<int>(T_children[c]->rows()) / 4;
        s_min = (c == 0) ? size[c] : std::min(s_min, size[c]);
    }
    out.s_common = s_min;
    for (int c = 0; c < 4; ++c) {
        int gap = 0;
        for (int sz = size[c]; sz > s_min; sz /= 2) {
            if (sz % 2 != 0) throw SolverError("adapt_children: unbalanced family");
            ++gap;
        }
        if (s_min << gap != size[c]) throw SolverError("adapt_children: unbalanced family");
        out.gaps[c] = gap;
        if (gap == 0) {
            out.T[c] = T_children[c];
        } else {
            Eigen::MatrixXd Tc = coarsen_dtn(*T_children[c]);
            for (int k = 1; k < gap; ++k) Tc = coarsen_dtn(Tc);
            out.T[c] = std::make_shared<Eigen::MatrixXd>(std::move(Tc));
        }
    }
    return out;
}

std::array<BoundaryVector, 4> split_1to4(const Eigen::MatrixXd& S, const Eigen::VectorXd& w,
                                         const BoundaryVector& g_parent) {
    const int s = static_cast<int>(S.rows()) / 4;
    if (S.cols() != 8 * s || g_parent.data().size() != 8 * s || w.size() != 4 * s)
        throw std::logic_error("split_1to4: operator and trace sizes disagree");

    Eigen::VectorXd gi = S * g_parent.data() + w;
    auto iface = [&](int i) { return gi.segment(s * i, s); };
    // Parent canonical blocks: W1 W2 E1 E2 S1 S2 N1 N2.
    auto pb = [&](int b) { return g_parent.data().segment(s * b, s); };

    std::array<BoundaryVector, 4> g;
    for (int c = 0; c < 4; ++c) g[c] = BoundaryVector(s, TraceRole::Dirichlet);
    g[0].side(Side::West) = pb(0);
    g[0].side(Side::East) = iface(2);
    g[0].side(Side::South) = pb(4);
    g[0].side(Side::North) = iface(0);
    g[1].side(Side::West) = iface(2);
    g[1].side(Side::East) = pb(2);
    g[1].side(Side::South) = pb(5);
    g[1].side(Side::North) = iface(1);
    g[2].side(Side::West) = pb(1);
    g[2].side(Side::East) = iface(3);
    g[2].side(Side::South) = iface(0);
    g[2].side(Side::North) = pb(6);
    g[3].side(Side::West) = iface(3);
    g[3].side(Side::East) = pb(3);
    g[3].side(Side::South) = iface(1);
    g[3].side(Side::North) = pb(7);
    return g;
}

HpsSolver::HpsSolver(HpsTree& tree, double lambda, HpsOptions opt)
    : tree_(tree), lambda_(lambda), opt_(opt) {}

std::shared_ptr<const Eigen::MatrixXd> HpsSolver::coarsened_dtn_of(const HpsTree::Node& child,
                                                                   int gap) {
    const auto key = std::make_tuple(child.level, child.data.shape, gap);
    auto it = coarsened_cache_.find(key);
    if (it == coarsened_cache_.end()) {
        Eigen::MatrixXd Tc = coarsen_dtn(*child.data.T);
        for (int k = 1; k < gap; ++k) Tc = coarsen_dtn(Tc);
        it = coarsened_cache_.emplace(key, std::make_shared<Eigen::MatrixXd>(std::move(Tc))).first;
    }
    return it->second;
}

void HpsSolver::merge_family(HpsTree::Node& parent,
                             const std::array<HpsTree::Node*, 4>& children, bool with_particular) {
    std::array<int, 4> size{};
    int s_min = 0;
    for (int c = 0; c < 4; ++c) {
        size[c] = static_cast<int>(children[c]->data.T->rows()) / 4;
        s_min = (c == 0) ? size[c] : std::min(s_min, size[c]);
    }
    for (int c = 0; c < 4; ++c) {
        int gap = 0;
        while (s_min << gap < size[c]) ++gap;
        if (s_min << gap != size[c])
            throw SolverError("merge: unbalanced family at " + parent.path);
        children[c]->merge_coarse_gap = gap;
    }
    parent.data.shape = "(" + children[0]->data.shape + children[1]->data.shape +
                        children[2]->data.shape + children[3]->data.shape + ")";

    const FamilyKey key{parent.level, parent.data.shape};
    auto it = family_cache_.find(key);
    if (it == family_cache_.end()) {
        std::array<std::shared_ptr<const Eigen::MatrixXd>, 4> Tc;
        for (int c = 0; c < 4; ++c) {
            const int gap = children[c]->merge_coarse_gap;
            Tc[c] = gap > 0 ? coarsened_dtn_of(*children[c], gap) : children[c]->data.T;
        }
        it = family_cache_
                 .emplace(key, merge_4to1(*Tc[0], *Tc[1], *Tc[2], *Tc[3], opt_.multi_rhs))
                 .first;
        ++stats_.family_merges;
    } else {
        ++stats_.family_cache_hits;
    }
    const FamilyOperators& ops = it->second;

    parent.data.T = ops.T;
    parent.data.S = ops.S;
    if (opt_.multi_rhs) {
        parent.data.X = ops.X;
        parent.data.B = ops.B;
    }
    parent.grid = PatchGrid(parent.bounds, 2 * s_min);

    if (with_particular) {
        std::array<BoundaryVector, 4> scratch;
        std::array<const BoundaryVector*, 4> hs{};
        for (int c = 0; c < 4; ++c) {
            if (children[c]->merge_coarse_gap > 0) {
                scratch[c] = coarsen_flux(children[c]->data.h);
                for (int k = 1; k < children[c]->merge_coarse_gap; ++k)
                    scratch[c] = coarsen_flux(scratch[c]);
                hs[c] = &scratch[c];
            } else {
                hs[c] = &children[c]->data.h;
            }
        }
        auto [w, h] = merge_inhomogeneous(ops, hs);
        parent.data.w = std::move(w);
        parent.data.h = std::move(h);
    }
}

void HpsSolver::build(const ScalarField& f) {
    const bool single_pass = !opt_.multi_rhs;
    if (single_pass && !f) throw std::invalid_argument("build: single-pass mode needs f");
    f_ = f;
    tree_.merge_traversal(
        [&](HpsTree::Node& leaf) {
            const LeafDiscretization d{leaf.grid, lambda_};
            const long before = leaf_cache_.stats().dtn_builds;
            leaf.data.T = leaf_cache_.dtn(d);
            leaf.data.shape = "L";
            if (leaf_cache_.stats().dtn_builds > before) ++stats_.leaf_dtn_builds;
            else ++stats_.leaf_dtn_cache_hits;
            if (single_pass)
                leaf.data.h = build_h_leaf(d, sample_cell_field(leaf.grid, f_));
        },
        [&](HpsTree::Node& parent, const std::array<HpsTree::Node*, 4>& children) {
            merge_family(parent, children, single_pass);
        });
    stats_.fast_dtn_fallbacks = leaf_cache_.stats().fast_fallbacks;
    built_ = true;
    particular_ready_ = single_pass;
}

void HpsSolver::upwards(const ScalarField& f) {
    if (!built_ || !opt_.multi_rhs)
        throw std::logic_error("upwards: requires a completed multi-RHS build");
    if (!f) throw std::invalid_argument("upwards: needs f");
    f_ = f;
    tree_.merge_traversal(
        [&](HpsTree::Node& leaf) {
            leaf.data.h = build_h_leaf({leaf.grid, lambda_}, sample_cell_field(leaf.grid, f_));
        },
        [&](HpsTree::Node& parent, const std::array<HpsTree::Node*, 4>& children) {
            FamilyOperators ops; // node-retained operators, no factorization
            ops.s = parent.grid.s / 2;
            ops.X = parent.data.X;
            ops.B = parent.data.B;
            if (!ops.X || !ops.B)
                throw std::logic_error("upwards: interface operators missing at " + parent.path);
            std::array<BoundaryVector, 4> scratch;
            std::array<const BoundaryVector*, 4> hs{};
            for (int c = 0; c < 4; ++c) {
                if (children[c]->merge_coarse_gap > 0) {
                    scratch[c] = coarsen_flux(children[c]->data.h);
                    for (int k = 1; k < children[c]->merge_coarse_gap; ++k)
                        scratch[c] = coarsen_flux(scratch[c]);
                    hs[c] = &scratch[c];
                } else {
                    hs[c] = &children[c]->data.h;
                }
            }
            auto [w, h] = merge_inhomogeneous(ops, hs);
            parent.data.w = std::move(w);
            parent.data.h = std::move(h);
        });
    particular_ready_ = true;
}

void HpsSolver::solve(const ScalarField& g) {
    if (!built_) throw std::logic_error("solve: build stage has not run");
    if (!particular_ready_)
        throw std::logic_error("solve: particular data missing; run upwards first");
    if (!g) throw std::invalid_argument("solve: needs boundary data");

    tree_.split_traversal(
        [&](HpsTree::Node& parent, const std::array<HpsTree::Node*, 4>& children) {
            if (parent.child_index < 0)
                parent.data.g = BoundaryVector::sample(parent.grid, TraceRole::Dirichlet, g);
            if (parent.data.g.points_per_side() != parent.grid.s)
                throw std::logic_error("solve: trace resolution mismatch at " + parent.path);
            auto gc = split_1to4(*parent.data.S, parent.data.w, parent.data.g);
            for (int c = 0; c < 4; ++c) {
                for (int k = 0; k < children[c]->merge_coarse_gap; ++k)
                    gc[c] = prolong_boundary(gc[c]);
                children[c]->data.g = std::move(gc[c]);
            }
        },
        [&](HpsTree::Node& leaf) {
            if (leaf.child_index < 0) // single-node tree
                leaf.data.g = BoundaryVector::sample(leaf.grid, TraceRole::Dirichlet, g);
            const LeafDiscretization d{leaf.grid, lambda_};
            Eigen::MatrixXd F = sample_cell_field(leaf.grid, f_);
            leaf.data.u = solve_leaf(d, leaf_cache_.transform(leaf.grid.s), &leaf.data.g, &F);
            ++stats_.leaf_solves;
        });
}

} // namespace quadhps
