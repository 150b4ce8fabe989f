#include "quadhps/vtk.hpp"

#include <cstdio>
#include <ostream>
#include <vector>

namespace quadhps {

void write_vtk(std::ostream& os, const HpsTree& tree, const ProblemSpec& problem) {
    std::vector<const HpsTree::Node*> leaves;
    std::size_t points = 0, cells = 0;
    for (const auto& [path, node] : tree.nodes()) {
        if (!tree.is_leaf(path)) continue;
        if (node.data.u.size() == 0) throw std::logic_error("write_vtk: leaf not solved");
        leaves.push_back(&node);
        const std::size_t s = static_cast<std::size_t>(node.grid.s);
        points += (s + 1) * (s + 1);
        cells += s * s;
    }

    char buf[256];
    os << "# vtk DataFile Version 3.0\n";
    os << "quadhps solution\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";

    os << "POINTS " << points << " double\n";
    for (const auto* n : leaves) {
        const int s = n->grid.s;
        const double h = n->grid.cell_width();
        for (int j = 0; j <= s; ++j) {
            for (int i = 0; i <= s; ++i) {
                const double x = (i == s) ? n->bounds.x_hi : n->bounds.x_lo + i * h;
                const double y = (j == s) ? n->bounds.y_hi : n->bounds.y_lo + j * h;
                std::snprintf(buf, sizeof buf, "%.15g %.15g 0\n", x, y);
                os << buf;
            }
        }
    }

    os << "CELLS " << cells << " " << 5 * cells << "\n";
    std::size_t base = 0;
    for (const auto* n : leaves) {
        const std::size_t s = static_cast<std::size_t>(n->grid.s);
        for (std::size_t j = 0; j < s; ++j) {
            for (std::size_t i = 0; i < s; ++i) {
                const std::size_t p00 = base + j * (s + 1) + i;
                os << "4 " << p00 << " " << p00 + 1 << " " << p00 + s + 2 << " " << p00 + s + 1
                   << "\n";
            }
        }
        base += (s + 1) * (s + 1);
    }

    os << "CELL_TYPES " << cells << "\n";
    for (std::size_t c = 0; c < cells; ++c) os << "9\n";

    os << "CELL_DATA " << cells << "\n";
    auto scalars = [&](const char* name, auto&& value) {
        os << "SCALARS " << name << " double 1\n";
        os << "LOOKUP_TABLE default\n";
        for (const auto* n : leaves) {
            for (int j = 0; j < n->grid.s; ++j) {
                for (int i = 0; i < n->grid.s; ++i) {
                    std::snprintf(buf, sizeof buf, "%.15g\n", value(*n, i, j));
                    os << buf;
                }
            }
        }
    };
    scalars("u", [](const HpsTree::Node& n, int i, int j) { return n.data.u(i, j); });
    scalars("u_exact", [&](const HpsTree::Node& n, int i, int j) {
        return problem.u_exact(n.grid.x_center(i), n.grid.y_center(j));
    });
    scalars("error", [&](const HpsTree::Node& n, int i, int j) {
        return n.data.u(i, j) - problem.u_exact(n.grid.x_center(i), n.grid.y_center(j));
    });
    scalars("f", [&](const HpsTree::Node& n, int i, int j) {
        return problem.f(n.grid.x_center(i), n.grid.y_center(j));
    });
    scalars("level", [](const HpsTree::Node& n, int, int) { return double(n.level); });
}

} // namespace quadhps
