#ifndef QUADHPS_VTK_HPP
#define QUADHPS_VTK_HPP

#include <iosfwd>

#include "quadhps/problems.hpp"

namespace quadhps {

/// Legacy ASCII VTK unstructured grid of the solved leaf cells: one quad per
/// mesh cell, points deduplicated within each leaf only, with cell scalars
/// u, u_exact, error, f, level.
void write_vtk(std::ostream& os, const HpsTree& tree, const ProblemSpec& problem);

} // namespace quadhps

#endif
