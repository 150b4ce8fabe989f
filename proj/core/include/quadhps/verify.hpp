#ifndef QUADHPS_VERIFY_HPP
#define QUADHPS_VERIFY_HPP

#include <string>
#include <vector>

namespace quadhps {

struct VerifyCheck {
    std::string name;
    bool pass = false;
    double metric = 0.0;    // measured deviation
    double threshold = 0.0; // acceptance bound on the metric
};

/// Structural invariants of the discretization and the merge/split pipeline:
/// interpolation and pipeline affine-exactness, DtN row sums and symmetry
/// equivariances, fast-vs-full DtN agreement, same-size interface flux
/// continuity, and equivalence with the assembled-system reference solver.
std::vector<VerifyCheck> run_verify_suite();

bool all_pass(const std::vector<VerifyCheck>& checks);

} // namespace quadhps

#endif
