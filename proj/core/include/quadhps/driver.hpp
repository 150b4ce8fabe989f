#ifndef QUADHPS_DRIVER_HPP
#define QUADHPS_DRIVER_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "quadhps/problems.hpp"

namespace quadhps {

/// Invalid user input (command line or config file); maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string problem = "poisson1"; // poisson1 | polar_star | helmholtz
    int M = 16;                       // leaf cells per side, even, 4..64
    int min_level = 0;
    int max_level = 4; // converge sweeps levels min_level..max_level
    bool adaptive = false;
    bool multi_rhs = false;
    std::optional<double> threshold; // refinement threshold; problem default if unset
    double eps = 0.015;              // star-field interface width
    std::string out_path;            // JSON-lines report file ("" = none)
    std::string vtk_path;            // VTK solution file ("" = none)
    std::string csv_path;            // convergence table ("" = stdout only)

    void validate() const;
};

RunConfig parse_config_file(const std::string& path);

struct StorageReport {
    std::size_t t_bytes = 0;
    std::size_t s_bytes = 0;
    std::size_t x_bytes = 0;
    std::size_t b_bytes = 0;
    std::size_t vector_bytes = 0;   // particular data w and h
    std::size_t solution_bytes = 0; // traces g and leaf fields u
    std::size_t matrix_total() const { return t_bytes + s_bytes + x_bytes + b_bytes; }
    std::size_t total() const { return matrix_total() + vector_bytes + solution_bytes; }
};

/// Sums rows x cols x 8 over every payload matrix and vector in the tree.
/// Cache-shared matrices count once per node that retains them.
StorageReport report_storage(const HpsTree& tree);

struct RunReport {
    RunConfig config;
    int level = 0;
    int r_eff = 0;
    long dofs = 0;
    std::size_t leaves = 0;
    double t_build = 0.0;
    double t_upwards = 0.0;
    double t_solve = 0.0;
    double linf = 0.0;
    double l1 = 0.0;
    StorageReport storage;
    HpsStats stats;
};

/// Builds the mesh (uniform or adaptive with 2:1 balancing), runs the
/// build/[upwards]/solve stages at level = max_level, and measures errors.
RunReport run_solve(const RunConfig& cfg);

/// Same solve repeated for levels min_level..max_level.
std::vector<RunReport> run_convergence(const RunConfig& cfg);

/// Convergence table with columns
/// M,L_max,R_eff,DOFs,Linf_err,Linf_order,L1_err,L1_order ("-" until a
/// previous level exists).
void write_convergence_csv(std::ostream& os, const std::vector<RunReport>& rows);

/// One JSON object per line; timing fields are the only run-to-run variance.
void write_jsonl(std::ostream& os, const RunReport& report);

/// Mesh construction shared by run_solve and the test suites.
HpsTree make_mesh(const ProblemSpec& problem, const RunConfig& cfg, int level);

ProblemSpec problem_from_config(const RunConfig& cfg);

} // namespace quadhps

#endif
