// Command-line driver: solve / converge / verify / bench.
// Exit codes: 0 success, 2 bad configuration, 3 numerical failure,
// 4 verify-suite mismatch.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadhps/driver.hpp"
#include "quadhps/leaf_solver.hpp"
#include "quadhps/verify.hpp"
#include "quadhps/vtk.hpp"

namespace {

using namespace quadhps;

void add_mesh_options(CLI::App* cmd, RunConfig& cfg, double& threshold) {
    cmd->add_option("--problem", cfg.problem, "poisson1 | polar_star | helmholtz");
    cmd->add_option("--M", cfg.M, "leaf cells per side (even, 4..64)");
    cmd->add_option("--min-level", cfg.min_level, "minimum refinement level");
    cmd->add_option("--max-level", cfg.max_level, "maximum refinement level");
    cmd->add_flag("--adaptive", cfg.adaptive, "refine where |f| exceeds the threshold");
    cmd->add_flag("--multi-rhs", cfg.multi_rhs, "retain interface inverses for re-solves");
    cmd->add_option("--threshold", threshold, "refinement threshold override");
    cmd->add_option("--eps", cfg.eps, "star-field interface width");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

void print_report(const RunReport& r) {
    std::printf("problem      %s%s%s\n", r.config.problem.c_str(),
                r.config.adaptive ? " (adaptive)" : " (uniform)",
                r.config.multi_rhs ? " [multi-rhs]" : "");
    std::printf("M / L / R    %d / %d / %d\n", r.config.M, r.level, r.r_eff);
    std::printf("leaves       %zu\n", r.leaves);
    std::printf("dofs         %ld\n", r.dofs);
    std::printf("Linf error   %.3e\n", r.linf);
    std::printf("L1 error     %.3e\n", r.l1);
    std::printf("t_build      %.3f s\n", r.t_build);
    if (r.config.multi_rhs) std::printf("t_upwards    %.3f s\n", r.t_upwards);
    std::printf("t_solve      %.3f s\n", r.t_solve);
    std::printf("storage      %.2f MB (T %.2f, S %.2f, X %.2f, B %.2f)\n",
                r.storage.total() / 1048576.0, r.storage.t_bytes / 1048576.0,
                r.storage.s_bytes / 1048576.0, r.storage.x_bytes / 1048576.0,
                r.storage.b_bytes / 1048576.0);
    std::printf("counters     dtn builds %ld (hits %ld), merges %ld (hits %ld), leaf solves %ld\n",
                r.stats.leaf_dtn_builds, r.stats.leaf_dtn_cache_hits, r.stats.family_merges,
                r.stats.family_cache_hits, r.stats.leaf_solves);
}

int cmd_solve(const RunConfig& cfg) {
    const RunReport rep = run_solve(cfg);
    print_report(rep);
    if (!cfg.out_path.empty()) {
        auto out = open_out(cfg.out_path);
        write_jsonl(out, rep);
    }
    if (!cfg.vtk_path.empty()) {
        // run_solve's tree is gone; rebuild and re-solve for the field dump.
        const ProblemSpec problem = problem_from_config(cfg);
        HpsTree tree = make_mesh(problem, cfg, cfg.max_level);
        HpsSolver solver(tree, problem.lambda, HpsOptions{cfg.multi_rhs});
        solver.build(problem.f);
        if (cfg.multi_rhs) solver.upwards(problem.f);
        solver.solve(problem.u_exact);
        auto out = open_out(cfg.vtk_path);
        write_vtk(out, tree, problem);
        std::printf("vtk          %s\n", cfg.vtk_path.c_str());
    }
    return 0;
}

int cmd_converge(const RunConfig& cfg) {
    const auto rows = run_convergence(cfg);
    write_convergence_csv(std::cout, rows);
    if (!cfg.csv_path.empty()) {
        auto out = open_out(cfg.csv_path);
        write_convergence_csv(out, rows);
    }
    if (!cfg.out_path.empty()) {
        auto out = open_out(cfg.out_path);
        for (const auto& r : rows) write_jsonl(out, r);
    }
    return 0;
}

int cmd_verify() {
    const auto checks = run_verify_suite();
    for (const auto& c : checks)
        std::printf("%-28s %s  metric %.3e  (tol %.1e)\n", c.name.c_str(),
                    c.pass ? "pass" : "FAIL", c.metric, c.threshold);
    return all_pass(checks) ? 0 : 4;
}

int cmd_bench(const RunConfig& cfg) {
    const auto rows = run_convergence(cfg);
    std::printf("%4s %4s %6s %9s %10s %10s %10s %9s\n", "M", "L", "R_eff", "DOFs", "t_build",
                "t_upwards", "t_solve", "S_MB");
    for (const auto& r : rows)
        std::printf("%4d %4d %6d %9ld %10.3f %10.3f %10.3f %9.2f\n", r.config.M, r.level, r.r_eff,
                    r.dofs, r.t_build, r.t_upwards, r.t_solve,
                    r.storage.matrix_total() / 1048576.0);
    // Informational only: uniform build cost should scale by roughly 4x per
    // level once the top merges dominate.
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (cfg.adaptive || rows[k].level < 4 || rows[k - 1].t_build <= 0.0) continue;
        const double ratio = rows[k].t_build / rows[k - 1].t_build;
        if (ratio < 3.0 || ratio > 6.5)
            std::printf("note: build-time ratio L%d/L%d = %.2f outside [3.0, 6.5]\n",
                        rows[k].level, rows[k - 1].level, ratio);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Direct solver for Poisson and Helmholtz problems on adaptive quadtrees"};
    app.require_subcommand(1);

    RunConfig cfg;
    // The config file supplies defaults; flags win. Loaded before CLI11 runs
    // so option bindings start from the file values.
    for (int k = 1; k < argc - 1; ++k)
        if (std::string(argv[k]) == "--config") {
            try {
                cfg = parse_config_file(argv[k + 1]);
            } catch (const quadhps::ConfigError& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
        }
    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file")
        ->check(CLI::ExistingFile);

    double threshold = 0.0;

    CLI::App* solve = app.add_subcommand("solve", "single solve with a full report");
    add_mesh_options(solve, cfg, threshold);
    solve->add_option("--out", cfg.out_path, "JSON-lines report file");
    solve->add_option("--vtk", cfg.vtk_path, "VTK solution file");

    CLI::App* converge = app.add_subcommand("converge", "level sweep with a convergence table");
    add_mesh_options(converge, cfg, threshold);
    converge->add_option("--csv", cfg.csv_path, "also write the table to this file");
    converge->add_option("--out", cfg.out_path, "JSON-lines report file");

    app.add_subcommand("verify", "run the solver invariant suite");

    CLI::App* bench = app.add_subcommand("bench", "level sweep with a timing table");
    add_mesh_options(bench, cfg, threshold);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e); // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (CLI::App* cmd : {solve, converge, bench})
        if (cmd->parsed() && cmd->count("--threshold")) cfg.threshold = threshold;

    try {
        cfg.validate();
        if (solve->parsed()) return cmd_solve(cfg);
        if (converge->parsed()) return cmd_converge(cfg);
        if (bench->parsed()) return cmd_bench(cfg);
        return cmd_verify();
    } catch (const quadhps::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const quadhps::SolverError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
