#include "quadhps/driver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace quadhps {

void RunConfig::validate() const {
    if (problem != "poisson1" && problem != "polar_star" && problem != "helmholtz")
        throw ConfigError("unknown problem: " + problem);
    if (M < 4 || M > 64 || M % 2 != 0)
        throw ConfigError("M must be even and within 4..64");
    if (max_level < 0 || max_level > 12)
        throw ConfigError("max_level must be within 0..12");
    if (min_level < 0 || min_level > max_level)
        throw ConfigError("min_level must be within 0..max_level");
    if (threshold && *threshold <= 0.0)
        throw ConfigError("threshold must be positive");
    if (eps <= 0.0) throw ConfigError("eps must be positive");
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "problem") cfg.problem = val;
            else if (key == "M") cfg.M = std::stoi(val);
            else if (key == "min_level") cfg.min_level = std::stoi(val);
            else if (key == "max_level") cfg.max_level = std::stoi(val);
            else if (key == "adaptive") cfg.adaptive = (val == "true" || val == "1");
            else if (key == "multi_rhs") cfg.multi_rhs = (val == "true" || val == "1");
            else if (key == "threshold") cfg.threshold = std::stod(val);
            else if (key == "eps") cfg.eps = std::stod(val);
            else if (key == "out") cfg.out_path = val;
            else if (key == "vtk") cfg.vtk_path = val;
            else if (key == "csv") cfg.csv_path = val;
            else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for " + key);
        } catch (const std::out_of_range&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    return cfg;
}

ProblemSpec problem_from_config(const RunConfig& cfg) {
    ProblemSpec p = cfg.problem == "polar_star" ? make_polar_star(cfg.eps)
                                                : make_problem(cfg.problem);
    if (cfg.threshold) p.refine_threshold = *cfg.threshold;
    return p;
}

HpsTree make_mesh(const ProblemSpec& problem, const RunConfig& cfg, int level) {
    if (cfg.adaptive) {
        HpsTree tree = HpsTree::build(problem.domain, cfg.M, level,
                                      refine_by_magnitude(problem.f, problem.refine_threshold),
                                      cfg.min_level);
        tree.balance();
        return tree;
    }
    return HpsTree::build(problem.domain, cfg.M, level,
                          [](const PatchGrid&) { return true; });
}

StorageReport report_storage(const HpsTree& tree) {
    StorageReport r;
    auto bytes = [](const std::shared_ptr<const Eigen::MatrixXd>& m) -> std::size_t {
        return m ? static_cast<std::size_t>(m->size()) * sizeof(double) : 0;
    };
    for (const auto& [path, node] : tree.nodes()) {
        const auto& p = node.data;
        r.t_bytes += bytes(p.T);
        r.s_bytes += bytes(p.S);
        r.x_bytes += bytes(p.X);
        r.b_bytes += bytes(p.B);
        r.vector_bytes += sizeof(double) * (static_cast<std::size_t>(p.w.size()) +
                                            static_cast<std::size_t>(p.h.data().size()));
        r.solution_bytes += sizeof(double) * (static_cast<std::size_t>(p.g.data().size()) +
                                              static_cast<std::size_t>(p.u.size()));
    }
    return r;
}

RunReport run_solve(const RunConfig& cfg) {
    cfg.validate();
    const ProblemSpec problem = problem_from_config(cfg);
    RunReport rep;
    rep.config = cfg;
    rep.level = cfg.max_level;
    rep.r_eff = cfg.M << cfg.max_level;

    HpsTree tree = make_mesh(problem, cfg, cfg.max_level);
    rep.leaves = tree.leaf_count();
    rep.dofs = tree.total_dofs();

    HpsSolver solver(tree, problem.lambda, HpsOptions{cfg.multi_rhs});
    using clock = std::chrono::steady_clock;
    auto tic = clock::now();
    solver.build(problem.f);
    rep.t_build = std::chrono::duration<double>(clock::now() - tic).count();
    if (cfg.multi_rhs) {
        tic = clock::now();
        solver.upwards(problem.f);
        rep.t_upwards = std::chrono::duration<double>(clock::now() - tic).count();
    }
    tic = clock::now();
    solver.solve(problem.u_exact);
    rep.t_solve = std::chrono::duration<double>(clock::now() - tic).count();

    const ErrorNorms norms = error_norms(tree, problem.u_exact);
    rep.linf = norms.linf;
    rep.l1 = norms.l1;
    rep.storage = report_storage(tree);
    rep.stats = solver.stats();
    return rep;
}

std::vector<RunReport> run_convergence(const RunConfig& cfg) {
    cfg.validate();
    std::vector<RunReport> rows;
    for (int level = cfg.min_level; level <= cfg.max_level; ++level) {
        RunConfig one = cfg;
        one.min_level = cfg.adaptive ? std::min(cfg.min_level, level) : 0;
        one.max_level = level;
        rows.push_back(run_solve(one));
    }
    return rows;
}

void write_convergence_csv(std::ostream& os, const std::vector<RunReport>& rows) {
    os << "M,L_max,R_eff,DOFs,Linf_err,Linf_order,L1_err,L1_order\n";
    char buf[256];
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const RunReport& r = rows[k];
        std::string linf_ord = "-", l1_ord = "-";
        if (k > 0) {
            std::snprintf(buf, sizeof buf, "%.2f", std::log2(rows[k - 1].linf / r.linf));
            linf_ord = buf;
            std::snprintf(buf, sizeof buf, "%.2f", std::log2(rows[k - 1].l1 / r.l1));
            l1_ord = buf;
        }
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%ld,%.2e,%s,%.2e,%s\n", r.config.M, r.level,
                      r.r_eff, r.dofs, r.linf, linf_ord.c_str(), r.l1, l1_ord.c_str());
        os << buf;
    }
}

void write_jsonl(std::ostream& os, const RunReport& r) {
    nlohmann::json j;
    j["problem"] = r.config.problem;
    j["M"] = r.config.M;
    j["level"] = r.level;
    j["r_eff"] = r.r_eff;
    j["adaptive"] = r.config.adaptive;
    j["multi_rhs"] = r.config.multi_rhs;
    j["dofs"] = r.dofs;
    j["leaves"] = r.leaves;
    j["linf"] = r.linf;
    j["l1"] = r.l1;
    j["t_build"] = r.t_build;
    j["t_upwards"] = r.t_upwards;
    j["t_solve"] = r.t_solve;
    j["storage"] = {{"T", r.storage.t_bytes},       {"S", r.storage.s_bytes},
                    {"X", r.storage.x_bytes},       {"B", r.storage.b_bytes},
                    {"vectors", r.storage.vector_bytes}, {"solution", r.storage.solution_bytes}};
    j["counters"] = {{"leaf_dtn_builds", r.stats.leaf_dtn_builds},
                     {"leaf_dtn_cache_hits", r.stats.leaf_dtn_cache_hits},
                     {"family_merges", r.stats.family_merges},
                     {"family_cache_hits", r.stats.family_cache_hits},
                     {"fast_dtn_fallbacks", r.stats.fast_dtn_fallbacks},
                     {"leaf_solves", r.stats.leaf_solves}};
    os << j.dump() << "\n";
}

} // namespace quadhps
