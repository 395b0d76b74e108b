#include "varcheck/run.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "varcheck/conditions.hpp"
#include "varcheck/lavrentiev.hpp"

namespace varcheck {

namespace {

std::string format17(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data());
}

std::string format_cap(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%g", v);
    std::string s(buf.data());
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

// Artifacts are buffered and flushed together so the summary can hash every
// file, including on error paths that still produce a report.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, const std::string& content) { files_[name] = content; }

    void flush(const std::string& command, int exit_code) {
        std::filesystem::create_directories(dir_);
        nlohmann::ordered_json summary;
        summary["command"] = command;
        summary["exit_code"] = exit_code;
        nlohmann::ordered_json file_list = nlohmann::ordered_json::array();
        for (const auto& [name, content] : files_) {
            write_file(name, content);
            std::array<char, 20> hex{};
            std::snprintf(hex.data(), hex.size(), "%016llx",
                          static_cast<unsigned long long>(fnv1a64(content)));
            file_list.push_back({{"name", name}, {"fnv1a64", hex.data()}});
        }
        summary["files"] = file_list;
        write_file("summary.json", summary.dump(2) + "\n");
    }

private:
    void write_file(const std::string& name, const std::string& content) {
        std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write artifact: " + name);
        f << content;
    }

    std::string dir_;
    std::map<std::string, std::string> files_;  // name-sorted for the summary
};

SolveReport run_solve(const ProblemFile& pf, ArtifactWriter& artifacts) {
    SolveReport report = solve_refined(pf.problem, pf.solver);
    nlohmann::ordered_json j;
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (const auto& l : report.levels)
        levels.push_back({{"K", l.intervals},
                          {"J", l.objective},
                          {"grad_norm", l.grad_norm},
                          {"iterations", l.iterations},
                          {"converged", l.converged}});
    j["levels"] = levels;
    j["J"] = report.levels.back().objective;
    j["converged"] = report.all_converged();
    artifacts.add("solve_report.json", j.dump(2) + "\n");
    artifacts.add("trajectory.csv", trajectory_csv_string(report.trajectory));
    return report;
}

int do_solve(const ProblemFile& pf, const RunRequest&, ArtifactWriter& artifacts) {
    SolveReport report = run_solve(pf, artifacts);
    return report.all_converged() ? kExitOk : kExitNotConverged;
}

int do_check_conditions(const ProblemFile& pf, const RunRequest& req, ArtifactWriter& artifacts) {
    Trajectory traj;
    bool converged = true;
    if (req.trajectory_path) {
        traj = load_trajectory_csv(*req.trajectory_path);
        if (traj.n != pf.problem.n)
            throw std::runtime_error("trajectory dimension does not match the problem");
    } else {
        SolveReport report = run_solve(pf, artifacts);
        traj = report.trajectory;
        converged = report.all_converged();
    }
    ArcLengthChart chart = arc_length_chart(traj, 8 * traj.interval_count());
    ConditionProfile dbr = dbr_profile(pf.problem, traj, chart, req.grid);
    artifacts.add("dbr_profile.csv", profile_csv_string(dbr));
    nlohmann::ordered_json meta;
    meta["grid"] = req.grid;
    meta["arc_length"] = chart.length;
    meta["dbr"] = {{"c_hat", dbr.c_hat},
                   {"deviation", dbr.deviation},
                   {"singular_endpoint", dbr.singular_endpoint}};
    nlohmann::ordered_json els = nlohmann::ordered_json::array();
    for (int i = 1; i <= pf.problem.n; ++i) {
        ConditionProfile el = el_profile(pf.problem, traj, chart, i, req.grid);
        artifacts.add("el_profile_" + std::to_string(i) + ".csv", profile_csv_string(el));
        els.push_back({{"component", i},
                       {"c_hat", el.c_hat},
                       {"deviation", el.deviation},
                       {"singular_endpoint", el.singular_endpoint}});
    }
    meta["el"] = els;
    artifacts.add("conditions_report.json", meta.dump(2) + "\n");

    ClassicalResiduals classical = classical_residuals(pf.problem, traj, req.grid);
    std::string csv = "t,dbr";
    for (int i = 1; i <= pf.problem.n; ++i) csv += ",el" + std::to_string(i);
    csv += "\n";
    for (std::size_t s = 0; s < classical.t_samples.size(); ++s) {
        csv += format17(classical.t_samples[s]) + "," + format17(classical.dbr_values[s]);
        for (int i = 0; i < pf.problem.n; ++i)
            csv += "," + format17(classical.el_residual[s * pf.problem.n + i]);
        csv += "\n";
    }
    artifacts.add("classical_residuals.csv", csv);
    return converged ? kExitOk : kExitNotConverged;
}

int do_check_regularity(const ProblemFile& pf, const RunRequest&, ArtifactWriter& artifacts) {
    const LagrangianExpr& L = pf.problem.lagrangian;
    std::vector<std::string> parts;
    if (L.declared_autonomous()) {
        parts.push_back(certificate_json(check_superlinearity(L, pf.domain, pf.b_min)));
        parts.push_back(certificate_json(check_quadratic_coercivity(L, pf.domain, pf.b_min)));
    }
    parts.push_back(certificate_json(check_convexity_last_arg(L, pf.domain)));
    parts.push_back(coercivity_json(check_coercivity(L, pf.domain, pf.radii)));
    parts.push_back(certificate_json(check_tonelli_morrey(L, pf.domain)));
    parts.push_back(certificate_json(check_autonomy_condition(L, pf.domain)));
    parts.push_back(certificate_json(check_sarychev_torres(L, pf.domain, pf.st_beta, pf.st_mu)));
    std::string out = "[\n";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        out += parts[i];
        if (i + 1 < parts.size()) out += ",";
        out += "\n";
    }
    out += "]\n";
    artifacts.add("certificates.json", out);
    return kExitOk;
}

int do_probe_lavrentiev(const ProblemFile& pf, const RunRequest& req, ArtifactWriter& artifacts) {
    std::optional<Trajectory> seed;
    if (req.trajectory_path) {
        seed = load_trajectory_csv(*req.trajectory_path);
        if (seed->n != pf.problem.n)
            throw std::runtime_error("seed trajectory dimension does not match the problem");
    }
    SolveOptions opts = pf.solver;
    opts.penalty_mu = pf.penalty_mu;
    std::vector<double> caps = req.cap ? std::vector<double>{*req.cap} : pf.caps;

    bool converged = true;
    nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
    for (double cap : caps) {
        GapReport report = probe_gap(pf.problem, opts, cap, seed);
        converged = converged && report.all_converged();
        sweep.push_back(nlohmann::ordered_json::parse(gap_report_json(report)));
        artifacts.add("gap_cap_" + format_cap(cap) + ".csv", gap_report_csv(report));
    }
    artifacts.add("gap_report.json", sweep.dump(2) + "\n");
    return converged ? kExitOk : kExitNotConverged;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

RunResult run_command(const RunRequest& req) {
    ArtifactWriter artifacts(req.out_dir);
    int code = kExitOk;
    std::string message = "ok";
    try {
        if (req.problem_path.has_value() == req.preset_name.has_value())
            throw std::invalid_argument("exactly one of a problem file or --preset is required");

        ProblemFile pf;
        try {
            pf = req.preset_name ? parse_problem_file(preset(*req.preset_name))
                                 : load_problem_file(*req.problem_path);
        } catch (const ProblemFileError& err) {
            artifacts.add("error.txt",
                          std::string(req.problem_path ? req.problem_path->c_str() : "preset") +
                              ": " + err.what() + "\n");
            artifacts.flush(req.command, kExitParseError);
            return {kExitParseError, err.what()};
        }

        if (req.mesh) pf.solver.initial_mesh = *req.mesh;
        if (req.refinements) pf.solver.refinements = *req.refinements;
        if (req.grad_tol) pf.solver.grad_tol = *req.grad_tol;
        if (req.rng_seed) pf.domain.rng_seed = *req.rng_seed;
        if (pf.solver.initial_mesh < 1 || pf.solver.refinements < 0 ||
            !(pf.solver.grad_tol > 0.0) || req.grid < 16)
            throw std::invalid_argument("invalid solver/grid overrides");

        artifacts.add("problem.ini", pf.canonical_text());

        if (req.command == "solve")
            code = do_solve(pf, req, artifacts);
        else if (req.command == "check-conditions")
            code = do_check_conditions(pf, req, artifacts);
        else if (req.command == "check-regularity")
            code = do_check_regularity(pf, req, artifacts);
        else if (req.command == "probe-lavrentiev")
            code = do_probe_lavrentiev(pf, req, artifacts);
        else
            throw std::invalid_argument("unknown command '" + req.command + "'");
        if (code == kExitNotConverged) message = "solver did not converge at every level";
    } catch (const EvalDomainError& err) {
        artifacts.add("error.txt", std::string(err.what()) + "\n");
        artifacts.flush(req.command, kExitDomainError);
        return {kExitDomainError, err.what()};
    } catch (const ParseError& err) {
        artifacts.add("error.txt", std::string(err.what()) + "\n");
        artifacts.flush(req.command, kExitParseError);
        return {kExitParseError, err.what()};
    } catch (const std::invalid_argument& err) {
        artifacts.add("error.txt", std::string(err.what()) + "\n");
        artifacts.flush(req.command, kExitParseError);
        return {kExitParseError, err.what()};
    } catch (const std::exception& err) {
        artifacts.add("error.txt", std::string(err.what()) + "\n");
        artifacts.flush(req.command, kExitParseError);
        return {kExitParseError, err.what()};
    }
    artifacts.flush(req.command, code);
    return {code, message};
}

}  // namespace varcheck
