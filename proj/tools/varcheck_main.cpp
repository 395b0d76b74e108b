// varcheck: solve second-order variational problems, verify the arc-length
// integral conditions along trajectories, certify regularity hypotheses on
// samples, and probe for a Lavrentiev gap.

#include <CLI11.hpp>

#include "varcheck/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"second-order variational problem solver and condition checker"};
    app.require_subcommand(1);

    varcheck::RunRequest req;
    std::string problem_path;
    std::string preset_name;
    std::string trajectory_path;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("file", problem_path, "problem file (INI)");
        cmd->add_option("--preset", preset_name,
                        "named problem: quadratic, quadratic-affine, cv90, zero");
        cmd->add_option("--out", req.out_dir, "output directory for artifacts");
        cmd->add_option("--mesh", [&](const CLI::results_t& r) {
            req.mesh = std::stoi(r[0]);
            return true;
        }, "initial mesh intervals");
        cmd->add_option("--refinements", [&](const CLI::results_t& r) {
            req.refinements = std::stoi(r[0]);
            return true;
        }, "refine-and-resolve count");
        cmd->add_option("--grad-tol", [&](const CLI::results_t& r) {
            req.grad_tol = std::stod(r[0]);
            return true;
        }, "gradient sup-norm stopping tolerance");
        cmd->add_option("--seed", [&](const CLI::results_t& r) {
            seed = std::stoull(r[0]);
            seed_set = true;
            return true;
        }, "rng seed for sampling");
        cmd->add_option("--grid", req.grid, "profile grid size");
        cmd->add_option("--cap", [&](const CLI::results_t& r) {
            req.cap = std::stod(r[0]);
            return true;
        }, "single cap for the Lavrentiev prober");
        cmd->add_option("--trajectory", trajectory_path,
                        "trajectory CSV: analyzed by check-conditions, seed for probe-lavrentiev");
        return cmd;
    };

    add_common(app.add_subcommand("solve", "minimize the functional over trajectories"));
    add_common(app.add_subcommand("check-conditions",
                                  "duBois-Reymond and Euler-Lagrange profiles along a trajectory"));
    add_common(app.add_subcommand("check-regularity",
                                  "sampled certificates for the regularity hypotheses"));
    add_common(app.add_subcommand("probe-lavrentiev",
                                  "compare capped and uncapped refined-mesh infima"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : varcheck::kExitParseError;
    }

    req.command = app.get_subcommands().front()->get_name();
    if (!problem_path.empty()) req.problem_path = problem_path;
    if (!preset_name.empty()) req.preset_name = preset_name;
    if (!trajectory_path.empty()) req.trajectory_path = trajectory_path;
    if (seed_set) req.rng_seed = seed;

    const varcheck::RunResult result = varcheck::run_command(req);
    std::fprintf(result.exit_code == 0 ? stdout : stderr, "varcheck %s: %s (exit %d)\n",
                 req.command.c_str(), result.message.c_str(), result.exit_code);
    return result.exit_code;
}
