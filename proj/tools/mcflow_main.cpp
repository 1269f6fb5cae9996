#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "mcflow/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mcflow: bounded solutions of the prescribed mean curvature problem by p -> 1 continuation"};
    app.require_subcommand(1);

    std::string config_path, out_override, profile_path;
    int schedule_depth = -1;
    double tol = -1.0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "problem config (key = value text)");
        if (needs_config) opt->required();
        cmd->add_option("--out", out_override, "output directory (overrides config and MCFLOW_OUT)");
        cmd->add_option("--schedule-depth", schedule_depth, "continuation depth k (p_min = 1+2^-k)");
        cmd->add_option("--tol", tol, "Newton residual tolerance");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the continuation and verify the limit");
    add_common(solve, true);
    CLI::App* check = app.add_subcommand("check", "evaluate the admissibility conditions only");
    add_common(check, true);
    CLI::App* oracle = app.add_subcommand("oracle", "write the closed-form solution profile");
    add_common(oracle, true);
    CLI::App* sweep = app.add_subcommand("sweep", "solve over a grid of lambda or alpha values");
    add_common(sweep, true);
    CLI::App* verify = app.add_subcommand("verify", "re-verify a saved profile");
    verify->add_option("profile", profile_path, "profile.csv written by solve/oracle")->required();
    verify->add_option("--out", out_override, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            std::string out = out_override.empty() ? "." : out_override;
            return mcflow::run_verify(profile_path, out, std::cout);
        }

        mcflow::ProblemConfig cfg = mcflow::load_config(config_path);
        if (schedule_depth > 0) {
            cfg.solver.schedule_depth = schedule_depth;
            cfg.solver.p_schedule.clear();
        }
        if (tol > 0.0) cfg.solver.newton_tol = tol;
        if (const char* env = std::getenv("MCFLOW_OUT")) cfg.out_dir = env;
        if (!out_override.empty()) cfg.out_dir = out_override;

        if (solve->parsed()) return mcflow::run_solve(cfg, std::cout);
        if (check->parsed()) return mcflow::run_check(cfg, std::cout);
        if (oracle->parsed()) return mcflow::run_oracle(cfg, std::cout);
        if (sweep->parsed()) return mcflow::run_sweep(cfg, std::cout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mcflow::kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mcflow::kExitNewtonFailure;
    }
    return 0;
}
