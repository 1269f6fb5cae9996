#include "mcflow/run.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>

#include <nlohmann/json.hpp>

#include "mcflow/conditions.hpp"
#include "mcflow/functional.hpp"
#include "mcflow/oracle.hpp"
#include "mcflow/report_io.hpp"
#include "mcflow/verifier.hpp"

namespace mcflow {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

json config_echo(const ProblemConfig& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg.raw) j[k] = v;
    return j;
}

int classification_exit(Classification c) {
    switch (c) {
        case Classification::ConvergedSubcritical: return kExitOk;
        case Classification::NewtonFailure: return kExitNewtonFailure;
        case Classification::ExtremalBlowup: return kExitExtremalBlowup;
    }
    return kExitOk;
}

ScalarField limit_residual_field(const SolveReport& rep, const ScalarField& f,
                                 const NonlinearTerm& h) {
    // node-based equation defect of the limit pair, written into the profile
    ScalarField out(rep.u.grid);
    const ScalarField div = divergence(rep.z);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double uk = rep.u.values[k];
        double hv = 0.0;
        if (h.singular_at_zero() && uk <= 0.0) {
            hv = (f.values[k] > 0.0) ? std::numeric_limits<double>::quiet_NaN() : 0.0;
        } else {
            hv = h(std::max(uk, 0.0));
        }
        out.values[k] = -div.values[k] - hv * f.values[k];
    }
    return out;
}

int solve_into(const ProblemConfig& cfg, const std::string& out_dir, const std::string& tag,
               std::ostream& log) {
    GridPtr grid = cfg.build_grid();
    const ScalarField f = cfg.build_source(grid);

    SolveReport rep = continuation_solve(f, cfg.h, cfg.solver);
    const ConditionReport cond = check_admissibility(f, cfg.h);
    VerificationReport ver;
    bool have_ver = false;
    try {
        ver = verify_solution(rep.u, rep.z, f, cfg.h, cfg.boundary_tol);
        have_ver = true;
    } catch (const std::domain_error&) {
        // no verifiable limit pair (e.g. blowup run with a singular h)
    }

    json report{{"schema", "mcflow-report-v1"},
                {"command", "solve"},
                {"config", config_echo(cfg)},
                {"solve", to_json(rep)},
                {"conditions", to_json(cond)}};
    if (have_ver) report["verification"] = to_json(ver);

    ensure_dir(out_dir);
    write_text_file(join(out_dir, "report" + tag + ".json"), report.dump(2) + "\n");
    write_profile(join(out_dir, "profile" + tag + ".csv"), rep.u, rep.z, f,
                  limit_residual_field(rep, f, cfg.h), cfg.h);

    log << "solve" << tag << ": " << to_string(rep.classification)
        << "  sup=" << rep.limit_sup_norm << "  flux_sup=" << rep.limit_flux_sup
        << "  eq_residual=" << rep.limit_equation_residual << "\n";
    return classification_exit(rep.classification);
}

}  // namespace

int run_solve(const ProblemConfig& cfg, std::ostream& log) {
    return solve_into(cfg, cfg.out_dir, "", log);
}

int run_check(const ProblemConfig& cfg, std::ostream& log) {
    GridPtr grid = cfg.build_grid();
    const ScalarField f = cfg.build_source(grid);
    const ConditionReport cond = check_admissibility(f, cfg.h);
    json report{{"schema", "mcflow-report-v1"},
                {"command", "check"},
                {"config", config_echo(cfg)},
                {"conditions", to_json(cond)}};
    ensure_dir(cfg.out_dir);
    write_text_file(join(cfg.out_dir, "report.json"), report.dump(2) + "\n");
    log << "check: ln_norm=" << cond.ln_norm << " threshold_ln=" << cond.threshold_ln
        << " margin_ln=" << cond.margin_ln << " lninf_norm=" << cond.lninf_norm
        << " margin_lninf=" << cond.margin_lninf
        << " cheeger_violations=" << cond.cheeger_violations.size() << "\n";
    return kExitOk;
}

int run_oracle(const ProblemConfig& cfg, std::ostream& log) {
    GridPtr grid = cfg.build_grid();
    if (!grid->is_radial()) throw std::invalid_argument("oracle: radial domains only");
    const auto& rg = grid->radial();

    RadialExactSolution sol =
        cfg.source == ProblemConfig::SourceKind::Example53
            ? RadialExactSolution::power_singular(cfg.alpha, rg.dimension)
            : RadialExactSolution::spherical_cap(cfg.lambda, rg.r_outer, rg.dimension);

    const ScalarField u = sol.sample_u(grid);
    const ScalarField f = sol.sample_f(grid);
    const FluxField z = sol.sample_z(grid);
    ScalarField resid(grid);
    {
        const ScalarField div = divergence(z);
        for (std::size_t i = 1; i + 1 < rg.node_count; ++i)
            resid.values[i] = -div.values[i] - f.values[i];
    }
    ensure_dir(cfg.out_dir);
    write_profile(join(cfg.out_dir, "oracle_profile.csv"), u, z, f, resid, cfg.h);
    log << "oracle: wrote exact profile (" << (sol.is_cap() ? "spherical_cap" : "power_singular")
        << ")\n";
    return kExitOk;
}

int run_sweep(const ProblemConfig& cfg, std::ostream& log) {
    if (cfg.sweep_parameter.empty() || cfg.sweep_values.empty())
        throw std::invalid_argument("sweep: sweep.parameter and sweep.values required");
    ensure_dir(cfg.out_dir);
    int worst = kExitOk;
    for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
        ProblemConfig c = cfg;
        if (cfg.sweep_parameter == "lambda") c.lambda = cfg.sweep_values[i];
        else c.alpha = cfg.sweep_values[i];
        char tag[32];
        std::snprintf(tag, sizeof tag, "_%03zu", i);
        log << cfg.sweep_parameter << " = " << cfg.sweep_values[i] << ": ";
        const int code = solve_into(c, cfg.out_dir, tag, log);
        worst = std::max(worst, code);
    }
    return worst;
}

int run_verify(const std::string& profile_path, const std::string& out_dir, std::ostream& log) {
    const LoadedProfile lp = read_profile(profile_path);
    const VerificationReport ver = verify_solution(lp.u, lp.z, lp.f, lp.h);
    json report{{"schema", "mcflow-report-v1"},
                {"command", "verify"},
                {"profile", profile_path},
                {"verification", to_json(ver)}};
    ensure_dir(out_dir);
    write_text_file(join(out_dir, "verify_report.json"), report.dump(2) + "\n");
    log << "verify: flux_bound_excess=" << ver.flux_bound_excess
        << " pairing=" << ver.pairing_residual << " flux_formula=" << ver.flux_formula_residual
        << " equation=" << ver.equation_residual << " boundary_ok=" << ver.boundary_ok << "\n";
    return kExitOk;
}

}  // namespace mcflow
