#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcflow/functional.hpp"
#include "mcflow/grid.hpp"
#include "mcflow/nonlinearity.hpp"

namespace mcflow {

struct SolverConfig {
    int schedule_depth = 16;            // default schedule p_k = 1 + 2^{-k}, k = 1..depth
    std::vector<double> p_schedule;     // explicit override (strictly decreasing in (1, 2])
    double newton_tol = 1e-10;          // sup of |dE/du_j| / V_j
    int newton_max_iter = 60;
    double backtrack_factor = 0.5;
    double min_step = 9.5367431640625e-7;  // 2^-20
    double outer_tol = 1e-8;            // sup-norm increment of the source-freezing loop
    int outer_max_iter = 200;
    double blowup_sup_threshold = 1e4;
    double degenerate_delta = 1e-2;     // delta of the reported mass int_{u<=delta} h_p(u) f
    bool polish_limit = true;           // extract the p -> 1 limit by a final curvature-only solve

    std::vector<double> schedule() const;  // validates / generates
};

enum class Classification { ConvergedSubcritical, ExtremalBlowup, NewtonFailure };

std::string to_string(Classification c);

/// Diagnostics of one continuation step, the discrete counterparts of the
/// uniform-in-p estimates (sup bound M, total variation, (p-1) int |grad u_p|^p).
struct PStepRecord {
    double p = 0.0;
    double sup_norm = 0.0;
    double tv = 0.0;
    double energy_p_term = 0.0;  // (p-1) int |grad u_p|^p
    double flux_sup = 0.0;
    double max_residual = 0.0;
    int newton_iters = 0;
    int outer_iters = 0;
    int truncation_active_count = 0;   // free nodes where h(u) exceeds the cap 1/(p-1)
    double degenerate_mass = 0.0;      // int_{u <= delta} h_p(u) f
    double saturated_fraction = 0.0;   // fraction of nodes with |z| > 1 - 1e-3
    double energy_warm = 0.0;          // discrete energy entering the last inner solve
    double energy_min = 0.0;           // discrete energy after it
};

struct SolveReport {
    std::vector<PStepRecord> steps;
    Classification classification = Classification::ConvergedSubcritical;
    bool flux_saturated = false;   // limit flux_sup >= 1 - 1e-3 (borderline/extremal marker)
    bool plateau_strict = false;   // sup/tv last step change <= 1e-4 (classification rule)
    bool plateau_monitor = false;  // sup/tv/p-term settled within 1e-3 over the last 4 steps
    bool polish_converged = false;
    double recorded_sup_bound = 0.0;     // max over steps of sup_norm (the bound M)
    double recorded_energy_bound = 0.0;  // max over steps of energy_p_term (the constant C)
    ScalarField u;  // limit field
    FluxField z;    // flux_of(u)
    double limit_sup_norm = 0.0;
    double limit_tv = 0.0;
    double limit_flux_sup = 0.0;
    double limit_equation_residual = 0.0;  // sup interior |-div z - h(u) f|
    std::string failure_detail;

    bool converged() const { return classification == Classification::ConvergedSubcritical; }
};

struct FixedPResult {
    ScalarField u;
    bool converged = false;
    int iters = 0;
    double residual_sup = 0.0;
    double energy_start = 0.0;  // discrete (face-based) energy at the warm start
    double energy_end = 0.0;
    std::vector<double> energy_trace;  // accepted energies, nonincreasing
    std::string detail;
};

/// Damped Newton on the discrete convex energy of the p-regularized problem
/// with frozen source f_eff; Dirichlet values come from the grid. p = 1 is
/// admitted and solves the curvature-only limit system.
FixedPResult solve_fixed_p(const ScalarField& f_eff, double p, const ScalarField& warm_start,
                           const SolverConfig& cfg);

/// Walks the p-schedule with warm starts; at each p runs the source-freezing
/// outer loop u^{m+1} = solve_fixed_p(f h_p(u^m), p, u^m). Emits the limit
/// pair (u, z), per-step diagnostics and the classification.
/// outer_init seeds the first step's outer loop (used by uniqueness_probe).
SolveReport continuation_solve(const ScalarField& f, const NonlinearTerm& h,
                               const SolverConfig& cfg,
                               const std::optional<ScalarField>& outer_init = std::nullopt);

enum class ExtremalSignal { KeepGoing, Plateau, Blowup };

/// Classify a continuation in progress from >= 3 completed step records:
/// blowup when the sup norm exceeds the threshold, grows at least linearly
/// in 1/(p-1) over the last two steps, or the flux saturates on more than
/// half the domain while the residual stalls; plateau when sup and tv have
/// settled to a relative step change <= 1e-4.
ExtremalSignal detect_extremal(std::span<const PStepRecord> steps, const SolverConfig& cfg);

/// Solves twice with outer initializations u = 0 and u = M (the recorded
/// sup bound of the first run) and returns the sup distance of the limits.
double uniqueness_probe(const ScalarField& f, const NonlinearTerm& h, const SolverConfig& cfg);

struct StampacchiaCheck {
    bool precondition_ok = false;  // ||f||_{L^N} < 1/S_1
    bool holds = false;            // decay inequality at every tested pair (5% slack)
    double ln_norm = 0.0;
    double threshold = 0.0;  // 1/S_1
    struct LevelPair {
        double k = 0.0, h = 0.0;
        double vol_k = 0.0, vol_h = 0.0;
        double bound = 0.0;
        bool ok = false;
    };
    std::vector<LevelPair> pairs;
};

/// Level-set decay |A_h| <= |A_k|^{1+1/N} S_1 / ((h-k)(1 - S_1 ||f||_{L^N}))
/// evaluated by quadrature on the given level pairs (defaults to
/// {(0.05, 0.1), (0.1, 0.2)}). The precondition failure is reported, not
/// raised.
StampacchiaCheck stampacchia_decay_check(
    const ScalarField& u, const ScalarField& f,
    std::span<const std::pair<double, double>> level_pairs = {});

/// Discrete face-based energy the solver minimizes (exposed for the
/// minimizer certificates in tests).
double discrete_energy(const ScalarField& u, const ScalarField& f_eff, double p);

}  // namespace mcflow
