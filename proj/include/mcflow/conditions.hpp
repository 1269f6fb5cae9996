#pragma once

#include <optional>
#include <vector>

#include "mcflow/grid.hpp"
#include "mcflow/nonlinearity.hpp"

namespace mcflow {

/// S_1 = (N omega_N^{1/N})^{-1}, the p -> 1 Sobolev constant.
double sobolev_constant_s1(int N);

/// S~_1 = ((N-1) omega_N^{1/N})^{-1}, the p -> 1 Lorentz embedding constant.
double lorentz_constant_s1_tilde(int N);

/// S~_p = p Gamma(1 + N/2)^{1/N} / (sqrt(pi) (N - p)) evaluated at p = 1;
/// independent route to the same constant, used as a cross-check.
double lorentz_constant_from_sp_limit(int N);

struct CheegerViolation {
    double radius;     // ball radius / square half-width
    double integral;   // int_A f
    double perimeter;  // Per(A)
};

/// Sweeps concentric balls (radial; annular shells [r_in, r] on annuli)
/// or concentric mask-aligned squares (2D) and flags every subdomain with
/// |int_A f| > (1 - eps0) Per(A).
std::vector<CheegerViolation> cheeger_subdomain_check(const ScalarField& f, double eps0);

struct ConditionReport {
    double s1_constant = 0.0;
    double s1_tilde_constant = 0.0;
    double ln_norm = 0.0;          // ||f||_{L^N}
    double lninf_norm = 0.0;       // ||f||_{L^{N,infty}}
    double h_infinity = 0.0;
    double threshold_ln = 0.0;     // 1/(S_1 h(inf)); +inf when h(inf) = 0
    double threshold_lninf = 0.0;  // 1/(S~_1 h(inf))
    double margin_ln = 0.0;        // threshold - norm
    double margin_lninf = 0.0;
    std::optional<double> serrin_threshold;  // N/R on balls
    std::optional<double> serrin_margin;     // N/R - |lambda| for constant data on balls
    std::vector<CheegerViolation> cheeger_violations;  // at eps0 = 0
};

/// Evaluates every admissibility threshold against the datum. For constant
/// data on a ball the L^N smallness condition reduces algebraically to the
/// Serrin bound |lambda| < N/R, reported alongside.
ConditionReport check_admissibility(const ScalarField& f, const NonlinearTerm& h);

}  // namespace mcflow
