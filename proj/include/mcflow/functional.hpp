#pragma once

#include "mcflow/grid.hpp"
#include "mcflow/nonlinearity.hpp"

namespace mcflow {

/// Terms of the relaxed area functional at regularization exponent p:
///   total = area_term + p_term - source_term + boundary_penalty
struct EnergyBreakdown {
    double area_term = 0.0;         // int sqrt(1 + |grad u|^2)
    double p_term = 0.0;            // (p-1)/p int |grad u|^p
    double source_term = 0.0;       // int f_eff u
    double boundary_penalty = 0.0;  // int_boundary |u - datum| dH^{N-1}

    double total() const { return area_term + p_term - source_term + boundary_penalty; }
};

/// z = grad u / sqrt(1 + |grad u|^2); pointwise norm strictly below 1 for
/// finite fields.
FluxField flux_of(const ScalarField& u);

EnergyBreakdown energy(const ScalarField& u, const ScalarField& f_eff, double p);

/// PDE defect -div(grad u/sqrt(1+|grad u|^2)) - (p-1) div(|grad u|^{p-2} grad u) - h_p(u) f,
/// node-based, reported at interior nodes (boundary entries are zero).
ScalarField residual(const ScalarField& u, const ScalarField& f, const NonlinearTerm& h, double p);

/// max |residual| over interior nodes
double residual_sup(const ScalarField& u, const ScalarField& f, const NonlinearTerm& h, double p);

/// int |grad u| by volume quadrature of the node-based gradient.
double total_variation(const ScalarField& u);

/// Marcinkiewicz L^{N,infty} quasi-norm: sup_t t |{|f| > t}|^{1/N}, swept
/// over 400 log-spaced thresholds up to sup|f| (the sup of the strict-level
/// function over all t is attained at plateau edges, i.e. on closed level
/// sets of the sampled values).
double marcinkiewicz_norm(const ScalarField& f, int N);

double lp_norm(const ScalarField& f, double p);
double sup_norm(const ScalarField& f);

/// |grad u|^{p-2} grad u at grad u = 0 is 0 (monotone-operator convention);
/// helper shared with the solver: the combined flux magnitude function
///   a_p(t) = t/sqrt(1+t^2) + (p-1) t^{p-1},  t = |grad u| >= 0.
double flux_magnitude(double t, double p);

}  // namespace mcflow
