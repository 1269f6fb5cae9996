#pragma once

#include <string>
#include <vector>

#include "mcflow/grid.hpp"
#include "mcflow/nonlinearity.hpp"

namespace mcflow {

struct PairingResiduals {
    double pairing = 0.0;       // sup |z . grad u - (sqrt(1+|grad u|^2) - sqrt(1-|z|^2))|
    double flux_formula = 0.0;  // sup |z - grad u / sqrt(1+|grad u|^2)|
};

/// The absolutely continuous pairing identity and the unique-flux formula,
/// evaluated at interior nodes. The candidate z is clipped to the unit ball
/// first (the excess belongs in flux_bound_excess).
PairingResiduals verify_pairing(const ScalarField& u, const FluxField& z);

struct BoundaryNodeCheck {
    std::size_t node = 0;
    double trace_mean = 0.0;   // averaged trace over the 3 nearest interior nodes
    double datum = 0.0;        // prescribed Dirichlet value
    double z_dot_nu = 0.0;     // one-sided-difference flux through the boundary face
    double z_dot_nu_field = 0.0;  // the candidate z evaluated at the node, for reference
    bool ok = false;
};

struct BoundaryCheck {
    bool ok = false;
    std::vector<BoundaryNodeCheck> nodes;
};

/// Weak Dirichlet condition: at each boundary node either the averaged trace
/// matches the datum or the normal flux saturates against the sign of the
/// deviation, min(|trace - g_D|, |sgn(trace - g_D) + z.nu|) <= tol. The
/// normal trace [z, nu] is approximated by the one-sided difference of u
/// through the flux formula (flagged in the report as a modeling choice).
BoundaryCheck verify_boundary(const ScalarField& u, const FluxField& z, double tol);

/// sup over interior nodes of |-div z - h(u) f|. Throws std::domain_error
/// when a singular h meets u <= 0 on nodes where f > 0.
double verify_equation(const ScalarField& u, const FluxField& z, const ScalarField& f,
                       const NonlinearTerm& h);

struct VerificationReport {
    double flux_bound_excess = 0.0;     // max(0, ||z||_inf - 1)
    double pairing_residual = 0.0;
    double flux_formula_residual = 0.0;
    bool boundary_ok = false;
    double boundary_tol = 0.0;
    std::vector<BoundaryNodeCheck> boundary_detail;
    double equation_residual = 0.0;
    // the measure-theoretic normal trace has no grid-exact analogue
    std::string normal_trace_model = "one_sided_difference";
};

VerificationReport verify_solution(const ScalarField& u, const FluxField& z,
                                   const ScalarField& f, const NonlinearTerm& h,
                                   double boundary_tol = 1e-2);

}  // namespace mcflow
