#pragma once

#include "mcflow/grid.hpp"

namespace mcflow {

/// g_alpha from the singular radial family, evaluated in the rearranged
/// form alpha (alpha^2 - q r^{2 alpha + 2}) / (alpha^2 + r^{2 alpha + 2})^{3/2}
/// with q = (alpha + 2 - N)/(N - 1), which stays finite as r -> 0+ where
/// the raw display would overflow. g_alpha(0+) = 1 and |g_alpha| <= 1.
double g_alpha(double r, double alpha, int N);

struct ExactSample {
    double u, du, f, z;
};

/// Closed-form radial solutions used as acceptance oracles.
///
/// power_singular: u = r^{-alpha} - 1 solving -div z = (N-1) g_alpha(r)/r
/// on the punctured unit ball (0 < alpha < N-1, N >= 3; unbounded at 0,
/// so tests evaluate it on annuli).
///
/// spherical_cap: u = sgn(lambda) (sqrt(rho^2 - r^2) - sqrt(rho^2 - R^2)),
/// rho = N/|lambda|, solving -div z = lambda on B_R for |lambda| <= N/R;
/// z = -sgn(lambda) r/rho, so |z(R)| = |lambda| R / N.
class RadialExactSolution {
public:
    static RadialExactSolution power_singular(double alpha, int N);
    static RadialExactSolution spherical_cap(double lambda, double R, int N);

    ExactSample eval(double r) const;
    ScalarField sample_u(GridPtr g) const;
    ScalarField sample_f(GridPtr g) const;
    FluxField sample_z(GridPtr g) const;

    bool is_cap() const { return kind_ == Kind::Cap; }
    double alpha() const { return alpha_; }
    double lambda() const { return lambda_; }
    double radius() const { return radius_; }
    int dimension() const { return dim_; }

private:
    enum class Kind { Power, Cap };
    Kind kind_ = Kind::Cap;
    double alpha_ = 1.0, lambda_ = 0.0, radius_ = 1.0;
    int dim_ = 3;
};

/// ||f_alpha||_{L^{N,infty}(B_1)} = (N-1) omega_N^{1/N}, independent of alpha.
double f_alpha_marcinkiewicz(double alpha, int N);

}  // namespace mcflow
