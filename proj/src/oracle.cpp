#include "mcflow/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace mcflow {

double g_alpha(double r, double alpha, int N) {
    if (!(r > 0.0)) throw std::domain_error("g_alpha: r must be positive");
    if (!(alpha > 0.0 && alpha < N - 1))
        throw std::invalid_argument("g_alpha: need 0 < alpha < N - 1");
    const double q = (alpha + 2.0 - N) / (N - 1.0);
    const double w = std::pow(r, 2.0 * alpha + 2.0);
    return alpha * (alpha * alpha - q * w) / std::pow(alpha * alpha + w, 1.5);
}

RadialExactSolution RadialExactSolution::power_singular(double alpha, int N) {
    if (N < 3)
        throw std::invalid_argument(
            "power_singular: the family is stated for N >= 3 (N = 2 leaves no admissible alpha range)");
    if (!(alpha > 0.0 && alpha < N - 1))
        throw std::invalid_argument("power_singular: need 0 < alpha < N - 1");
    RadialExactSolution s;
    s.kind_ = Kind::Power;
    s.alpha_ = alpha;
    s.dim_ = N;
    s.radius_ = 1.0;
    return s;
}

RadialExactSolution RadialExactSolution::spherical_cap(double lambda, double R, int N) {
    if (!(R > 0.0) || N < 2) throw std::invalid_argument("spherical_cap: need R > 0, N >= 2");
    if (std::abs(lambda) > static_cast<double>(N) / R)
        throw std::invalid_argument("spherical_cap: |lambda| <= N/R required (vertical tangent at equality)");
    RadialExactSolution s;
    s.kind_ = Kind::Cap;
    s.lambda_ = lambda;
    s.radius_ = R;
    s.dim_ = N;
    return s;
}

ExactSample RadialExactSolution::eval(double r) const {
    ExactSample out{};
    if (kind_ == Kind::Power) {
        if (!(r > 0.0 && r <= radius_))
            throw std::domain_error("power_singular: r outside (0, R]");
        const double a = alpha_;
        out.u = std::pow(r, -a) - 1.0;
        out.du = -a * std::pow(r, -a - 1.0);
        out.f = (dim_ - 1.0) * g_alpha(r, a, dim_) / r;
        // z = u' / sqrt(1 + u'^2) in the overflow-safe rearrangement
        out.z = -a / std::sqrt(std::pow(r, 2.0 * a + 2.0) + a * a);
        return out;
    }
    if (!(r >= 0.0 && r <= radius_)) throw std::domain_error("spherical_cap: r outside [0, R]");
    if (lambda_ == 0.0) return out;  // flat graph
    const double sgn = lambda_ > 0.0 ? 1.0 : -1.0;
    const double rho = dim_ / std::abs(lambda_);
    out.u = sgn * (std::sqrt(rho * rho - r * r) - std::sqrt(rho * rho - radius_ * radius_));
    out.du = -sgn * r / std::sqrt(rho * rho - r * r);
    out.f = lambda_;
    out.z = -sgn * r / rho;
    return out;
}

ScalarField RadialExactSolution::sample_u(GridPtr g) const {
    return sample_radial(g, [this](double r) { return eval(r).u; });
}

ScalarField RadialExactSolution::sample_f(GridPtr g) const {
    return sample_radial(g, [this](double r) { return eval(r).f; });
}

FluxField RadialExactSolution::sample_z(GridPtr g) const {
    FluxField out(g);
    const auto& rg = g->radial();
    for (std::size_t i = 0; i < rg.node_count; ++i) out.values[i] = eval(rg.node(i)).z;
    return out;
}

double f_alpha_marcinkiewicz(double alpha, int N) {
    if (N < 3) throw std::invalid_argument("f_alpha_marcinkiewicz: N >= 3");
    if (!(alpha > 0.0 && alpha < N - 1))
        throw std::invalid_argument("f_alpha_marcinkiewicz: need 0 < alpha < N - 1");
    return (N - 1.0) * std::pow(unit_ball_volume(N), 1.0 / N);
}

}  // namespace mcflow
