#include "mcflow/conditions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mcflow/functional.hpp"

namespace mcflow {

double sobolev_constant_s1(int N) {
    if (N < 2) throw std::invalid_argument("sobolev_constant_s1: N >= 2");
    return 1.0 / (N * std::pow(unit_ball_volume(N), 1.0 / N));
}

double lorentz_constant_s1_tilde(int N) {
    if (N < 2) throw std::invalid_argument("lorentz_constant_s1_tilde: N >= 2");
    return 1.0 / ((N - 1.0) * std::pow(unit_ball_volume(N), 1.0 / N));
}

double lorentz_constant_from_sp_limit(int N) {
    if (N < 2) throw std::invalid_argument("lorentz_constant_from_sp_limit: N >= 2");
    const double p = 1.0;
    return p * std::pow(std::tgamma(1.0 + 0.5 * N), 1.0 / N) /
           (std::sqrt(std::numbers::pi) * (N - p));
}

namespace {

std::vector<CheegerViolation> cheeger_radial(const ScalarField& f, double eps0) {
    const auto& rg = f.grid->radial();
    const int N = rg.dimension;
    const std::size_t n = rg.node_count;
    const double h = rg.spacing();
    const double c = N * unit_ball_volume(N);
    std::vector<CheegerViolation> out;
    // cumulative trapezoid of int f r^{N-1} dr from r_inner to r_i
    double acc = 0.0;
    double prev = f.values[0] * std::pow(rg.node(0), N - 1);
    for (std::size_t i = 1; i < n; ++i) {
        const double cur = f.values[i] * std::pow(rg.node(i), N - 1);
        acc += 0.5 * (prev + cur) * h;
        prev = cur;
        const double r = rg.node(i);
        const double integral = c * acc;
        double per = c * std::pow(r, N - 1);
        if (!rg.is_ball()) per += c * std::pow(rg.r_inner, N - 1);  // shell has two boundary spheres
        if (std::abs(integral) > (1.0 - eps0) * per)
            out.push_back({r, integral, per});
    }
    return out;
}

std::vector<CheegerViolation> cheeger_tensor(const ScalarField& f, double eps0) {
    const auto& tg = f.grid->tensor();
    const double h = tg.spacing;
    const std::size_t cx = (tg.nx - 1) / 2, cy = (tg.ny - 1) / 2;
    std::vector<CheegerViolation> out;
    const std::size_t wmax = std::min(std::min(cx, tg.nx - 1 - cx), std::min(cy, tg.ny - 1 - cy));
    for (std::size_t w = 1; w <= wmax; ++w) {
        bool inside = true;
        double sum = 0.0;
        for (std::size_t iy = cy - w; iy <= cy + w && inside; ++iy)
            for (std::size_t ix = cx - w; ix <= cx + w; ++ix) {
                if (!tg.in_mask(ix, iy)) {
                    inside = false;
                    break;
                }
                sum += f.values[tg.idx(ix, iy)];
            }
        if (!inside) break;
        const double side = 2.0 * w * h;
        const double integral = sum * h * h;
        const double per = 4.0 * side;
        if (std::abs(integral) > (1.0 - eps0) * per)
            out.push_back({0.5 * side, integral, per});
    }
    return out;
}

}  // namespace

std::vector<CheegerViolation> cheeger_subdomain_check(const ScalarField& f, double eps0) {
    if (!(eps0 >= 0.0 && eps0 < 1.0))
        throw std::invalid_argument("cheeger_subdomain_check: eps0 in [0, 1)");
    return f.grid->is_radial() ? cheeger_radial(f, eps0) : cheeger_tensor(f, eps0);
}

ConditionReport check_admissibility(const ScalarField& f, const NonlinearTerm& h) {
    const int N = f.grid->dimension();
    ConditionReport rep;
    rep.s1_constant = sobolev_constant_s1(N);
    rep.s1_tilde_constant = lorentz_constant_s1_tilde(N);
    rep.ln_norm = lp_norm(f, static_cast<double>(N));
    rep.lninf_norm = marcinkiewicz_norm(f, N);
    rep.h_infinity = h.h_infinity();

    const double inf = std::numeric_limits<double>::infinity();
    rep.threshold_ln = rep.h_infinity > 0.0 ? 1.0 / (rep.s1_constant * rep.h_infinity) : inf;
    rep.threshold_lninf =
        rep.h_infinity > 0.0 ? 1.0 / (rep.s1_tilde_constant * rep.h_infinity) : inf;
    rep.margin_ln = rep.threshold_ln - rep.ln_norm;
    rep.margin_lninf = rep.threshold_lninf - rep.lninf_norm;

    if (f.grid->is_radial() && f.grid->radial().is_ball()) {
        const auto& rg = f.grid->radial();
        rep.serrin_threshold = static_cast<double>(N) / rg.r_outer;
        double lo = f.values[0], hi = f.values[0];
        for (double v : f.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double scale = std::max(std::abs(lo), std::abs(hi));
        if (hi - lo <= 1e-12 * std::max(1.0, scale))
            rep.serrin_margin = *rep.serrin_threshold - std::abs(f.values[0]);
    }
    rep.cheeger_violations = cheeger_subdomain_check(f, 0.0);
    return rep;
}

}  // namespace mcflow
