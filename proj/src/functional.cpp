#include "mcflow/functional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcflow {

namespace {

bool node_active(const Grid& g, std::size_t k) {
    return g.is_radial() || g.tensor().mask[k] != 0;
}

bool node_is_boundary(const Grid& g, std::size_t k) {
    if (g.is_radial()) {
        const auto& rg = g.radial();
        if (k + 1 == rg.node_count) return true;
        return k == 0 && !rg.is_ball();
    }
    return g.tensor().kinds[k] == TensorGrid2D::NodeKind::Boundary;
}

}  // namespace

double flux_magnitude(double t, double p) {
    double v = t / std::sqrt(1.0 + t * t);
    if (p > 1.0 && t > 0.0) v += (p - 1.0) * std::pow(t, p - 1.0);
    return v;
}

FluxField flux_of(const ScalarField& u) {
    FluxField g = gradient(u);
    const std::size_t n = g.grid->node_count();
    for (std::size_t k = 0; k < n; ++k) {
        const double t = g.norm_at(k);
        const double s = 1.0 / std::sqrt(1.0 + t * t);
        for (std::size_t c = 0; c < g.comps; ++c) g.component(k, c) *= s;
    }
    return g;
}

EnergyBreakdown energy(const ScalarField& u, const ScalarField& f_eff, double p) {
    // p = 1 is admitted for the limit functional (the p_term vanishes)
    if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("energy: p must lie in [1, 2]");
    const FluxField g = gradient(u);
    const std::size_t n = u.size();

    ScalarField area_density(u.grid), p_density(u.grid), fu(u.grid);
    for (std::size_t k = 0; k < n; ++k) {
        if (!node_active(*u.grid, k)) continue;
        const double t = g.norm_at(k);
        area_density.values[k] = std::sqrt(1.0 + t * t);
        if (p > 1.0) p_density.values[k] = std::pow(t, p);
        fu.values[k] = f_eff.values[k] * u.values[k];
    }

    EnergyBreakdown e;
    e.area_term = integrate(area_density);
    e.p_term = (p > 1.0) ? (p - 1.0) / p * integrate(p_density) : 0.0;
    e.source_term = integrate(fu);

    // trace deviation from the Dirichlet datum, weighted by boundary measure
    if (u.grid->is_radial()) {
        const auto& rg = u.grid->radial();
        const double c = rg.dimension * unit_ball_volume(rg.dimension);
        e.boundary_penalty =
            c * std::pow(rg.r_outer, rg.dimension - 1) * std::abs(u.values[rg.node_count - 1] - rg.outer_value);
        if (!rg.is_ball())
            e.boundary_penalty +=
                c * std::pow(rg.r_inner, rg.dimension - 1) * std::abs(u.values[0] - rg.inner_value);
    } else {
        const auto& tg = u.grid->tensor();
        double acc = 0.0;
        std::size_t nb = 0;
        for (std::size_t k = 0; k < tg.mask.size(); ++k)
            if (tg.kinds[k] == TensorGrid2D::NodeKind::Boundary) {
                acc += std::abs(u.values[k]);
                ++nb;
            }
        e.boundary_penalty = nb ? acc / static_cast<double>(nb) * boundary_measure(*u.grid) : 0.0;
    }
    return e;
}

ScalarField residual(const ScalarField& u, const ScalarField& f, const NonlinearTerm& h, double p) {
    if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("residual: p must lie in (1, 2]");
    const FluxField g = gradient(u);
    FluxField total_flux = g;
    const std::size_t n = u.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double t = g.norm_at(k);
        const double curv = 1.0 / std::sqrt(1.0 + t * t);
        const double preg = (t > 0.0) ? (p - 1.0) * std::pow(t, p - 2.0) : 0.0;
        for (std::size_t c = 0; c < g.comps; ++c)
            total_flux.component(k, c) = (curv + preg) * g.component(k, c);
    }
    ScalarField div = divergence(total_flux);
    ScalarField out(u.grid);
    for (std::size_t k = 0; k < n; ++k) {
        if (!node_active(*u.grid, k) || node_is_boundary(*u.grid, k)) continue;
        out.values[k] = -div.values[k] - h.hp(p, u.values[k]) * f.values[k];
    }
    return out;
}

double residual_sup(const ScalarField& u, const ScalarField& f, const NonlinearTerm& h, double p) {
    const ScalarField r = residual(u, f, h, p);
    double m = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k)
        if (node_active(*u.grid, k) && !node_is_boundary(*u.grid, k))
            m = std::max(m, std::abs(r.values[k]));
    return m;
}

double total_variation(const ScalarField& u) {
    const FluxField g = gradient(u);
    ScalarField mag(u.grid);
    for (std::size_t k = 0; k < u.size(); ++k)
        if (node_active(*u.grid, k)) mag.values[k] = g.norm_at(k);
    return integrate(mag);
}

double marcinkiewicz_norm(const ScalarField& f, int N) {
    if (N != f.grid->dimension())
        throw std::invalid_argument("marcinkiewicz_norm: N does not match the grid dimension");
    const double top = sup_norm(f);
    if (top == 0.0) return 0.0;
    constexpr int kSweep = 400;
    const double lo = std::log(top * 1e-6), hi = std::log(top);
    const std::vector<double> w = quadrature_weights(*f.grid);
    const std::size_t n = f.size();

    // the sup over all t of t |{|f| > t}|^{1/N} is attained at the sampled
    // plateau edges, so sweep closed level sets {|f| >= t}; a node's cell
    // counts only when its whole neighborhood passes (inner approximation,
    // so grid values approach the continuum norm from below)
    std::vector<std::uint8_t> pass(n, 0);
    auto neighbors_pass = [&](std::size_t k) -> bool {
        if (f.grid->is_radial()) {
            if (k > 0 && !pass[k - 1]) return false;
            if (k + 1 < n && !pass[k + 1]) return false;
            return true;
        }
        const auto& tg = f.grid->tensor();
        const std::size_t ix = k % tg.nx, iy = k / tg.nx;
        if (ix + 1 < tg.nx && tg.mask[k + 1] && !pass[k + 1]) return false;
        if (ix > 0 && tg.mask[k - 1] && !pass[k - 1]) return false;
        if (iy + 1 < tg.ny && tg.mask[k + tg.nx] && !pass[k + tg.nx]) return false;
        if (iy > 0 && tg.mask[k - tg.nx] && !pass[k - tg.nx]) return false;
        return true;
    };

    double best = 0.0;
    for (int j = 0; j < kSweep; ++j) {
        const double t = std::exp(lo + (hi - lo) * static_cast<double>(j) / (kSweep - 1));
        for (std::size_t k = 0; k < n; ++k)
            pass[k] = (node_active(*f.grid, k) && std::abs(f.values[k]) >= t) ? 1 : 0;
        double vol = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (pass[k] && neighbors_pass(k)) vol += w[k];
        if (vol > 0.0) best = std::max(best, t * std::pow(vol, 1.0 / N));
    }
    return best;
}

double lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    ScalarField pw(f.grid);
    for (std::size_t k = 0; k < f.size(); ++k)
        if (node_active(*f.grid, k)) pw.values[k] = std::pow(std::abs(f.values[k]), p);
    return std::pow(integrate(pw), 1.0 / p);
}

double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (node_active(*f.grid, k)) m = std::max(m, std::abs(f.values[k]));
    return m;
}

}  // namespace mcflow
