#include "mcflow/verifier.hpp"

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

double clip_unit(double t) { return std::min(t, 1.0); }

}  // namespace

PairingResiduals verify_pairing(const ScalarField& u, const FluxField& z) {
    const FluxField g = gradient(u);
    PairingResiduals out;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!node_active(*u.grid, k) || node_is_boundary(*u.grid, k)) continue;
        const double t = g.norm_at(k);
        const double area = std::sqrt(1.0 + t * t);
        double zn = z.norm_at(k);
        const double scale = zn > 1.0 ? 1.0 / zn : 1.0;  // clip excess
        zn = clip_unit(zn);
        double dot = 0.0, formula = 0.0;
        for (std::size_t c = 0; c < z.comps; ++c) {
            const double zc = z.component(k, c) * scale;
            dot += zc * g.component(k, c);
            const double d = zc - g.component(k, c) / area;
            formula += d * d;
        }
        const double pairing = std::abs(dot - (area - std::sqrt(1.0 - zn * zn)));
        out.pairing = std::max(out.pairing, pairing);
        out.flux_formula = std::max(out.flux_formula, std::sqrt(formula));
    }
    return out;
}

namespace {

// one-sided second-order derivative of u along the inward stencil, returned
// as the outward slope (positive when u increases toward the boundary)
double outward_slope(const std::vector<double>& v, std::size_t b, std::ptrdiff_t stride,
                     std::size_t avail, double h) {
    if (avail >= 2) {
        const double a0 = v[b], a1 = v[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(b) + stride)],
                     a2 = v[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(b) + 2 * stride)];
        return (3.0 * a0 - 4.0 * a1 + a2) / (2.0 * h);
    }
    const double a0 = v[b], a1 = v[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(b) + stride)];
    return (a0 - a1) / h;
}

BoundaryNodeCheck check_node_radial(const ScalarField& u, const FluxField& z, std::size_t b,
                                    bool outer, double tol) {
    const auto& rg = u.grid->radial();
    const std::size_t n = rg.node_count;
    const double h = rg.spacing();
    BoundaryNodeCheck c;
    c.node = b;
    c.datum = outer ? rg.outer_value : rg.inner_value;
    // averaged trace over the 3 nearest interior nodes
    double mean = 0.0;
    for (std::size_t j = 1; j <= 3; ++j) mean += u.values[outer ? n - 1 - j : j];
    c.trace_mean = mean / 3.0;
    const std::ptrdiff_t stride = outer ? -1 : 1;
    const double du_outward = outward_slope(u.values, b, stride, n >= 3 ? 2 : 1, h);
    // z.nu through the flux formula of the one-sided slope
    c.z_dot_nu = du_outward / std::sqrt(1.0 + du_outward * du_outward);
    c.z_dot_nu_field = (outer ? 1.0 : -1.0) * z.values[b];
    const double dev = c.trace_mean - c.datum;
    const double sgn = dev >= 0.0 ? 1.0 : -1.0;
    c.ok = std::min(std::abs(dev), std::abs(sgn + c.z_dot_nu)) <= tol;
    return c;
}

}  // namespace

BoundaryCheck verify_boundary(const ScalarField& u, const FluxField& z, double tol) {
    if (!(tol > 0.0 && tol <= 0.1))
        throw std::invalid_argument("verify_boundary: tol in (0, 0.1]");
    BoundaryCheck out;
    out.ok = true;
    if (u.grid->is_radial()) {
        const auto& rg = u.grid->radial();
        out.nodes.push_back(check_node_radial(u, z, rg.node_count - 1, true, tol));
        if (!rg.is_ball()) out.nodes.push_back(check_node_radial(u, z, 0, false, tol));
        for (const auto& c : out.nodes) out.ok = out.ok && c.ok;
        return out;
    }

    const auto& tg = u.grid->tensor();
    const double h = tg.spacing;
    // interior nodes once, for the nearest-interior trace average
    std::vector<std::size_t> interior;
    for (std::size_t k = 0; k < tg.mask.size(); ++k)
        if (tg.kinds[k] == TensorGrid2D::NodeKind::Interior) interior.push_back(k);
    for (std::size_t k = 0; k < tg.mask.size(); ++k) {
        if (tg.kinds[k] != TensorGrid2D::NodeKind::Boundary) continue;
        BoundaryNodeCheck c;
        c.node = k;
        c.datum = 0.0;
        const double bx = tg.x(k % tg.nx), by = tg.y(k / tg.nx);
        // three nearest interior nodes
        std::array<std::pair<double, std::size_t>, 3> best{
            {{1e300, k}, {1e300, k}, {1e300, k}}};
        for (std::size_t j : interior) {
            const double dx = tg.x(j % tg.nx) - bx, dy = tg.y(j / tg.nx) - by;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best[2].first) {
                best[2] = {d2, j};
                std::sort(best.begin(), best.end(),
                          [](auto& a, auto& b) { return a.first < b.first; });
            }
        }
        double mean = 0.0;
        int cnt = 0;
        for (auto& [d2, j] : best)
            if (d2 < 1e300) {
                mean += u.values[j];
                ++cnt;
            }
        c.trace_mean = cnt ? mean / cnt : u.values[k];

        // one-sided slopes along the axes pointing inward, combined with nu
        const auto nu = tg.normals[k];
        const std::size_t ix = k % tg.nx, iy = k / tg.nx;
        double grad_out[2] = {0.0, 0.0};
        auto slope_axis = [&](int axis) -> double {
            const std::ptrdiff_t stride = axis == 0 ? 1 : static_cast<std::ptrdiff_t>(tg.nx);
            const std::size_t pos = axis == 0 ? ix : iy;
            const std::size_t limit = axis == 0 ? tg.nx : tg.ny;
            const bool plus_in = pos + 1 < limit && tg.mask[static_cast<std::size_t>(
                                                       static_cast<std::ptrdiff_t>(k) + stride)];
            const bool minus_in = pos > 0 && tg.mask[static_cast<std::size_t>(
                                                 static_cast<std::ptrdiff_t>(k) - stride)];
            if (plus_in && minus_in)
                return (u.values[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) + stride)] -
                        u.values[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) - stride)]) /
                       (2.0 * h);
            if (plus_in) {
                const bool two = pos + 2 < limit && tg.mask[static_cast<std::size_t>(
                                                        static_cast<std::ptrdiff_t>(k) + 2 * stride)];
                return -outward_slope(u.values, k, stride, two ? 2 : 1, h);
            }
            if (minus_in) {
                const bool two = pos >= 2 && tg.mask[static_cast<std::size_t>(
                                                 static_cast<std::ptrdiff_t>(k) - 2 * stride)];
                return outward_slope(u.values, k, -stride, two ? 2 : 1, h);
            }
            return 0.0;
        };
        grad_out[0] = slope_axis(0);
        grad_out[1] = slope_axis(1);
        const double t = std::hypot(grad_out[0], grad_out[1]);
        const double scale = 1.0 / std::sqrt(1.0 + t * t);
        c.z_dot_nu = scale * (grad_out[0] * nu[0] + grad_out[1] * nu[1]);
        c.z_dot_nu_field = z.component(k, 0) * nu[0] + z.component(k, 1) * nu[1];
        const double dev = c.trace_mean - c.datum;
        const double sgn = dev >= 0.0 ? 1.0 : -1.0;
        c.ok = std::min(std::abs(dev), std::abs(sgn + c.z_dot_nu)) <= tol;
        out.ok = out.ok && c.ok;
        out.nodes.push_back(c);
    }
    return out;
}

double verify_equation(const ScalarField& u, const FluxField& z, const ScalarField& f,
                       const NonlinearTerm& h) {
    const ScalarField div = divergence(z);
    double m = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!node_active(*u.grid, k) || node_is_boundary(*u.grid, k)) continue;
        double hv;
        if (h.singular_at_zero() && u.values[k] <= 0.0) {
            if (f.values[k] > 0.0)
                throw std::domain_error(
                    "verify_equation: singular h with u <= 0 where f > 0 (no positive solution)");
            hv = 0.0;
        } else {
            hv = h(std::max(u.values[k], 0.0));
        }
        m = std::max(m, std::abs(-div.values[k] - hv * f.values[k]));
    }
    return m;
}

VerificationReport verify_solution(const ScalarField& u, const FluxField& z,
                                   const ScalarField& f, const NonlinearTerm& h,
                                   double boundary_tol) {
    VerificationReport rep;
    rep.flux_bound_excess = std::max(0.0, z.sup_norm() - 1.0);
    const PairingResiduals pr = verify_pairing(u, z);
    rep.pairing_residual = pr.pairing;
    rep.flux_formula_residual = pr.flux_formula;
    const BoundaryCheck bc = verify_boundary(u, z, boundary_tol);
    rep.boundary_ok = bc.ok;
    rep.boundary_tol = boundary_tol;
    rep.boundary_detail = bc.nodes;
    rep.equation_residual = verify_equation(u, z, f, h);
    return rep;
}

}  // namespace mcflow
