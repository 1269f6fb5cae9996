#include "mcflow/grid.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace mcflow {

double unit_ball_volume(int N) {
    if (N < 1) throw std::invalid_argument("unit_ball_volume: N must be >= 1");
    return std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0);
}

std::vector<double> RadialGrid::nodes() const {
    std::vector<double> out(node_count);
    for (std::size_t i = 0; i < node_count; ++i) out[i] = node(i);
    return out;
}

void RadialGrid::validate() const {
    if (dimension < 2) throw std::invalid_argument("RadialGrid: dimension must be >= 2");
    if (node_count < 3) throw std::invalid_argument("RadialGrid: need at least 3 nodes");
    if (r_inner < 0.0) throw std::invalid_argument("RadialGrid: r_inner must be >= 0");
    if (!(r_outer > r_inner)) throw std::invalid_argument("RadialGrid: r_outer must exceed r_inner");
    if (!(spacing() > 0.0)) throw std::invalid_argument("RadialGrid: degenerate spacing");
}

TensorGrid2D TensorGrid2D::rectangle(std::size_t nx, std::size_t ny, double spacing) {
    TensorGrid2D g;
    g.nx = nx;
    g.ny = ny;
    g.spacing = spacing;
    g.mask.assign(nx * ny, 1);
    g.classify();
    return g;
}

TensorGrid2D TensorGrid2D::disc(std::size_t nx, std::size_t ny, double spacing) {
    TensorGrid2D g;
    g.nx = nx;
    g.ny = ny;
    g.spacing = spacing;
    g.mask.assign(nx * ny, 0);
    const double cx = 0.5 * spacing * static_cast<double>(nx - 1);
    const double cy = 0.5 * spacing * static_cast<double>(ny - 1);
    const double rad = std::min(cx, cy) + 1e-12;
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double dx = g.x(ix) - cx, dy = g.y(iy) - cy;
            if (dx * dx + dy * dy <= rad * rad) g.mask[g.idx(ix, iy)] = 1;
        }
    g.classify();
    return g;
}

void TensorGrid2D::classify() {
    kinds.assign(nx * ny, NodeKind::Exterior);
    normals.assign(nx * ny, {0.0, 0.0});
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            if (!in_mask(ix, iy)) continue;
            // a missing neighbor (out of mask or off the array) contributes
            // its outward direction to the staircase normal
            double nux = 0.0, nuy = 0.0;
            if (ix + 1 >= nx || !in_mask(ix + 1, iy)) nux += 1.0;
            if (ix == 0 || !in_mask(ix - 1, iy)) nux -= 1.0;
            if (iy + 1 >= ny || !in_mask(ix, iy + 1)) nuy += 1.0;
            if (iy == 0 || !in_mask(ix, iy - 1)) nuy -= 1.0;
            const std::size_t k = idx(ix, iy);
            const double len = std::hypot(nux, nuy);
            if (len > 0.0) {
                kinds[k] = NodeKind::Boundary;
                normals[k] = {nux / len, nuy / len};
            } else {
                bool edge = (ix == 0 || iy == 0 || ix + 1 == nx || iy + 1 == ny);
                bool missing = edge;
                if (!missing) {
                    missing = !in_mask(ix + 1, iy) || !in_mask(ix - 1, iy) ||
                              !in_mask(ix, iy + 1) || !in_mask(ix, iy - 1);
                }
                // opposing missing neighbors cancel in the sum; still a boundary node
                kinds[k] = missing ? NodeKind::Boundary : NodeKind::Interior;
                if (missing) normals[k] = {1.0, 0.0};
            }
        }
    }
}

void TensorGrid2D::validate() const {
    if (nx < 3 || ny < 3) throw std::invalid_argument("TensorGrid2D: nx, ny must be >= 3");
    if (!(spacing > 0.0)) throw std::invalid_argument("TensorGrid2D: spacing must be positive");
    if (mask.size() != nx * ny) throw std::invalid_argument("TensorGrid2D: mask size mismatch");
    if (kinds.size() != nx * ny) throw std::invalid_argument("TensorGrid2D: call classify() first");

    // connectivity of the masked region (4-neighborhood BFS)
    std::size_t first = mask.size();
    std::size_t total = 0;
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) {
            ++total;
            if (first == mask.size()) first = k;
        }
    if (total == 0) throw std::invalid_argument("TensorGrid2D: empty mask");
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::deque<std::size_t> queue{first};
    seen[first] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        ++reached;
        const std::size_t ix = k % nx, iy = k / nx;
        auto push = [&](std::size_t j) {
            if (mask[j] && !seen[j]) {
                seen[j] = 1;
                queue.push_back(j);
            }
        };
        if (ix + 1 < nx) push(k + 1);
        if (ix > 0) push(k - 1);
        if (iy + 1 < ny) push(k + nx);
        if (iy > 0) push(k - nx);
    }
    if (reached != total) throw std::invalid_argument("TensorGrid2D: masked region is not connected");

    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (kinds[k] != NodeKind::Boundary) continue;
        const double len = std::hypot(normals[k][0], normals[k][1]);
        if (std::abs(len - 1.0) > 1e-12)
            throw std::invalid_argument("TensorGrid2D: boundary normal is not unit");
    }
}

Grid::Grid(RadialGrid g) : g_(std::move(g)) { radial().validate(); }

Grid::Grid(TensorGrid2D g) : g_(std::move(g)) {
    auto& tg = std::get<TensorGrid2D>(g_);
    if (tg.kinds.empty()) tg.classify();
    tg.validate();
}

int Grid::dimension() const { return is_radial() ? radial().dimension : 2; }

std::size_t Grid::node_count() const {
    return is_radial() ? radial().node_count : tensor().nx * tensor().ny;
}

GridPtr make_grid(RadialGrid g) { return std::make_shared<Grid>(std::move(g)); }
GridPtr make_grid(TensorGrid2D g) { return std::make_shared<Grid>(std::move(g)); }

ScalarField::ScalarField(GridPtr g, double fill)
    : grid(std::move(g)), values(grid->node_count(), fill) {}

ScalarField::ScalarField(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->node_count())
        throw std::invalid_argument("ScalarField: value count does not match grid");
}

bool ScalarField::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void ScalarField::require_finite() const {
    if (!all_finite()) throw std::invalid_argument("ScalarField: non-finite values");
}

FluxField::FluxField(GridPtr g, double fill)
    : grid(std::move(g)),
      comps(grid->flux_components()),
      values(grid->node_count() * comps, fill) {}

double FluxField::norm_at(std::size_t node) const {
    if (comps == 1) return std::abs(values[node]);
    return std::hypot(values[2 * node], values[2 * node + 1]);
}

double FluxField::sup_norm() const {
    double m = 0.0;
    const std::size_t n = grid->node_count();
    if (!grid->is_radial()) {
        const auto& tg = grid->tensor();
        for (std::size_t k = 0; k < n; ++k)
            if (tg.mask[k]) m = std::max(m, norm_at(k));
        return m;
    }
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, norm_at(k));
    return m;
}

namespace {

// one-sided second-order first derivative at index 0 of (a, b, c) spaced h
inline double one_sided(double a, double b, double c, double h) {
    return (-3.0 * a + 4.0 * b - c) / (2.0 * h);
}

FluxField gradient_radial(const ScalarField& u) {
    const auto& rg = u.grid->radial();
    const std::size_t n = rg.node_count;
    const double h = rg.spacing();
    FluxField out(u.grid);
    const auto& v = u.values;
    for (std::size_t i = 1; i + 1 < n; ++i) out.values[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    if (rg.is_ball()) {
        out.values[0] = 0.0;  // symmetric ghost u(-h) = u(h)
    } else {
        out.values[0] = one_sided(v[0], v[1], v[2], h);
    }
    out.values[n - 1] = -one_sided(v[n - 1], v[n - 2], v[n - 3], h);
    return out;
}

FluxField gradient_tensor(const ScalarField& u) {
    const auto& tg = u.grid->tensor();
    const double h = tg.spacing;
    FluxField out(u.grid);
    const auto& v = u.values;
    auto in = [&](std::size_t ix, std::size_t iy) { return tg.in_mask(ix, iy); };
    auto deriv = [&](std::size_t ix, std::size_t iy, int axis) -> double {
        const std::size_t k = tg.idx(ix, iy);
        const std::size_t stride = (axis == 0) ? 1 : tg.nx;
        const std::size_t imax = (axis == 0) ? tg.nx : tg.ny;
        const std::size_t pos = (axis == 0) ? ix : iy;
        const bool has_plus = pos + 1 < imax && tg.mask[k + stride];
        const bool has_minus = pos > 0 && tg.mask[k - stride];
        if (has_plus && has_minus) return (v[k + stride] - v[k - stride]) / (2.0 * h);
        if (has_plus) {
            if (pos + 2 < imax && tg.mask[k + 2 * stride])
                return one_sided(v[k], v[k + stride], v[k + 2 * stride], h);
            return (v[k + stride] - v[k]) / h;
        }
        if (has_minus) {
            if (pos >= 2 && tg.mask[k - 2 * stride])
                return -one_sided(v[k], v[k - stride], v[k - 2 * stride], h);
            return (v[k] - v[k - stride]) / h;
        }
        return 0.0;
    };
    for (std::size_t iy = 0; iy < tg.ny; ++iy)
        for (std::size_t ix = 0; ix < tg.nx; ++ix) {
            if (!in(ix, iy)) continue;
            const std::size_t k = tg.idx(ix, iy);
            out.values[2 * k] = deriv(ix, iy, 0);
            out.values[2 * k + 1] = deriv(ix, iy, 1);
        }
    return out;
}

}  // namespace

FluxField gradient(const ScalarField& u) {
    u.require_finite();
    return u.grid->is_radial() ? gradient_radial(u) : gradient_tensor(u);
}

ScalarField divergence(const FluxField& F) {
    if (F.grid->is_radial()) {
        const auto& rg = F.grid->radial();
        const int N = rg.dimension;
        const std::size_t n = rg.node_count;
        const double h = rg.spacing();
        ScalarField out(F.grid);
        // w = r^{N-1} F; div = w' / r^{N-1}
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(rg.node(i), N - 1) * F.values[i];
        for (std::size_t i = 1; i + 1 < n; ++i)
            out.values[i] = (w[i + 1] - w[i - 1]) / (2.0 * h * std::pow(rg.node(i), N - 1));
        if (rg.is_ball()) {
            double scale = 0.0;
            for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(F.values[i]));
            if (std::abs(F.values[0]) > 1e-12 * std::max(scale, 1.0))
                throw std::domain_error("divergence: radial field is singular at r = 0");
            // odd field: div F(0) = N F'(0), F'(0) = F(h)/h + O(h^2)
            out.values[0] = static_cast<double>(N) * F.values[1] / h;
        } else {
            out.values[0] = one_sided(w[0], w[1], w[2], h) / std::pow(rg.node(0), N - 1);
        }
        out.values[n - 1] =
            -one_sided(w[n - 1], w[n - 2], w[n - 3], h) / std::pow(rg.node(n - 1), N - 1);
        return out;
    }
    const auto& tg = F.grid->tensor();
    const double h = tg.spacing;
    ScalarField out(F.grid);
    auto deriv = [&](std::size_t ix, std::size_t iy, int axis) -> double {
        const std::size_t k = tg.idx(ix, iy);
        const std::size_t stride = (axis == 0) ? 1 : tg.nx;
        const std::size_t imax = (axis == 0) ? tg.nx : tg.ny;
        const std::size_t pos = (axis == 0) ? ix : iy;
        auto comp = [&](std::size_t node) { return F.values[2 * node + static_cast<std::size_t>(axis)]; };
        const bool has_plus = pos + 1 < imax && tg.mask[k + stride];
        const bool has_minus = pos > 0 && tg.mask[k - stride];
        if (has_plus && has_minus) return (comp(k + stride) - comp(k - stride)) / (2.0 * h);
        if (has_plus) {
            if (pos + 2 < imax && tg.mask[k + 2 * stride])
                return one_sided(comp(k), comp(k + stride), comp(k + 2 * stride), h);
            return (comp(k + stride) - comp(k)) / h;
        }
        if (has_minus) {
            if (pos >= 2 && tg.mask[k - 2 * stride])
                return -one_sided(comp(k), comp(k - stride), comp(k - 2 * stride), h);
            return (comp(k) - comp(k - stride)) / h;
        }
        return 0.0;
    };
    for (std::size_t iy = 0; iy < tg.ny; ++iy)
        for (std::size_t ix = 0; ix < tg.nx; ++ix)
            if (tg.in_mask(ix, iy))
                out.values[tg.idx(ix, iy)] = deriv(ix, iy, 0) + deriv(ix, iy, 1);
    return out;
}

std::vector<double> quadrature_weights(const Grid& grid) {
    std::vector<double> w(grid.node_count(), 0.0);
    if (grid.is_radial()) {
        const auto& rg = grid.radial();
        const int N = rg.dimension;
        const std::size_t n = rg.node_count;
        const double omega = unit_ball_volume(N);
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = (i == 0) ? rg.r_inner : 0.5 * (rg.node(i - 1) + rg.node(i));
            const double hi = (i + 1 == n) ? rg.r_outer : 0.5 * (rg.node(i) + rg.node(i + 1));
            w[i] = omega * (std::pow(hi, N) - std::pow(lo, N));
        }
        return w;
    }
    const auto& tg = grid.tensor();
    const double quarter = 0.25 * tg.spacing * tg.spacing;
    for (std::size_t iy = 0; iy + 1 < tg.ny; ++iy)
        for (std::size_t ix = 0; ix + 1 < tg.nx; ++ix) {
            if (!(tg.in_mask(ix, iy) && tg.in_mask(ix + 1, iy) && tg.in_mask(ix, iy + 1) &&
                  tg.in_mask(ix + 1, iy + 1)))
                continue;
            w[tg.idx(ix, iy)] += quarter;
            w[tg.idx(ix + 1, iy)] += quarter;
            w[tg.idx(ix, iy + 1)] += quarter;
            w[tg.idx(ix + 1, iy + 1)] += quarter;
        }
    return w;
}

double integrate(const ScalarField& g) {
    const std::vector<double> w = quadrature_weights(*g.grid);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * g.values[i];
    return acc;
}

double domain_measure(const Grid& grid) {
    if (grid.is_radial()) {
        const auto& rg = grid.radial();
        const double w = unit_ball_volume(rg.dimension);
        return w * (std::pow(rg.r_outer, rg.dimension) - std::pow(rg.r_inner, rg.dimension));
    }
    const auto& tg = grid.tensor();
    const double cell = tg.spacing * tg.spacing;
    double acc = 0.0;
    for (std::size_t iy = 0; iy + 1 < tg.ny; ++iy)
        for (std::size_t ix = 0; ix + 1 < tg.nx; ++ix)
            if (tg.in_mask(ix, iy) && tg.in_mask(ix + 1, iy) && tg.in_mask(ix, iy + 1) &&
                tg.in_mask(ix + 1, iy + 1))
                acc += cell;
    return acc;
}

double boundary_measure(const Grid& grid) {
    if (grid.is_radial()) {
        const auto& rg = grid.radial();
        const int N = rg.dimension;
        const double c = static_cast<double>(N) * unit_ball_volume(N);
        double m = c * std::pow(rg.r_outer, N - 1);
        if (!rg.is_ball()) m += c * std::pow(rg.r_inner, N - 1);
        return m;
    }
    const auto& tg = grid.tensor();
    double edges = 0.0;
    for (std::size_t iy = 0; iy < tg.ny; ++iy)
        for (std::size_t ix = 0; ix < tg.nx; ++ix) {
            if (!tg.in_mask(ix, iy)) continue;
            if (ix + 1 >= tg.nx || !tg.in_mask(ix + 1, iy)) edges += 1.0;
            if (ix == 0 || !tg.in_mask(ix - 1, iy)) edges += 1.0;
            if (iy + 1 >= tg.ny || !tg.in_mask(ix, iy + 1)) edges += 1.0;
            if (iy == 0 || !tg.in_mask(ix, iy - 1)) edges += 1.0;
        }
    return edges * tg.spacing;
}

}  // namespace mcflow
