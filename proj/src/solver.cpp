#include "mcflow/solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mcflow {

std::vector<double> SolverConfig::schedule() const {
    std::vector<double> s = p_schedule;
    if (s.empty()) {
        if (schedule_depth < 1) throw std::invalid_argument("SolverConfig: schedule_depth >= 1");
        for (int k = 1; k <= schedule_depth; ++k) s.push_back(1.0 + std::pow(0.5, k));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > 1.0 && s[i] <= 2.0))
            throw std::invalid_argument("SolverConfig: schedule entries must lie in (1, 2]");
        if (i > 0 && !(s[i] < s[i - 1]))
            throw std::invalid_argument("SolverConfig: schedule must be strictly decreasing");
    }
    return s;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::ConvergedSubcritical: return "converged_subcritical";
        case Classification::ExtremalBlowup: return "extremal_blowup";
        case Classification::NewtonFailure: return "newton_failure";
    }
    return "?";
}

namespace {

// ---------------------------------------------------------------------------
// discrete assembly: 1D conservative faces on radial grids, P1 triangles on
// masked tensor grids; shared by the energy, Newton and the certificates
// ---------------------------------------------------------------------------

struct Element {
    std::array<std::uint32_t, 3> n{0, 0, 0};  // node ids (third unused in 1D)
    std::uint8_t nn = 2;                      // nodes per element
    double weight = 0.0;                      // measure of the element
    // gradient coefficients: grad u = sum_k c[k] u_{n[k]}
    std::array<std::array<double, 2>, 3> c{};
};

struct Assembly {
    GridPtr grid;
    int gdim = 1;  // gradient components
    std::vector<Element> elems;
    std::vector<double> node_volume;        // lumped volumes V_i
    std::vector<std::uint32_t> free_nodes;  // unknown node ids
    std::vector<std::int32_t> free_index;   // node -> unknown index or -1
    std::vector<double> dirichlet;          // value applied to every pinned active node
    std::vector<std::uint8_t> active;       // node participates in the problem
    bool tridiagonal = false;

    std::size_t nodes() const { return node_volume.size(); }
};

Assembly build_assembly(GridPtr grid) {
    Assembly a;
    a.grid = grid;
    const std::size_t n = grid->node_count();
    a.node_volume.assign(n, 0.0);
    a.free_index.assign(n, -1);
    a.dirichlet.assign(n, 0.0);
    a.active.assign(n, 0);

    if (grid->is_radial()) {
        const auto& rg = grid->radial();
        const int N = rg.dimension;
        const double h = rg.spacing();
        const double c = N * unit_ball_volume(N);
        a.gdim = 1;
        a.tridiagonal = true;
        a.elems.reserve(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            Element e;
            e.nn = 2;
            e.n = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1), 0};
            const double rf = 0.5 * (rg.node(i) + rg.node(i + 1));
            e.weight = c * std::pow(rf, N - 1) * h;  // shell volume of the face cell
            e.c[0] = {-1.0 / h, 0.0};
            e.c[1] = {1.0 / h, 0.0};
            a.elems.push_back(e);
        }
        const double omega = unit_ball_volume(N);
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = (i == 0) ? rg.r_inner : 0.5 * (rg.node(i - 1) + rg.node(i));
            const double hi = (i + 1 == n) ? rg.r_outer : 0.5 * (rg.node(i) + rg.node(i + 1));
            a.node_volume[i] = omega * (std::pow(hi, N) - std::pow(lo, N));
            a.active[i] = 1;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const bool pinned = (i + 1 == n) || (i == 0 && !rg.is_ball());
            if (pinned) {
                a.dirichlet[i] = (i == 0) ? rg.inner_value : rg.outer_value;
            } else {
                a.free_index[i] = static_cast<std::int32_t>(a.free_nodes.size());
                a.free_nodes.push_back(static_cast<std::uint32_t>(i));
            }
        }
        return a;
    }

    const auto& tg = grid->tensor();
    const double h = tg.spacing;
    a.gdim = 2;
    std::vector<std::uint8_t> in_triangulation(n, 0);
    auto add_triangle = [&](std::uint32_t i0, std::uint32_t i1, std::uint32_t i2,
                            std::array<double, 2> p0, std::array<double, 2> p1,
                            std::array<double, 2> p2) {
        Element e;
        e.nn = 3;
        e.n = {i0, i1, i2};
        const double det =
            (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        e.weight = 0.5 * std::abs(det);
        // grad of the P1 hat at vertex k: rotated opposite edge / (2 area)
        e.c[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
        e.c[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
        e.c[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
        a.elems.push_back(e);
        for (int k = 0; k < 3; ++k) {
            a.node_volume[e.n[k]] += e.weight / 3.0;
            in_triangulation[e.n[k]] = 1;
        }
    };
    for (std::size_t iy = 0; iy + 1 < tg.ny; ++iy)
        for (std::size_t ix = 0; ix + 1 < tg.nx; ++ix) {
            const std::uint32_t sw = static_cast<std::uint32_t>(tg.idx(ix, iy));
            const std::uint32_t se = sw + 1;
            const std::uint32_t nw = static_cast<std::uint32_t>(tg.idx(ix, iy + 1));
            const std::uint32_t ne = nw + 1;
            if (!(tg.mask[sw] && tg.mask[se] && tg.mask[nw] && tg.mask[ne])) continue;
            const std::array<double, 2> psw{tg.x(ix), tg.y(iy)}, pse{tg.x(ix + 1), tg.y(iy)},
                pnw{tg.x(ix), tg.y(iy + 1)}, pne{tg.x(ix + 1), tg.y(iy + 1)};
            add_triangle(sw, se, ne, psw, pse, pne);
            add_triangle(sw, ne, nw, psw, pne, pnw);
        }
    (void)h;
    // free nodes: in the triangulation and surrounded by complete cells
    for (std::size_t iy = 0; iy < tg.ny; ++iy)
        for (std::size_t ix = 0; ix < tg.nx; ++ix) {
            const std::size_t k = tg.idx(ix, iy);
            if (!in_triangulation[k]) continue;
            a.active[k] = 1;
            auto cell_complete = [&](std::size_t cx, std::size_t cy) {
                if (cx + 1 >= tg.nx || cy + 1 >= tg.ny) return false;
                return tg.in_mask(cx, cy) && tg.in_mask(cx + 1, cy) && tg.in_mask(cx, cy + 1) &&
                       tg.in_mask(cx + 1, cy + 1);
            };
            const bool interior = ix > 0 && iy > 0 && cell_complete(ix - 1, iy - 1) &&
                                  cell_complete(ix, iy - 1) && cell_complete(ix - 1, iy) &&
                                  cell_complete(ix, iy);
            if (interior) {
                a.free_index[k] = static_cast<std::int32_t>(a.free_nodes.size());
                a.free_nodes.push_back(static_cast<std::uint32_t>(k));
            }
        }
    return a;
}

// regularized flux magnitude coefficients; phi_p(t) = sqrt(1+t^2) + (p-1)/p t^p
struct FluxCoeffs {
    double m = 0.0;        // phi'(t)/t with the p-part clamped (transverse Hessian)
    double second = 0.0;   // phi''(t), clamped
};

constexpr double kHessCap = 1e8;

inline double phi_value(double t, double p, double beta) {
    double v = std::sqrt(1.0 + t * t);
    if (beta > 0.0 && t > 0.0) v += beta / p * std::pow(t, p);
    return v;
}

// flux vector = G/sqrt(1+t^2) + beta t^{p-1} G/t; returned as scale factors
// (curv, ppart_over_t applied to G) computed overflow-safely
inline void flux_scales(double t, double p, double beta, double& curv, double& p_over_t) {
    curv = 1.0 / std::sqrt(1.0 + t * t);
    p_over_t = 0.0;
    if (beta > 0.0 && t > 0.0) p_over_t = beta * std::pow(t, p - 1.0) / t;
}

inline FluxCoeffs hessian_coeffs(double t, double p, double beta) {
    FluxCoeffs c;
    const double th = std::max(t, 1e-12);
    const double curv_m = 1.0 / std::sqrt(1.0 + t * t);
    const double curv_h = curv_m * curv_m * curv_m;  // (1+t^2)^{-3/2}
    double pm = 0.0, ph = 0.0;
    if (beta > 0.0) {
        pm = std::min(beta * std::pow(th, p - 2.0), kHessCap);
        ph = std::min(beta * (p - 1.0) * std::pow(th, p - 2.0), kHessCap);
    }
    c.m = curv_m + pm;
    c.second = curv_h + ph;
    return c;
}

double assembly_energy(const Assembly& a, const std::vector<double>& u,
                       const std::vector<double>& source, double p) {
    const double beta = p - 1.0;
    double e = 0.0;
    for (const Element& el : a.elems) {
        double g[2] = {0.0, 0.0};
        for (std::uint8_t k = 0; k < el.nn; ++k)
            for (int d = 0; d < a.gdim; ++d) g[d] += el.c[k][d] * u[el.n[k]];
        const double t = (a.gdim == 1) ? std::abs(g[0]) : std::hypot(g[0], g[1]);
        e += el.weight * phi_value(t, p, beta);
    }
    for (std::uint32_t i : a.free_nodes) e -= a.node_volume[i] * source[i] * u[i];
    return e;
}

// gradient of the discrete energy at the free nodes
void assembly_gradient(const Assembly& a, const std::vector<double>& u,
                       const std::vector<double>& source, double p, std::vector<double>& grad) {
    const double beta = p - 1.0;
    grad.assign(a.free_nodes.size(), 0.0);
    for (const Element& el : a.elems) {
        double g[2] = {0.0, 0.0};
        for (std::uint8_t k = 0; k < el.nn; ++k)
            for (int d = 0; d < a.gdim; ++d) g[d] += el.c[k][d] * u[el.n[k]];
        const double t = (a.gdim == 1) ? std::abs(g[0]) : std::hypot(g[0], g[1]);
        double curv, p_over_t;
        flux_scales(t, p, beta, curv, p_over_t);
        const double s = curv + p_over_t;
        for (std::uint8_t k = 0; k < el.nn; ++k) {
            const std::int32_t j = a.free_index[el.n[k]];
            if (j < 0) continue;
            double dot = 0.0;
            for (int d = 0; d < a.gdim; ++d) dot += g[d] * el.c[k][d];
            grad[static_cast<std::size_t>(j)] += el.weight * s * dot;
        }
    }
    for (std::size_t j = 0; j < a.free_nodes.size(); ++j)
        grad[j] -= a.node_volume[a.free_nodes[j]] * source[a.free_nodes[j]];
}

// SPD tridiagonal LDL^T (radial fast path); returns false on a bad pivot
bool solve_tridiagonal(std::vector<double>& diag, std::vector<double>& off,
                       std::vector<double>& rhs) {
    const std::size_t m = diag.size();
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (!(diag[i] > 0.0)) return false;
        const double l = off[i] / diag[i];
        diag[i + 1] -= l * off[i];
        rhs[i + 1] -= l * rhs[i];
        off[i] = l;
    }
    if (!(diag[m - 1] > 0.0)) return false;
    rhs[m - 1] /= diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = rhs[i] / diag[i] - off[i] * rhs[i + 1];
    return true;
}

// Newton direction: delta = -H^{-1} grad; falls back to a diagonally scaled
// descent step when the factorization fails
bool newton_direction(const Assembly& a, const std::vector<double>& u, double p,
                      const std::vector<double>& grad, std::vector<double>& delta) {
    const double beta = p - 1.0;
    const std::size_t m = a.free_nodes.size();
    delta.assign(m, 0.0);

    if (a.tridiagonal) {
        std::vector<double> diag(m, 0.0), off(m > 0 ? m - 1 : 0, 0.0), rhs(m);
        for (const Element& el : a.elems) {
            const double g = el.c[0][0] * u[el.n[0]] + el.c[1][0] * u[el.n[1]];
            const double t = std::abs(g);
            const double sec = hessian_coeffs(t, p, beta).second;
            const double w = el.weight * sec * el.c[0][0] * el.c[0][0];  // |c| equal both ends
            const std::int32_t j0 = a.free_index[el.n[0]], j1 = a.free_index[el.n[1]];
            if (j0 >= 0) diag[static_cast<std::size_t>(j0)] += w;
            if (j1 >= 0) diag[static_cast<std::size_t>(j1)] += w;
            if (j0 >= 0 && j1 >= 0) off[static_cast<std::size_t>(std::min(j0, j1))] -= w;
        }
        for (std::size_t j = 0; j < m; ++j) rhs[j] = -grad[j];
        std::vector<double> d2 = diag;
        if (solve_tridiagonal(d2, off, rhs)) {
            delta = rhs;
            return true;
        }
        for (std::size_t j = 0; j < m; ++j)
            delta[j] = -grad[j] / std::max(diag[j], 1e-300);
        return false;
    }

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    trips.reserve(a.elems.size() * 9);
    for (const Element& el : a.elems) {
        double g[2] = {0.0, 0.0};
        for (std::uint8_t k = 0; k < el.nn; ++k)
            for (int d = 0; d < 2; ++d) g[d] += el.c[k][d] * u[el.n[k]];
        const double t = std::hypot(g[0], g[1]);
        const FluxCoeffs fc = hessian_coeffs(t, p, beta);
        double ghat[2] = {0.0, 0.0};
        if (t > 0.0) {
            ghat[0] = g[0] / t;
            ghat[1] = g[1] / t;
        }
        const double bcoef = fc.second - fc.m;  // anisotropic part along ghat
        for (std::uint8_t kk = 0; kk < el.nn; ++kk) {
            const std::int32_t jk = a.free_index[el.n[kk]];
            if (jk < 0) continue;
            for (std::uint8_t ll = 0; ll < el.nn; ++ll) {
                const std::int32_t jl = a.free_index[el.n[ll]];
                if (jl < 0) continue;
                const double cc =
                    el.c[kk][0] * el.c[ll][0] + el.c[kk][1] * el.c[ll][1];
                const double gk = ghat[0] * el.c[kk][0] + ghat[1] * el.c[kk][1];
                const double gl = ghat[0] * el.c[ll][0] + ghat[1] * el.c[ll][1];
                trips.emplace_back(jk, jl, el.weight * (fc.m * cc + bcoef * gk * gl));
            }
        }
    }
    Eigen::SparseMatrix<double> H(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    H.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(H);
    if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) rhs[static_cast<Eigen::Index>(j)] = -grad[j];
        Eigen::VectorXd x = ldlt.solve(rhs);
        if (ldlt.info() == Eigen::Success) {
            for (std::size_t j = 0; j < m; ++j) delta[j] = x[static_cast<Eigen::Index>(j)];
            return true;
        }
    }
    Eigen::VectorXd d = H.diagonal();
    for (std::size_t j = 0; j < m; ++j)
        delta[j] = -grad[j] / std::max(d[static_cast<Eigen::Index>(j)], 1e-300);
    return false;
}

struct NewtonOutcome {
    bool converged = false;
    int iters = 0;
    double residual_sup = 0.0;
    double energy_start = 0.0, energy_end = 0.0;
    std::vector<double> energy_trace;
    std::string detail;
};

NewtonOutcome newton_minimize(const Assembly& a, std::vector<double>& u,
                              const std::vector<double>& source, double p,
                              const SolverConfig& cfg) {
    NewtonOutcome out;
    for (std::size_t i = 0; i < a.nodes(); ++i)
        if (a.active[i] && a.free_index[i] < 0) u[i] = a.dirichlet[i];

    std::vector<double> grad, delta, trial(u.size());
    double e0 = assembly_energy(a, u, source, p);
    out.energy_start = e0;
    out.energy_trace.push_back(e0);

    for (int iter = 0; iter <= cfg.newton_max_iter; ++iter) {
        assembly_gradient(a, u, source, p, grad);
        double res = 0.0;
        for (std::size_t j = 0; j < grad.size(); ++j)
            res = std::max(res, std::abs(grad[j]) / a.node_volume[a.free_nodes[j]]);
        out.residual_sup = res;
        out.iters = iter;
        if (res <= cfg.newton_tol) {
            out.converged = true;
            out.energy_end = e0;
            return out;
        }
        if (iter == cfg.newton_max_iter) break;

        newton_direction(a, u, p, grad, delta);
        double gTd = 0.0;
        for (std::size_t j = 0; j < grad.size(); ++j) gTd += grad[j] * delta[j];
        if (!(gTd < 0.0)) {
            // not a descent direction (degenerate Hessian); steepest descent scaled
            for (std::size_t j = 0; j < grad.size(); ++j) delta[j] = -grad[j];
            gTd = 0.0;
            for (std::size_t j = 0; j < grad.size(); ++j) gTd += grad[j] * delta[j];
        }

        double t = 1.0;
        bool accepted = false;
        while (t >= cfg.min_step) {
            trial = u;
            for (std::size_t j = 0; j < grad.size(); ++j) trial[a.free_nodes[j]] += t * delta[j];
            const double e1 = assembly_energy(a, trial, source, p);
            const double slack = 1e-12 * (1.0 + std::abs(e0));
            if (std::isfinite(e1) && e1 <= e0 + 1e-4 * t * gTd + slack) {
                u = trial;
                e0 = e1;
                out.energy_trace.push_back(e1);
                accepted = true;
                break;
            }
            t *= cfg.backtrack_factor;
        }
        if (!accepted) {
            out.detail = "damping floor reached";
            out.energy_end = e0;
            return out;
        }
    }
    out.detail = "iteration limit reached";
    out.energy_end = e0;
    return out;
}

const Assembly& cached_assembly(GridPtr grid) {
    // one continuation works one grid at a time; tiny cache keyed by pointer
    thread_local GridPtr key;
    thread_local Assembly cache;
    if (key.get() != grid.get()) {
        cache = build_assembly(grid);
        key = grid;
    }
    return cache;
}

std::vector<double> frozen_source(const Assembly& a, const ScalarField& f, const NonlinearTerm& h,
                                  double p, const std::vector<double>& u, bool truncated) {
    std::vector<double> s(f.values.size(), 0.0);
    for (std::uint32_t i : a.free_nodes) {
        const double ui = std::max(u[i], 0.0);
        s[i] = f.values[i] * (truncated ? h.hp(p, ui) : h(ui));
    }
    return s;
}

struct OuterOutcome {
    bool converged = false;
    int outer_iters = 0;
    int newton_iters_total = 0;
    NewtonOutcome last_inner;
    std::string detail;
};

// source-freezing fixed point at one p; p = 1 with truncated = false is the
// limit polish
OuterOutcome run_outer(const Assembly& a, const ScalarField& f, const NonlinearTerm& h, double p,
                       std::vector<double>& u, const SolverConfig& cfg, bool truncated) {
    OuterOutcome out;
    if (h.kind() == NonlinearTerm::Kind::IdentityOne) {
        std::vector<double> s(f.values);
        out.last_inner = newton_minimize(a, u, s, p, cfg);
        out.newton_iters_total = out.last_inner.iters;
        out.outer_iters = 1;
        out.converged = out.last_inner.converged;
        out.detail = out.last_inner.detail;
        return out;
    }
    std::vector<double> prev;
    for (int m = 1; m <= cfg.outer_max_iter; ++m) {
        const std::vector<double> s = frozen_source(a, f, h, p, u, truncated);
        prev = u;
        out.last_inner = newton_minimize(a, u, s, p, cfg);
        out.newton_iters_total += out.last_inner.iters;
        out.outer_iters = m;
        if (!out.last_inner.converged) {
            out.detail = out.last_inner.detail;
            return out;
        }
        double inc = 0.0;
        for (std::uint32_t i : a.free_nodes) inc = std::max(inc, std::abs(u[i] - prev[i]));
        if (inc <= cfg.outer_tol) {
            out.converged = true;
            return out;
        }
    }
    out.detail = "outer fixed point did not settle";
    return out;
}

double plateau_scale(std::span<const double> xs) {
    double m = 0.0;
    for (double x : xs) m = std::max(m, std::abs(x));
    return std::max(m, 1e-12);
}

bool last_delta_within(std::span<const double> xs, double tol) {
    const std::size_t n = xs.size();
    if (n < 2) return false;
    return std::abs(xs[n - 1] - xs[n - 2]) <= tol * plateau_scale(xs);
}

// criterion: over the last-4-step window the consecutive deltas are
// nonincreasing (or already below tol) and the final delta is below tol,
// relative to the running max of the monitor
bool monitor_plateau(std::span<const double> xs, double tol) {
    const std::size_t n = xs.size();
    if (n < 4) return false;
    const double scale = plateau_scale(xs);
    double deltas[3];
    for (int j = 0; j < 3; ++j) deltas[j] = std::abs(xs[n - 3 + j] - xs[n - 4 + j]);
    if (deltas[2] > tol * scale) return false;
    for (int j = 1; j < 3; ++j)
        if (deltas[j] > deltas[j - 1] * (1.0 + 1e-9) && deltas[j] > tol * scale) return false;
    return true;
}

}  // namespace

ExtremalSignal detect_extremal(std::span<const PStepRecord> steps, const SolverConfig& cfg) {
    if (steps.size() < 3)
        throw std::invalid_argument("detect_extremal: needs >= 3 completed p-steps");
    const std::size_t K = steps.size();
    const double s2 = steps[K - 1].sup_norm, s1 = steps[K - 2].sup_norm,
                 s0 = steps[K - 3].sup_norm;

    if (s2 > cfg.blowup_sup_threshold) return ExtremalSignal::Blowup;
    // at-least-linear growth in 1/(p-1) across the last two halvings
    if (s2 > 1e-8 && s1 > 0.0 && s0 > 0.0) {
        if (s2 / s1 >= 1.98 && s1 / s0 >= 1.98) return ExtremalSignal::Blowup;
    }
    // flux saturation over half the domain while the residual stalls
    if (steps[K - 1].saturated_fraction > 0.5 &&
        steps[K - 1].max_residual >= 0.9 * steps[K - 3].max_residual &&
        steps[K - 1].max_residual > 0.0)
        return ExtremalSignal::Blowup;

    std::vector<double> sups, tvs;
    for (const auto& s : steps) {
        sups.push_back(s.sup_norm);
        tvs.push_back(s.tv);
    }
    if (last_delta_within(sups, 1e-4) && last_delta_within(tvs, 1e-4))
        return ExtremalSignal::Plateau;
    return ExtremalSignal::KeepGoing;
}

double discrete_energy(const ScalarField& u, const ScalarField& f_eff, double p) {
    const Assembly& a = cached_assembly(u.grid);
    return assembly_energy(a, u.values, f_eff.values, p);
}

FixedPResult solve_fixed_p(const ScalarField& f_eff, double p, const ScalarField& warm_start,
                           const SolverConfig& cfg) {
    if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("solve_fixed_p: p in [1, 2]");
    f_eff.require_finite();
    const Assembly& a = cached_assembly(f_eff.grid);
    std::vector<double> u = warm_start.values;
    if (u.size() != a.nodes()) throw std::invalid_argument("solve_fixed_p: field size mismatch");
    NewtonOutcome n = newton_minimize(a, u, f_eff.values, p, cfg);
    FixedPResult r;
    r.u = ScalarField(f_eff.grid, std::move(u));
    r.converged = n.converged;
    r.iters = n.iters;
    r.residual_sup = n.residual_sup;
    r.energy_start = n.energy_start;
    r.energy_end = n.energy_end;
    r.energy_trace = std::move(n.energy_trace);
    r.detail = n.detail;
    return r;
}

SolveReport continuation_solve(const ScalarField& f, const NonlinearTerm& h,
                               const SolverConfig& cfg,
                               const std::optional<ScalarField>& outer_init) {
    f.require_finite();
    const Assembly& a = cached_assembly(f.grid);
    const std::vector<double> schedule = cfg.schedule();

    if (h.kind() != NonlinearTerm::Kind::IdentityOne) {
        for (std::uint32_t i : a.free_nodes)
            if (f.values[i] < 0.0)
                throw std::invalid_argument(
                    "continuation_solve: f must be nonnegative unless h is identically 1");
    }

    SolveReport rep;
    rep.u = ScalarField(f.grid);
    for (std::size_t i = 0; i < a.nodes(); ++i)
        if (a.active[i] && a.free_index[i] < 0) rep.u.values[i] = a.dirichlet[i];

    // degenerate input: zero source and zero data short-circuits to u = 0
    bool zero_f = true, zero_data = true;
    for (std::uint32_t i : a.free_nodes) zero_f = zero_f && f.values[i] == 0.0;
    for (std::size_t i = 0; i < a.nodes(); ++i)
        if (a.active[i]) zero_data = zero_data && a.dirichlet[i] == 0.0;
    if (zero_f && zero_data) {
        rep.classification = Classification::ConvergedSubcritical;
        rep.plateau_strict = rep.plateau_monitor = true;
        rep.polish_converged = true;
        rep.z = flux_of(rep.u);
        return rep;
    }

    std::vector<double> u = outer_init ? outer_init->values : rep.u.values;
    if (outer_init) {
        for (std::size_t i = 0; i < a.nodes(); ++i)
            if (a.active[i] && a.free_index[i] < 0) u[i] = a.dirichlet[i];
    }

    bool failed = false;
    for (double p : schedule) {
        std::vector<double> warm = u;
        OuterOutcome oc = run_outer(a, f, h, p, u, cfg, /*truncated=*/true);
        if (!oc.converged) {
            double sup_now = 0.0;
            for (std::size_t i = 0; i < a.nodes(); ++i)
                if (a.active[i]) sup_now = std::max(sup_now, std::abs(u[i]));
            // blowup takes precedence: failure at extremality is the expected
            // signature, not a bug
            rep.classification = sup_now > cfg.blowup_sup_threshold
                                     ? Classification::ExtremalBlowup
                                     : Classification::NewtonFailure;
            rep.failure_detail = "p = " + std::to_string(p) + ": " + oc.detail;
            failed = true;
            // report the last completed field on a plain failure; the exploding
            // iterate is the informative one on blowup
            if (rep.classification == Classification::NewtonFailure) u = warm;
            break;
        }

        ScalarField up(f.grid, u);
        const FluxField z = flux_of(up);
        PStepRecord rec;
        rec.p = p;
        rec.sup_norm = sup_norm(up);
        rec.tv = total_variation(up);
        ScalarField gp(f.grid);
        {
            const FluxField g = gradient(up);
            for (std::size_t k = 0; k < gp.size(); ++k)
                if (a.active[k]) gp.values[k] = std::pow(g.norm_at(k), p);
        }
        rec.energy_p_term = (p - 1.0) * integrate(gp);
        rec.flux_sup = z.sup_norm();
        rec.max_residual = residual_sup(up, f, h, p);
        rec.newton_iters = oc.newton_iters_total;
        rec.outer_iters = oc.outer_iters;
        const double cap = 1.0 / (p - 1.0);
        int binding = 0;
        double dmass = 0.0;
        std::size_t active_nodes = 0, saturated = 0;
        for (std::uint32_t i : a.free_nodes) {
            const double ui = std::max(u[i], 0.0);
            const double hv = (h.singular_at_zero() && ui == 0.0)
                                  ? std::numeric_limits<double>::infinity()
                                  : h(ui);
            if (hv > cap) ++binding;
            if (ui <= cfg.degenerate_delta) dmass += a.node_volume[i] * h.hp(p, ui) * f.values[i];
        }
        for (std::size_t k = 0; k < a.nodes(); ++k) {
            if (!a.active[k]) continue;
            ++active_nodes;
            if (z.norm_at(k) > 1.0 - 1e-3) ++saturated;
        }
        rec.truncation_active_count = binding;
        rec.degenerate_mass = dmass;
        rec.saturated_fraction =
            active_nodes ? static_cast<double>(saturated) / static_cast<double>(active_nodes) : 0.0;
        rec.energy_warm = oc.last_inner.energy_start;
        rec.energy_min = oc.last_inner.energy_end;
        rep.steps.push_back(rec);

        if (rep.steps.size() >= 3 &&
            detect_extremal(rep.steps, cfg) == ExtremalSignal::Blowup) {
            rep.classification = Classification::ExtremalBlowup;
            failed = true;
            break;
        }
    }

    for (const auto& s : rep.steps) {
        rep.recorded_sup_bound = std::max(rep.recorded_sup_bound, s.sup_norm);
        rep.recorded_energy_bound = std::max(rep.recorded_energy_bound, s.energy_p_term);
    }
    {
        std::vector<double> sups, tvs, pterms;
        for (const auto& s : rep.steps) {
            sups.push_back(s.sup_norm);
            tvs.push_back(s.tv);
            pterms.push_back(s.energy_p_term);
        }
        rep.plateau_strict = last_delta_within(sups, 1e-4) && last_delta_within(tvs, 1e-4);
        rep.plateau_monitor = monitor_plateau(sups, 1e-3) && monitor_plateau(tvs, 1e-3) &&
                              monitor_plateau(pterms, 1e-3);
    }

    if (!failed) rep.classification = Classification::ConvergedSubcritical;

    // limit extraction: the continuation's object is the p -> 1 limit; a
    // curvature-only solve warm-started from the last step computes it on
    // the fixed grid (the p-step fields keep the uniform-estimate
    // diagnostics above)
    if (rep.classification == Classification::ConvergedSubcritical && cfg.polish_limit &&
        !rep.steps.empty()) {
        std::vector<double> up = u;
        try {
            OuterOutcome pol = run_outer(a, f, h, 1.0, up, cfg, /*truncated=*/false);
            if (pol.converged) {
                u = up;
                rep.polish_converged = true;
            }
        } catch (const std::domain_error&) {
            rep.polish_converged = false;  // singular h hit u <= 0; keep the p-step field
        }
    }

    rep.u = ScalarField(f.grid, u);
    rep.z = flux_of(rep.u);
    rep.limit_sup_norm = sup_norm(rep.u);
    rep.limit_tv = total_variation(rep.u);
    rep.limit_flux_sup = rep.z.sup_norm();
    rep.flux_saturated = rep.limit_flux_sup >= 1.0 - 1e-3;
    {
        const ScalarField div = divergence(rep.z);
        double m = 0.0;
        bool ok = true;
        for (std::uint32_t i : a.free_nodes) {
            const double ui = rep.u.values[i];
            double hv;
            if (h.singular_at_zero() && ui <= 0.0) {
                if (f.values[i] > 0.0) {
                    ok = false;
                    continue;
                }
                hv = 0.0;
            } else {
                hv = h(std::max(ui, 0.0));
            }
            m = std::max(m, std::abs(-div.values[i] - hv * f.values[i]));
        }
        rep.limit_equation_residual = ok ? m : std::numeric_limits<double>::infinity();
    }
    return rep;
}

double uniqueness_probe(const ScalarField& f, const NonlinearTerm& h, const SolverConfig& cfg) {
    if (!h.nonincreasing())
        throw std::invalid_argument("uniqueness_probe: h must be nonincreasing");
    SolveReport first = continuation_solve(f, h, cfg);
    if (!first.converged())
        throw std::runtime_error("uniqueness_probe: first run failed: " + to_string(first.classification));
    ScalarField high(f.grid, first.recorded_sup_bound);
    SolveReport second = continuation_solve(f, h, cfg, high);
    if (!second.converged())
        throw std::runtime_error("uniqueness_probe: second run failed: " + to_string(second.classification));
    double d = 0.0;
    for (std::size_t i = 0; i < first.u.size(); ++i)
        d = std::max(d, std::abs(first.u.values[i] - second.u.values[i]));
    return d;
}

StampacchiaCheck stampacchia_decay_check(const ScalarField& u, const ScalarField& f,
                                         std::span<const std::pair<double, double>> level_pairs) {
    const int N = u.grid->dimension();
    StampacchiaCheck out;
    const double s1 = 1.0 / (N * std::pow(unit_ball_volume(N), 1.0 / N));
    out.ln_norm = lp_norm(f, static_cast<double>(N));
    out.threshold = 1.0 / s1;
    out.precondition_ok = out.ln_norm < out.threshold;

    static const std::pair<double, double> kDefault[] = {{0.05, 0.1}, {0.1, 0.2}};
    std::span<const std::pair<double, double>> pairs =
        level_pairs.empty() ? std::span<const std::pair<double, double>>(kDefault) : level_pairs;

    auto level_volume = [&](double k) {
        ScalarField ind(u.grid);
        for (std::size_t i = 0; i < u.size(); ++i)
            ind.values[i] = std::abs(u.values[i]) > k ? 1.0 : 0.0;
        return integrate(ind);
    };

    bool all_ok = true;
    for (const auto& [k, hlev] : pairs) {
        if (!(hlev > k && k > 0.0))
            throw std::invalid_argument("stampacchia_decay_check: need h > k > 0");
        StampacchiaCheck::LevelPair pr;
        pr.k = k;
        pr.h = hlev;
        pr.vol_k = level_volume(k);
        pr.vol_h = level_volume(hlev);
        if (out.precondition_ok) {
            pr.bound = 1.05 * std::pow(pr.vol_k, 1.0 + 1.0 / N) * s1 /
                       ((hlev - k) * (1.0 - s1 * out.ln_norm));
            pr.ok = pr.vol_h <= pr.bound;
        } else {
            pr.bound = std::numeric_limits<double>::quiet_NaN();
            pr.ok = false;
        }
        all_ok = all_ok && pr.ok;
        out.pairs.push_back(pr);
    }
    out.holds = out.precondition_ok && all_ok;
    return out;
}

}  // namespace mcflow
