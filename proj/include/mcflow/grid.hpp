#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

namespace mcflow {

/// omega_N = pi^{N/2} / Gamma(N/2 + 1), the volume of the unit ball of R^N.
double unit_ball_volume(int N);

/// Uniform radial grid on a ball (r_inner = 0) or annulus in R^N.
///
/// The grid carries the Dirichlet data of the domain: outer_value at
/// r_outer and, for annuli, inner_value at r_inner. A ball has no inner
/// boundary; the node at r = 0 is a regular unknown handled with the
/// symmetric ghost convention u(-h) = u(h).
struct RadialGrid {
    int dimension = 3;           // N >= 2
    double r_inner = 0.0;
    double r_outer = 1.0;
    std::size_t node_count = 0;  // >= 3
    double inner_value = 0.0;    // Dirichlet datum at r_inner (annulus only)
    double outer_value = 0.0;    // Dirichlet datum at r_outer

    bool is_ball() const { return r_inner == 0.0; }
    double spacing() const {
        return (r_outer - r_inner) / static_cast<double>(node_count - 1);
    }
    double node(std::size_t i) const { return r_inner + spacing() * static_cast<double>(i); }
    std::vector<double> nodes() const;

    void validate() const;  // throws std::invalid_argument on a bad grid
};

/// Masked uniform tensor grid in R^2. Nodes are classified from the mask:
/// exterior (outside Omega), boundary (in Omega, touching the outside or
/// the array edge), interior (all four neighbors in Omega).
///
/// Boundary normals come from the staircase geometry of the mask, averaged
/// over the adjacent faces at corners.
struct TensorGrid2D {
    enum class NodeKind : std::uint8_t { Exterior = 0, Interior = 1, Boundary = 2 };

    std::size_t nx = 0, ny = 0;
    double spacing = 0.0;
    std::vector<std::uint8_t> mask;  // nx*ny, 1 = node belongs to Omega

    std::vector<NodeKind> kinds;                    // derived, per node
    std::vector<std::array<double, 2>> normals;     // unit outward nu per boundary node (zero elsewhere)

    static TensorGrid2D rectangle(std::size_t nx, std::size_t ny, double spacing);
    /// Disc inscribed in the grid rectangle (mask = points within the
    /// largest centered circle).
    static TensorGrid2D disc(std::size_t nx, std::size_t ny, double spacing);

    std::size_t idx(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }
    bool in_mask(std::size_t ix, std::size_t iy) const { return mask[idx(ix, iy)] != 0; }
    double x(std::size_t ix) const { return spacing * static_cast<double>(ix); }
    double y(std::size_t iy) const { return spacing * static_cast<double>(iy); }

    void classify();        // fills kinds/normals from the mask
    void validate() const;  // throws std::invalid_argument (connectivity, unit normals)
};

/// Discrete domain: radial (dimension-reduced) or masked 2D tensor grid.
class Grid {
public:
    explicit Grid(RadialGrid g);
    explicit Grid(TensorGrid2D g);

    bool is_radial() const { return std::holds_alternative<RadialGrid>(g_); }
    const RadialGrid& radial() const { return std::get<RadialGrid>(g_); }
    const TensorGrid2D& tensor() const { return std::get<TensorGrid2D>(g_); }

    int dimension() const;               // N
    std::size_t node_count() const;
    std::size_t flux_components() const { return is_radial() ? 1 : 2; }

private:
    std::variant<RadialGrid, TensorGrid2D> g_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(RadialGrid g);
GridPtr make_grid(TensorGrid2D g);

/// Grid function; one value per node (exterior nodes of a masked grid
/// carry zeros and are ignored by every operation).
struct ScalarField {
    GridPtr grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(GridPtr g, double fill = 0.0);
    ScalarField(GridPtr g, std::vector<double> v);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool all_finite() const;
    void require_finite() const;  // throws std::invalid_argument
};

/// Grid vector field; `comps` components per node (1 radial, 2 tensor),
/// node-major layout.
struct FluxField {
    GridPtr grid;
    std::size_t comps = 1;
    std::vector<double> values;

    FluxField() = default;
    explicit FluxField(GridPtr g, double fill = 0.0);

    double component(std::size_t node, std::size_t c) const { return values[node * comps + c]; }
    double& component(std::size_t node, std::size_t c) { return values[node * comps + c]; }
    double norm_at(std::size_t node) const;
    /// max over nodes of the pointwise Euclidean norm
    double sup_norm() const;
};

/// Node-based discrete gradient: centered differences in the interior,
/// second-order one-sided at boundary nodes. Exact for affine fields up
/// to round-off. At the r = 0 node of a ball the symmetric convention
/// gives gradient 0.
FluxField gradient(const ScalarField& u);

/// Discrete divergence of a node-based vector field. Radial grids use
/// div F = r^{1-N} d/dr(r^{N-1} F); at r = 0 the regular limit
/// div F = N F'(0) for odd F. Throws std::domain_error if the field does
/// not vanish at the origin of a ball.
ScalarField divergence(const FluxField& F);

/// Per-node quadrature weights: exact cell volumes on radial grids (the
/// Voronoi shell of each node), complete-cell corner shares on tensor
/// grids. Constants integrate exactly.
std::vector<double> quadrature_weights(const Grid& grid);

/// Volume integral of a grid function: sum of value * node cell volume.
double integrate(const ScalarField& g);

/// Measure |Omega| under the same quadrature as integrate().
double domain_measure(const Grid& grid);

/// H^{N-1} measure of the boundary (radial: N omega_N r^{N-1} per shell;
/// tensor: staircase edge length).
double boundary_measure(const Grid& grid);

/// Sample fn(r) at the nodes of a radial grid.
template <class Fn>
ScalarField sample_radial(GridPtr g, Fn&& fn) {
    ScalarField out(g);
    const auto& rg = g->radial();
    for (std::size_t i = 0; i < rg.node_count; ++i) out.values[i] = fn(rg.node(i));
    return out;
}

/// Sample fn(x, y) at the in-mask nodes of a tensor grid.
template <class Fn>
ScalarField sample_xy(GridPtr g, Fn&& fn) {
    ScalarField out(g);
    const auto& tg = g->tensor();
    for (std::size_t iy = 0; iy < tg.ny; ++iy)
        for (std::size_t ix = 0; ix < tg.nx; ++ix)
            if (tg.in_mask(ix, iy)) out.values[tg.idx(ix, iy)] = fn(tg.x(ix), tg.y(iy));
    return out;
}

}  // namespace mcflow
