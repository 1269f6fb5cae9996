#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcflow/grid.hpp"
#include "mcflow/nonlinearity.hpp"
#include "mcflow/solver.hpp"

namespace mcflow {

/// Problem description parsed from the flat `section.key = value` config
/// text. Unknown keys are rejected. See docs in README for the key list.
struct ProblemConfig {
    enum class DomainKind { Ball, Annulus, Rect2D };
    enum class SourceKind { Constant, Example53, Table };

    DomainKind domain = DomainKind::Ball;
    int dimension = 3;
    double radius = 1.0;        // ball
    double r_inner = 0.0;       // annulus
    double r_outer = 1.0;
    double inner_value = 0.0;
    std::size_t nodes = 1025;   // radial
    std::size_t nx = 33, ny = 33;  // rect2d
    double spacing2d = 1.0 / 32.0;
    std::string mask2d = "full";  // full | disc

    SourceKind source = SourceKind::Constant;
    double lambda = 1.0;
    double alpha = 1.0;
    std::string source_file;

    NonlinearTerm h = NonlinearTerm::identity_one();

    SolverConfig solver;
    double boundary_tol = 1e-2;

    std::string out_dir = "out";

    std::string sweep_parameter;       // "lambda" | "alpha"
    std::vector<double> sweep_values;

    std::map<std::string, std::string> raw;  // echoed into reports

    GridPtr build_grid() const;
    ScalarField build_source(GridPtr g) const;
};

/// Parses and validates; throws std::invalid_argument with a line-anchored
/// message on malformed input.
ProblemConfig parse_config_text(const std::string& text);
ProblemConfig load_config(const std::string& path);

}  // namespace mcflow
