#include "mcflow/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mcflow/oracle.hpp"

namespace mcflow {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument("config: " + key + ": not a number: '" + v + "'");
    }
}

long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw std::invalid_argument("config: " + key + ": not an integer: '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: " + key + ": not a boolean: '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real(key, trim(item)));
    if (out.empty()) throw std::invalid_argument("config: " + key + ": empty list");
    return out;
}

std::vector<std::pair<double, double>> read_two_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open table file: " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) throw std::invalid_argument("config: bad table row: '" + line + "'");
        rows.emplace_back(a, b);
    }
    return rows;
}

}  // namespace

GridPtr ProblemConfig::build_grid() const {
    switch (domain) {
        case DomainKind::Ball: {
            RadialGrid g;
            g.dimension = dimension;
            g.r_inner = 0.0;
            g.r_outer = radius;
            g.node_count = nodes;
            return make_grid(g);
        }
        case DomainKind::Annulus: {
            RadialGrid g;
            g.dimension = dimension;
            g.r_inner = r_inner;
            g.r_outer = r_outer;
            g.node_count = nodes;
            g.inner_value = inner_value;
            return make_grid(g);
        }
        case DomainKind::Rect2D:
            return make_grid(mask2d == "disc" ? TensorGrid2D::disc(nx, ny, spacing2d)
                                              : TensorGrid2D::rectangle(nx, ny, spacing2d));
    }
    throw std::logic_error("unreachable");
}

ScalarField ProblemConfig::build_source(GridPtr g) const {
    switch (source) {
        case SourceKind::Constant:
            return ScalarField(g, lambda);
        case SourceKind::Example53: {
            if (!g->is_radial())
                throw std::invalid_argument("config: example53 source needs a radial domain");
            const int N = g->dimension();
            const double a = alpha;
            return sample_radial(g, [a, N](double r) {
                return (N - 1.0) * g_alpha(std::max(r, 1e-300), a, N) / std::max(r, 1e-300);
            });
        }
        case SourceKind::Table: {
            if (!g->is_radial())
                throw std::invalid_argument("config: table source needs a radial domain");
            const auto rows = read_two_column_csv(source_file);
            if (rows.size() < 2) throw std::invalid_argument("config: source table too short");
            return sample_radial(g, [&rows](double r) {
                if (r <= rows.front().first) return rows.front().second;
                if (r >= rows.back().first) return rows.back().second;
                for (std::size_t i = 1; i < rows.size(); ++i)
                    if (r <= rows[i].first) {
                        const double t =
                            (r - rows[i - 1].first) / (rows[i].first - rows[i - 1].first);
                        return (1.0 - t) * rows[i - 1].second + t * rows[i].second;
                    }
                return rows.back().second;
            });
        }
    }
    throw std::logic_error("unreachable");
}

ProblemConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        if (kv.count(key))
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key " + key);
        kv[key] = val;
    }

    ProblemConfig c;
    c.raw = kv;
    auto take = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (const auto* v = take("domain.kind")) {
        if (*v == "ball") c.domain = ProblemConfig::DomainKind::Ball;
        else if (*v == "annulus") c.domain = ProblemConfig::DomainKind::Annulus;
        else if (*v == "rect2d") c.domain = ProblemConfig::DomainKind::Rect2D;
        else throw std::invalid_argument("config: domain.kind: unknown '" + *v + "'");
    }
    if (const auto* v = take("domain.dimension")) c.dimension = static_cast<int>(to_int("domain.dimension", *v));
    if (const auto* v = take("domain.radius")) c.radius = to_real("domain.radius", *v);
    if (const auto* v = take("domain.r_inner")) c.r_inner = to_real("domain.r_inner", *v);
    if (const auto* v = take("domain.r_outer")) c.r_outer = to_real("domain.r_outer", *v);
    if (const auto* v = take("domain.inner_value")) c.inner_value = to_real("domain.inner_value", *v);
    if (const auto* v = take("domain.nodes")) {
        const long n = to_int("domain.nodes", *v);
        if (n < 3) throw std::invalid_argument("config: domain.nodes must be >= 3");
        c.nodes = static_cast<std::size_t>(n);
    }
    if (const auto* v = take("domain.nx")) c.nx = static_cast<std::size_t>(to_int("domain.nx", *v));
    if (const auto* v = take("domain.ny")) c.ny = static_cast<std::size_t>(to_int("domain.ny", *v));
    if (const auto* v = take("domain.spacing")) c.spacing2d = to_real("domain.spacing", *v);
    if (const auto* v = take("domain.mask")) {
        if (*v != "full" && *v != "disc")
            throw std::invalid_argument("config: domain.mask: 'full' or 'disc'");
        c.mask2d = *v;
    }
    if (c.domain == ProblemConfig::DomainKind::Rect2D && (c.nx < 3 || c.ny < 3))
        throw std::invalid_argument("config: rect2d grid sizes must be >= 3");

    if (const auto* v = take("source.kind")) {
        if (*v == "constant") c.source = ProblemConfig::SourceKind::Constant;
        else if (*v == "example53") c.source = ProblemConfig::SourceKind::Example53;
        else if (*v == "table") c.source = ProblemConfig::SourceKind::Table;
        else throw std::invalid_argument("config: source.kind: unknown '" + *v + "'");
    }
    if (const auto* v = take("source.lambda")) c.lambda = to_real("source.lambda", *v);
    if (const auto* v = take("source.alpha")) c.alpha = to_real("source.alpha", *v);
    if (const auto* v = take("source.file")) c.source_file = *v;
    if (c.source == ProblemConfig::SourceKind::Example53) {
        if (!(c.alpha > 0.0 && c.alpha < c.dimension - 1))
            throw std::invalid_argument("config: source.alpha must lie in (0, N-1)");
    }
    if (c.source == ProblemConfig::SourceKind::Table && c.source_file.empty())
        throw std::invalid_argument("config: source.file required for table source");

    std::string hk = "one";
    if (const auto* v = take("nonlinearity.kind")) hk = *v;
    if (hk == "one") {
        c.h = NonlinearTerm::identity_one();
    } else if (hk == "rational") {
        double a = 1.0, b = 1.0;
        if (const auto* v = take("nonlinearity.a")) a = to_real("nonlinearity.a", *v);
        if (const auto* v = take("nonlinearity.b")) b = to_real("nonlinearity.b", *v);
        c.h = NonlinearTerm::rational(a, b);
    } else if (hk == "power") {
        double c1 = 1.0, gamma = 0.5, offset = 0.0, s1 = 1.0;
        if (const auto* v = take("nonlinearity.c1")) c1 = to_real("nonlinearity.c1", *v);
        if (const auto* v = take("nonlinearity.gamma")) gamma = to_real("nonlinearity.gamma", *v);
        if (const auto* v = take("nonlinearity.offset")) offset = to_real("nonlinearity.offset", *v);
        if (const auto* v = take("nonlinearity.s1")) s1 = to_real("nonlinearity.s1", *v);
        c.h = NonlinearTerm::singular_power(c1, gamma, offset, s1);
    } else if (hk == "table") {
        const auto* file = take("nonlinearity.file");
        const auto* tail = take("nonlinearity.tail");
        if (!file || !tail)
            throw std::invalid_argument(
                "config: nonlinearity table needs nonlinearity.file and nonlinearity.tail");
        const auto rows = read_two_column_csv(*file);
        std::vector<double> s, hval;
        for (auto& [a, b] : rows) {
            s.push_back(a);
            hval.push_back(b);
        }
        c.h = NonlinearTerm::table(std::move(s), std::move(hval), to_real("nonlinearity.tail", *tail));
    } else {
        throw std::invalid_argument("config: nonlinearity.kind: unknown '" + hk + "'");
    }

    if (const auto* v = take("solver.schedule_depth"))
        c.solver.schedule_depth = static_cast<int>(to_int("solver.schedule_depth", *v));
    if (const auto* v = take("solver.newton_tol")) c.solver.newton_tol = to_real("solver.newton_tol", *v);
    if (const auto* v = take("solver.newton_max_iter"))
        c.solver.newton_max_iter = static_cast<int>(to_int("solver.newton_max_iter", *v));
    if (const auto* v = take("solver.outer_tol")) c.solver.outer_tol = to_real("solver.outer_tol", *v);
    if (const auto* v = take("solver.outer_max_iter"))
        c.solver.outer_max_iter = static_cast<int>(to_int("solver.outer_max_iter", *v));
    if (const auto* v = take("solver.blowup_threshold"))
        c.solver.blowup_sup_threshold = to_real("solver.blowup_threshold", *v);
    if (const auto* v = take("solver.degenerate_delta"))
        c.solver.degenerate_delta = to_real("solver.degenerate_delta", *v);
    if (const auto* v = take("solver.polish")) c.solver.polish_limit = to_bool("solver.polish", *v);
    if (const auto* v = take("verifier.boundary_tol"))
        c.boundary_tol = to_real("verifier.boundary_tol", *v);

    if (const auto* v = take("output.dir")) c.out_dir = *v;
    if (const auto* v = take("sweep.parameter")) {
        if (*v != "lambda" && *v != "alpha")
            throw std::invalid_argument("config: sweep.parameter: 'lambda' or 'alpha'");
        c.sweep_parameter = *v;
    }
    if (const auto* v = take("sweep.values")) c.sweep_values = to_list("sweep.values", *v);

    static const char* known_prefixes[] = {"domain.", "source.", "nonlinearity.",
                                           "solver.", "output.", "sweep.", "verifier."};
    for (const auto& [key, val] : kv) {
        bool ok = false;
        for (const char* p : known_prefixes)
            if (key.rfind(p, 0) == 0) ok = true;
        if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    c.build_grid();  // validates geometry early
    return c;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace mcflow
