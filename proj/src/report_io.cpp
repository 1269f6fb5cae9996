#include "mcflow/report_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mcflow {

using nlohmann::json;

namespace {

json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

json to_json(const PStepRecord& r) {
    return json{{"p", r.p},
                {"sup_norm", r.sup_norm},
                {"tv", r.tv},
                {"energy_p_term", r.energy_p_term},
                {"flux_sup", r.flux_sup},
                {"max_residual", r.max_residual},
                {"newton_iters", r.newton_iters},
                {"outer_iters", r.outer_iters},
                {"truncation_active_count", r.truncation_active_count},
                {"degenerate_mass", r.degenerate_mass},
                {"saturated_fraction", r.saturated_fraction},
                {"energy_warm", r.energy_warm},
                {"energy_min", r.energy_min}};
}

json to_json(const SolveReport& r) {
    json steps = json::array();
    for (const auto& s : r.steps) steps.push_back(to_json(s));
    return json{{"classification", to_string(r.classification)},
                {"steps", steps},
                {"flux_saturated", r.flux_saturated},
                {"plateau_strict", r.plateau_strict},
                {"plateau_monitor", r.plateau_monitor},
                {"polish_converged", r.polish_converged},
                {"recorded_sup_bound", r.recorded_sup_bound},
                {"recorded_energy_bound", r.recorded_energy_bound},
                {"limit",
                 json{{"sup_norm", r.limit_sup_norm},
                      {"tv", r.limit_tv},
                      {"flux_sup", r.limit_flux_sup},
                      {"equation_residual", finite_or_string(r.limit_equation_residual)}}},
                {"failure_detail", r.failure_detail}};
}

json to_json(const ConditionReport& r) {
    json violations = json::array();
    for (const auto& v : r.cheeger_violations)
        violations.push_back(json{{"radius", v.radius}, {"integral", v.integral}, {"perimeter", v.perimeter}});
    json j{{"s1_constant", r.s1_constant},
           {"s1_tilde_constant", r.s1_tilde_constant},
           {"ln_norm", r.ln_norm},
           {"lninf_norm", r.lninf_norm},
           {"h_infinity", r.h_infinity},
           {"threshold_ln", finite_or_string(r.threshold_ln)},
           {"threshold_lninf", finite_or_string(r.threshold_lninf)},
           {"margin_ln", finite_or_string(r.margin_ln)},
           {"margin_lninf", finite_or_string(r.margin_lninf)},
           {"cheeger_violations", violations}};
    if (r.serrin_threshold) j["serrin_threshold"] = *r.serrin_threshold;
    if (r.serrin_margin) j["serrin_margin"] = *r.serrin_margin;
    return j;
}

json to_json(const VerificationReport& r) {
    json detail = json::array();
    for (const auto& b : r.boundary_detail)
        detail.push_back(json{{"node", b.node},
                              {"trace_mean", b.trace_mean},
                              {"datum", b.datum},
                              {"z_dot_nu", b.z_dot_nu},
                              {"z_dot_nu_field", b.z_dot_nu_field},
                              {"ok", b.ok}});
    return json{{"flux_bound_excess", r.flux_bound_excess},
                {"pairing_residual", r.pairing_residual},
                {"flux_formula_residual", r.flux_formula_residual},
                {"boundary_ok", r.boundary_ok},
                {"boundary_tol", r.boundary_tol},
                {"boundary_detail", detail},
                {"equation_residual", finite_or_string(r.equation_residual)},
                {"normal_trace_model", r.normal_trace_model}};
}

json to_json(const StampacchiaCheck& r) {
    json pairs = json::array();
    for (const auto& p : r.pairs)
        pairs.push_back(json{{"k", p.k},
                             {"h", p.h},
                             {"vol_k", p.vol_k},
                             {"vol_h", p.vol_h},
                             {"bound", finite_or_string(p.bound)},
                             {"ok", p.ok}});
    return json{{"precondition_ok", r.precondition_ok},
                {"holds", r.holds},
                {"ln_norm", r.ln_norm},
                {"threshold", r.threshold},
                {"pairs", pairs}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

namespace {

std::string nonlinearity_header(const NonlinearTerm& h) {
    std::ostringstream os;
    os << "# nonlinearity: kind = " << h.kind_name();
    switch (h.kind()) {
        case NonlinearTerm::Kind::IdentityOne:
            break;
        case NonlinearTerm::Kind::Rational:
            // a/(b+s) with h(0) = a/b = c1 and h(1) determining b
            os << ", c1 = " << fmt17(h.c1()) << ", h1 = " << fmt17(h(1.0));
            break;
        case NonlinearTerm::Kind::SingularPower:
            os << ", gamma = " << fmt17(h.gamma()) << ", s1 = " << fmt17(h.s1())
               << ", offset = " << fmt17(h.h_infinity()) << ", h_at_s1 = " << fmt17(h(h.s1()));
            break;
        case NonlinearTerm::Kind::Table:
            os << " (tables are not round-tripped; re-verify through the config)";
            break;
    }
    return os.str();
}

NonlinearTerm parse_nonlinearity_header(const std::string& line) {
    auto grab = [&](const std::string& key) -> std::string {
        const auto pos = line.find(key + " = ");
        if (pos == std::string::npos)
            throw std::invalid_argument("profile: missing " + key + " in nonlinearity header");
        const auto start = pos + key.size() + 3;
        const auto end = line.find_first_of(",\n", start);
        return line.substr(start, end == std::string::npos ? end : end - start);
    };
    if (line.find("kind = one") != std::string::npos) return NonlinearTerm::identity_one();
    if (line.find("kind = rational") != std::string::npos) {
        const double c1 = std::stod(grab("c1"));
        const double h1 = std::stod(grab("h1"));
        // h(0) = a/b, h(1) = a/(b+1)  =>  b = h1/(c1-h1), a = c1 b
        const double b = h1 / (c1 - h1);
        return NonlinearTerm::rational(c1 * b, b);
    }
    if (line.find("kind = power") != std::string::npos) {
        const double gamma = std::stod(grab("gamma"));
        const double s1 = std::stod(grab("s1"));
        const double offset = std::stod(grab("offset"));
        const double hs1 = std::stod(grab("h_at_s1"));
        const double c1 = (hs1 - offset) * std::pow(s1, gamma);
        return NonlinearTerm::singular_power(c1, gamma, offset, s1);
    }
    throw std::invalid_argument("profile: unsupported nonlinearity header: " + line);
}

}  // namespace

void write_profile(const std::string& path, const ScalarField& u, const FluxField& z,
                   const ScalarField& f, const ScalarField& resid, const NonlinearTerm& h) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# mcflow profile v1\n";
    if (u.grid->is_radial()) {
        const auto& rg = u.grid->radial();
        out << "# domain: kind = " << (rg.is_ball() ? "ball" : "annulus")
            << ", dimension = " << rg.dimension << ", r_inner = " << fmt17(rg.r_inner)
            << ", r_outer = " << fmt17(rg.r_outer) << ", nodes = " << rg.node_count
            << ", inner_value = " << fmt17(rg.inner_value)
            << ", outer_value = " << fmt17(rg.outer_value) << "\n";
        out << nonlinearity_header(h) << "\n";
        out << "r,u,z,f,residual\n";
        for (std::size_t i = 0; i < rg.node_count; ++i)
            out << fmt17(rg.node(i)) << ',' << fmt17(u.values[i]) << ',' << fmt17(z.values[i])
                << ',' << fmt17(f.values[i]) << ',' << fmt17(resid.values[i]) << "\n";
        return;
    }
    const auto& tg = u.grid->tensor();
    out << "# domain: kind = rect2d, nx = " << tg.nx << ", ny = " << tg.ny
        << ", spacing = " << fmt17(tg.spacing) << "\n";
    out << nonlinearity_header(h) << "\n";
    out << "x,y,u,zx,zy,f,residual\n";
    for (std::size_t iy = 0; iy < tg.ny; ++iy)
        for (std::size_t ix = 0; ix < tg.nx; ++ix) {
            const std::size_t k = tg.idx(ix, iy);
            if (!tg.mask[k]) continue;
            out << fmt17(tg.x(ix)) << ',' << fmt17(tg.y(iy)) << ',' << fmt17(u.values[k]) << ','
                << fmt17(z.values[2 * k]) << ',' << fmt17(z.values[2 * k + 1]) << ','
                << fmt17(f.values[k]) << ',' << fmt17(resid.values[k]) << "\n";
        }
}

LoadedProfile read_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open profile " + path);
    std::string magic, domain_line, h_line, header;
    if (!std::getline(in, magic) || magic.rfind("# mcflow profile", 0) != 0)
        throw std::invalid_argument("profile: missing magic line");
    if (!std::getline(in, domain_line) || domain_line.rfind("# domain:", 0) != 0)
        throw std::invalid_argument("profile: missing domain header");
    if (!std::getline(in, h_line) || h_line.rfind("# nonlinearity:", 0) != 0)
        throw std::invalid_argument("profile: missing nonlinearity header");
    if (!std::getline(in, header)) throw std::invalid_argument("profile: missing column header");

    auto grab = [&](const std::string& key) -> std::string {
        const auto pos = domain_line.find(key + " = ");
        if (pos == std::string::npos)
            throw std::invalid_argument("profile: missing " + key + " in domain header");
        const auto start = pos + key.size() + 3;
        const auto end = domain_line.find(',', start);
        return domain_line.substr(start, end == std::string::npos ? end : end - start);
    };

    LoadedProfile lp;
    lp.h = parse_nonlinearity_header(h_line);

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }

    const std::string kind = grab("kind");
    if (kind == "ball" || kind == "annulus") {
        RadialGrid g;
        g.dimension = std::stoi(grab("dimension"));
        g.r_inner = std::stod(grab("r_inner"));
        g.r_outer = std::stod(grab("r_outer"));
        g.node_count = static_cast<std::size_t>(std::stoul(grab("nodes")));
        g.inner_value = std::stod(grab("inner_value"));
        g.outer_value = std::stod(grab("outer_value"));
        if (rows.size() != g.node_count)
            throw std::invalid_argument("profile: row count does not match the grid");
        lp.grid = make_grid(g);
        lp.u = ScalarField(lp.grid);
        lp.z = FluxField(lp.grid);
        lp.f = ScalarField(lp.grid);
        lp.resid = ScalarField(lp.grid);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != 5) throw std::invalid_argument("profile: bad radial row");
            lp.u.values[i] = rows[i][1];
            lp.z.values[i] = rows[i][2];
            lp.f.values[i] = rows[i][3];
            lp.resid.values[i] = rows[i][4];
        }
        return lp;
    }
    if (kind == "rect2d") {
        TensorGrid2D g;
        g.nx = static_cast<std::size_t>(std::stoul(grab("nx")));
        g.ny = static_cast<std::size_t>(std::stoul(grab("ny")));
        g.spacing = std::stod(grab("spacing"));
        g.mask.assign(g.nx * g.ny, 0);
        const double h = g.spacing;
        for (const auto& row : rows) {
            if (row.size() != 7) throw std::invalid_argument("profile: bad tensor row");
            const auto ix = static_cast<std::size_t>(std::llround(row[0] / h));
            const auto iy = static_cast<std::size_t>(std::llround(row[1] / h));
            g.mask[g.idx(ix, iy)] = 1;
        }
        g.classify();
        lp.grid = make_grid(g);
        lp.u = ScalarField(lp.grid);
        lp.z = FluxField(lp.grid);
        lp.f = ScalarField(lp.grid);
        lp.resid = ScalarField(lp.grid);
        const auto& tg = lp.grid->tensor();
        for (const auto& row : rows) {
            const auto ix = static_cast<std::size_t>(std::llround(row[0] / h));
            const auto iy = static_cast<std::size_t>(std::llround(row[1] / h));
            const std::size_t k = tg.idx(ix, iy);
            lp.u.values[k] = row[2];
            lp.z.values[2 * k] = row[3];
            lp.z.values[2 * k + 1] = row[4];
            lp.f.values[k] = row[5];
            lp.resid.values[k] = row[6];
        }
        return lp;
    }
    throw std::invalid_argument("profile: unknown domain kind " + kind);
}

}  // namespace mcflow
