#pragma once

// Scenario ingestion (built-in catalog + flat key/value files), orchestration
// of the full check suite, and JSON/text report emission.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jacobi.hpp"
#include "rng.hpp"

namespace helis {

// ---- random test data --------------------------------------------------------

namespace detail {

// Low-degree polynomial/trig scalar with bounded coefficients; keeps the
// magnitudes of iterated brackets small enough for absolute tolerances.
inline Expr random_scalar(Rng& rng, bool allow_time = true) {
    const Expr t(Var::t), x(Var::x), y(Var::y), z(Var::z);
    const std::vector<Expr> menu = allow_time
        ? std::vector<Expr>{Expr(1.0), t, x, y, z, x * y, y * z, x * z, t * x,
                            pow(x, 2.0), pow(y, 2.0), pow(z, 2.0), sin(x), cos(y), sin(z), cos(z)}
        : std::vector<Expr>{Expr(1.0), x, y, z, x * y, y * z, x * z,
                            pow(x, 2.0), pow(y, 2.0), pow(z, 2.0), sin(x), cos(y), sin(z), cos(x)};
    const int terms = rng.uniform_int(1, 3);
    Expr out(0.0);
    for (int i = 0; i < terms; ++i) {
        const double c = rng.uniform(-1.0, 1.0);
        out += Expr(c) * menu[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(menu.size()) - 1))];
    }
    return out;
}

inline VectorField random_vector_field(Rng& rng, bool spatial = true) {
    if (spatial)
        return VectorField::spatial(random_scalar(rng), random_scalar(rng), random_scalar(rng));
    return VectorField(random_scalar(rng), random_scalar(rng), random_scalar(rng),
                       random_scalar(rng));
}

inline Form random_form(Rng& rng, int degree) {
    Form f(degree);
    for (int m = 0; m < 16; ++m)
        if (mask_degree(static_cast<Mask>(m)) == degree && rng.uniform() < 0.75)
            f.set(static_cast<Mask>(m), random_scalar(rng));
    return f;
}

}  // namespace detail

// ---- built-in catalog ----------------------------------------------------------

inline std::vector<std::string> catalog_names() { return {"shear", "rotation", "abc"}; }

inline FlowScenario catalog_scenario(const std::string& name) {
    FlowScenario s;
    s.name = name;
    if (name == "shear") {
        s.v = VectorField::spatial(parse_expr("sin(z)"), Expr(0.0), Expr(0.0));
        s.B = VectorField::spatial(Expr(1.0), Expr(1.0), Expr(0.0));
        s.phi = parse_expr("y");
        s.h1 = parse_expr("z");
        s.pressure = Expr(0.0);
        s.gauges = {parse_expr("x")};
        s.extension_hamiltonians = {parse_expr("x - t*sin(z) + 2")};
        return s;
    }
    if (name == "rotation") {
        s.v = VectorField::spatial(parse_expr("-y"), parse_expr("x"), Expr(0.0));
        s.B = VectorField::spatial(Expr(0.0), Expr(0.0), Expr(1.0));
        s.phi = parse_expr("z");
        s.h1 = parse_expr("(x^2 + y^2)*z");
        s.pressure = parse_expr("(x^2 + y^2)/2");
        s.gauges = {parse_expr("x")};
        s.extension_hamiltonians = {parse_expr("exp(z)"), parse_expr("x*cos(t) + y*sin(t) + 10")};
        return s;
    }
    if (name == "abc") {
        s.v = VectorField::spatial(parse_expr("sin(z) + cos(y)"), parse_expr("sin(x) + cos(z)"),
                                   parse_expr("sin(y) + cos(x)"));
        s.B = s.v;  // Beltrami: curl v = v
        s.phi = Expr(0.0);
        s.h1 = Expr(0.0);
        s.pressure = parse_expr(
            "-((sin(z)+cos(y))^2 + (sin(x)+cos(z))^2 + (sin(y)+cos(x))^2)/2");
        s.rho_floor = 0.0;  // quadrature scenario; the density is identically zero
        return s;
    }
    throw std::runtime_error("unknown catalog scenario \"" + name + "\"");
}

// ---- scenario files --------------------------------------------------------------

struct LoadedScenario {
    FlowScenario scenario;
    std::optional<double> tol_structural;
    std::optional<double> tol_pipeline;
};

namespace detail {

struct FileValue {
    std::string str;
    std::vector<std::string> list;
    double number = 0;
    enum class Kind { String, List, Number } kind = Kind::String;
};

inline std::string scn_error(const std::string& origin, int line, const std::string& msg) {
    return origin + ":" + std::to_string(line) + ": " + msg;
}

inline FileValue parse_value(const std::string& raw, const std::string& origin, int line) {
    FileValue v;
    std::size_t i = 0;
    auto skip = [&] { while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i; };
    auto quoted = [&]() -> std::string {
        if (raw[i] != '"') throw std::runtime_error(scn_error(origin, line, "expected quoted string"));
        const std::size_t start = ++i;
        while (i < raw.size() && raw[i] != '"') ++i;
        if (i == raw.size()) throw std::runtime_error(scn_error(origin, line, "unterminated string"));
        return raw.substr(start, i++ - start);
    };
    skip();
    if (i == raw.size()) throw std::runtime_error(scn_error(origin, line, "missing value"));
    if (raw[i] == '"') {
        v.kind = FileValue::Kind::String;
        v.str = quoted();
        return v;
    }
    if (raw[i] == '[') {
        v.kind = FileValue::Kind::List;
        ++i;
        skip();
        if (i < raw.size() && raw[i] == ']') return v;
        for (;;) {
            skip();
            v.list.push_back(quoted());
            skip();
            if (i < raw.size() && raw[i] == ',') { ++i; continue; }
            if (i < raw.size() && raw[i] == ']') { ++i; return v; }
            throw std::runtime_error(scn_error(origin, line, "expected ',' or ']'"));
        }
    }
    v.kind = FileValue::Kind::Number;
    try {
        std::size_t used = 0;
        v.number = std::stod(raw.substr(i), &used);
        std::size_t rest = i + used;
        while (rest < raw.size() && std::isspace(static_cast<unsigned char>(raw[rest]))) ++rest;
        if (rest != raw.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw std::runtime_error(scn_error(origin, line, "malformed value \"" + raw + "\""));
    }
    if (!std::isfinite(v.number))
        throw std::runtime_error(scn_error(origin, line, "non-finite constant"));
    return v;
}

inline Expr parse_field_expr(const std::string& text, const std::string& key,
                             const std::string& origin, int line) {
    try {
        return parse_expr(text);
    } catch (const ParseError& e) {
        throw std::runtime_error(scn_error(origin, line,
                                           "field " + key + ": " + e.what()));
    }
}

}  // namespace detail

inline LoadedScenario parse_scenario_text(const std::string& text, const std::string& origin) {
    using detail::FileValue;
    std::map<std::string, std::pair<FileValue, int>> fields;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        // strip comments outside quotes
        bool quote = false;
        std::string line;
        for (char c : raw) {
            if (c == '"') quote = !quote;
            if (c == '#' && !quote) break;
            line += c;
        }
        const auto firstc = line.find_first_not_of(" \t\r");
        if (firstc == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(detail::scn_error(origin, lineno, "expected key = value"));
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        key.erase(0, key.find_first_not_of(" \t"));
        std::string value = line.substr(eq + 1);
        while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) value.pop_back();
        fields[key] = {detail::parse_value(value, origin, lineno), lineno};
    }

    auto require = [&](const std::string& key) -> std::pair<FileValue, int> {
        auto it = fields.find(key);
        if (it == fields.end())
            throw std::runtime_error(origin + ": missing field " + key);
        return it->second;
    };
    auto expr_list3 = [&](const std::string& key) -> std::array<Expr, 3> {
        auto [val, line] = require(key);
        if (val.kind != FileValue::Kind::List || val.list.size() != 3)
            throw std::runtime_error(detail::scn_error(origin, line,
                                                       key + " must be a list of 3 expressions"));
        return {detail::parse_field_expr(val.list[0], key, origin, line),
                detail::parse_field_expr(val.list[1], key, origin, line),
                detail::parse_field_expr(val.list[2], key, origin, line)};
    };

    LoadedScenario out;
    FlowScenario& s = out.scenario;
    {
        auto [val, line] = require("name");
        (void)line;
        s.name = val.str;
    }
    const auto vc = expr_list3("v");
    s.v = VectorField::spatial(vc[0], vc[1], vc[2]);
    const auto bc = expr_list3("B");
    s.B = VectorField::spatial(bc[0], bc[1], bc[2]);
    {
        auto [val, line] = require("phi");
        s.phi = detail::parse_field_expr(val.str, "phi", origin, line);
    }
    {
        auto [val, line] = require("h1");
        s.h1 = detail::parse_field_expr(val.str, "h1", origin, line);
    }
    if (auto it = fields.find("p"); it != fields.end())
        s.pressure = detail::parse_field_expr(it->second.first.str, "p", origin, it->second.second);
    if (auto it = fields.find("lambda"); it != fields.end())
        for (const auto& e : it->second.first.list)
            s.gauges.push_back(detail::parse_field_expr(e, "lambda", origin, it->second.second));
    if (auto it = fields.find("phi_k"); it != fields.end())
        for (const auto& e : it->second.first.list)
            s.extension_hamiltonians.push_back(
                detail::parse_field_expr(e, "phi_k", origin, it->second.second));
    if (auto it = fields.find("grid_n"); it != fields.end())
        s.grid.n_spatial = static_cast<int>(it->second.first.number);
    if (auto it = fields.find("rho_floor"); it != fields.end())
        s.rho_floor = it->second.first.number;
    if (auto it = fields.find("ext_floor"); it != fields.end())
        s.ext_floor = it->second.first.number;
    if (auto it = fields.find("tol_structural"); it != fields.end())
        out.tol_structural = it->second.first.number;
    if (auto it = fields.find("tol_pipeline"); it != fields.end())
        out.tol_pipeline = it->second.first.number;
    return out;
}

// Catalog names resolve without a file; anything else is a path.
inline LoadedScenario load_scenario(const std::string& name_or_path) {
    for (const auto& n : catalog_names())
        if (n == name_or_path) return LoadedScenario{catalog_scenario(n), {}, {}};
    std::ifstream in(name_or_path);
    if (!in) throw std::runtime_error("cannot open scenario file \"" + name_or_path + "\"");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), name_or_path);
}

// ---- orchestration -----------------------------------------------------------------

struct RunOptions {
    std::string checks = "all";
    int depth = 2;
    std::optional<int> grid_n;
    std::optional<double> tol_override;
    std::uint64_t seed = 42;
};

namespace detail {

struct Selection {
    bool all = false;
    std::vector<std::string> prefixes;

    static Selection parse(const std::string& csv) {
        Selection sel;
        if (csv == "all") {
            sel.all = true;
            return sel;
        }
        std::string cur;
        std::istringstream in(csv);
        while (std::getline(in, cur, ','))
            if (!cur.empty()) sel.prefixes.push_back(cur);
        return sel;
    }

    bool want(const std::string& id) const {
        if (all) return true;
        for (const auto& p : prefixes)
            if (id.rfind(p, 0) == 0) return true;
        return false;
    }
};

inline bool is_periodic(const VectorField& v, double L) {
    Rng rng(12345);
    for (int trial = 0; trial < 16; ++trial) {
        const Point4 p{0.0, rng.uniform(0, L), rng.uniform(0, L), rng.uniform(0, L)};
        for (int axis = 1; axis < 4; ++axis) {
            Point4 q = p;
            if (axis == 1) q.x += L;
            if (axis == 2) q.y += L;
            if (axis == 3) q.z += L;
            for (int i = 1; i < 4; ++i)
                if (std::fabs(eval(v[i], p) - eval(v[i], q)) > 1e-9) return false;
        }
    }
    return true;
}

}  // namespace detail

inline VerificationReport run_checks(FlowScenario s, const RunOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    if (opt.grid_n) s.grid.n_spatial = *opt.grid_n;
    Tolerances tol;
    if (opt.tol_override) {
        tol.structural = *opt.tol_override;
        tol.pipeline = *opt.tol_override;
    }
    const auto sel = detail::Selection::parse(opt.checks);

    VerificationReport rep;
    rep.scenario = s.name;
    rep.seed = opt.seed;

    auto add_if = [&](CheckRecord c) {
        if (sel.want(c.id)) rep.add(std::move(c));
    };
    auto add_all = [&](const std::vector<CheckRecord>& cs) {
        for (const auto& c : cs) add_if(c);
    };

    // scenario PDE residuals
    try {
        add_all(verify_scenario(s, tol));
    } catch (const std::exception& e) {
        add_if(failed_check("scenario.error", "scenario validation", e.what()));
    }

    // Degenerate-density scenarios keep only the checks that need no rho^{-1}.
    const auto rho_pts = s.retained_points();
    bool degenerate = rho_pts.empty();
    if (!degenerate) {
        const Residual rr = residual(s.rho(), rho_pts);
        degenerate = rr.max < 1e-12;
    }

    if (!degenerate) {
        std::optional<SymplecticData> sym;
        try {
            sym = build_symplectic(s, tol);
            add_all(sym->checks);
        } catch (const std::exception& e) {
            add_if(failed_check("symplectic.error", "symplectic construction", e.what()));
        }

        std::optional<Hierarchy> hier;
        if (sym) {
            try {
                hier = build_hierarchy(s, opt.depth, tol);
                rep.sign = hier->sign;
                add_all(hierarchy_checks(s, *hier, *sym, tol));
            } catch (const std::exception& e) {
                add_if(failed_check("hierarchy.error", "hierarchy construction", e.what()));
            }
        }

        // Nambu bracket properties on seeded draws
        try {
            Rng rng = Rng::stream(opt.seed, "nambu");
            const auto pts = rho_pts;
            Residual jac, casimir, antisym;
            for (int trial = 0; trial < 3; ++trial) {
                const Expr f = detail::random_scalar(rng, false);
                const Expr g = detail::random_scalar(rng, false);
                const Expr h = detail::random_scalar(rng, false);
                const Expr cyc = nambu_bracket(f, nambu_bracket(g, h, s), s) +
                                 nambu_bracket(h, nambu_bracket(f, g, s), s) +
                                 nambu_bracket(g, nambu_bracket(h, f, s), s);
                const Residual r = residual(cyc, pts);
                jac.max = std::max(jac.max, r.max);
                jac.rms = std::max(jac.rms, r.rms);
                const Residual rc = residual(nambu_bracket(s.phi, g, s), pts);
                casimir.max = std::max(casimir.max, rc.max);
                casimir.rms = std::max(casimir.rms, rc.rms);
                const Residual ra = residual(nambu_bracket(f, f, s), pts);
                antisym.max = std::max(antisym.max, ra.max);
                antisym.rms = std::max(antisym.rms, ra.rms);
            }
            add_if(make_check("nambu.jacobi", "{f,{g,h}} + {h,{f,g}} + {g,{h,f}} = 0", jac,
                              tol.pipeline));
            add_if(make_check("nambu.casimir", "{phi, g} = 0", casimir, tol.structural));
            add_if(make_check("nambu.antisymmetry", "{f,f} = 0", antisym, tol.structural));
        } catch (const std::exception& e) {
            add_if(failed_check("nambu.error", "Nambu bracket properties", e.what()));
        }

        if (hier && sym) {
            // bracket closure
            for (int k = 1; k <= hier->depth(); ++k)
                for (int l = k; l <= hier->depth(); ++l) {
                    try {
                        add_all(bracket_closure(s, *hier, k, l, tol).checks);
                    } catch (const std::exception& e) {
                        add_if(failed_check("closure.error", "bracket closure", e.what()));
                    }
                }

            // invariant two-forms, potentials, helicity densities
            try {
                std::vector<InvariantTwoForm> itfs;
                for (int k = 0; k <= hier->depth(); ++k) {
                    itfs.push_back(invariant_two_form(s, *sym, *hier, k, tol));
                    add_all(itfs.back().checks);
                }
                for (std::size_t a = 0; a < itfs.size(); ++a)
                    for (std::size_t b = a; b < itfs.size(); ++b)
                        add_if(degeneracy_check(s, itfs[a], itfs[b], tol));

                std::vector<PotentialOneForm> plus;
                for (int k = 1; k <= hier->depth(); ++k) {
                    auto pot_p = potential_one_form(s, *hier, k, Orientation::plus,
                                                    itfs[static_cast<std::size_t>(k)], tol);
                    auto pot_m = potential_one_form(s, *hier, k, Orientation::minus,
                                                    itfs[static_cast<std::size_t>(k)], tol);
                    add_all(pot_p.checks);
                    add_all(pot_m.checks);
                    for (int l = 1; l <= hier->depth(); ++l) {
                        const auto& itf = itfs[static_cast<std::size_t>(l)];
                        add_if(make_check("potential.minus-null." + std::to_string(k) +
                                              std::to_string(l),
                                          "theta_k^- ^ Theta_l = 0",
                                          residual(wedge(pot_m.theta, itf.Theta), rho_pts),
                                          tol.structural));
                    }
                    plus.push_back(std::move(pot_p));
                }

                // ungauged densities: Lagrangian conservation laws
                for (int k = 1; k <= hier->depth(); ++k)
                    for (int l = 1; l <= hier->depth(); ++l) {
                        const auto hd = helicity_three_form(plus[static_cast<std::size_t>(k) - 1],
                                                            itfs[static_cast<std::size_t>(l)], s, tol);
                        add_all(hd.checks);
                        const std::string KL = std::to_string(k) + std::to_string(l);
                        add_if(make_check("helicity.lagrangian." + KL,
                                          "dH/dt + v.grad(H) = 0 (absolute class)",
                                          lagrangian_residual(hd, s), tol.pipeline));
                        add_if(make_check("helicity.eulerian." + KL,
                                          "dH/dt + div(H v - rho chi W_l) = 0",
                                          eulerian_residual(hd, s), tol.pipeline));
                    }

                // gauged densities: the kinematical distinction
                for (std::size_t gi = 0; gi < s.gauges.size(); ++gi) {
                    const std::string suffix = ".g" + std::to_string(gi);
                    auto add_tagged = [&](std::vector<CheckRecord> cs) {
                        for (auto& c : cs) {
                            c.id += suffix;
                            add_if(std::move(c));
                        }
                    };
                    for (int k = 1; k <= hier->depth(); ++k) {
                        const auto gauged = gauge_transform(plus[static_cast<std::size_t>(k) - 1],
                                                            s.gauges[gi], s, tol);
                        add_tagged(gauged.checks);
                        const std::string tag = std::to_string(k) + suffix;
                        Residual cls;
                        cls.max = gauged.absolute ? 0.0 : 1.0;
                        add_if(make_check("gauge.class." + tag,
                                          std::string("class = ") +
                                              (gauged.absolute ? "absolute" : "relative"),
                                          cls, 2.0));
                        for (int l = 1; l <= hier->depth(); ++l) {
                            const auto hd = helicity_three_form(
                                gauged, itfs[static_cast<std::size_t>(l)], s, tol);
                            add_tagged(hd.checks);
                            const std::string KL =
                                std::to_string(k) + std::to_string(l) + suffix;
                            const Residual lag = lagrangian_residual(hd, s);
                            const Residual eul = eulerian_residual(hd, s);
                            const Residual adv = advective_identity_residual(hd, s);
                            add_if(make_check("helicity.eulerian." + KL,
                                              "dH/dt + div(H v - rho chi W_l) = 0", eul,
                                              tol.pipeline));
                            add_if(make_check("helicity.advective." + KL,
                                              "dH/dt + v(H) = rho W_l(chi)", adv, tol.pipeline));
                            // Lagrangian conservation must fail exactly when the
                            // source rho W_l(chi) is materially nonzero.
                            const Residual source =
                                residual(s.rho() * hd.W_l.apply(hd.chi), rho_pts);
                            Residual dichotomy;
                            const bool src_zero = source.max <= tol.pipeline;
                            const bool lag_zero = lag.max <= tol.pipeline;
                            dichotomy.max = (src_zero == lag_zero && eul.max <= tol.pipeline)
                                                ? 0.0 : 1.0;
                            dichotomy.rms = lag.max;
                            add_if(make_check(
                                "gauge.kinematical-distinction." + KL,
                                "lagrangian residual " + std::string(lag_zero ? "0" : ">0") +
                                    " matches source, eulerian conserved",
                                dichotomy, 0.5));
                            if (src_zero) {
                                // tangent case: W_l(lambda) is itself conserved
                                const Expr wl = hd.W_l.apply(gauged.lambda);
                                add_if(make_check(
                                    "helicity.tangency." + KL,
                                    "W_l(chi) = 0 => W_l(lambda) Lagrangian-conserved",
                                    residual(time_derivative(wl) + s.v.apply(wl), rho_pts),
                                    tol.pipeline));
                            }
                        }
                    }
                }

                // sigma forms
                for (int k = 1; k <= hier->depth(); ++k) add_all(sigma_form(s, *sym, *hier, k, tol).checks);
            } catch (const std::exception& e) {
                add_if(failed_check("theta.error", "invariant form suite", e.what()));
            }

            // symplectic extensions and Jacobi structures
            if (!s.extension_hamiltonians.empty()) {
                std::vector<std::optional<SymplecticExtension>> exts;
                std::vector<std::optional<BivectorDual>> duals;
                for (std::size_t i = 0; i < s.extension_hamiltonians.size(); ++i) {
                    const int k = static_cast<int>(i);
                    try {
                        if (k > hier->depth())
                            throw std::runtime_error("extension index exceeds hierarchy depth");
                        auto e = extend_symplectic(s, *sym, *hier, k, s.extension_hamiltonians[i], tol);
                        add_all(e.checks);
                        auto d = invert_to_bivector(s, e, tol);
                        add_all(d.checks);
                        exts.push_back(std::move(e));
                        duals.push_back(std::move(d));
                    } catch (const std::exception& ex) {
                        add_if(failed_check("extension.error." + std::to_string(k),
                                            "extension k=" + std::to_string(k), ex.what()));
                        exts.push_back(std::nullopt);
                        duals.push_back(std::nullopt);
                    }
                }

                for (std::size_t a = 0; a < exts.size(); ++a) {
                    if (!exts[a]) continue;
                    if (exts[a]->theta_tilde) {
                        const std::string K = std::to_string(exts[a]->k);
                        const Form lt = lie_derivative(s.suspended(), *exts[a]->theta_tilde);
                        add_if(make_check("extension.tilde-invariant." + K,
                                          "L_{dt+v}(theta~_" + K + ") = 0",
                                          residual(lt, exts[a]->retained), tol.pipeline));
                    }
                    for (std::size_t b = 0; b < exts.size(); ++b) {
                        if (!exts[b]) continue;
                        if (exts[a]->theta_tilde)
                            add_if(extension_identity(s, *exts[a], *exts[b], tol));
                        try {
                            add_all(conformal_pair(s, *exts[a], *exts[b], tol).checks);
                            const auto jp = jacobi_pair(s, *exts[a], *exts[b], *duals[b], tol);
                            add_all(jp.checks);

                            // thinned point set for the bracket identities
                            std::vector<Point4> thin;
                            for (std::size_t i = 0; i < jp.retained.size(); i += 8)
                                thin.push_back(jp.retained[i]);
                            const std::string KL = std::to_string(jp.k) + std::to_string(jp.l);
                            Rng rng = Rng::stream(opt.seed, "jacobi." + KL);
                            Residual jac, leib, equiv;
                            for (int trial = 0; trial < 3; ++trial) {
                                const Expr f = detail::random_scalar(rng);
                                const Expr g = detail::random_scalar(rng);
                                const Expr h = detail::random_scalar(rng);
                                const Expr cyc = jacobi_bracket(f, jacobi_bracket(g, h, jp), jp) +
                                                 jacobi_bracket(h, jacobi_bracket(f, g, jp), jp) +
                                                 jacobi_bracket(g, jacobi_bracket(h, f, jp), jp);
                                const Residual r = residual(cyc, thin);
                                jac.max = std::max(jac.max, r.max);
                                const Expr defect = jacobi_bracket(f, g * h, jp) -
                                                    g * jacobi_bracket(f, h, jp) -
                                                    h * jacobi_bracket(f, g, jp) -
                                                    g * h * jp.E.apply(f);
                                const Residual rl = residual(defect, thin);
                                leib.max = std::max(leib.max, rl.max);
                            }
                            for (int trial = 0; trial < 10; ++trial) {
                                const Expr f = detail::random_scalar(rng);
                                const VectorField lhs = hamiltonian_vector_field(f, jp);
                                const VectorField rhs =
                                    contract(jp.P_l, ext_d(Form::scalar(f / jp.phi)));
                                const Residual r = residual(lhs - rhs, thin);
                                equiv.max = std::max(equiv.max, r.max);
                            }
                            add_if(make_check("jacobi.bracket-jacobi." + KL,
                                              "cyclic {f,{g,h}} = 0", jac, tol.pipeline));
                            add_if(make_check("jacobi.leibniz-defect." + KL,
                                              "{f,gh} - g{f,h} - h{f,g} = gh E(f)", leib,
                                              tol.pipeline));
                            add_if(make_check("jacobi.hamiltonian-field." + KL,
                                              "V_klf = P_l(d(f/phi_k))", equiv, tol.pipeline));
                        } catch (const std::exception& ex) {
                            add_if(failed_check("jacobi.error." + std::to_string(a) +
                                                    std::to_string(b),
                                                "jacobi pair", ex.what()));
                        }
                    }
                }
            }
        }
    } else {
        Residual zero;
        add_if(make_check("scenario.degenerate",
                          "rho_phi = 0 everywhere; symplectic suite not applicable", zero, 1.0));
    }

    // quadrature convergence for periodic velocity fields
    if (sel.want("quadrature.helicity") && detail::is_periodic(s.v, s.grid.spatial_length)) {
        try {
            const double coarse = helicity_integral(s.v, 32);
            const double fine = helicity_integral(s.v, 64);
            Residual r;
            r.max = std::fabs(coarse - fine) / (1.0 + std::fabs(fine));
            r.rms = r.max;
            add_if(make_check("quadrature.helicity",
                              "midpoint quadrature of v.curl(v) converged, I=" + std::to_string(fine),
                              r, tol.quadrature_rel));
        } catch (const std::exception& e) {
            add_if(failed_check("quadrature.error", "helicity quadrature", e.what()));
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    rep.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return rep;
}

// ---- emission ---------------------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const VerificationReport& r,
                                             bool include_elapsed = true) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["sign"] = r.sign;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
        nlohmann::ordered_json jc;
        jc["id"] = c.id;
        jc["eq"] = c.eq;
        jc["max"] = c.max;
        jc["rms"] = c.rms;
        jc["tol"] = c.tol;
        jc["pass"] = c.pass;
        jc["excluded"] = c.excluded;
        j["checks"].push_back(std::move(jc));
    }
    if (include_elapsed) j["elapsed_ms"] = r.elapsed_ms;
    return j;
}

inline std::string emit_report(const VerificationReport& r, const std::string& format,
                               bool include_elapsed = true) {
    if (format == "json") return report_to_json(r, include_elapsed).dump(2) + "\n";
    if (format != "text") throw std::invalid_argument("unknown report format " + format);
    std::ostringstream out;
    out << "scenario: " << r.scenario << "\n";
    out << "engine:   helis " << r.version << "\n";
    out << "seed:     " << r.seed << "\n";
    out << "sign:     " << r.sign << "\n";
    char buf[256];
    for (const auto& c : r.checks) {
        std::snprintf(buf, sizeof buf, "[%s] %-40s max=%.3e rms=%.3e tol=%.1e excl=%ld  %s\n",
                      c.pass ? "PASS" : "FAIL", c.id.c_str(), c.max, c.rms, c.tol, c.excluded,
                      c.eq.c_str());
        out << buf;
    }
    out << "result: " << (r.all_pass() ? "PASS" : "FAIL") << " (" << r.checks.size()
        << " checks, " << r.elapsed_ms << " ms)\n";
    return out.str();
}

}  // namespace helis
