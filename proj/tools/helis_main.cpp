// helis: verification engine for invariant forms and helicity identities of
// incompressible flows on time-extended 3-space.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <helis/harness.hpp>

namespace {

int cmd_verify(const std::string& scenario, const helis::RunOptions& opt,
               const std::string& out_path, const std::string& format) {
    auto loaded = helis::load_scenario(scenario);
    helis::RunOptions run = opt;
    if (!run.tol_override && loaded.tol_pipeline) run.tol_override = loaded.tol_pipeline;
    const auto report = helis::run_checks(loaded.scenario, run);
    const std::string body = helis::emit_report(report, format);
    if (out_path.empty()) {
        std::cout << body;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return 2;
        }
        out << body;
    }
    return report.all_pass() ? 0 : 1;
}

int cmd_hierarchy(const std::string& scenario, int depth) {
    auto loaded = helis::load_scenario(scenario);
    const auto& s = loaded.scenario;
    const auto H = helis::build_hierarchy(s, depth);
    std::cout << "scenario: " << s.name << "\n";
    std::cout << "sign:     " << H.sign << "\n";
    auto show = [](const std::string& label, const helis::VectorField& W) {
        std::cout << label << " = (" << helis::to_string(helis::simplify(W[1])) << ", "
                  << helis::to_string(helis::simplify(W[2])) << ", "
                  << helis::to_string(helis::simplify(W[3])) << ")\n";
    };
    show("u0", H.u0);
    for (int k = 1; k <= H.depth(); ++k) {
        show("W_" + std::to_string(k), H.W[k - 1]);
        std::cout << "h_" << k << " = " << helis::to_string(helis::simplify(H.h[k - 1])) << "\n";
        std::cout << "xi_" << k << " = " << helis::to_string(helis::simplify(H.xi[k - 1])) << "\n";
    }
    return 0;
}

int cmd_helicity(const std::string& scenario, int resolution) {
    auto loaded = helis::load_scenario(scenario);
    const double I = helis::helicity_integral(loaded.scenario.v, resolution);
    std::cout << I << "\n";
    return 0;
}

int cmd_catalog(const std::string& action, const std::string& name) {
    if (action == "list") {
        for (const auto& n : helis::catalog_names()) std::cout << n << "\n";
        return 0;
    }
    const auto s = helis::catalog_scenario(name);
    auto expr3 = [](const helis::VectorField& W) {
        return "[\"" + helis::to_string(W[1]) + "\", \"" + helis::to_string(W[2]) + "\", \"" +
               helis::to_string(W[3]) + "\"]";
    };
    std::cout << "name = \"" << s.name << "\"\n";
    std::cout << "v = " << expr3(s.v) << "\n";
    std::cout << "B = " << expr3(s.B) << "\n";
    std::cout << "phi = \"" << helis::to_string(s.phi) << "\"\n";
    std::cout << "h1 = \"" << helis::to_string(s.h1) << "\"\n";
    if (s.pressure) std::cout << "p = \"" << helis::to_string(*s.pressure) << "\"\n";
    if (!s.gauges.empty()) {
        std::cout << "lambda = [";
        for (std::size_t i = 0; i < s.gauges.size(); ++i)
            std::cout << (i ? ", " : "") << "\"" << helis::to_string(s.gauges[i]) << "\"";
        std::cout << "]\n";
    }
    if (!s.extension_hamiltonians.empty()) {
        std::cout << "phi_k = [";
        for (std::size_t i = 0; i < s.extension_hamiltonians.size(); ++i)
            std::cout << (i ? ", " : "") << "\""
                      << helis::to_string(s.extension_hamiltonians[i]) << "\"";
        std::cout << "]\n";
    }
    std::cout << "grid_n = " << s.grid.n_spatial << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification engine for invariant forms of incompressible flows"};
    app.require_subcommand(1);

    std::string scenario, out_path, format = "text", checks = "all";
    int depth = 2, resolution = 64;
    int grid_n = 0;
    double tol = 0;
    std::uint64_t seed = 42;

    auto* verify = app.add_subcommand("verify", "run the check suite for a scenario");
    verify->add_option("--scenario", scenario, "catalog name or scenario file")->required();
    verify->add_option("--checks", checks, "all or comma-separated id prefixes");
    verify->add_option("--depth", depth, "hierarchy depth");
    verify->add_option("--grid", grid_n, "spatial grid points per axis");
    verify->add_option("--tol", tol, "tolerance override for all checks");
    verify->add_option("--seed", seed, "seed for randomized draws");
    verify->add_option("--out", out_path, "write the report to a file");
    verify->add_option("--format", format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));

    auto* hier = app.add_subcommand("hierarchy", "print the symmetry hierarchy symbolically");
    hier->add_option("--scenario", scenario, "catalog name or scenario file")->required();
    hier->add_option("--depth", depth, "hierarchy depth");

    auto* heli = app.add_subcommand("helicity-integral", "midpoint quadrature of v.curl(v)");
    heli->add_option("--scenario", scenario, "catalog name or scenario file")->required();
    heli->add_option("--resolution", resolution, "grid points per axis (>= 16)");

    auto* cat = app.add_subcommand("catalog", "list or show built-in scenarios");
    std::string action = "list", name;
    cat->add_option("action", action, "list | show")->check(CLI::IsMember({"list", "show"}));
    cat->add_option("name", name, "scenario name for show");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) {
            helis::RunOptions opt;
            opt.checks = checks;
            opt.depth = depth;
            if (grid_n > 0) opt.grid_n = grid_n;
            if (tol > 0) opt.tol_override = tol;
            opt.seed = seed;
            return cmd_verify(scenario, opt, out_path, format);
        }
        if (hier->parsed()) return cmd_hierarchy(scenario, depth);
        if (heli->parsed()) return cmd_helicity(scenario, resolution);
        if (cat->parsed()) {
            if (action == "show" && name.empty()) {
                std::cerr << "catalog show requires a name\n";
                return 2;
            }
            return cmd_catalog(action, name);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
