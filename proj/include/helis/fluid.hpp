#pragma once

// Flow scenarios on time-extended 3-space: validation of the frozen-field
// equations, the symplectic two-form Omega = omega + sigma ^ dt built from a
// frozen-in field B and an advected function phi, the hierarchy of
// relabelling symmetries W_k, the Nambu bracket, the ideal-flow (Euler)
// identities and the helicity quadrature.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forms.hpp"
#include "report.hpp"

namespace helis {

// ---- small vector-calculus helpers on spatial fields ----------------------

inline VectorField grad3(const Expr& f) {
    return VectorField::spatial(diff(f, Var::x), diff(f, Var::y), diff(f, Var::z));
}

inline Expr div3(const VectorField& X) {
    return diff(X[1], Var::x) + diff(X[2], Var::y) + diff(X[3], Var::z);
}

inline VectorField cross3(const VectorField& a, const VectorField& b) {
    return VectorField::spatial(a[2] * b[3] - a[3] * b[2], a[3] * b[1] - a[1] * b[3],
                                a[1] * b[2] - a[2] * b[1]);
}

inline Expr dot3(const VectorField& a, const VectorField& b) {
    return a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline VectorField curl3(const VectorField& X) {
    return VectorField::spatial(diff(X[3], Var::y) - diff(X[2], Var::z),
                                diff(X[1], Var::z) - diff(X[3], Var::x),
                                diff(X[2], Var::x) - diff(X[1], Var::y));
}

// a . (dx ^ dx) = a_x dy^dz + a_y dz^dx + a_z dx^dy
inline Form vec_to_2form(const VectorField& a) {
    Form out(2);
    out.set(0b1100, a[1]);
    out.set(0b1010, -a[2]);  // dz^dx = -dx^dz
    out.set(0b0110, a[3]);
    return out;
}

inline Form dt_form() { return Form::basis(0b0001); }
inline Form volume4() { return Form::basis(0b1111); }
inline Form volume3() { return Form::basis(0b1110); }

inline Expr time_derivative(const Expr& f) { return diff(f, Var::t); }

inline VectorField time_derivative(const VectorField& X) {
    return VectorField(diff(X[0], Var::t), diff(X[1], Var::t), diff(X[2], Var::t),
                       diff(X[3], Var::t));
}

// ---- scenarios -------------------------------------------------------------

struct FlowScenario {
    std::string name;
    VectorField v;  // spatial velocity
    VectorField B;  // spatial frozen-in field
    Expr phi;       // advected function
    Expr h1;        // seed Hamiltonian
    std::optional<Expr> pressure;
    std::vector<Expr> gauges;                  // lambda_k candidates
    std::vector<Expr> extension_hamiltonians;  // phi_k candidates, index k = 0,1,...
    SampleGrid grid;
    double rho_floor = 1e-6;
    double ext_floor = 0.5;  // |W_k . n_k| retention floor for extensions

    Expr rho() const { return B.apply(phi); }

    VectorField suspended() const { return VectorField::suspend(v); }

    // Grid points where the invariant density stays away from zero.
    std::vector<Point4> retained_points(long* excluded = nullptr) const {
        const Expr r = rho();
        std::vector<Point4> out;
        long dropped = 0;
        for (const Point4& p : grid.points()) {
            bool keep = false;
            try {
                keep = std::fabs(eval(r, p)) >= rho_floor;
            } catch (const EvalError&) {
                keep = false;
            }
            if (keep) out.push_back(p);
            else ++dropped;
        }
        if (excluded) *excluded = dropped;
        return out;
    }
};

inline std::vector<CheckRecord> verify_scenario(const FlowScenario& s,
                                                const Tolerances& tol = {}) {
    std::vector<CheckRecord> out;
    const auto pts = s.grid.points();
    out.push_back(make_check("scenario.div-v", "div(v) = 0", residual(div3(s.v), pts),
                             tol.structural));
    out.push_back(make_check("scenario.div-B", "div(B) = 0", residual(div3(s.B), pts),
                             tol.structural));
    const VectorField frozen = time_derivative(s.B) + lie_bracket(s.v, s.B);
    out.push_back(make_check("scenario.frozen-B", "dB/dt + [v,B] = 0", residual(frozen, pts),
                             tol.structural));
    const Expr advect = time_derivative(s.phi) + s.v.apply(s.phi);
    out.push_back(make_check("scenario.advect-phi", "dphi/dt + v(phi) = 0",
                             residual(advect, pts), tol.structural));
    long excluded = 0;
    const auto retained = s.retained_points(&excluded);
    Residual occupancy;
    occupancy.max = retained.empty() ? 1.0 : 0.0;
    occupancy.rms = pts.empty() ? 0.0 : static_cast<double>(excluded) / pts.size();
    out.push_back(make_check("scenario.rho-floor", "|rho_phi| >= floor on retained grid",
                             occupancy, 0.5, excluded));
    return out;
}

// ---- symplectic structure (the invariant two-form of the frozen pair) -----

struct SymplecticData {
    Form omega;        // spatial part, B.(dx^dx)
    Form Omega;        // omega + sigma ^ dt
    Form mu;           // (1/2) Omega ^ Omega
    Form mu_M;         // i(d/dt)(mu)
    Expr rho;          // B(phi)
    int hamiltonian_sign = +1;  // i(d/dt + v)(Omega) = sign * dphi
    std::vector<CheckRecord> checks;
};

inline SymplecticData build_symplectic(const FlowScenario& s, const Tolerances& tol = {}) {
    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    if (pts.empty())
        throw std::runtime_error("degenerate scenario: |rho_phi| < floor on the whole grid");

    SymplecticData d;
    d.rho = s.rho();
    d.omega = vec_to_2form(s.B);
    const Form sigma = interior(s.v, d.omega) - d_spatial(Form::scalar(s.phi));
    d.Omega = d.omega + wedge(sigma, dt_form());

    d.checks.push_back(make_check("symplectic.closed", "d(Omega) = 0",
                                  residual(ext_d(d.Omega), pts), tol.structural, excluded));

    const Form iX = interior(s.suspended(), d.Omega);
    const Form dphi = ext_d(Form::scalar(s.phi));
    const Residual rp = residual(iX - dphi, pts);
    const Residual rm = residual(iX + dphi, pts);
    d.hamiltonian_sign = rp.max <= rm.max ? +1 : -1;
    d.checks.push_back(make_check("symplectic.hamiltonian",
                                  "i(dt+v)(Omega) = s*dphi, s=" +
                                      std::to_string(d.hamiltonian_sign),
                                  rp.max <= rm.max ? rp : rm, tol.structural, excluded));

    d.mu = Expr(0.5) * wedge(d.Omega, d.Omega);
    d.checks.push_back(make_check("symplectic.volume", "(1/2) Omega^Omega = rho dt^dx^dy^dz",
                                  residual(d.mu - d.rho * volume4(), pts), tol.structural,
                                  excluded));
    d.mu_M = interior(VectorField::basis(Var::t), d.mu);
    return d;
}

// ---- symmetry criterion ----------------------------------------------------

// Residual of [dt+v, xi dt+u] - (xi_t + v(xi)) (dt+v); U carries xi as its
// t-component.
inline CheckRecord check_symmetry(const VectorField& U, const FlowScenario& s,
                                  const Tolerances& tol = {}, const std::string& label = "U") {
    const VectorField X = s.suspended();
    const Expr xi = U[0];
    const Expr factor = time_derivative(xi) + s.v.apply(xi);
    const VectorField res = lie_bracket(X, U) - factor * X;
    return make_check("symmetry." + label, "[dt+v, U] = (xi_t + v(xi))(dt+v)",
                      residual(res, s.grid.points()), tol.pipeline);
}

// ---- the hierarchy of relabelling symmetries -------------------------------

struct Hierarchy {
    VectorField u0;              // -rho^{-1} B
    std::vector<VectorField> W;  // W[k-1] = W_k, k = 1..depth
    std::vector<Expr> h;         // h[k-1] = h_k
    std::vector<Expr> xi;        // xi[k-1] = -u0(h_k)
    int sign = -1;               // W_k = sign * rho^{-1} grad(phi) x grad(h_k)
    int depth() const { return static_cast<int>(W.size()); }
};

// sign * rho^{-1} grad(phi) x grad(g): the Hamiltonian vector field of g in
// the Nambu structure, with the orientation resolved per scenario.
inline VectorField hamiltonian_field(const FlowScenario& s, int sign, const Expr& g) {
    const Expr inv_rho = Expr(1.0) / s.rho();
    const VectorField f = inv_rho * cross3(grad3(s.phi), grad3(g));
    return sign > 0 ? f : -f;
}

inline Hierarchy build_hierarchy(const FlowScenario& s, int depth, const Tolerances& tol = {}) {
    if (depth < 1) throw std::invalid_argument("hierarchy depth must be >= 1");
    const auto pts = s.retained_points();
    if (pts.empty())
        throw std::runtime_error("degenerate scenario: empty retained grid");

    const Expr conserved = time_derivative(s.h1) + s.v.apply(s.h1);
    if (residual(conserved, pts).max > tol.pipeline)
        throw std::runtime_error("h1 is not conserved by the flow");

    Hierarchy H;
    const Expr inv_rho = Expr(1.0) / s.rho();
    H.u0 = -(inv_rho * s.B);
    H.W.push_back(inv_rho * cross3(grad3(s.h1), grad3(s.phi)));
    H.h.push_back(s.h1);
    H.xi.push_back(-H.u0.apply(s.h1));
    for (int k = 2; k <= depth; ++k) {
        H.h.push_back(k == 2 ? H.xi[0] : H.W[0].apply(H.h[k - 2]));
        H.W.push_back(lie_bracket(H.W[0], k == 2 ? H.u0 : H.W[k - 2]));
        H.xi.push_back(-H.u0.apply(H.h[k - 1]));
    }

    // One global orientation relates the bracket-generated fields to the
    // curl-formula family; resolve it by brute comparison over the grid.
    double r_plus = 0, r_minus = 0;
    for (int k = 1; k <= depth; ++k) {
        const VectorField F = hamiltonian_field(s, +1, H.h[k - 1]);
        r_plus = std::max(r_plus, residual(H.W[k - 1] - F, pts).max);
        r_minus = std::max(r_minus, residual(H.W[k - 1] + F, pts).max);
    }
    H.sign = r_minus <= r_plus ? -1 : +1;
    return H;
}

inline std::vector<CheckRecord> hierarchy_checks(const FlowScenario& s, const Hierarchy& H,
                                                 const SymplecticData& sym,
                                                 const Tolerances& tol = {}) {
    std::vector<CheckRecord> out;
    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    const VectorField X = s.suspended();
    for (int k = 1; k <= H.depth(); ++k) {
        const std::string K = std::to_string(k);
        out.push_back(make_check("hierarchy.symmetry." + K, "[dt+v, W_" + K + "] = 0",
                                 residual(lie_bracket(X, H.W[k - 1]), pts), tol.pipeline,
                                 excluded));
        const VectorField F = hamiltonian_field(s, H.sign, H.h[k - 1]);
        out.push_back(make_check("hierarchy.curl-formula." + K,
                                 "W_" + K + " = s/rho grad(phi) x grad(h_" + K + ")",
                                 residual(H.W[k - 1] - F, pts), tol.pipeline, excluded));
        // Clebsch representation rho W_k = s curl(phi grad h_k)
        const VectorField clebsch = curl3(s.phi * grad3(H.h[k - 1]));
        const VectorField lhs = s.rho() * H.W[k - 1];
        const VectorField res = H.sign > 0 ? lhs - clebsch : lhs + clebsch;
        out.push_back(make_check("hierarchy.clebsch." + K,
                                 "rho W_" + K + " = s curl(phi grad h_" + K + ")",
                                 residual(res, pts), tol.pipeline, excluded));
        out.push_back(make_check("hierarchy.div-free." + K, "d_M i(W_" + K + ")(mu_M) = 0",
                                 residual(d_spatial(interior(H.W[k - 1], sym.mu_M)), pts),
                                 tol.pipeline, excluded));
    }
    return out;
}

// ---- Nambu bracket ----------------------------------------------------------

// {f,g}_phi = rho^{-1} grad(phi) . (grad f x grad g)
inline Expr nambu_bracket(const Expr& f, const Expr& g, const FlowScenario& s) {
    return (Expr(1.0) / s.rho()) * dot3(grad3(s.phi), cross3(grad3(f), grad3(g)));
}

struct BracketClosure {
    VectorField W_kl;
    Expr h_kl;
    std::vector<CheckRecord> checks;
};

// Verifies [W_k, W_l] = -W_kl with W_kl generated from h_lk, and the bracket
// isomorphism onto the Nambu algebra of the h_k.
inline BracketClosure bracket_closure(const FlowScenario& s, const Hierarchy& H, int k, int l,
                                      const Tolerances& tol = {}) {
    if (k < 1 || l < 1 || k > H.depth() || l > H.depth())
        throw std::invalid_argument("closure indices exceed hierarchy depth");
    BracketClosure c;
    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    const std::string KL = std::to_string(k) + std::to_string(l);
    const VectorField bracket = lie_bracket(H.W[k - 1], H.W[l - 1]);
    const Expr h_lk = nambu_bracket(H.h[l - 1], H.h[k - 1], s);
    c.h_kl = nambu_bracket(H.h[k - 1], H.h[l - 1], s);
    c.W_kl = -bracket;
    c.checks.push_back(make_check("closure.curl." + KL,
                                  "[W_k,W_l] = W(h_lk), (k,l)=(" + std::to_string(k) + "," +
                                      std::to_string(l) + ")",
                                  residual(bracket - hamiltonian_field(s, H.sign, h_lk), pts),
                                  tol.pipeline, excluded));
    c.checks.push_back(make_check("closure.isomorphism." + KL,
                                  "[W_k,W_l] + W({h_k,h_l}) = 0",
                                  residual(bracket + hamiltonian_field(s, H.sign, c.h_kl), pts),
                                  tol.pipeline, excluded));
    c.checks.push_back(make_check("closure.antisymmetry." + KL, "h_kl + h_lk = 0",
                                  residual(c.h_kl + h_lk, pts), tol.structural, excluded));
    return c;
}

// ---- ideal-flow (Euler) identities ------------------------------------------

struct EulerData {
    Form theta;  // (phi + p + v^2/2) dt - flat(v)
    Form Omega;  // built from the vorticity as frozen-in field
    std::vector<CheckRecord> checks;
};

inline EulerData euler_check(const FlowScenario& s, const Tolerances& tol = {}) {
    if (!s.pressure) throw std::runtime_error("euler check requires a pressure field");
    const Expr p = *s.pressure;
    EulerData e;
    const auto pts = s.grid.points();
    const VectorField X = s.suspended();

    VectorField advection;
    for (int i = 1; i < 4; ++i) advection[i] = s.v.apply(s.v[i]);
    const VectorField momentum = time_derivative(s.v) + advection + grad3(p);
    e.checks.push_back(make_check("euler.momentum", "dv/dt + (v.grad)v + grad p = 0",
                                  residual(momentum, pts), tol.pipeline));

    const VectorField w = curl3(s.v);
    e.checks.push_back(make_check("euler.vorticity-frozen", "dw/dt + [v,w] = 0",
                                  residual(time_derivative(w) + lie_bracket(s.v, w), pts),
                                  tol.pipeline));

    // Invariant curl definition: d_M(flat v) = i(curl v)(dx^dy^dz).
    const Form omega_vort = d_spatial(flat(s.v));
    e.checks.push_back(make_check("euler.curl-duality", "d_M(flat v) = i(curl v)(vol)",
                                  residual(omega_vort - interior(w, volume3()), pts),
                                  tol.structural));

    const Form sigma = interior(s.v, omega_vort) - d_spatial(Form::scalar(s.phi));
    e.Omega = omega_vort + wedge(sigma, dt_form());
    e.checks.push_back(make_check("euler.closed", "d(Omega) = 0", residual(ext_d(e.Omega), pts),
                                  tol.pipeline));

    const Expr half_v2 = Expr(0.5) * dot3(s.v, s.v);
    e.theta = (s.phi + p + half_v2) * dt_form() - flat(s.v);
    e.checks.push_back(make_check("euler.exactness", "Omega = -d(theta)",
                                  residual(e.Omega + ext_d(e.theta), pts), tol.pipeline));

    e.checks.push_back(make_check("euler.divergence-identity",
                                  "d(theta^Omega) + Omega^Omega = 0",
                                  residual(ext_d(wedge(e.theta, e.Omega)) + wedge(e.Omega, e.Omega), pts),
                                  tol.pipeline));

    // With i(dt+v)(Omega) = +dphi the invariance function of theta is p - v^2/2.
    const Expr chi = p - half_v2;
    const Form inv = lie_derivative(X, e.theta) - ext_d(Form::scalar(chi));
    e.checks.push_back(make_check("euler.relative-invariance",
                                  "L_{dt+v}(theta) = d(p - v^2/2)", residual(inv, pts),
                                  tol.pipeline));
    const Form inv3 = lie_derivative(X, wedge(e.theta, e.Omega)) - ext_d(chi * e.Omega);
    e.checks.push_back(make_check("euler.three-form-invariance",
                                  "L_{dt+v}(theta^Omega) = d(chi Omega)", residual(inv3, pts),
                                  tol.pipeline));
    return e;
}

// ---- helicity quadrature -----------------------------------------------------

// Midpoint-rule quadrature of v . curl(v) over [0,2pi)^3 at t = 0.
inline double helicity_integral(const VectorField& v, int resolution) {
    if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
    const Expr integrand = dot3(v, curl3(v));
    const double L = 6.283185307179586;
    const double h = L / resolution;
    double sum = 0;
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j)
            for (int k = 0; k < resolution; ++k) {
                const Point4 p{0.0, (i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h};
                sum += eval(integrand, p);
            }
    return sum * h * h * h;
}

}  // namespace helis
