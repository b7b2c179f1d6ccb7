#pragma once

// Invariant two-forms Theta_k attached to each relabelling symmetry, their
// potential one-forms with gauge classification, and the helicity densities
// whose Lagrangian / Eulerian conservation laws encode the kinematical
// distinction between absolute and relative invariants.

#include <cmath>
#include <string>
#include <vector>

#include "fluid.hpp"

namespace helis {

struct InvariantTwoForm {
    int k = 0;
    Form Theta{2};    // omega_k + i(v)(omega_k) ^ dt
    Form omega_k{2};  // -i(W_k)(mu_M)
    VectorField W;    // the generating symmetry (u0 for k = 0)
    std::vector<CheckRecord> checks;
};

inline const VectorField& hierarchy_field(const Hierarchy& H, int k) {
    if (k == 0) return H.u0;
    return H.W.at(static_cast<std::size_t>(k) - 1);
}

// Builds Theta_k three ways (interior-product route, Clebsch route dphi^dh_k,
// componentwise route) and verifies mutual agreement, closure and invariance.
inline InvariantTwoForm invariant_two_form(const FlowScenario& s, const SymplecticData& sym,
                                           const Hierarchy& H, int k,
                                           const Tolerances& tol = {}) {
    InvariantTwoForm f;
    f.k = k;
    f.W = hierarchy_field(H, k);
    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    const std::string K = std::to_string(k);

    f.omega_k = -interior(f.W, sym.mu_M);
    f.Theta = f.omega_k + wedge(interior(s.v, f.omega_k), dt_form());

    // Componentwise route: -rho [W.(dx^dx) + (W x v).dx ^ dt]
    const Form direct = -(s.rho() * (vec_to_2form(f.W) + wedge(flat(cross3(f.W, s.v)), dt_form())));
    f.checks.push_back(make_check("theta.componentwise." + K,
                                  "Theta_" + K + " = -rho[W.(dx^dx) + (Wxv).dx^dt]",
                                  residual(f.Theta - direct, pts), tol.structural, excluded));

    if (k >= 1) {
        const int s_theta = -H.sign;
        Form clebsch = wedge(ext_d(Form::scalar(s.phi)), ext_d(Form::scalar(H.h[k - 1])));
        if (s_theta < 0) clebsch = -clebsch;
        f.checks.push_back(make_check("theta.clebsch-route." + K,
                                      "Theta_" + K + " = s dphi^dh_" + K,
                                      residual(f.Theta - clebsch, pts), tol.structural, excluded));
    }

    f.checks.push_back(make_check("theta.closed." + K, "d(Theta_" + K + ") = 0",
                                  residual(ext_d(f.Theta), pts), tol.structural, excluded));
    f.checks.push_back(make_check("theta.invariant." + K, "L_{dt+v}(Theta_" + K + ") = 0",
                                  residual(lie_derivative(s.suspended(), f.Theta), pts),
                                  tol.pipeline, excluded));
    f.checks.push_back(make_check("theta.annihilates." + K, "i(dt+v)(Theta_" + K + ") = 0",
                                  residual(interior(s.suspended(), f.Theta), pts),
                                  tol.structural, excluded));
    return f;
}

inline CheckRecord degeneracy_check(const FlowScenario& s, const InvariantTwoForm& a,
                                    const InvariantTwoForm& b, const Tolerances& tol = {}) {
    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    const std::string KL = std::to_string(a.k) + std::to_string(b.k);
    return make_check("theta.degenerate." + KL,
                      "Theta_" + std::to_string(a.k) + " ^ Theta_" + std::to_string(b.k) + " = 0",
                      residual(wedge(a.Theta, b.Theta), pts), tol.structural, excluded);
}

enum class Orientation { plus, minus };

struct PotentialOneForm {
    int k = 1;
    Orientation orientation = Orientation::plus;
    Form theta{1};
    Expr psi;     // -theta_t
    Form A{1};    // -(spatial part of theta)
    Expr lambda;  // gauge function (zero for the canonical representative)
    Expr chi;     // lambda_t + v(lambda)
    bool absolute = true;
    std::vector<CheckRecord> checks;
};

// The two canonical solutions theta_k^- = -h_k dphi and theta_k^+ = phi dh_k
// connected with the Clebsch representations.
inline PotentialOneForm potential_one_form(const FlowScenario& s, const Hierarchy& H, int k,
                                           Orientation orient, const InvariantTwoForm& itf,
                                           const Tolerances& tol = {}) {
    PotentialOneForm p;
    p.k = k;
    p.orientation = orient;
    const Expr& hk = H.h.at(static_cast<std::size_t>(k) - 1);
    if (orient == Orientation::plus)
        p.theta = s.phi * ext_d(Form::scalar(hk));
    else
        p.theta = -(hk * ext_d(Form::scalar(s.phi)));
    p.psi = -p.theta.component(0b0001);
    for (int i = 1; i < 4; ++i) {
        const Mask m = static_cast<Mask>(1u << i);
        p.A.set(m, -p.theta.component(m));
    }
    p.lambda = Expr(0.0);
    p.chi = Expr(0.0);
    p.absolute = true;

    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    const std::string tag = std::to_string(k) + (orient == Orientation::plus ? "+" : "-");
    const int s_theta = -H.sign;
    Form th = itf.Theta;
    if (s_theta < 0) th = -th;
    p.checks.push_back(make_check("potential.exact." + tag, "d(theta_" + tag + ") = s Theta_k",
                                  residual(ext_d(p.theta) - th, pts), tol.structural, excluded));
    p.checks.push_back(make_check("potential.annihilated." + tag,
                                  "i(dt+v)(theta_" + tag + ") = 0",
                                  residual(interior(s.suspended(), p.theta), pts),
                                  tol.structural, excluded));
    return p;
}

// Numeric classification: absolute iff chi is constant over the grid after
// quotienting additive terms linear in t (grid mean subtraction).
inline bool classify_absolute(const Expr& chi, const std::vector<Point4>& pts, double tol) {
    if (pts.empty()) return true;
    double mean = 0;
    std::vector<double> vals;
    vals.reserve(pts.size());
    for (const Point4& p : pts) {
        vals.push_back(eval(chi, p));
        mean += vals.back();
    }
    mean /= static_cast<double>(pts.size());
    double dev = 0;
    for (double v : vals) dev = std::max(dev, std::fabs(v - mean));
    return dev <= tol;
}

inline PotentialOneForm gauge_transform(const PotentialOneForm& base, const Expr& lambda,
                                        const FlowScenario& s, const Tolerances& tol = {}) {
    PotentialOneForm g = base;
    g.checks.clear();
    g.theta = base.theta + ext_d(Form::scalar(lambda));
    g.lambda = base.lambda + lambda;
    g.chi = time_derivative(g.lambda) + s.v.apply(g.lambda);

    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    g.absolute = classify_absolute(g.chi, pts, tol.pipeline);

    const std::string tag = std::to_string(g.k);
    const Form inv = lie_derivative(s.suspended(), g.theta) - ext_d(Form::scalar(g.chi));
    g.checks.push_back(make_check("gauge.relative-invariance." + tag,
                                  "L_{dt+v}(theta + dlambda) = d(chi)", residual(inv, pts),
                                  tol.pipeline, excluded));
    // Re-extraction: chi is recovered from the gauged form alone.
    const Expr re = interior(s.suspended(), g.theta).component(0);
    g.checks.push_back(make_check("gauge.reextraction." + tag, "i(dt+v)(theta_g) = chi",
                                  residual(re - g.chi, pts), tol.structural, excluded));
    return g;
}

struct HelicityDensity {
    int k = 1, l = 1;
    Expr density;   // rho (W_l(lambda) - A_k . W_l)
    Form three{3};  // theta_k ^ Theta_l
    Expr chi;
    VectorField W_l;
    bool absolute = true;
    std::vector<CheckRecord> checks;
};

inline Expr form1_dot_vector(const Form& a, const VectorField& X) {
    Expr acc(0.0);
    for (int i = 1; i < 4; ++i) acc += a.component(static_cast<Mask>(1u << i)) * X[i];
    return acc;
}

inline HelicityDensity helicity_three_form(const PotentialOneForm& pot,
                                           const InvariantTwoForm& itf, const FlowScenario& s,
                                           const Tolerances& tol = {}) {
    HelicityDensity h;
    h.k = pot.k;
    h.l = itf.k;
    h.W_l = itf.W;
    h.chi = pot.chi;
    h.absolute = pot.absolute;
    h.three = wedge(pot.theta, itf.Theta);
    const Expr a_dot_W = h.W_l.apply(pot.lambda) - form1_dot_vector(pot.A, h.W_l);
    h.density = s.rho() * a_dot_W;

    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    const std::string KL = std::to_string(h.k) + std::to_string(h.l);
    h.checks.push_back(make_check("helicity.density." + KL,
                                  "H_" + KL + " = rho(W_l(lambda) - A_k.W_l) = -[theta^Theta]_xyz",
                                  residual(h.density + h.three.component(0b1110), pts),
                                  tol.structural, excluded));
    h.checks.push_back(make_check("helicity.closed." + KL, "d(theta_k ^ Theta_l) = 0",
                                  residual(ext_d(h.three), pts), tol.structural, excluded));

    // Full componentwise shape of the three-form.
    const Expr c0 = pot.theta.component(0b0001);
    const VectorField a_vec = VectorField::spatial(pot.theta.component(0b0010),
                                                   pot.theta.component(0b0100),
                                                   pot.theta.component(0b1000));
    const Expr a_dot_v = dot3(a_vec, s.v);
    const VectorField flux = c0 * h.W_l + a_dot_v * h.W_l - a_dot_W * s.v;
    const Form expected = -(s.rho() * a_dot_W * volume3()) -
                          wedge(vec_to_2form(s.rho() * flux), dt_form());
    h.checks.push_back(make_check("helicity.shape." + KL,
                                  "theta^Theta = -rho[(a.W)dV + (c0 W + (a.v)W - (a.W)v).dx^dx^dt]",
                                  residual(h.three - expected, pts), tol.structural, excluded));
    return h;
}

inline Residual lagrangian_residual(const HelicityDensity& h, const FlowScenario& s) {
    const auto pts = s.retained_points();
    const Expr r = time_derivative(h.density) + s.v.apply(h.density);
    return residual(r, pts);
}

// Divergence-form balance dH/dt + div(H v - rho chi W_l) = 0.
inline Residual eulerian_residual(const HelicityDensity& h, const FlowScenario& s) {
    const auto pts = s.retained_points();
    const VectorField flux = h.density * s.v - (s.rho() * h.chi) * h.W_l;
    const Expr r = time_derivative(h.density) + div3(flux);
    return residual(r, pts);
}

// Advective form: dH/dt + v(H) = rho W_l(chi).
inline Residual advective_identity_residual(const HelicityDensity& h, const FlowScenario& s) {
    const auto pts = s.retained_points();
    const Expr r = time_derivative(h.density) + s.v.apply(h.density) -
                   s.rho() * h.W_l.apply(h.chi);
    return residual(r, pts);
}

struct SigmaForm {
    int k = 1;
    Form Sigma{2};
    std::vector<CheckRecord> checks;
};

// Sigma_k = L_{W_k}(Omega) = s dphi ^ dxi_k: the base two-form is a relative
// invariant for every relabelling symmetry.
inline SigmaForm sigma_form(const FlowScenario& s, const SymplecticData& sym, const Hierarchy& H,
                            int k, const Tolerances& tol = {}) {
    SigmaForm out;
    out.k = k;
    const VectorField& W = hierarchy_field(H, k);
    out.Sigma = lie_derivative(W, sym.Omega);
    long excluded = 0;
    const auto pts = s.retained_points(&excluded);
    const std::string K = std::to_string(k);

    const int s_theta = -H.sign;
    Form target = wedge(ext_d(Form::scalar(s.phi)),
                        ext_d(Form::scalar(H.xi.at(static_cast<std::size_t>(k) - 1))));
    if (s_theta < 0) target = -target;
    out.checks.push_back(make_check("sigma.formula." + K, "L_{W_" + K + "}(Omega) = s dphi^dxi_" + K,
                                    residual(out.Sigma - target, pts), tol.pipeline, excluded));
    out.checks.push_back(make_check("sigma.closed." + K, "d(Sigma_" + K + ") = 0",
                                    residual(ext_d(out.Sigma), pts), tol.structural, excluded));
    out.checks.push_back(make_check("sigma.invariant." + K, "L_{dt+v}(Sigma_" + K + ") = 0",
                                    residual(lie_derivative(s.suspended(), out.Sigma), pts),
                                    tol.pipeline, excluded));
    // Exactness: Sigma_k = d(i(W_k)(Omega)) because Omega is closed.
    out.checks.push_back(make_check("sigma.exact." + K, "Sigma_" + K + " = d i(W_" + K + ")(Omega)",
                                    residual(out.Sigma - ext_d(interior(W, sym.Omega)), pts),
                                    tol.structural, excluded));
    return out;
}

}  // namespace helis
