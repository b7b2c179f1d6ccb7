#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <helis/harness.hpp>

#include "oracle.hpp"

using namespace helis;

namespace {

bool all_pass(const std::vector<CheckRecord>& cs) {
    for (const auto& c : cs)
        if (!c.pass) return false;
    return true;
}

struct Pipeline {
    FlowScenario s;
    SymplecticData sym;
    Hierarchy H;
};

Pipeline make(const std::string& name, int depth) {
    FlowScenario s = catalog_scenario(name);
    SymplecticData sym = build_symplectic(s);
    Hierarchy H = build_hierarchy(s, depth);
    return {std::move(s), std::move(sym), std::move(H)};
}

}  // namespace

TEST_CASE("invariant two-forms: shear Theta_1 = dy^dz") {
    const auto P = make("shear", 2);
    const auto pts = P.s.retained_points();
    const auto itf = invariant_two_form(P.s, P.sym, P.H, 1);
    CHECK(all_pass(itf.checks));
    Form expected(2);
    expected.set(0b1100, Expr(1.0));
    CHECK(residual(itf.Theta - expected, pts).max <= 1e-15);
    // Theta_1 ^ Theta_1 = 0
    CHECK(residual(wedge(itf.Theta, itf.Theta), pts).max == 0.0);
    // the k = 0 form reproduces the spatial part of Omega
    const auto itf0 = invariant_two_form(P.s, P.sym, P.H, 0);
    CHECK(all_pass(itf0.checks));
    CHECK(residual(itf0.omega_k - P.sym.omega, pts).max <= 1e-15);
}

TEST_CASE("invariant two-forms: rotation Theta_2 = dz^d(x^2+y^2), invariant") {
    const auto P = make("rotation", 2);
    const auto pts = P.s.retained_points();
    const auto itf = invariant_two_form(P.s, P.sym, P.H, 2);
    CHECK(all_pass(itf.checks));
    const Form expected = wedge(ext_d(Form::scalar(Expr(Var::z))),
                                ext_d(Form::scalar(parse_expr("x^2 + y^2"))));
    CHECK(residual(itf.Theta - expected, pts).max <= 1e-12);
    CHECK(residual(lie_derivative(P.s.suspended(), itf.Theta), pts).max <= 1e-12);

    const auto itf1 = invariant_two_form(P.s, P.sym, P.H, 1);
    CHECK(residual(wedge(itf1.Theta, itf.Theta), pts).max <= 1e-12);
    CHECK(degeneracy_check(P.s, itf1, itf).pass);
}

TEST_CASE("potential one-forms: canonical solutions for shear") {
    const auto P = make("shear", 2);
    const auto pts = P.s.retained_points();
    const auto itf = invariant_two_form(P.s, P.sym, P.H, 1);

    const auto plus = potential_one_form(P.s, P.H, 1, Orientation::plus, itf);
    CHECK(all_pass(plus.checks));
    // theta_1^+ = y dz, psi^+ = 0, A^+ = -y dz
    Form expected(1);
    expected.set(0b1000, Expr(Var::y));
    CHECK(residual(plus.theta - expected, pts).max <= 1e-15);
    CHECK(residual(plus.psi, pts).max == 0.0);
    CHECK(residual(plus.A.component(0b1000) + Expr(Var::y), pts).max <= 1e-15);
    // d(theta^+) = Theta_1 with the resolved orientation
    CHECK(residual(ext_d(plus.theta) - itf.Theta, pts).max <= 1e-15);

    const auto minus = potential_one_form(P.s, P.H, 1, Orientation::minus, itf);
    CHECK(all_pass(minus.checks));
    Form expected_m(1);
    expected_m.set(0b0100, -Expr(Var::z));
    CHECK(residual(minus.theta - expected_m, pts).max <= 1e-15);
    // minus orientation annihilates every Theta_l
    for (int l = 1; l <= 2; ++l) {
        const auto itfl = invariant_two_form(P.s, P.sym, P.H, l);
        CHECK(residual(wedge(minus.theta, itfl.Theta), pts).max <= 1e-12);
    }
}

TEST_CASE("gauge transforms: classification and re-extraction") {
    const auto P = make("shear", 2);
    const auto pts = P.s.retained_points();
    const auto itf = invariant_two_form(P.s, P.sym, P.H, 1);
    const auto base = potential_one_form(P.s, P.H, 1, Orientation::plus, itf);

    // lambda = y is conserved: chi = 0, absolute class
    const auto cons = gauge_transform(base, Expr(Var::y), P.s);
    CHECK(cons.absolute);
    CHECK(residual(cons.chi, pts).max == 0.0);
    CHECK(all_pass(cons.checks));

    // lambda = x: chi = sin z, relative class
    const auto rel = gauge_transform(base, Expr(Var::x), P.s);
    CHECK_FALSE(rel.absolute);
    CHECK(residual(rel.chi - sin(Expr(Var::z)), pts).max <= 1e-15);
    CHECK(all_pass(rel.checks));
    // L_{dt+v}(theta_g) = d chi = cos z dz: materially nonzero
    CHECK(residual(lie_derivative(P.s.suspended(), rel.theta), pts).max ==
          doctest::Approx(1.0));

    // identity transform
    const auto ident = gauge_transform(base, Expr(0.0), P.s);
    CHECK(ident.absolute);
    CHECK(residual(ident.theta - base.theta, pts).max == 0.0);

    // a gauge with chi constant-but-nonzero is still absolute class
    // (elements of the kernel are identified modulo additive linear-in-t terms)
    const auto lin = gauge_transform(base, Expr(Var::t), P.s);
    CHECK(residual(lin.chi - Expr(1.0), pts).max == 0.0);
    CHECK(lin.absolute);
}

TEST_CASE("helicity densities: ungauged rotation values and conservation") {
    const auto P = make("rotation", 2);
    const auto pts = P.s.retained_points();
    const auto itf1 = invariant_two_form(P.s, P.sym, P.H, 1);
    const auto itf2 = invariant_two_form(P.s, P.sym, P.H, 2);
    const auto pot1 = potential_one_form(P.s, P.H, 1, Orientation::plus, itf1);

    // theta_1^+ ^ Theta_2 = phi dh_1 ^ dphi ^ dh_2: the ungauged (1,2)
    // density vanishes identically for this flow
    const auto hd = helicity_three_form(pot1, itf2, P.s);
    CHECK(all_pass(hd.checks));
    CHECK(residual(hd.density, pts).max <= 1e-12);
    const Form shape = wedge(Expr(Var::z) * ext_d(Form::scalar(P.H.h[0])),
                             wedge(ext_d(Form::scalar(P.s.phi)), ext_d(Form::scalar(P.H.h[1]))));
    CHECK(residual(hd.three - shape, pts).max <= 1e-12);
    CHECK(lagrangian_residual(hd, P.s).max <= 1e-9);
    CHECK(eulerian_residual(hd, P.s).max <= 1e-9);
}

TEST_CASE("gauged densities: the Lagrangian/Eulerian dichotomy on rotation") {
    const auto P = make("rotation", 2);
    const auto pts = P.s.retained_points();
    const auto itf1 = invariant_two_form(P.s, P.sym, P.H, 1);
    const auto pot1 = potential_one_form(P.s, P.H, 1, Orientation::plus, itf1);
    const auto gauged = gauge_transform(pot1, Expr(Var::x), P.s);
    CHECK_FALSE(gauged.absolute);  // chi = v(x) = -y

    const auto hd = helicity_three_form(gauged, itf1, P.s);
    CHECK(all_pass(hd.checks));
    // H_11 = rho(W_1(x) - A_1.W_1) = 2yz
    CHECK(residual(hd.density - parse_expr("2*y*z"), pts).max <= 1e-10);

    // Lagrangian residual = |rho W_1(chi)| = |2xz| > 0.1 somewhere; the
    // Eulerian divergence law still holds to roundoff.
    const auto lag = lagrangian_residual(hd, P.s);
    CHECK(lag.max > 0.1);
    CHECK(eulerian_residual(hd, P.s).max <= 1e-9);
    CHECK(advective_identity_residual(hd, P.s).max <= 1e-9);
}

TEST_CASE("gauged densities: tangency on shear keeps both laws Lagrangian") {
    const auto P = make("shear", 2);
    const auto pts = P.s.retained_points();
    const auto itf1 = invariant_two_form(P.s, P.sym, P.H, 1);
    const auto pot1 = potential_one_form(P.s, P.H, 1, Orientation::plus, itf1);
    const auto gauged = gauge_transform(pot1, Expr(Var::x), P.s);
    CHECK_FALSE(gauged.absolute);  // chi = sin z

    const auto hd = helicity_three_form(gauged, itf1, P.s);
    CHECK(all_pass(hd.checks));
    // W_1 = -d/dx is tangent to the level sets of chi = sin z, so the
    // gauged density W_1(x) = -1 is itself Lagrangian-conserved.
    CHECK(residual(P.s.rho() * hd.W_l.apply(hd.chi), pts).max <= 1e-15);
    CHECK(lagrangian_residual(hd, P.s).max <= 1e-12);
    CHECK(eulerian_residual(hd, P.s).max <= 1e-12);
    const Expr wl = hd.W_l.apply(gauged.lambda);
    CHECK(residual(time_derivative(wl) + P.s.v.apply(wl), pts).max <= 1e-12);
}

TEST_CASE("gauge dichotomy property: 10 random gauges on rotation") {
    const auto P = make("rotation", 2);
    const auto pts = P.s.retained_points();
    const auto itf1 = invariant_two_form(P.s, P.sym, P.H, 1);
    const auto pot1 = potential_one_form(P.s, P.H, 1, Orientation::plus, itf1);

    Rng rng(900913);
    for (int trial = 0; trial < 10; ++trial) {
        const Expr lambda = helis::detail::random_scalar(rng);
        const auto g = gauge_transform(pot1, lambda, P.s);
        CHECK(all_pass(g.checks));
        for (int l = 1; l <= 2; ++l) {
            const auto itf = invariant_two_form(P.s, P.sym, P.H, l);
            const auto hd = helicity_three_form(g, itf, P.s);
            CHECK(all_pass(hd.checks));
            // the Eulerian balance holds for every gauge
            CHECK(eulerian_residual(hd, P.s).max <= 1e-9);
            CHECK(advective_identity_residual(hd, P.s).max <= 1e-9);
            // Lagrangian conservation holds exactly when the advective
            // source rho W_l(chi) vanishes; absolute class implies it
            const double source = residual(P.s.rho() * hd.W_l.apply(hd.chi), pts).max;
            const double lag = lagrangian_residual(hd, P.s).max;
            CHECK((source <= 1e-9) == (lag <= 1e-9));
            if (g.absolute) CHECK(lag <= 1e-9);
        }
    }
}

TEST_CASE("sigma forms: L_{W_k}(Omega)") {
    const auto shear = make("shear", 2);
    const auto s1 = sigma_form(shear.s, shear.sym, shear.H, 1);
    CHECK(all_pass(s1.checks));
    CHECK(residual(s1.Sigma, shear.s.retained_points()).max <= 1e-12);  // xi_1 = 0

    const auto rot = make("rotation", 2);
    const auto pts = rot.s.retained_points();
    const auto r1 = sigma_form(rot.s, rot.sym, rot.H, 1);
    CHECK(all_pass(r1.checks));
    const Form expected = wedge(ext_d(Form::scalar(Expr(Var::z))),
                                ext_d(Form::scalar(parse_expr("x^2 + y^2"))));
    CHECK(residual(r1.Sigma - expected, pts).max <= 1e-12);
    CHECK(residual(ext_d(r1.Sigma), pts).max <= 1e-12);
}
