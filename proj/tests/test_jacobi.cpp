#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <helis/harness.hpp>

#include "oracle.hpp"

using namespace helis;

namespace {

bool all_pass(const std::vector<CheckRecord>& cs) {
    for (const auto& c : cs) {
        INFO(c.id, " max=", c.max, " tol=", c.tol);
        if (!c.pass) return false;
    }
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

Multivector random_bivector(Rng& rng) {
    Multivector L(2);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (rng.uniform() < 0.8)
                L.set(static_cast<Mask>((1u << i) | (1u << j)),
                      helis::detail::random_scalar(rng));
    return L;
}

}  // namespace

TEST_CASE("extension k=0 with the base Hamiltonian reproduces Omega") {
    const auto P = make("rotation", 2);
    const auto e = extend_symplectic(P.s, P.sym, P.H, 0, P.s.phi);
    CHECK(all_pass(e.checks));
    CHECK(residual(e.Omega - P.sym.Omega, e.retained).max <= 1e-15);
    // W_0 . n_0 = rho^{-1} B(phi) = 1 here
    CHECK(residual(e.wn - Expr(1.0), e.retained).max <= 1e-15);
}

TEST_CASE("extension validity and error paths on rotation") {
    const auto P = make("rotation", 2);

    // the azimuthal Hamiltonian gives a non-degenerate k=1 extension
    const Expr az = parse_expr("x*cos(t) + y*sin(t) + 10");
    const auto e1 = extend_symplectic(P.s, P.sym, P.H, 1, az);
    CHECK(all_pass(e1.checks));
    CHECK(e1.theta_tilde.has_value());
    CHECK_FALSE(e1.retained.empty());

    // phi_k = h_k violates independence: W_k(h_k) = 0 by construction
    CHECK_THROWS_WITH_AS(extend_symplectic(P.s, P.sym, P.H, 1, P.s.h1),
                         "degenerate extension: |W_k . n_k| below floor everywhere",
                         std::runtime_error);
    // exp(z) is conserved but lies in the kernel of W_1 as well
    CHECK_THROWS_AS(extend_symplectic(P.s, P.sym, P.H, 1, parse_expr("exp(z)")),
                    std::runtime_error);
    // non-conserved Hamiltonians are rejected
    CHECK_THROWS_AS(extend_symplectic(P.s, P.sym, P.H, 1, Expr(Var::x)), std::runtime_error);

    // conservation identity against both extensions
    const auto e0 = extend_symplectic(P.s, P.sym, P.H, 0, parse_expr("exp(z)"));
    CHECK(all_pass(e0.checks));
    CHECK(extension_identity(P.s, e1, e0).pass);
    CHECK(extension_identity(P.s, e1, e1).pass);
}

TEST_CASE("bivector inversion: numeric cross-validation and duality") {
    const auto P = make("rotation", 2);
    const auto e0 = extend_symplectic(P.s, P.sym, P.H, 0, P.s.phi);
    const auto d0 = invert_to_bivector(P.s, e0);
    CHECK(all_pass(d0.checks));
    // P(dphi) = dt + v, exactly the Hamiltonian relation turned around
    const VectorField dual = contract(d0.P, ext_d(Form::scalar(P.s.phi)));
    CHECK(residual(dual - P.s.suspended(), e0.retained).max <= 1e-12);

    const Expr az = parse_expr("x*cos(t) + y*sin(t) + 10");
    const auto e1 = extend_symplectic(P.s, P.sym, P.H, 1, az);
    CHECK(all_pass(invert_to_bivector(P.s, e1).checks));
}

TEST_CASE("numeric 4x4 inversion on the constant shear-like two-form") {
    // Omega = dy^dz + dz^dx - dy^dt
    Form omega(2);
    omega.set(0b1100, Expr(1.0));
    omega.set(0b1010, Expr(-1.0));
    omega.set(0b0101, Expr(1.0));  // -dy^dt = +dt^dy
    const Point4 p{0, 1, 2, 3};
    const Mat4 m = form_matrix(omega, p);
    const Mat4 inv = invert4(m, p);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double acc = 0;
            for (int l = 0; l < 4; ++l) acc += m[i][l] * inv[l][j];
            CHECK(acc == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
    // the inverse of an antisymmetric matrix is antisymmetric
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(inv[i][j] == doctest::Approx(-inv[j][i]));

    Form degenerate(2);
    degenerate.set(0b0110, Expr(1.0));
    CHECK_THROWS_AS(invert4(form_matrix(degenerate, p), p), EvalError);
}

TEST_CASE("conformal pairs: exp(z) scaling of the base form") {
    const auto P = make("rotation", 2);
    const auto e0 = extend_symplectic(P.s, P.sym, P.H, 0, parse_expr("exp(z)"));
    const auto c = conformal_pair(P.s, e0, e0);
    CHECK(all_pass(c.checks));
    // alpha = d log(exp z) = dz
    CHECK(residual(c.alpha - ext_d(Form::scalar(Expr(Var::z))), c.retained).max <= 1e-12);
    CHECK(residual(ext_d(c.alpha), c.retained).max == 0.0);

    // constant Hamiltonians are rejected
    auto ebad = e0;
    ebad.phi_k = Expr(2.0);
    CHECK_THROWS_WITH_AS(conformal_pair(P.s, ebad, e0), "constant extension Hamiltonian",
                         std::runtime_error);
}

TEST_CASE("conformal pair applies a positivity shift when needed") {
    const auto P = make("rotation", 2);
    const auto e0 = extend_symplectic(P.s, P.sym, P.H, 0, parse_expr("z - 10"));
    const auto c = conformal_pair(P.s, e0, e0);
    CHECK(c.shift > 0);
    bool noted = false;
    for (const auto& rec : c.checks) noted |= rec.id.rfind("conformal.shift", 0) == 0;
    CHECK(noted);
    CHECK(all_pass(c.checks));
}

TEST_CASE("schouten bracket: constants, single-term bivector, FD oracle") {
    Multivector constant(2);
    constant.set(0b0110, Expr(3.0));
    constant.set(0b1001, Expr(-2.0));
    CHECK(schouten_bracket(constant, constant).components().empty());

    // x d/dy ^ d/dz pairs the derivative direction with a vanishing column
    Multivector single(2);
    single.set(0b1100, Expr(Var::x));
    CHECK(schouten_bracket(single, single).components().empty());

    Rng rng(4242);
    std::vector<Point4> pts;
    for (int i = 0; i < 3; ++i)
        pts.push_back({rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.uniform(0.5, 2),
                       rng.uniform(0.5, 2)});
    for (int trial = 0; trial < 10; ++trial) {
        const Multivector A = random_bivector(rng);
        const Multivector B = random_bivector(rng);
        const Multivector bracket = schouten_bracket(A, B);
        // symmetric in its arguments for a pair of bivectors
        const Multivector flipped = schouten_bracket(B, A);
        CHECK(residual(bracket - flipped, pts).max <= 1e-12);
        for (const Point4& p : pts)
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    for (int k = j + 1; k < 4; ++k) {
                        const Mask m = static_cast<Mask>((1u << i) | (1u << j) | (1u << k));
                        const double sym = eval(bracket.component(m), p);
                        const double fd = oracle::fd_schouten(A, B, i, j, k, p);
                        CHECK(std::fabs(sym - fd) <= 2e-4 * (1 + std::fabs(sym)));
                    }
    }
}

TEST_CASE("jacobi pair (1,0) on rotation: Schouten conditions and bracket") {
    const auto P = make("rotation", 2);
    const auto e0 = extend_symplectic(P.s, P.sym, P.H, 0, parse_expr("exp(z)"));
    const auto e1 = extend_symplectic(P.s, P.sym, P.H, 1,
                                      parse_expr("x*cos(t) + y*sin(t) + 10"));
    const auto d0 = invert_to_bivector(P.s, e0);
    const auto jp = jacobi_pair(P.s, e1, e0, d0);
    CHECK(all_pass(jp.checks));

    // E is the bracket image of the constant function 1
    Rng rng(77);
    std::vector<Point4> pts(jp.retained.begin(),
                            jp.retained.begin() + std::min<std::size_t>(jp.retained.size(), 64));
    for (int trial = 0; trial < 4; ++trial) {
        const Expr f = helis::detail::random_scalar(rng);
        const Expr g = helis::detail::random_scalar(rng);
        CHECK(residual(jacobi_bracket(f, f, jp), pts).max <= 1e-10);
        CHECK(residual(jacobi_bracket(f, g, jp) + jacobi_bracket(g, f, jp), pts).max <= 1e-10);
        // {1,g} = E(g): generally nonzero, the hallmark of a Jacobi bracket
        CHECK(residual(jacobi_bracket(Expr(1.0), g, jp) - jp.E.apply(g), pts).max <= 1e-10);
        // Jacobi identity
        const Expr h = helis::detail::random_scalar(rng);
        const Expr cyc = jacobi_bracket(f, jacobi_bracket(g, h, jp), jp) +
                         jacobi_bracket(h, jacobi_bracket(f, g, jp), jp) +
                         jacobi_bracket(g, jacobi_bracket(h, f, jp), jp);
        CHECK(residual(cyc, pts).max <= 1e-9);
        // Leibniz defect equals the E term
        const Expr defect = jacobi_bracket(f, g * h, jp) - g * jacobi_bracket(f, h, jp) -
                            h * jacobi_bracket(f, g, jp) - g * h * jp.E.apply(f);
        CHECK(residual(defect, pts).max <= 1e-9);
    }
    // the bracket of constants is not zero in general
    CHECK(residual(jp.E, pts).max > 1e-3);

    // Hamiltonian vector fields
    CHECK(residual(hamiltonian_vector_field(jp.phi, jp), pts).max <= 1e-10);
    const VectorField vf1 = hamiltonian_vector_field(Expr(1.0), jp);
    CHECK(residual(vf1 - jp.E, pts).max <= 1e-12);
    for (int trial = 0; trial < 10; ++trial) {
        const Expr f = helis::detail::random_scalar(rng);
        CHECK(hamiltonian_equivalence_residual(f, jp).max <= 1e-9);
    }
}

TEST_CASE("jacobi pair reduces to Poisson when the scaling is trivial") {
    // [P, P] = 0 for the bivector of a symplectic form: the Poisson case
    const auto P = make("rotation", 2);
    const auto e0 = extend_symplectic(P.s, P.sym, P.H, 0, P.s.phi);
    const auto d0 = invert_to_bivector(P.s, e0);
    CHECK(residual(schouten_bracket(d0.P, d0.P), e0.retained).max <= 1e-9);
}

TEST_CASE("covariant and contravariant Jacobi conditions fail together") {
    // a hand-made pair violating the Jacobi conditions: both the Schouten
    // residual and the bracket Jacobiator must be materially nonzero
    Multivector L(2);
    L.set(0b0011, Expr(Var::z));  // z d/dt ^ d/dx
    L.set(0b1100, Expr(1.0));     // d/dy ^ d/dz
    JacobiPair fake;
    fake.phi = Expr(1.0);
    fake.P_l = L;
    fake.Lambda = L;
    fake.E = VectorField();  // E = 0
    SampleGrid g;
    g.n_spatial = 4;
    fake.retained = g.points();

    const Multivector schouten = schouten_bracket(L, L);
    CHECK(residual(schouten, fake.retained).max > 0.5);  // 2 E ^ Lambda = 0

    const Expr cyc = jacobi_bracket(Expr(Var::t), jacobi_bracket(Expr(Var::x), Expr(Var::y), fake), fake) +
                     jacobi_bracket(Expr(Var::y), jacobi_bracket(Expr(Var::t), Expr(Var::x), fake), fake) +
                     jacobi_bracket(Expr(Var::x), jacobi_bracket(Expr(Var::y), Expr(Var::t), fake), fake);
    CHECK(residual(cyc, fake.retained).max > 0.5);
}

TEST_CASE("canonical one-form has the invariance class of its potential") {
    const auto P = make("rotation", 2);
    const auto e1 = extend_symplectic(P.s, P.sym, P.H, 1,
                                      parse_expr("x*cos(t) + y*sin(t) + 10"));
    REQUIRE(e1.theta_tilde.has_value());
    // ungauged representative: both Lie derivatives vanish, so their
    // difference does as well
    const Form theta_rep = P.s.phi * ext_d(Form::scalar(P.H.h[0]));
    const Form lt = lie_derivative(P.s.suspended(), *e1.theta_tilde);
    const Form lr = lie_derivative(P.s.suspended(), theta_rep);
    CHECK(residual(lt - lr, e1.retained).max <= 1e-10);
    CHECK(residual(lt, e1.retained).max <= 1e-10);

    // level-set degeneration for the (1,0) pair: W_0 is tangent to the level
    // sets of phi_1, so the tilde-density is Lagrangian-conserved and the
    // conformal term along W_0 vanishes
    const auto e0 = extend_symplectic(P.s, P.sym, P.H, 0, parse_expr("exp(z)"));
    const Form three = wedge(*e1.theta_tilde, e0.Omega);
    const Expr density = three.component(0b1110);
    CHECK(residual(e0.W.apply(e1.phi_k), e1.retained).max <= 1e-12);  // tangency
    CHECK(residual(time_derivative(density) + P.s.v.apply(density), e1.retained).max <= 1e-8);
    const Expr alpha_along = e0.W.apply(e1.phi_k) / e1.phi_k;
    CHECK(residual(alpha_along, e1.retained).max <= 1e-8);
}

TEST_CASE("schouten-vector is the Lie derivative of the bivector") {
    Rng rng(515);
    std::vector<Point4> pts;
    for (int i = 0; i < 4; ++i)
        pts.push_back({rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.uniform(0.5, 2),
                       rng.uniform(0.5, 2)});
    // [Lambda, E] vanishes when E generates a symmetry of Lambda
    Multivector L(2);
    L.set(0b0110, Expr(Var::z));  // z d/dx ^ d/dy
    CHECK(residual(schouten_vector(L, VectorField::basis(Var::x)), pts).max == 0.0);
    // and not otherwise
    CHECK(residual(schouten_vector(L, VectorField::basis(Var::z)), pts).max ==
          doctest::Approx(1.0));
}
