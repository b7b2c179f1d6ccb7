#pragma once

// Extensions of the invariant two-forms to symplectic forms Omega_k on
// time-extended space, their bivector duals, conformally symplectic pairs
// (Omega_kl, alpha_k) and the contravariant Jacobi pairs (Lambda, E) with the
// local Lie bracket they induce.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "helicity.hpp"

namespace helis {

// ---- pointwise 4x4 inversion (cross-validation of the symbolic dual) ------

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 invert4(Mat4 m, const Point4& where) {
    Mat4 inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
        if (std::fabs(m[pivot][col]) < 1e-14)
            throw EvalError("singular two-form matrix", "Omega_k", where);
        std::swap(m[col], m[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = m[col][col];
        for (int j = 0; j < 4; ++j) {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = m[r][col];
            if (f == 0) continue;
            for (int j = 0; j < 4; ++j) {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

inline Mat4 form_matrix(const Form& a, const Point4& p) {
    Mat4 m{};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double v = eval(a.component(static_cast<Mask>((1u << i) | (1u << j))), p);
            m[i][j] = v;
            m[j][i] = -v;
        }
    return m;
}

inline Mat4 multivector_matrix(const Multivector& L, const Point4& p) {
    Mat4 m{};
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double v = eval(L.component(static_cast<Mask>((1u << i) | (1u << j))), p);
            m[i][j] = v;
            m[j][i] = -v;
        }
    return m;
}

// ---- symplectic extensions --------------------------------------------------

struct SymplecticExtension {
    int k = 0;
    Expr phi_k;
    Form eta{1};     // -d_M phi_k
    VectorField n;   // -grad phi_k
    VectorField W;   // u0 for k = 0, W_k otherwise
    Form Theta{2};
    Form Omega{2};
    std::optional<Form> theta_tilde;  // phi_k dt - theta_k (k >= 1, or Euler k = 0)
    Expr wn;                          // W . n, the non-degeneracy density
    std::vector<Point4> retained;
    long excluded = 0;
    std::vector<CheckRecord> checks;
};

inline std::vector<Point4> extension_points(const FlowScenario& s, const Expr& wn,
                                            long* excluded = nullptr) {
    std::vector<Point4> out;
    long dropped = 0;
    for (const Point4& p : s.retained_points()) {
        bool keep = false;
        try {
            keep = std::fabs(eval(wn, p)) >= s.ext_floor;
        } catch (const EvalError&) {
            keep = false;
        }
        if (keep) out.push_back(p);
        else ++dropped;
    }
    if (excluded) *excluded = dropped;
    return out;
}

inline SymplecticExtension extend_symplectic(const FlowScenario& s, const SymplecticData& sym,
                                             const Hierarchy& H, int k, const Expr& phi_k,
                                             const Tolerances& tol = {}) {
    SymplecticExtension e;
    e.k = k;
    e.phi_k = phi_k;
    const auto rho_pts = s.retained_points();

    const Expr conserved = time_derivative(phi_k) + s.v.apply(phi_k);
    if (residual(conserved, rho_pts).max > tol.pipeline)
        throw std::runtime_error("extension Hamiltonian is not conserved: " + to_string(phi_k));

    e.W = hierarchy_field(H, k);
    e.n = -grad3(phi_k);
    e.wn = dot3(e.W, e.n);
    e.retained = extension_points(s, e.wn, &e.excluded);
    if (e.retained.empty())
        throw std::runtime_error("degenerate extension: |W_k . n_k| below floor everywhere");

    e.eta = flat(e.n);
    e.Theta = -interior(e.W, sym.mu_M);
    e.Theta = e.Theta + wedge(interior(s.v, e.Theta), dt_form());
    e.Omega = e.Theta + wedge(e.eta, dt_form());

    const std::string K = std::to_string(k);
    e.checks.push_back(make_check("extension.closed." + K, "d(Omega_" + K + ") = 0",
                                  residual(ext_d(e.Omega), e.retained), tol.structural,
                                  e.excluded));
    const Form ham = interior(s.suspended(), e.Omega) - ext_d(Form::scalar(phi_k));
    e.checks.push_back(make_check("extension.hamiltonian." + K,
                                  "i(dt+v)(Omega_" + K + ") = dphi_" + K,
                                  residual(ham, e.retained), tol.pipeline, e.excluded));
    const Form vol_id = wedge(e.Omega, e.Omega) - Expr(2.0) * (e.wn * sym.mu);
    e.checks.push_back(make_check("extension.nondegenerate." + K,
                                  "Omega_" + K + "^Omega_" + K + " = 2 (W.n) mu",
                                  residual(vol_id, e.retained), tol.structural, e.excluded));

    if (k >= 1) {
        const Expr& hk = H.h.at(static_cast<std::size_t>(k) - 1);
        Form theta_rep = s.phi * ext_d(Form::scalar(hk));
        if (-H.sign < 0) theta_rep = -theta_rep;  // representative with d(theta) = Theta_k
        e.theta_tilde = phi_k * dt_form() - theta_rep;
        e.checks.push_back(make_check("extension.exact." + K, "Omega_" + K + " = -d(theta~_" + K + ")",
                                      residual(e.Omega + ext_d(*e.theta_tilde), e.retained),
                                      tol.structural, e.excluded));
    }
    return e;
}

// d(theta~_k ^ Omega_l) + Omega_k ^ Omega_l = 0: the conservation identity in
// its extended form.
inline CheckRecord extension_identity(const FlowScenario& s, const SymplecticExtension& ek,
                                      const SymplecticExtension& el, const Tolerances& tol = {}) {
    const std::string KL = std::to_string(ek.k) + std::to_string(el.k);
    if (!ek.theta_tilde)
        return failed_check("extension.identity." + KL, "d(theta~^Omega_l) + Omega_k^Omega_l = 0",
                            "no canonical one-form for k=" + std::to_string(ek.k));
    long excluded = 0;
    std::vector<Point4> pts;
    for (const Point4& p : extension_points(s, ek.wn, &excluded)) {
        try {
            if (std::fabs(eval(el.wn, p)) >= s.ext_floor) pts.push_back(p);
            else ++excluded;
        } catch (const EvalError&) {
            ++excluded;
        }
    }
    const Form id = ext_d(wedge(*ek.theta_tilde, el.Omega)) + wedge(ek.Omega, el.Omega);
    return make_check("extension.identity." + KL, "d(theta~_k^Omega_l) + Omega_k^Omega_l = 0",
                      residual(id, pts), tol.pipeline, excluded);
}

// ---- bivector dual ----------------------------------------------------------

struct BivectorDual {
    Multivector P{2};
    std::vector<CheckRecord> checks;
};

// Closed-form dual of Omega_k, cross-validated by pointwise numeric inversion.
inline BivectorDual invert_to_bivector(const FlowScenario& s, const SymplecticExtension& e,
                                       const Tolerances& tol = {}) {
    BivectorDual d;
    const Expr pref = Expr(-1.0) / e.wn;
    const VectorField m = cross3(e.W, s.v) - (Expr(1.0) / s.rho()) * e.n;
    // (W.grad) ^ d/dt part: component on dt^dx_i is -W^i.
    for (int i = 1; i < 4; ++i)
        d.P.accumulate(static_cast<Mask>(0b0001 | (1u << i)), pref * (-e.W[i]));
    // m.(grad ^ grad) part.
    d.P.accumulate(0b1100, pref * m[1]);
    d.P.accumulate(0b1010, pref * (-m[2]));
    d.P.accumulate(0b0110, pref * m[3]);

    const std::string K = std::to_string(e.k);

    // Pointwise: matrix of P equals the numeric inverse of the matrix of Omega.
    double worst = 0, sumsq = 0;
    std::size_t n = 0;
    for (const Point4& p : e.retained) {
        const Mat4 om = form_matrix(e.Omega, p);
        const Mat4 inv = invert4(om, p);
        const Mat4 sp = multivector_matrix(d.P, p);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double diff = std::fabs(inv[i][j] - sp[i][j]);
                worst = std::max(worst, diff);
                sumsq += diff * diff;
                ++n;
            }
    }
    Residual r;
    r.max = worst;
    r.rms = n ? std::sqrt(sumsq / static_cast<double>(n)) : 0.0;
    d.checks.push_back(make_check("bivector.numeric." + K,
                                  "closed-form P_" + K + " = pointwise inverse of Omega_" + K,
                                  r, tol.pipeline, e.excluded));

    // Contraction convention: Omega_{ki} P^{ij} = delta_k^j.
    double worst_id = 0, sumsq_id = 0;
    std::size_t n_id = 0;
    for (const Point4& p : e.retained) {
        const Mat4 om = form_matrix(e.Omega, p);
        const Mat4 sp = multivector_matrix(d.P, p);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double acc = 0;
                for (int l = 0; l < 4; ++l) acc += om[i][l] * sp[l][j];
                const double diff = std::fabs(acc - (i == j ? 1.0 : 0.0));
                worst_id = std::max(worst_id, diff);
                sumsq_id += diff * diff;
                ++n_id;
            }
    }
    Residual rid;
    rid.max = worst_id;
    rid.rms = n_id ? std::sqrt(sumsq_id / static_cast<double>(n_id)) : 0.0;
    d.checks.push_back(make_check("bivector.identity." + K, "Omega_" + K + " . P_" + K + " = id",
                                  rid, tol.pipeline, e.excluded));

    // Hamiltonian duality: P(dphi_k) recovers the suspended velocity field.
    const VectorField dual = contract(d.P, ext_d(Form::scalar(e.phi_k))) - s.suspended();
    d.checks.push_back(make_check("bivector.hamiltonian." + K, "P_" + K + "(dphi_" + K + ") = dt+v",
                                  residual(dual, e.retained), tol.pipeline, e.excluded));
    return d;
}

// ---- Schouten brackets -------------------------------------------------------

// [L1,L2] on sorted triples via the coordinate formula
//   J(i,j,k) = sum_l ( L1^{ij}_,l L2^{lk} + L1^{jk}_,l L2^{li} + L1^{ki}_,l L2^{lj} )
// symmetrised in (L1,L2); normalised so that a Jacobi pair satisfies
// [Lambda,Lambda] = 2 E ^ Lambda with the wedge above.
inline Multivector schouten_bracket(const Multivector& L1, const Multivector& L2) {
    Multivector out(3);
    const auto J = [](const Multivector& A, const Multivector& B, int i, int j, int k) {
        Expr acc(0.0);
        for (int l = 0; l < 4; ++l) {
            const Var vl = static_cast<Var>(l);
            acc += diff(A.comp2(i, j), vl) * B.comp2(l, k);
            acc += diff(A.comp2(j, k), vl) * B.comp2(l, i);
            acc += diff(A.comp2(k, i), vl) * B.comp2(l, j);
        }
        return acc;
    };
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k) {
                const Mask m = static_cast<Mask>((1u << i) | (1u << j) | (1u << k));
                out.set(m, J(L1, L2, i, j, k) + J(L2, L1, i, j, k));
            }
    return out;
}

// [Lambda, E] = L_E(Lambda) componentwise.
inline Multivector schouten_vector(const Multivector& L, const VectorField& E) {
    Multivector out(2);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Expr acc = E.apply(L.comp2(i, j));
            for (int l = 0; l < 4; ++l) {
                acc -= L.comp2(l, j) * diff(E[i], static_cast<Var>(l));
                acc -= L.comp2(i, l) * diff(E[j], static_cast<Var>(l));
            }
            out.set(static_cast<Mask>((1u << i) | (1u << j)), acc);
        }
    return out;
}

// ---- conformal and Jacobi pairs ----------------------------------------------

// Constant shift making phi_k positive on the retained grid (conserved, so it
// never disturbs eta_k or the extension itself).
inline std::pair<Expr, double> positive_hamiltonian(const Expr& phi_k,
                                                    const std::vector<Point4>& pts) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Point4& p : pts) {
        const double v = eval(phi_k, p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 1e-9) throw std::runtime_error("constant extension Hamiltonian");
    if (lo > 0) return {phi_k, 0.0};
    const double c = 1.0 - lo;
    return {phi_k + Expr(c), c};
}

struct ConformalPair {
    int k = 0, l = 0;
    Expr phi;        // positively shifted phi_k
    double shift = 0;
    Form Omega_kl{2};
    Form alpha{1};
    std::vector<Point4> retained;
    std::vector<CheckRecord> checks;
};

inline ConformalPair conformal_pair(const FlowScenario& s, const SymplecticExtension& ek,
                                    const SymplecticExtension& el, const Tolerances& tol = {}) {
    ConformalPair c;
    c.k = ek.k;
    c.l = el.k;
    long excluded = 0;
    for (const Point4& p : extension_points(s, el.wn, &excluded)) c.retained.push_back(p);
    auto [phi, shift] = positive_hamiltonian(ek.phi_k, c.retained);
    c.phi = phi;
    c.shift = shift;
    c.Omega_kl = c.phi * el.Omega;
    c.alpha = ext_d(Form::scalar(ln(c.phi)));

    const std::string KL = std::to_string(c.k) + std::to_string(c.l);
    if (shift != 0) {
        Residual zero;
        CheckRecord note = make_check("conformal.shift." + KL,
                                      "phi_k shifted by " + std::to_string(shift) +
                                          " for positivity",
                                      zero, 1.0, 0);
        c.checks.push_back(note);
    }
    c.checks.push_back(make_check("conformal.alpha-closed." + KL, "d(alpha_k) = 0",
                                  residual(ext_d(c.alpha), c.retained), tol.structural, excluded));
    c.checks.push_back(make_check("conformal.structure." + KL,
                                  "d(Omega_kl) = alpha_k ^ Omega_kl",
                                  residual(ext_d(c.Omega_kl) - wedge(c.alpha, c.Omega_kl),
                                           c.retained),
                                  tol.pipeline, excluded));

    // Degeneration: alpha_k annihilates directions tangent to a level set of
    // phi_k, so the pair restricts to the plain symplectic form there.
    const std::array<Expr, 4> dphi = {diff(c.phi, Var::t), diff(c.phi, Var::x),
                                      diff(c.phi, Var::y), diff(c.phi, Var::z)};
    double worst = 0;
    long slice_count = 0;
    if (!c.retained.empty()) {
        const double level = eval(c.phi, c.retained.front());
        for (const Point4& p : c.retained) {
            if (std::fabs(eval(c.phi, p) - level) > 1e-9) continue;
            ++slice_count;
            std::array<double, 4> g{};
            double norm2 = 0;
            for (int i = 0; i < 4; ++i) {
                g[i] = eval(dphi[i], p);
                norm2 += g[i] * g[i];
            }
            if (norm2 < 1e-20) continue;
            std::array<double, 4> av{};
            for (int i = 0; i < 4; ++i)
                av[i] = eval(c.alpha.component(static_cast<Mask>(1u << i)), p);
            for (int i = 0; i < 4; ++i) {  // tangent samples e_i - (g_i/|g|^2) g
                double pairing = av[i];
                for (int j = 0; j < 4; ++j) pairing -= av[j] * g[i] * g[j] / norm2;
                worst = std::max(worst, std::fabs(pairing));
            }
        }
    }
    Residual lr;
    lr.max = worst;
    lr.rms = worst;
    c.checks.push_back(make_check("conformal.level-degeneration." + KL,
                                  "alpha_k(tangents of {phi_k = c}) = 0, slice points: " +
                                      std::to_string(slice_count),
                                  lr, tol.pipeline, excluded));
    return c;
}

struct JacobiPair {
    int k = 0, l = 0;
    Expr phi;  // positively shifted phi_k
    Multivector P_l{2};
    Multivector Lambda{2};
    VectorField E;
    std::vector<Point4> retained;
    std::vector<CheckRecord> checks;
};

inline JacobiPair jacobi_pair(const FlowScenario& s, const SymplecticExtension& ek,
                              const SymplecticExtension& el, const BivectorDual& dual_l,
                              const Tolerances& tol = {}) {
    JacobiPair j;
    j.k = ek.k;
    j.l = el.k;
    long excluded = 0;
    for (const Point4& p : extension_points(s, el.wn, &excluded)) j.retained.push_back(p);
    auto [phi, shift] = positive_hamiltonian(ek.phi_k, j.retained);
    (void)shift;
    j.phi = phi;
    j.P_l = dual_l.P;
    j.Lambda = (Expr(1.0) / j.phi) * j.P_l;
    const VectorField pd = contract(j.P_l, ext_d(Form::scalar(j.phi)));
    j.E = (Expr(-1.0) / (j.phi * j.phi)) * pd;

    const std::string KL = std::to_string(j.k) + std::to_string(j.l);
    const Multivector lhs = schouten_bracket(j.Lambda, j.Lambda);
    const Multivector rhs = Expr(2.0) * wedge(j.E, j.Lambda);
    j.checks.push_back(make_check("jacobi.schouten." + KL, "[Lambda,Lambda] = 2 E ^ Lambda",
                                  residual(lhs - rhs, j.retained), tol.pipeline, excluded));
    j.checks.push_back(make_check("jacobi.schouten-vector." + KL, "[Lambda,E] = 0",
                                  residual(schouten_vector(j.Lambda, j.E), j.retained),
                                  tol.pipeline, excluded));
    return j;
}

// {f,g} = Lambda(df^dg) + E(f dg - g df); a local Lie bracket that is not a
// derivation in its arguments.
inline Expr jacobi_bracket(const Expr& f, const Expr& g, const JacobiPair& j) {
    const Form df = ext_d(Form::scalar(f));
    const Form dg = ext_d(Form::scalar(g));
    return pair(j.Lambda, wedge(df, dg)) + f * j.E.apply(g) - g * j.E.apply(f);
}

// V_klf = Lambda(df) + f E; equals the plain Hamiltonian field of f/phi_k.
inline VectorField hamiltonian_vector_field(const Expr& f, const JacobiPair& j) {
    return contract(j.Lambda, ext_d(Form::scalar(f))) + f * j.E;
}

inline Residual hamiltonian_equivalence_residual(const Expr& f, const JacobiPair& j) {
    const VectorField lhs = hamiltonian_vector_field(f, j);
    const VectorField rhs = contract(j.P_l, ext_d(Form::scalar(f / j.phi)));
    return residual(lhs - rhs, j.retained);
}

}  // namespace helis
