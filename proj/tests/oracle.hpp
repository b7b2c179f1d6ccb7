#pragma once

// Test-only numeric oracles, independent of the symbolic machinery they
// check: finite-difference derivatives, brute-force antisymmetric algebra on
// pointwise component tables, and quadrature references.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include <helis/forms.hpp>

namespace oracle {

using helis::Expr;
using helis::Form;
using helis::Mask;
using helis::Multivector;
using helis::Point4;
using helis::VectorField;

inline Point4 shift(Point4 p, int axis, double d) {
    switch (axis) {
        case 0: p.t += d; break;
        case 1: p.x += d; break;
        case 2: p.y += d; break;
        default: p.z += d; break;
    }
    return p;
}

inline double fd_derivative(const Expr& e, int axis, const Point4& p, double h = 1e-5) {
    return (helis::eval(e, shift(p, axis, h)) - helis::eval(e, shift(p, axis, -h))) / (2 * h);
}

// Pointwise table of form components, keyed by sorted mask.
using FormValue = std::map<Mask, double>;

inline FormValue value_of(const Form& a, const Point4& p) {
    FormValue v;
    for (const auto& [m, e] : a.components()) v[m] = helis::eval(e, p);
    return v;
}

inline double comp(const FormValue& v, Mask m) {
    auto it = v.find(m);
    return it == v.end() ? 0.0 : it->second;
}

// Value on an arbitrary index list via the permutation sign.
inline double signed_comp(const FormValue& v, const std::vector<int>& idx) {
    Mask m = 0;
    int sign = 1;
    std::vector<int> sorted = idx;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size(); ++j)
            if (sorted[i] > sorted[j]) {
                std::swap(sorted[i], sorted[j]);
                sign = -sign;
            } else if (sorted[i] == sorted[j]) {
                return 0.0;
            }
    for (int i : sorted) m |= static_cast<Mask>(1u << i);
    return sign * comp(v, m);
}

// Brute-force wedge on pointwise tables: (a^b)(I) over all splits.
inline FormValue wedge_values(const FormValue& a, int dega, const FormValue& b, int degb) {
    FormValue out;
    for (int m = 0; m < 16; ++m) {
        if (helis::mask_degree(static_cast<Mask>(m)) != dega + degb) continue;
        std::vector<int> idx;
        for (int i = 0; i < 4; ++i)
            if (m & (1 << i)) idx.push_back(i);
        // sum over all subsets of idx of size dega with shuffle sign
        double acc = 0;
        const int n = static_cast<int>(idx.size());
        for (int pick = 0; pick < (1 << n); ++pick) {
            if (std::popcount(static_cast<unsigned>(pick)) != dega) continue;
            std::vector<int> ia, ib;
            int sign = 1, seen_b = 0;
            for (int i = 0; i < n; ++i) {
                if (pick & (1 << i)) {
                    ia.push_back(idx[static_cast<std::size_t>(i)]);
                    if (seen_b % 2) sign = -sign;  // hop over the b's already placed
                } else {
                    ib.push_back(idx[static_cast<std::size_t>(i)]);
                    ++seen_b;
                }
            }
            acc += sign * signed_comp(a, ia) * signed_comp(b, ib);
        }
        if (acc != 0) out[static_cast<Mask>(m)] = acc;
    }
    return out;
}

// Finite-difference exterior derivative of a form at a point.
inline FormValue fd_ext_d(const Form& a, const Point4& p, bool spatial_only = false,
                          double h = 1e-5) {
    FormValue out;
    for (int m = 0; m < 16; ++m) {
        if (helis::mask_degree(static_cast<Mask>(m)) != a.degree() + 1) continue;
        std::vector<int> idx;
        for (int i = 0; i < 4; ++i)
            if (m & (1 << i)) idx.push_back(i);
        double acc = 0;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (spatial_only && idx[j] == 0) continue;
            std::vector<int> rest;
            for (std::size_t i = 0; i < idx.size(); ++i)
                if (i != j) rest.push_back(idx[i]);
            Mask rm = 0;
            for (int i : rest) rm |= static_cast<Mask>(1u << i);
            const Expr c = a.component(rm);
            const double d =
                (helis::eval(c, shift(p, idx[j], h)) - helis::eval(c, shift(p, idx[j], -h))) /
                (2 * h);
            acc += ((j % 2) ? -1.0 : 1.0) * d;
        }
        if (acc != 0) out[static_cast<Mask>(m)] = acc;
    }
    return out;
}

// Brute-force interior product on a pointwise table.
inline FormValue interior_values(const std::array<double, 4>& X, const FormValue& a, int dega) {
    FormValue out;
    for (int m = 0; m < 16; ++m) {
        if (helis::mask_degree(static_cast<Mask>(m)) != dega - 1) continue;
        std::vector<int> idx;
        for (int i = 0; i < 4; ++i)
            if (m & (1 << i)) idx.push_back(i);
        double acc = 0;
        for (int i = 0; i < 4; ++i) {
            std::vector<int> full = {i};
            full.insert(full.end(), idx.begin(), idx.end());
            acc += X[static_cast<std::size_t>(i)] * signed_comp(a, full);
        }
        if (acc != 0) out[static_cast<Mask>(m)] = acc;
    }
    return out;
}

inline double max_diff(const FormValue& a, const FormValue& b) {
    double worst = 0;
    for (int m = 0; m < 16; ++m) {
        const double d = std::fabs(comp(a, static_cast<Mask>(m)) - comp(b, static_cast<Mask>(m)));
        worst = std::max(worst, d);
    }
    return worst;
}

inline std::array<double, 4> vector_value(const VectorField& X, const Point4& p) {
    return {helis::eval(X[0], p), helis::eval(X[1], p), helis::eval(X[2], p),
            helis::eval(X[3], p)};
}

// Finite-difference Lie bracket componentwise.
inline std::array<double, 4> fd_lie_bracket(const VectorField& X, const VectorField& Y,
                                            const Point4& p, double h = 1e-5) {
    std::array<double, 4> out{};
    for (int i = 0; i < 4; ++i) {
        double xy = 0, yx = 0;
        for (int a = 0; a < 4; ++a) {
            xy += helis::eval(X[a], p) * fd_derivative(Y[i], a, p, h);
            yx += helis::eval(Y[a], p) * fd_derivative(X[i], a, p, h);
        }
        out[static_cast<std::size_t>(i)] = xy - yx;
    }
    return out;
}

// Brute-force Schouten tensor by quadruple index loop with FD derivatives,
// symmetrised in its two arguments; matches schouten_bracket's normalisation.
inline double fd_schouten(const Multivector& L1, const Multivector& L2, int i, int j, int k,
                          const Point4& p, double h = 1e-5) {
    auto comp2 = [](const Multivector& L, int a, int b) { return L.comp2(a, b); };
    auto J = [&](const Multivector& A, const Multivector& B) {
        double acc = 0;
        for (int l = 0; l < 4; ++l) {
            acc += fd_derivative(comp2(A, i, j), l, p, h) * helis::eval(comp2(B, l, k), p);
            acc += fd_derivative(comp2(A, j, k), l, p, h) * helis::eval(comp2(B, l, i), p);
            acc += fd_derivative(comp2(A, k, i), l, p, h) * helis::eval(comp2(B, l, j), p);
        }
        return acc;
    };
    return J(L1, L2) + J(L2, L1);
}

// Reference value for the ABC-flow helicity: curl v = v, so the integral is
// the mean-square speed (2pi)^3 (A^2 + B^2 + C^2).
inline double abc_helicity_reference(double A, double B, double C) {
    const double twopi = 6.283185307179586;
    return twopi * twopi * twopi * (A * A + B * B + C * C);
}

}  // namespace oracle
