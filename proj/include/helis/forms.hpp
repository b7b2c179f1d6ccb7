#pragma once

// Exterior algebra of differential forms and multivector fields on
// time-extended 3-space.  Coordinates are ordered t < x < y < z and every
// sign in the library follows from that single convention.
//
// A degree-k form stores one coefficient Expr per strictly increasing
// multi-index, encoded as a 4-bit mask (bit i set <=> coordinate i present).
// Absent entries are zero.  Interior products and bivector contractions
// always contract the first slot.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "expr.hpp"

namespace helis {

using Mask = std::uint8_t;

inline int mask_degree(Mask m) { return std::popcount(static_cast<unsigned>(m)); }

// Sign of dx_A ^ dx_B when merging two disjoint sorted index sets; 0 on overlap.
inline int merge_sign(Mask a, Mask b) {
    if (a & b) return 0;
    int swaps = 0;
    for (int i = 0; i < 4; ++i)
        if (b & (1u << i)) swaps += std::popcount(static_cast<unsigned>(a) >> (i + 1));
    return (swaps & 1) ? -1 : 1;
}

inline std::string mask_name(Mask m, const char* prefix) {
    std::string s;
    for (int i = 0; i < 4; ++i)
        if (m & (1u << i)) {
            if (!s.empty()) s += '^';
            s += prefix;
            s += var_name(static_cast<Var>(i));
        }
    return s;
}

// -------------------------------------------------------------------------
// Vector fields

class VectorField {
public:
    VectorField() : c_{Expr(0.0), Expr(0.0), Expr(0.0), Expr(0.0)} {}
    VectorField(Expr ct, Expr cx, Expr cy, Expr cz) : c_{ct, cx, cy, cz} {}

    static VectorField spatial(Expr cx, Expr cy, Expr cz) {
        return VectorField(Expr(0.0), cx, cy, cz);
    }
    // The suspended field  d/dt + v  of a non-autonomous flow.
    static VectorField suspend(const VectorField& v) {
        return VectorField(Expr(1.0), v[1], v[2], v[3]);
    }
    static VectorField basis(Var v) {
        VectorField f;
        f.c_[static_cast<int>(v)] = Expr(1.0);
        return f;
    }

    const Expr& operator[](int i) const { return c_[i]; }
    Expr& operator[](int i) { return c_[i]; }

    bool is_spatial() const { return c_[0].is_zero(); }

    // Directional derivative X(f).
    Expr apply(const Expr& f) const {
        Expr out(0.0);
        for (int i = 0; i < 4; ++i)
            if (!c_[i].is_zero()) out += c_[i] * diff(f, static_cast<Var>(i));
        return out;
    }

    friend VectorField operator+(const VectorField& a, const VectorField& b) {
        return VectorField(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]);
    }
    friend VectorField operator-(const VectorField& a, const VectorField& b) {
        return VectorField(a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]);
    }
    friend VectorField operator*(const Expr& f, const VectorField& a) {
        return VectorField(f * a[0], f * a[1], f * a[2], f * a[3]);
    }
    friend VectorField operator-(const VectorField& a) {
        return VectorField(-a[0], -a[1], -a[2], -a[3]);
    }

private:
    std::array<Expr, 4> c_;
};

// [X,Y]^i = X(Y^i) - Y(X^i)
inline VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
    VectorField out;
    for (int i = 0; i < 4; ++i) out[i] = X.apply(Y[i]) - Y.apply(X[i]);
    return out;
}

// -------------------------------------------------------------------------
// Differential forms

class Form {
public:
    explicit Form(int degree = 0) : degree_(degree) {
        if (degree < 0 || degree > 4) throw std::invalid_argument("form degree out of range");
    }

    static Form scalar(const Expr& f) {
        Form a(0);
        a.set(0, f);
        return a;
    }
    static Form basis(Mask m) {
        Form a(mask_degree(m));
        a.set(m, Expr(1.0));
        return a;
    }

    int degree() const { return degree_; }
    bool empty() const { return comps_.empty(); }

    void set(Mask m, const Expr& e) {
        if (mask_degree(m) != degree_) throw std::invalid_argument("multi-index degree mismatch");
        if (e.is_zero()) comps_.erase(m);
        else comps_[m] = e;
    }

    void accumulate(Mask m, const Expr& e) {
        if (e.is_zero()) return;
        auto it = comps_.find(m);
        if (it == comps_.end()) set(m, e);
        else set(m, it->second + e);
    }

    Expr component(Mask m) const {
        auto it = comps_.find(m);
        return it == comps_.end() ? Expr(0.0) : it->second;
    }

    const std::map<Mask, Expr>& components() const { return comps_; }

    friend Form operator+(const Form& a, const Form& b) {
        Form out(a.degree_);
        out.comps_ = a.comps_;
        for (const auto& [m, e] : b.comps_) out.accumulate(m, e);
        return out;
    }
    friend Form operator-(const Form& a, const Form& b) {
        Form out(a.degree_);
        out.comps_ = a.comps_;
        for (const auto& [m, e] : b.comps_) out.accumulate(m, -e);
        return out;
    }
    friend Form operator*(const Expr& f, const Form& a) {
        Form out(a.degree_);
        for (const auto& [m, e] : a.comps_) out.set(m, f * e);
        return out;
    }
    friend Form operator-(const Form& a) { return Expr(-1.0) * a; }

private:
    int degree_;
    std::map<Mask, Expr> comps_;
};

inline Form wedge(const Form& a, const Form& b) {
    const int deg = a.degree() + b.degree();
    if (deg > 4) return Form(4);  // identically zero beyond top degree
    Form out(deg);
    for (const auto& [ma, ea] : a.components())
        for (const auto& [mb, eb] : b.components()) {
            const int s = merge_sign(ma, mb);
            if (s == 0) continue;
            out.accumulate(ma | mb, s == 1 ? ea * eb : -(ea * eb));
        }
    return out;
}

// Exterior derivative; spatial_only drops the dt ^ d/dt part (d_M).
inline Form ext_d(const Form& a, bool spatial_only = false) {
    if (a.degree() == 4) return Form(4);
    Form out(a.degree() + 1);
    for (const auto& [m, e] : a.components())
        for (int i = spatial_only ? 1 : 0; i < 4; ++i) {
            const Mask mi = static_cast<Mask>(1u << i);
            const int s = merge_sign(mi, m);
            if (s == 0) continue;
            const Expr de = diff(e, static_cast<Var>(i));
            out.accumulate(mi | m, s == 1 ? de : -de);
        }
    return out;
}

inline Form d_spatial(const Form& a) { return ext_d(a, true); }

// i(X)a, contraction on the first slot.
inline Form interior(const VectorField& X, const Form& a) {
    if (a.degree() == 0) return Form(0);
    Form out(a.degree() - 1);
    for (const auto& [m, e] : a.components())
        for (int i = 0; i < 4; ++i) {
            const Mask mi = static_cast<Mask>(1u << i);
            if (!(m & mi)) continue;
            if (X[i].is_zero()) continue;
            const int pos = std::popcount(static_cast<unsigned>(m & (mi - 1)));
            const Expr term = X[i] * e;
            out.accumulate(m & ~mi, (pos & 1) ? -term : term);
        }
    return out;
}

// Cartan formula; exact because d and i are exact.
inline Form lie_derivative(const VectorField& X, const Form& a) {
    if (a.degree() == 0) return Form::scalar(X.apply(a.component(0)));
    if (a.degree() == 4) return ext_d(interior(X, a));  // i(X)(da) vanishes at top degree
    return interior(X, ext_d(a)) + ext_d(interior(X, a));
}

// Metric lowering on flat 3-space: identical components on dx, dy, dz.
inline Form flat(const VectorField& v) {
    Form out(1);
    for (int i = 1; i < 4; ++i) out.set(static_cast<Mask>(1u << i), v[i]);
    return out;
}

// i(W)(vol) for a spatial vector and spatial 3-form volume.
inline Form vector_to_form(const VectorField& W, const Form& vol) {
    return interior(W, vol);
}

// Inverse of the above: recover W from a spatial 2-form, given vol = rho dx^dy^dz.
inline VectorField form_to_vector(const Form& beta, const Form& vol) {
    if (beta.degree() != 2) throw std::invalid_argument("expected a 2-form");
    for (const auto& [m, e] : beta.components())
        if (m & 1u) throw std::invalid_argument("expected a spatial 2-form");
    const Expr rho = vol.component(0b1110);
    const Mask XY = 0b0110, XZ = 0b1010, YZ = 0b1100;
    return VectorField::spatial(beta.component(YZ) / rho, -(beta.component(XZ) / rho),
                                beta.component(XY) / rho);
}

inline std::string to_string(const Form& a) {
    if (a.empty()) return "0";
    std::string s;
    for (const auto& [m, e] : a.components()) {
        if (!s.empty()) s += " + ";
        if (a.degree() == 0) s += to_string(e);
        else s += to_string(e) + " " + mask_name(m, "d");
    }
    return s;
}

// -------------------------------------------------------------------------
// Contravariant antisymmetric fields (bivectors, trivectors)

class Multivector {
public:
    explicit Multivector(int degree = 2) : degree_(degree) {
        if (degree < 1 || degree > 4) throw std::invalid_argument("multivector degree out of range");
    }

    int degree() const { return degree_; }
    const std::map<Mask, Expr>& components() const { return comps_; }

    void set(Mask m, const Expr& e) {
        if (mask_degree(m) != degree_) throw std::invalid_argument("multi-index degree mismatch");
        if (e.is_zero()) comps_.erase(m);
        else comps_[m] = e;
    }
    void accumulate(Mask m, const Expr& e) {
        if (e.is_zero()) return;
        auto it = comps_.find(m);
        if (it == comps_.end()) set(m, e);
        else set(m, it->second + e);
    }
    Expr component(Mask m) const {
        auto it = comps_.find(m);
        return it == comps_.end() ? Expr(0.0) : it->second;
    }

    // Signed component for an arbitrary index pair (degree 2 only).
    Expr comp2(int i, int j) const {
        if (i == j) return Expr(0.0);
        const Mask m = static_cast<Mask>((1u << i) | (1u << j));
        const Expr e = component(m);
        return i < j ? e : -e;
    }

    friend Multivector operator+(const Multivector& a, const Multivector& b) {
        Multivector out(a.degree_);
        out.comps_ = a.comps_;
        for (const auto& [m, e] : b.comps_) out.accumulate(m, e);
        return out;
    }
    friend Multivector operator-(const Multivector& a, const Multivector& b) {
        Multivector out(a.degree_);
        out.comps_ = a.comps_;
        for (const auto& [m, e] : b.comps_) out.accumulate(m, -e);
        return out;
    }
    friend Multivector operator*(const Expr& f, const Multivector& a) {
        Multivector out(a.degree_);
        for (const auto& [m, e] : a.comps_) out.set(m, f * e);
        return out;
    }

private:
    int degree_;
    std::map<Mask, Expr> comps_;
};

// E ^ Lambda for a vector and a bivector.
inline Multivector wedge(const VectorField& E, const Multivector& L) {
    Multivector out(L.degree() + 1);
    for (int i = 0; i < 4; ++i) {
        if (E[i].is_zero()) continue;
        const Mask mi = static_cast<Mask>(1u << i);
        for (const auto& [m, e] : L.components()) {
            const int s = merge_sign(mi, m);
            if (s == 0) continue;
            out.accumulate(mi | m, s == 1 ? E[i] * e : -(E[i] * e));
        }
    }
    return out;
}

// Bivector on a one-form (first slot): (L(df))^j = sum_i f_,i L^{ij}.
inline VectorField contract(const Multivector& L, const Form& alpha) {
    VectorField out;
    for (int j = 0; j < 4; ++j) {
        Expr acc(0.0);
        for (int i = 0; i < 4; ++i) {
            if (i == j) continue;
            const Expr a = alpha.component(static_cast<Mask>(1u << i));
            if (a.is_zero()) continue;
            acc += a * L.comp2(i, j);
        }
        out[j] = acc;
    }
    return out;
}

// Full pairing of a bivector with a 2-form: sum_{i<j} L^{ij} a_{ij}.
inline Expr pair(const Multivector& L, const Form& a) {
    Expr acc(0.0);
    for (const auto& [m, e] : L.components()) acc += e * a.component(m);
    return acc;
}

// -------------------------------------------------------------------------
// Sample grids and residual norms

struct SampleGrid {
    std::vector<double> t_values = {0.0, 0.5, 1.0};
    int n_spatial = 8;
    double spatial_length = 6.283185307179586;  // [0, 2pi)

    std::vector<Point4> points() const {
        std::vector<Point4> pts;
        pts.reserve(t_values.size() * static_cast<std::size_t>(n_spatial) * n_spatial * n_spatial);
        const double h = spatial_length / n_spatial;
        for (double t : t_values)
            for (int i = 0; i < n_spatial; ++i)
                for (int j = 0; j < n_spatial; ++j)
                    for (int k = 0; k < n_spatial; ++k)
                        pts.push_back({t, i * h, j * h, k * h});
        return pts;
    }
};

struct Residual {
    double max = 0;
    double rms = 0;
};

inline Residual residual(const Form& a, const std::vector<Point4>& pts) {
    Residual r;
    if (a.empty() || pts.empty()) return r;
    double sumsq = 0;
    std::size_t n = 0;
    for (const auto& [m, e] : a.components()) {
        (void)m;
        for (const Point4& p : pts) {
            const double v = std::fabs(eval(e, p));
            if (v > r.max) r.max = v;
            sumsq += v * v;
            ++n;
        }
    }
    r.rms = std::sqrt(sumsq / static_cast<double>(n));
    return r;
}

inline Residual residual(const Expr& e, const std::vector<Point4>& pts) {
    return residual(Form::scalar(e), pts);
}

inline Residual residual(const VectorField& X, const std::vector<Point4>& pts) {
    Residual r;
    if (pts.empty()) return r;
    double sumsq = 0;
    std::size_t n = 0;
    for (int i = 0; i < 4; ++i) {
        if (X[i].is_zero()) continue;
        for (const Point4& p : pts) {
            const double v = std::fabs(eval(X[i], p));
            if (v > r.max) r.max = v;
            sumsq += v * v;
            ++n;
        }
    }
    if (n) r.rms = std::sqrt(sumsq / static_cast<double>(n));
    return r;
}

inline Residual residual(const Multivector& L, const std::vector<Point4>& pts) {
    Residual r;
    if (pts.empty()) return r;
    double sumsq = 0;
    std::size_t n = 0;
    for (const auto& [m, e] : L.components()) {
        (void)m;
        for (const Point4& p : pts) {
            const double v = std::fabs(eval(e, p));
            if (v > r.max) r.max = v;
            sumsq += v * v;
            ++n;
        }
    }
    if (n) r.rms = std::sqrt(sumsq / static_cast<double>(n));
    return r;
}

}  // namespace helis
