#pragma once

// Multivariate polynomials in Y in R^d over a field T, and "weighted"
// polynomials w^a q(Y) with w = 1 - |Y|^2, closed under d/dY_j up to a drop
// of the weight exponent by one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <type_traits>
#include <vector>

#include "dslab/core.hpp"
#include "dslab/rational.hpp"

namespace dslab {

template <class T>
class Poly {
public:
    using Exponent = std::vector<int>;

    Poly() = default;
    explicit Poly(int dim) : dim_(dim) {}

    static Poly constant(int dim, const T& c) {
        Poly p(dim);
        p.add_term(Exponent(dim, 0), c);
        return p;
    }
    static Poly monomial(const Exponent& e, const T& c = T(1)) {
        Poly p(static_cast<int>(e.size()));
        p.add_term(e, c);
        return p;
    }
    /// 1 - |Y|^2
    static Poly weight(int dim) {
        Poly p = constant(dim, T(1));
        for (int j = 0; j < dim; ++j) {
            Exponent e(dim, 0);
            e[j] = 2;
            p.add_term(e, T(-1));
        }
        return p;
    }

    int dim() const { return dim_; }
    const std::map<Exponent, T>& terms() const { return t_; }

    void add_term(const Exponent& e, const T& c) {
        if (c == T(0)) return;
        auto [it, inserted] = t_.emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == T(0)) t_.erase(it);
        }
    }

    int degree() const {
        int d = -1;
        for (const auto& [e, c] : t_) {
            int s = 0;
            for (int v : e) s += v;
            d = std::max(d, s);
        }
        return d;
    }

    Poly& operator+=(const Poly& o) {
        for (const auto& [e, c] : o.t_) add_term(e, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        for (const auto& [e, c] : o.t_) add_term(e, -c);
        return *this;
    }
    Poly& operator*=(const T& s) {
        if (s == T(0)) {
            t_.clear();
            return *this;
        }
        for (auto& [e, c] : t_) c *= s;
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, const T& s) { return a *= s; }
    friend Poly operator*(const T& s, Poly a) { return a *= s; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly r(a.dim_);
        for (const auto& [ea, ca] : a.t_)
            for (const auto& [eb, cb] : b.t_) {
                Exponent e(ea);
                for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
                r.add_term(e, ca * cb);
            }
        return r;
    }

    Poly deriv(int j) const {
        Poly r(dim_);
        for (const auto& [e, c] : t_) {
            if (e[j] == 0) continue;
            Exponent f(e);
            --f[j];
            r.add_term(f, c * T(e[j]));
        }
        return r;
    }

    /// Y . grad
    Poly euler() const {
        Poly r(dim_);
        for (const auto& [e, c] : t_) {
            int s = 0;
            for (int v : e) s += v;
            r.add_term(e, c * T(s));
        }
        return r;
    }

    /// sum_j d^2/dY_j^2 (the negative of the positive Laplacian)
    Poly flat_laplacian() const {
        Poly r(dim_);
        for (int j = 0; j < dim_; ++j) r += deriv(j).deriv(j);
        return r;
    }

    bool is_zero() const { return t_.empty(); }

    /// Largest |coefficient| (for floating-point near-zero checks).
    double max_abs() const {
        double m = 0.0;
        for (const auto& [e, c] : t_) {
            if constexpr (std::is_same_v<T, Rational>)
                m = std::max(m, std::abs(to_double(c)));
            else
                m = std::max(m, static_cast<double>(std::abs(c)));
        }
        return m;
    }

    Complex eval(const std::vector<Real>& y) const {
        Complex acc(0.0);
        for (const auto& [e, c] : t_) {
            Real m = 1.0;
            for (std::size_t i = 0; i < e.size(); ++i) m *= std::pow(y[i], e[i]);
            acc += to_complex(c) * m;
        }
        return acc;
    }

    static Complex to_complex(const T& c) {
        if constexpr (std::is_same_v<T, Rational>)
            return Complex(to_double(c));
        else
            return Complex(c);
    }

private:
    int dim_ = 0;
    std::map<Exponent, T> t_;
};

/// Every monomial of total degree <= deg in dim variables.
inline std::vector<std::vector<int>> monomials_up_to(int dim, int deg) {
    std::vector<std::vector<int>> out;
    std::vector<int> e(dim, 0);
    auto rec = [&](auto&& self, int j, int left) -> void {
        if (j == dim) {
            out.push_back(e);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[j] = k;
            self(self, j + 1, left - k);
        }
        e[j] = 0;
    };
    rec(rec, 0, deg);
    return out;
}

/// w^a q(Y), w = 1 - |Y|^2.
template <class T>
struct WeightedPoly {
    T a;
    Poly<T> q;

    int dim() const { return q.dim(); }

    /// Rewrite with exponent a - k (k >= 0) by absorbing w^k into q.
    WeightedPoly lowered(int k) const {
        WeightedPoly r{a - T(k), q};
        const Poly<T> w = Poly<T>::weight(q.dim());
        for (int i = 0; i < k; ++i) r.q = r.q * w;
        return r;
    }

    /// d/dY_j (w^a q) = w^{a-1} (w d_j q - 2 a Y_j q)
    WeightedPoly deriv(int j) const {
        const int d = q.dim();
        std::vector<int> ej(d, 0);
        ej[j] = 1;
        Poly<T> r = Poly<T>::weight(d) * q.deriv(j) - Poly<T>::monomial(ej, T(2) * a) * q;
        return {a - T(1), r};
    }

    /// Y . grad (w^a q) = w^{a-1} (w E q - 2 a |Y|^2 q)
    WeightedPoly euler() const {
        const int d = q.dim();
        Poly<T> r2(d);
        for (int j = 0; j < d; ++j) {
            std::vector<int> e(d, 0);
            e[j] = 2;
            r2.add_term(e, T(1));
        }
        return {a - T(1), Poly<T>::weight(d) * q.euler() - (r2 * q) * (T(2) * a)};
    }

    WeightedPoly scaled(const T& s) const { return {a, q * s}; }

    Complex eval(const std::vector<Real>& y) const {
        Real r2 = 0.0;
        for (Real v : y) r2 += v * v;
        const Complex av = Poly<T>::to_complex(a);
        return std::pow(Complex(1.0 - r2), av) * q.eval(y);
    }
};

/// Sum of weighted polynomials whose exponents differ by integers.
template <class T>
WeightedPoly<T> combine(const std::vector<WeightedPoly<T>>& parts) {
    require(!parts.empty(), "combine: no terms");
    // Lowest exponent: all differences are integers by construction.
    T lo = parts.front().a;
    for (const auto& p : parts) {
        const Complex d = Poly<T>::to_complex(p.a - lo);
        if (d.real() < 0) lo = p.a;
    }
    WeightedPoly<T> out{lo, Poly<T>(parts.front().dim())};
    for (const auto& p : parts) {
        const Complex d = Poly<T>::to_complex(p.a - lo);
        const int k = static_cast<int>(std::lround(d.real()));
        require(std::abs(d - Complex(k)) < 1e-9, "combine: exponents differ by a non-integer");
        out.q += p.lowered(k).q;
    }
    return out;
}

}  // namespace dslab
