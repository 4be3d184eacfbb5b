#pragma once

// Truncated Taylor series in x, generic over the coefficient field
// (double, std::complex<double>, or an exact rational type).

#include <cstddef>
#include <vector>

#include "dslab/core.hpp"

namespace dslab {

template <class T>
class Taylor {
public:
    Taylor() = default;
    explicit Taylor(std::size_t order) : c_(order + 1, T(0)) {}
    Taylor(std::size_t order, T constant) : c_(order + 1, T(0)) { c_[0] = constant; }

    static Taylor identity_x(std::size_t order) {
        Taylor t(order);
        if (order >= 1) t.c_[1] = T(1);
        return t;
    }

    std::size_t order() const { return c_.size() - 1; }
    const T& operator[](std::size_t i) const { return c_[i]; }
    T& operator[](std::size_t i) { return c_[i]; }
    /// Coefficient with zero padding past the truncation order.
    T at(std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }
    const std::vector<T>& coeffs() const { return c_; }

    Taylor& operator+=(const Taylor& o) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.at(i);
        return *this;
    }
    Taylor& operator-=(const Taylor& o) {
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.at(i);
        return *this;
    }
    Taylor& operator*=(const T& s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
    friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
    friend Taylor operator*(Taylor a, const T& s) { return a *= s; }
    friend Taylor operator*(const T& s, Taylor a) { return a *= s; }

    friend Taylor operator*(const Taylor& a, const Taylor& b) {
        Taylor r(a.order());
        for (std::size_t i = 0; i <= a.order(); ++i) {
            if (a.c_[i] == T(0)) continue;
            for (std::size_t j = 0; i + j <= a.order(); ++j) r.c_[i + j] += a.c_[i] * b.at(j);
        }
        return r;
    }

    /// x * d/dx
    Taylor euler() const {
        Taylor r(order());
        for (std::size_t i = 1; i <= order(); ++i) r.c_[i] = T(static_cast<long>(i)) * c_[i];
        return r;
    }

    Taylor derivative() const {
        Taylor r(order());
        for (std::size_t i = 1; i <= order(); ++i) r.c_[i - 1] = T(static_cast<long>(i)) * c_[i];
        return r;
    }

private:
    std::vector<T> c_;
};

/// f^alpha for f(0) = 1, by the recurrence from g' f = alpha f' g.
template <class T>
Taylor<T> pow_series(const Taylor<T>& f, const T& alpha) {
    require(f[0] == T(1), "pow_series: constant term must be 1");
    const std::size_t m = f.order();
    Taylor<T> g(m);
    g[0] = T(1);
    for (std::size_t k = 1; k <= m; ++k) {
        T acc(0);
        for (std::size_t j = 1; j <= k; ++j) {
            if (f[j] == T(0)) continue;
            acc += (alpha * T(static_cast<long>(j)) - T(static_cast<long>(k - j))) * f[j] * g[k - j];
        }
        g[k] = acc / T(static_cast<long>(k));
    }
    return g;
}

template <class T>
Taylor<T> inverse_series(const Taylor<T>& f) {
    require(f[0] != T(0), "inverse_series: zero constant term");
    const std::size_t m = f.order();
    Taylor<T> g(m);
    g[0] = T(1) / f[0];
    for (std::size_t k = 1; k <= m; ++k) {
        T acc(0);
        for (std::size_t j = 1; j <= k; ++j) acc += f[j] * g[k - j];
        g[k] = -acc / f[0];
    }
    return g;
}

/// arctan(x) = sum (-1)^m x^{2m+1} / (2m+1)
template <class T>
Taylor<T> atan_series(std::size_t order) {
    Taylor<T> t(order);
    for (std::size_t k = 1; k <= order; k += 2) {
        const long m = static_cast<long>(k / 2);
        t[k] = T(m % 2 == 0 ? 1 : -1) / T(static_cast<long>(k));
    }
    return t;
}

}  // namespace dslab
