#pragma once

#include <cmath>
#include <optional>

#include <boost/multiprecision/cpp_int.hpp>

#include "dslab/core.hpp"

namespace dslab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Exact rational value of a finite double (every double is dyadic).
inline Rational to_rational(double v) {
    require(std::isfinite(v), "to_rational: non-finite input");
    if (v == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(v, &exp);  // v = mant * 2^exp, |mant| in [0.5, 1)
    // 53 bits of mantissa become an integer.
    auto m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r(m);
    if (exp > 0)
        r *= Rational(BigInt(1) << exp);
    else if (exp < 0)
        r /= Rational(BigInt(1) << (-exp));
    return r;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// sqrt(q) when q >= 0 is the square of a rational, otherwise nullopt.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
    if (q < 0) return std::nullopt;
    BigInt num = boost::multiprecision::numerator(q);
    BigInt den = boost::multiprecision::denominator(q);
    BigInt rn = boost::multiprecision::sqrt(num);
    BigInt rd = boost::multiprecision::sqrt(den);
    if (rn * rn != num || rd * rd != den) return std::nullopt;
    return Rational(rn, rd);
}

inline bool is_integer(const Rational& q) {
    return boost::multiprecision::denominator(q) == 1;
}

}  // namespace dslab
