#pragma once

// Indicial roots of s(n-1-s) = lambda and the derived exponents, regimes and
// symbol ratio that every other module keys off.

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "dslab/core.hpp"
#include "dslab/rational.hpp"

namespace dslab {

enum class Regime { NonIntegerGap, IntegerGap, Threshold, ComplexRoots };

/// Which indicial root a solution or kernel is attached to.
enum class Branch { Plus, Minus };

inline const char* to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::NonIntegerGap: return "NonIntegerGap";
        case Regime::IntegerGap: return "IntegerGap";
        case Regime::Threshold: return "Threshold";
        case Regime::ComplexRoots: return "ComplexRoots";
    }
    return "?";
}

struct SpectralParams {
    int n = 2;
    Real lambda = 0.0;
    Complex s_plus;
    Complex s_minus;
    Complex s_hat_plus;   // s_plus - (n-1)
    Complex s_hat_minus;  // s_minus - (n-1)
    Real l_lambda = 0.0;  // Re sqrt((n-1)^2/4 - lambda)
    Regime regime = Regime::NonIntegerGap;

    // Present when (n-1)^2/4 - lambda is the square of a rational: the roots
    // are then rational and the symbolic recursion path is available.
    std::optional<std::pair<Rational, Rational>> exact_roots;

    Complex gap() const { return s_plus - s_minus; }
    bool real_roots() const { return regime != Regime::ComplexRoots; }
    /// Integer value of s_+ - s_- in the IntegerGap regime, 0 otherwise.
    int integer_gap() const {
        return regime == Regime::IntegerGap ? static_cast<int>(std::lround(gap().real())) : 0;
    }
};

inline constexpr Real kIntegerGapTolerance = 1e-9;

/// Roots, shifted roots, l(lambda) and regime for the Klein-Gordon parameter
/// lambda in dimension n. Regime branching is decided in exact arithmetic
/// whenever the discriminant is a perfect rational square.
inline SpectralParams compute_spectral(int n, Real lambda) {
    if (n < 2) throw InvalidArgument("compute_spectral: dimension n must be >= 2, got " + std::to_string(n));
    require(std::isfinite(lambda), "compute_spectral: lambda must be finite");

    SpectralParams p;
    p.n = n;
    p.lambda = lambda;
    const Real half = 0.5 * (n - 1);

    const Rational disc_exact = Rational(BigInt((n - 1) * (n - 1)), BigInt(4)) - to_rational(lambda);
    const Real disc = to_double(disc_exact);

    if (disc_exact < 0) {
        const Real mu = std::sqrt(-disc);
        p.s_plus = Complex(half, mu);
        p.s_minus = Complex(half, -mu);
        p.l_lambda = 0.0;
        p.regime = Regime::ComplexRoots;
    } else {
        const Real d = std::sqrt(disc);
        const Real sp = half + d;
        // lambda / s_+ avoids cancellation in s_- when lambda is tiny.
        const Real sm = sp != 0.0 ? lambda / sp : half - d;
        p.s_plus = sp;
        p.s_minus = sm;
        p.l_lambda = d;
        if (auto root = exact_sqrt(disc_exact)) {
            const Rational h(BigInt(n - 1), BigInt(2));
            p.exact_roots = std::make_pair(h + *root, h - *root);
            const Rational gap = 2 * *root;
            if (gap == 0)
                p.regime = Regime::Threshold;
            else if (is_integer(gap))
                p.regime = Regime::IntegerGap;
            else
                p.regime = Regime::NonIntegerGap;
        } else {
            const Real gap = 2.0 * d;
            if (gap < kIntegerGapTolerance)
                p.regime = Regime::Threshold;
            else if (gap > 0.5 && std::abs(gap - std::round(gap)) < kIntegerGapTolerance)
                p.regime = Regime::IntegerGap;
            else
                p.regime = Regime::NonIntegerGap;
        }
    }
    p.s_hat_plus = p.s_plus - Real(n - 1);
    p.s_hat_minus = p.s_minus - Real(n - 1);
    return p;
}

enum class WeightRegime { AllPositive, AllNegative, Degenerate };

inline const char* to_string(WeightRegime w) {
    switch (w) {
        case WeightRegime::AllPositive: return "AllPositive";
        case WeightRegime::AllNegative: return "AllNegative";
        case WeightRegime::Degenerate: return "Degenerate";
    }
    return "?";
}

/// Sign classification of the commutator weights for the weight exponent r.
/// The weight l = -(r-1)/2 used elsewhere corresponds to r = 1 - 2l.
inline WeightRegime weight_regime(Real r, const SpectralParams& p) {
    const Real l = p.l_lambda;
    const Real excluded = 1.0 + 2.0 * l;
    const bool at_excluded = std::abs(r - excluded) <= 1e-12 * std::max(1.0, std::abs(r));
    if (r > std::max(0.0, 1.0 - 2.0 * l) && !at_excluded) return WeightRegime::AllPositive;
    if (r < std::min(0.0, 1.0 - 2.0 * l)) return WeightRegime::AllNegative;
    return WeightRegime::Degenerate;
}

/// e^{i pi (s_+ - s_-)}; equals 1 exactly when the gap is an even integer.
inline Complex symbol_ratio(const SpectralParams& p) {
    return std::exp(I * pi * p.gap());
}

inline bool symbol_elliptic(const SpectralParams& p) {
    if (p.exact_roots) {
        const Rational gap = p.exact_roots->first - p.exact_roots->second;
        if (is_integer(gap)) return boost::multiprecision::numerator(gap) % 2 != 0;
        return true;
    }
    return std::abs(symbol_ratio(p) - 1.0) > kIntegerGapTolerance;
}

// JSON: real values are plain numbers, genuinely complex ones {re, im}.
inline nlohmann::json complex_to_json(Complex z) {
    if (z.imag() == 0.0) return z.real();
    return nlohmann::json{{"re", z.real()}, {"im", z.imag()}};
}

inline nlohmann::json to_json(const SpectralParams& p) {
    return nlohmann::json{
        {"n", p.n},
        {"lambda", p.lambda},
        {"s_plus", complex_to_json(p.s_plus)},
        {"s_minus", complex_to_json(p.s_minus)},
        {"s_hat_plus", complex_to_json(p.s_hat_plus)},
        {"s_hat_minus", complex_to_json(p.s_hat_minus)},
        {"l_lambda", p.l_lambda},
        {"regime", to_string(p.regime)},
    };
}

}  // namespace dslab
