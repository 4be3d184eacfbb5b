#pragma once

// Flat-model Poisson kernel C_s x^s (1 - |y-y'|^2/x^2)_+^s on R^{n-1}, its
// Gamma normalization, and its action on band-limited boundary data.
//
// Writing phi(Y) = g(y - xY), (E g)(x, y) = x^{s+n-1} R_s(phi) with
// R_s(phi) = <(1-|Y|^2)^s, phi> / <(1-|Y|^2)^s, 1>. For Re s <= -1 the pairing
// is continued with
//   <w^s, phi> = <w^{s+1}, ((2s+2+d) phi + E phi)> / (2(s+1)),  w = 1 - |Y|^2,
// whose prefactors cancel in R_s; this also covers s = -k (delta branch).

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "dslab/core.hpp"
#include "dslab/special.hpp"
#include "dslab/spectral.hpp"

namespace dslab {

enum class KernelBranch { PowerLaw, DeltaDerivative };

inline const char* to_string(KernelBranch b) {
    return b == KernelBranch::PowerLaw ? "PowerLaw" : "DeltaDerivative";
}

struct KernelSpec {
    Complex s;
    int n = 2;
    KernelBranch branch = KernelBranch::PowerLaw;
    Complex C_s;  // 1 / pairing
};

namespace detail {

inline bool is_negative_integer(Complex s) {
    return s.imag() == 0.0 && s.real() < 0.0 && s.real() == std::round(s.real());
}

}  // namespace detail

/// <(1-|Y|^2)^s_+, 1> over the unit ball of R^{n-1}
///   = c_{n-2} Gamma((n-1)/2) Gamma(s+1) / (2 Gamma((n-1)/2 + s + 1)),
/// or, at s = -k, the pairing of delta^{(k-1)}(1-|Y|^2) with 1.
inline Complex pairing_constant(Complex s, int n) {
    require(n >= 2, "pairing_constant: n must be >= 2");
    const Real d = n - 1;
    const Complex top = rgamma(s + d / 2 + 1.0);
    if (std::abs(top) == 0.0)
        throw ZeroPairing("pairing vanishes at s = " + std::to_string(s.real()) +
                          " (s in -(n-1)/2 - N_+); lambda is in the excluded set");
    // Nonnegative integer s: |B^d| / prod_{j=1}^{s} (1 + d/(2j)), with the
    // ball volume exact for d <= 3 so the low cases come out clean.
    if (s.imag() == 0.0 && s.real() >= 0.0 && s.real() == std::round(s.real()) && n <= 4) {
        const Real ball = n == 2 ? 2.0 : n == 3 ? pi : 4.0 * pi / 3.0;
        Real r = ball;
        for (int j = 1; j <= static_cast<int>(s.real()); ++j) r /= 1.0 + d / (2.0 * j);
        return r;
    }
    const Real c = std::pow(pi, d / 2);
    if (detail::is_negative_integer(s)) return c * top;  // Gamma(s+1) pole divided out
    return c * gamma(s + 1.0) * top;
}

inline KernelSpec make_kernel(Complex s, int n) {
    KernelSpec k;
    k.s = s;
    k.n = n;
    k.branch = detail::is_negative_integer(s) ? KernelBranch::DeltaDerivative : KernelBranch::PowerLaw;
    k.C_s = 1.0 / pairing_constant(s, n);
    return k;
}

/// Kernel for the s_+ or s_- data of a given spectral parameter (s = s_hat).
inline KernelSpec make_kernel(const SpectralParams& p, Branch br) {
    return make_kernel(br == Branch::Plus ? p.s_hat_plus : p.s_hat_minus, p.n);
}

/// Pointwise kernel value; the delta branch has none.
inline Complex kernel_value(const KernelSpec& k, Real x, const std::vector<Real>& disp) {
    require(x > 0.0, "kernel_value: x must be positive");
    if (k.branch == KernelBranch::DeltaDerivative)
        throw InvalidArgument("kernel_value: delta-derivative kernel has no pointwise values");
    Real d2 = 0.0;
    for (Real v : disp) d2 += v * v;
    const Real w = 1.0 - d2 / (x * x);
    if (w <= 0.0) return 0.0;
    return k.C_s * std::pow(Complex(x), k.s) * std::pow(Complex(w), k.s);
}

/// Finite sum of plane waves c e^{i xi.y} on R^{dim}.
struct BandLimited {
    struct Wave {
        std::vector<Real> xi;
        Complex c;
    };
    int dim = 1;
    std::vector<Wave> waves;

    Complex operator()(const std::vector<Real>& y) const {
        Complex acc = 0.0;
        for (const auto& w : waves) {
            Real ph = 0.0;
            for (int j = 0; j < dim; ++j) ph += w.xi[j] * y[j];
            acc += w.c * std::exp(I * ph);
        }
        return acc;
    }

    Real max_frequency() const {
        Real m = 0.0;
        for (const auto& w : waves) {
            Real r = 0.0;
            for (Real v : w.xi) r += v * v;
            m = std::max(m, std::sqrt(r));
        }
        return m;
    }

    BandLimited shifted(const std::vector<Real>& a) const {
        BandLimited out = *this;
        for (auto& w : out.waves) {
            Real ph = 0.0;
            for (int j = 0; j < dim; ++j) ph += w.xi[j] * a[j];
            w.c *= std::exp(-I * ph);  // g(y - a)
        }
        return out;
    }

    /// cos(k . y) on R^dim.
    static BandLimited cosine(const std::vector<Real>& k) {
        BandLimited g;
        g.dim = static_cast<int>(k.size());
        std::vector<Real> mk(k);
        for (Real& v : mk) v = -v;
        g.waves = {{k, 0.5}, {mk, 0.5}};
        return g;
    }
    static BandLimited constant(int dim, Complex c = 1.0) {
        BandLimited g;
        g.dim = dim;
        g.waves = {{std::vector<Real>(dim, 0.0), c}};
        return g;
    }
};

/// Fourier multiplier of the normalized ball average:
/// R_s(e^{-i z e.Y}) = Gamma(nu+1) (2/z)^nu J_nu(z), nu = s + (n-1)/2, by its
/// entire power series.
inline Complex poisson_symbol(Complex s, int n, Real z) {
    const Complex nu = s + Real(n - 1) / 2;
    const Real q = -0.25 * z * z;
    Complex term = 1.0, acc = 1.0;
    for (int m = 1; m < 400; ++m) {
        term *= q / (Real(m) * (nu + Real(m)));
        acc += term;
        if (std::abs(term) < 1e-17 * std::abs(acc)) break;
    }
    return acc;
}

struct PoissonOptions {
    int radial_nodes = 0;   // 0: automatic from x * max|xi|
    int angular_nodes = 0;  // 0: automatic
    bool regularize = true; // continue Re s <= -1 by integration by parts
};

namespace detail {

struct BallRule {
    std::vector<std::vector<Real>> Y;
    std::vector<Complex> w;  // includes (1-|Y|^2)^{s}
};

// Rule for int_0^1 (1-z)^a z^beta F(z) dz with smooth F, Re a > -1.
inline void radial_rule(Complex a, Real beta, int nr, std::vector<Real>& z, std::vector<Complex>& w) {
    if (a.imag() == 0.0) {
        const auto q = gauss_jacobi(nr, a.real(), beta);
        const Real pref = std::pow(2.0, -a.real() - beta - 1.0);
        for (int i = 0; i < nr; ++i) {
            z.push_back(0.5 * (1.0 + q.nodes[i]));
            w.push_back(pref * q.weights[i]);
        }
        return;
    }
    // (1-z)^{i Im a} oscillates without bound at z = 1: split at 1/2 and use
    // 1 - z = e^{-v} on the rim half, where the integrand becomes
    // e^{-(a+1) v} z^beta F, smooth and exponentially decaying in v.
    const auto q = gauss_jacobi(nr, 0.0, beta);
    const Real pref = std::pow(0.25, beta + 1.0);
    for (int i = 0; i < nr; ++i) {
        const Real zi = 0.25 * (1.0 + q.nodes[i]);
        z.push_back(zi);
        w.push_back(pref * q.weights[i] * std::pow(Complex(1.0 - zi), a));
    }
    const Real decay = a.real() + 1.0;
    const Real vmax = std::log(2.0) + 40.0 / decay;
    const auto gl = gauss_legendre(nr);
    const int panels = 4 + static_cast<int>(std::ceil((vmax - std::log(2.0)) * (1.0 + std::abs(a.imag())) / 4.0));
    const Real hv = (vmax - std::log(2.0)) / panels;
    for (int k = 0; k < panels; ++k)
        for (int i = 0; i < nr; ++i) {
            const Real v = std::log(2.0) + hv * (k + 0.5 * (1.0 + gl.nodes[i]));
            const Real zi = -std::expm1(-v);
            z.push_back(zi);
            w.push_back(0.5 * hv * gl.weights[i] * std::exp(-(a + 1.0) * v) * std::pow(zi, beta));
        }
}

// Quadrature for <(1-|Y|^2)^a, .> on the unit ball of R^d, Re a > -1:
// (1/2) int_0^1 (1-z)^a z^{d/2-1} int_{S^{d-1}} phi(sqrt(z) w) dw dz.
inline BallRule ball_rule(Complex a, int d, int nr, int na) {
    require(a.real() > -1.0, "ball_rule: weight exponent must have real part > -1");
    std::vector<std::vector<Real>> om;
    std::vector<Real> ow;
    if (d == 1) {
        om = {{1.0}, {-1.0}};
        ow = {1.0, 1.0};
    } else if (d == 2) {
        for (int j = 0; j < na; ++j) {
            const Real ph = 2.0 * pi * j / na;
            om.push_back({std::cos(ph), std::sin(ph)});
            ow.push_back(2.0 * pi / na);
        }
    } else if (d == 3) {
        const auto gl = gauss_legendre(std::max(4, na / 2));
        for (std::size_t a2 = 0; a2 < gl.nodes.size(); ++a2) {
            const Real u = gl.nodes[a2], su = std::sqrt(1.0 - u * u);
            for (int j = 0; j < na; ++j) {
                const Real ph = 2.0 * pi * j / na;
                om.push_back({su * std::cos(ph), su * std::sin(ph), u});
                ow.push_back(gl.weights[a2] * 2.0 * pi / na);
            }
        }
    } else {
        throw InvalidArgument("ball_rule: boundary dimension " + std::to_string(d) + " not supported (n <= 4)");
    }
    std::vector<Real> z;
    std::vector<Complex> wz;
    radial_rule(a, 0.5 * d - 1.0, nr, z, wz);
    BallRule br;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const Real rho = std::sqrt(z[i]);
        for (std::size_t j = 0; j < om.size(); ++j) {
            std::vector<Real> y(d);
            for (int c = 0; c < d; ++c) y[c] = rho * om[j][c];
            br.Y.push_back(std::move(y));
            br.w.push_back(0.5 * wz[i] * ow[j]);
        }
    }
    return br;
}

inline int auto_nodes(int requested, Real band) { return requested > 0 ? requested : 24 + 2 * int(std::ceil(band)); }

}  // namespace detail

/// R_s(phi) for a generic phi (no continuation available): Re s > -1 only.
inline Complex ball_average(Complex s, int n, const std::function<Complex(const std::vector<Real>&)>& phi,
                            int nr = 48, int na = 48) {
    if (s.real() <= -1.0)
        throw QuadratureDivergence("ball_average: Re s <= -1 needs derivatives of the data; use band-limited input");
    const auto br = detail::ball_rule(s, n - 1, nr, na);
    Complex acc = 0.0;
    for (std::size_t i = 0; i < br.Y.size(); ++i) acc += br.w[i] * phi(br.Y[i]);
    return acc / pairing_constant(s, n);
}

/// R_s(g(y - x .)) for band-limited g; this is x^{-(s+n-1)} (E g)(x, y) and
/// tends to g(y) as x -> 0.
inline Complex leading_coefficient(const KernelSpec& k, const BandLimited& g, Real x, const std::vector<Real>& y,
                                   const PoissonOptions& opt = {}) {
    require(x > 0.0, "apply_poisson: x must be positive");
    const int d = k.n - 1;
    require(g.dim == d, "apply_poisson: data dimension must be n-1");
    require(static_cast<int>(y.size()) == d, "apply_poisson: point dimension must be n-1");
    const Complex s = k.s;
    int steps = 0;
    if (s.real() <= -1.0) {
        if (!opt.regularize && k.branch == KernelBranch::PowerLaw)
            throw QuadratureDivergence("apply_poisson: (1-|Y|^2)^s not integrable for Re s <= -1");
        steps = static_cast<int>(std::floor(-1.0 - s.real())) + 1;
    }
    const Complex a = s + Real(steps);
    // prod_j (E + c_j) acting on e^q gives P(q) e^q; P held by coefficients
    std::vector<Complex> P{1.0};
    Complex norm = 1.0;
    for (int j = 0; j < steps; ++j) {
        const Complex c = 2.0 * (s + Real(j) + 1.0) + Real(d);
        std::vector<Complex> Q(P.size() + 1, 0.0);
        for (std::size_t m = 0; m < P.size(); ++m) {
            Q[m] += (Real(m) + c) * P[m];
            Q[m + 1] += P[m];
        }
        P = std::move(Q);
        norm *= c;
    }
    if (std::abs(norm) == 0.0) throw ZeroPairing("apply_poisson: continued pairing vanishes");
    const Real band = x * g.max_frequency();
    const int nr = detail::auto_nodes(opt.radial_nodes, band + 2 * steps);
    const int na = detail::auto_nodes(opt.angular_nodes, band);
    const auto br = detail::ball_rule(a, d, nr, na);
    Complex acc = 0.0;
    for (const auto& wv : g.waves) {
        Real phy = 0.0;
        for (int c = 0; c < d; ++c) phy += wv.xi[c] * y[c];
        const Complex base = wv.c * std::exp(I * phy);
        Complex part = 0.0;
        for (std::size_t i = 0; i < br.Y.size(); ++i) {
            Real xy = 0.0;
            for (int c = 0; c < d; ++c) xy += wv.xi[c] * br.Y[i][c];
            const Complex q = -I * x * xy;
            Complex poly = 0.0;
            for (std::size_t m = P.size(); m-- > 0;) poly = poly * q + P[m];
            part += br.w[i] * poly * std::exp(q);
        }
        acc += base * part;
    }
    return acc / (norm * pairing_constant(a, k.n));
}

/// (E g)(x, y).
inline Complex apply_poisson(const KernelSpec& k, const BandLimited& g, Real x, const std::vector<Real>& y,
                             const PoissonOptions& opt = {}) {
    return std::pow(Complex(x), k.s + Real(k.n - 1)) * leading_coefficient(k, g, x, y, opt);
}

inline std::function<Complex(const std::vector<Real>&)> apply_poisson(const KernelSpec& k, const BandLimited& g,
                                                                       Real x, const PoissonOptions& opt = {}) {
    return [=](const std::vector<Real>& y) { return apply_poisson(k, g, x, y, opt); };
}

/// The O(x^2) error of the leading coefficient removed by one Richardson step.
inline Complex leading_coefficient_richardson(const KernelSpec& k, const BandLimited& g, Real x,
                                              const std::vector<Real>& y, const PoissonOptions& opt = {}) {
    const Complex a = leading_coefficient(k, g, x, y, opt);
    const Complex b = leading_coefficient(k, g, 0.5 * x, y, opt);
    return (4.0 * b - a) / 3.0;
}

}  // namespace dslab
