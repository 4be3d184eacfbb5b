#pragma once

// Complex Gamma (Lanczos), its reciprocal, and Gauss-Jacobi rules from the
// Golub-Welsch eigenproblem.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dslab/core.hpp"

namespace dslab {

namespace detail {

// g = 7, 9 terms; ~15 digits in the right half plane.
inline constexpr double lanczos_g = 7.0;
inline constexpr double lanczos_c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                        771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline bool is_nonpositive_integer(Complex z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::round(z.real());
}

}  // namespace detail

/// log Gamma(z) for Re z >= 1/2 (principal branch not guaranteed elsewhere).
inline Complex lgamma_right(Complex z) {
    z -= 1.0;
    Complex a = detail::lanczos_c[0];
    for (int i = 1; i < 9; ++i) a += detail::lanczos_c[i] / (z + Real(i));
    const Complex t = z + detail::lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(a);
}

inline Complex gamma(Complex z) {
    if (detail::is_nonpositive_integer(z))
        throw InvalidArgument("gamma: pole at z = " + std::to_string(z.real()));
    if (z.imag() == 0.0) return std::tgamma(z.real());
    if (z.real() < 0.5) return pi / (std::sin(pi * z) * gamma(1.0 - z));
    return std::exp(lgamma_right(z));
}

/// 1/Gamma(z), entire; exactly 0 at the poles.
inline Complex rgamma(Complex z) {
    if (detail::is_nonpositive_integer(z)) return 0.0;
    if (z.imag() == 0.0) return 1.0 / std::tgamma(z.real());
    if (z.real() < 0.5) return std::sin(pi * z) * gamma(1.0 - z) / pi;
    return std::exp(-lgamma_right(z));
}

struct QuadratureRule {
    std::vector<Real> nodes;
    std::vector<Real> weights;
};

/// Nodes/weights for int_{-1}^{1} (1-t)^alpha (1+t)^beta f(t) dt.
inline QuadratureRule gauss_jacobi(int npts, Real alpha, Real beta) {
    require(npts >= 1, "gauss_jacobi: need at least one node");
    require(alpha > -1.0 && beta > -1.0, "gauss_jacobi: weight exponents must exceed -1");
    const Real ab = alpha + beta;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
    for (int k = 0; k < npts; ++k) {
        const Real d = 2.0 * k + ab;
        J(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (d * (d + 2.0));
        if (k + 1 < npts) {
            const Real m = k + 1.0;
            const Real dm = 2.0 * m + ab;
            Real b2;
            if (m == 1.0)
                b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
            else
                b2 = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (dm * dm * (dm + 1.0) * (dm - 1.0));
            J(k, k + 1) = J(k + 1, k) = std::sqrt(b2);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const Real mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                              std::lgamma(ab + 2.0));
    QuadratureRule q;
    q.nodes.resize(npts);
    q.weights.resize(npts);
    for (int i = 0; i < npts; ++i) {
        q.nodes[i] = es.eigenvalues()(i);
        const Real v = es.eigenvectors()(0, i);
        q.weights[i] = mu0 * v * v;
    }
    return q;
}

inline QuadratureRule gauss_legendre(int npts) { return gauss_jacobi(npts, 0.0, 0.0); }

}  // namespace dslab
