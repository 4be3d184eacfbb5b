#pragma once

// Small fitting toolkit: straight-line fits, dense least squares with a
// condition report, and a Nelder-Mead simplex for low-dimensional searches.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dslab/core.hpp"

namespace dslab {

struct LineFit {
    Real slope = 0.0;
    Real intercept = 0.0;
    Real rms = 0.0;
};

inline LineFit linear_fit(const std::vector<Real>& x, const std::vector<Real>& y) {
    require(x.size() == y.size() && x.size() >= 2, "linear_fit: need >= 2 paired samples");
    const auto n = static_cast<Real>(x.size());
    const Real mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const Real my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    Real sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, "linear_fit: abscissae are all equal");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    Real ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Real r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

struct LstsqResult {
    Eigen::VectorXcd coef;
    Real residual = 0.0;   // ||A c - b||_2
    Real condition = 0.0;  // of the column-scaled design matrix
};

/// Least squares with column equilibration. Throws RankDeficient when the
/// scaled design matrix has condition number above max_condition.
inline LstsqResult lstsq(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b, Real max_condition = 1e12) {
    require(A.rows() == b.size() && A.rows() >= A.cols(), "lstsq: shape mismatch or underdetermined");
    Eigen::VectorXd scale(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        scale(j) = A.col(j).norm();
        if (scale(j) == 0.0) throw RankDeficient("lstsq: zero column " + std::to_string(j));
    }
    const Eigen::MatrixXcd As = A * scale.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    LstsqResult r;
    r.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<Real>::infinity();
    if (!(r.condition <= max_condition))
        throw RankDeficient("lstsq: design matrix condition number " + std::to_string(r.condition));
    r.coef = scale.cwiseInverse().asDiagonal() * svd.solve(b);
    r.residual = (A * r.coef - b).norm();
    return r;
}

struct SimplexResult {
    std::vector<Real> x;
    Real value = 0.0;
    int iterations = 0;
};

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Stops when the spread of simplex values drops below ftol.
inline SimplexResult nelder_mead(const std::function<Real(const std::vector<Real>&)>& f, std::vector<Real> x0,
                                 const std::vector<Real>& step, Real ftol = 1e-14, int max_iter = 4000) {
    const std::size_t d = x0.size();
    require(step.size() == d && d > 0, "nelder_mead: step size mismatch");
    std::vector<std::vector<Real>> pts(d + 1, x0);
    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += step[i];
    std::vector<Real> val(d + 1);
    for (std::size_t i = 0; i <= d; ++i) val[i] = f(pts[i]);

    std::vector<std::size_t> ord(d + 1);
    int it = 0;
    for (; it < max_iter; ++it) {
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = ord.front(), worst = ord.back(), second = ord[d - 1];
        if (std::abs(val[worst] - val[best]) <= ftol * (std::abs(val[best]) + ftol)) break;

        std::vector<Real> cen(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < d; ++k) cen[k] += pts[i][k] / Real(d);
        auto along = [&](Real t) {
            std::vector<Real> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = cen[k] + t * (pts[worst][k] - cen[k]);
            return p;
        };
        auto xr = along(-1.0);
        const Real fr = f(xr);
        if (fr < val[best]) {
            auto xe = along(-2.0);
            const Real fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe;
                val[worst] = fe;
            } else {
                pts[worst] = xr;
                val[worst] = fr;
            }
        } else if (fr < val[second]) {
            pts[worst] = xr;
            val[worst] = fr;
        } else {
            auto xc = fr < val[worst] ? along(-0.5) : along(0.5);
            const Real fc = f(xc);
            if (fc < std::min(fr, val[worst])) {
                pts[worst] = xc;
                val[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < d; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin());
    return {pts[best], val[best], it};
}

}  // namespace dslab
