#pragma once

// Finite-difference weights on arbitrary nodes (Fornberg's recursion).

#include <vector>

#include "dslab/core.hpp"

namespace dslab {

/// w[m][j]: weight of f(nodes[j]) in the m-th derivative at x0, m <= max_order.
inline std::vector<std::vector<Real>> fornberg_weights(Real x0, const std::vector<Real>& nodes, int max_order) {
    const int n = static_cast<int>(nodes.size());
    require(n > max_order, "fornberg_weights: need more nodes than the derivative order");
    std::vector<std::vector<Real>> c(max_order + 1, std::vector<Real>(n, 0.0));
    Real c1 = 1.0;
    Real c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_order);
        Real c2 = 1.0;
        const Real c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const Real c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

}  // namespace dslab
