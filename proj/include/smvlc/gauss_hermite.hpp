#pragma once

// Gauss-Hermite nodes and weights (physicists' convention, weight e^{-t^2}),
// computed by Newton iteration on the orthonormal Hermite recurrence.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace smvlc {

struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussHermite gauss_hermite(int n) {
    if (n < 1) throw std::domain_error("gauss_hermite: need at least one node");
    GaussHermite gh;
    gh.nodes.assign(static_cast<std::size_t>(n), 0.0);
    gh.weights.assign(static_cast<std::size_t>(n), 0.0);
    const double pim4 = 0.7511255444649424828587030047762;  // pi^{-1/4}
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * gh.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * gh.nodes[1];
        } else {
            z = 2.0 * z - gh.nodes[static_cast<std::size_t>(i - 2)];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
        }
        gh.nodes[static_cast<std::size_t>(i)] = z;
        gh.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
        gh.weights[static_cast<std::size_t>(i)] = 2.0 / (pp * pp);
        gh.weights[static_cast<std::size_t>(n - 1 - i)] = gh.weights[static_cast<std::size_t>(i)];
    }
    if (n % 2 == 1) gh.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return gh;
}

} // namespace smvlc
