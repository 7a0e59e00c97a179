#pragma once

// Input-dependent Gaussian noise channel: y = h x + sqrt(h x) z1 + z0 with
// z0 ~ N(0, sigma^2) and z1 ~ N(0, varsigma^2 sigma^2). Conditionally on
// (h, x) the output is N(h x, (1 + h x varsigma^2) sigma^2).

#include <cmath>
#include <stdexcept>

#include "smvlc/rng.hpp"

namespace smvlc {

struct NoiseModel {
    double sigma_sq = 1.0;     // input-independent variance, linear units
    double varsigma_sq = 0.0;  // ratio of input-dependent to input-independent variance

    double variance_at(double hx) const { return (1.0 + hx * varsigma_sq) * sigma_sq; }
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct SnrPoint {
    double gamma = 1.0;  // P_t / sigma^2
    double transmit_power(const NoiseModel& noise) const { return gamma * noise.sigma_sq; }
};

// Gaussian Q-function.
inline double q_function(double u) { return 0.5 * std::erfc(u / std::sqrt(2.0)); }

inline double sample_output(double h, double x, const NoiseModel& noise, Rng& rng) {
    const double hx = h * x;
    if (hx < 0.0) throw std::domain_error("sample_output: negative received intensity");
    return hx + std::sqrt(noise.variance_at(hx)) * rng.normal();
}

inline double log_cond_pdf(double y, double h, double x, const NoiseModel& noise) {
    const double hx = h * x;
    if (hx < 0.0) throw std::domain_error("cond_pdf: negative received intensity");
    const double v = noise.variance_at(hx);
    const double d = y - hx;
    return -0.5 * d * d / v - 0.5 * std::log(2.0 * 3.14159265358979323846 * v);
}

inline double cond_pdf(double y, double h, double x, const NoiseModel& noise) {
    return std::exp(log_cond_pdf(y, h, x, noise));
}

// Pairwise error probability Q(d / (2 sigma sqrt(1 + h x_i varsigma^2))),
// d = |h x_i - h x_j|; the variance is taken at the transmitted symbol x_i.
inline double pep(double x_i, double x_j, double h, const NoiseModel& noise) {
    if (x_i == x_j) throw std::domain_error("pep: symbols coincide");
    const double d = std::abs(h * x_i - h * x_j);
    const double denom = 2.0 * std::sqrt(noise.variance_at(h * x_i));
    return q_function(d / denom);
}

} // namespace smvlc
