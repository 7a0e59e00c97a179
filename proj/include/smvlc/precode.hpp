#pragma once

// Max-min-distance precoding over the received signal space. Each valid
// (LED, symbol) pair gets a positive weight; the average received intensity
// is preserved exactly. The non-smooth max-min objective is relaxed by a
// log-sum-exp soft minimum whose sharpness rho doubles each outer round.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "smvlc/cabm.hpp"
#include "smvlc/capacity.hpp"
#include "smvlc/link.hpp"
#include "smvlc/rng.hpp"

namespace smvlc {

struct PrecodingWeights {
    std::vector<double> w;  // one entry per signal point, enumerate_points order
};

struct SolverConfig {
    double rho_init = 10.0;
    double rho_stop = 1e5;
    int max_inner_iterations = 200;
    double grad_tol = 1e-9;
    int restarts = 8;
    std::uint64_t seed = 1;
};

struct PrecodeResult {
    PrecodingWeights weights;
    int outer_rounds = 0;
    bool converged = true;
    double min_distance = 0.0;           // of the returned weights
    double identity_min_distance = 0.0;  // of all-ones weights
};

// Received signal space w_{m,i} h_m x_i, one value per signal point.
inline std::vector<double> signal_space(const PrecodingWeights& weights,
                                        const ChannelGains& gains, const MappingPlan& plan) {
    const auto pts = enumerate_points(plan, gains);
    if (weights.w.size() != pts.size())
        throw std::invalid_argument("signal_space: weight count differs from signal point count");
    std::vector<double> r(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) r[i] = weights.w[i] * pts[i].h * pts[i].x;
    return r;
}

// Minimum over ordered pairs of distinct labels of |r1 - r2|/sqrt(1 + r2 vs^2),
// normalized by the second point's noise term. Zero iff two points coincide.
inline double min_normalized_distance(const std::vector<double>& points, double varsigma) {
    if (points.size() < 2)
        throw std::domain_error("min_normalized_distance: need at least two points");
    const double vs2 = varsigma * varsigma;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (i == j) continue;
            const double L = std::abs(points[i] - points[j]) / std::sqrt(1.0 + points[j] * vs2);
            best = std::min(best, L);
        }
    return best;
}

// Soft minimum -(1/rho) ln sum exp(-rho L_k); always <= min(L), approaching
// it as rho grows.
inline double soft_min(const std::vector<double>& values, double rho) {
    if (values.empty()) throw std::domain_error("soft_min: empty list");
    if (!(rho > 0.0)) throw std::domain_error("soft_min: rho must be positive");
    double lo = *std::min_element(values.begin(), values.end());
    double s = 0.0;
    for (double v : values) s += std::exp(-rho * (v - lo));
    return lo - std::log(s) / rho;
}

namespace detail {

// Soft-min objective and its gradient with respect to r.
struct SoftMinEval {
    double value = 0.0;
    std::vector<double> grad_r;
};

inline SoftMinEval soft_min_objective(const std::vector<double>& r, double varsigma_sq,
                                      double rho) {
    const std::size_t n = r.size();
    SoftMinEval ev;
    ev.grad_r.assign(n, 0.0);
    // first pass: minimum L and the partition sum
    double lmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double L = std::abs(r[i] - r[j]) / std::sqrt(1.0 + r[j] * varsigma_sq);
            lmin = std::min(lmin, L);
        }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double vj = 1.0 + r[j] * varsigma_sq;
            const double L = std::abs(r[i] - r[j]) / std::sqrt(vj);
            const double e = std::exp(-rho * (L - lmin));
            z += e;
            const double sgn = (r[i] >= r[j]) ? 1.0 : -1.0;
            const double dLdi = sgn / std::sqrt(vj);
            const double dLdj = -sgn / std::sqrt(vj) - L * varsigma_sq / (2.0 * vj);
            ev.grad_r[i] += e * dLdi;
            ev.grad_r[j] += e * dLdj;
        }
    for (std::size_t i = 0; i < n; ++i) ev.grad_r[i] /= z;
    ev.value = lmin - std::log(z) / rho;
    return ev;
}

// One inner maximization at fixed rho over theta, where
// w_i = C exp(theta_i) / sum_j c_j exp(theta_j) keeps the intensity
// constraint satisfied identically and w > 0 by construction.
// Gradient ascent with backtracking; returns true when the gradient norm
// met the tolerance.
inline bool ascend(std::vector<double>& theta, const std::vector<double>& c, double C,
                   double varsigma_sq, double rho, int max_iters, double grad_tol) {
    const std::size_t n = c.size();
    std::vector<double> r(n), grad(n);
    auto eval = [&](const std::vector<double>& th, std::vector<double>* g) {
        double s = 0.0;
        double th_max = *std::max_element(th.begin(), th.end());
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) {
            e[i] = std::exp(th[i] - th_max);
            s += c[i] * e[i];
        }
        const double A = C / s;
        for (std::size_t i = 0; i < n; ++i) r[i] = c[i] * A * e[i];
        const auto ev = soft_min_objective(r, varsigma_sq, rho);
        if (g) {
            double inner = 0.0;
            for (std::size_t k = 0; k < n; ++k) inner += ev.grad_r[k] * r[k];
            for (std::size_t l = 0; l < n; ++l)
                (*g)[l] = r[l] * ev.grad_r[l] - r[l] * inner / C;
        }
        return ev.value;
    };

    double f = eval(theta, &grad);
    double step = 1.0;
    bool hit_tol = false;
    for (int it = 0; it < max_iters; ++it) {
        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm <= grad_tol * (1.0 + std::abs(f))) {
            hit_tol = true;
            break;
        }
        // backtracking line search along the gradient
        std::vector<double> trial(n);
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = theta[i] + step * grad[i];
            const double ft = eval(trial, nullptr);
            if (ft > f + 1e-12 * std::abs(f)) {
                theta = trial;
                f = eval(theta, &grad);
                step *= 1.8;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            hit_tol = true;  // no ascent direction left at line-search resolution
            break;
        }
    }
    return hit_tol;
}

} // namespace detail

// Algorithm: start from unit weights, maximize the soft-min objective under
// the intensity-preservation equality, doubling rho each outer round until
// rho >= rho_stop. Multi-start with seeded perturbations; the result is
// accepted only if it improves both the true minimum normalized distance
// and the precoded information lower bound, otherwise the identity weights
// are returned.
inline PrecodeResult optimize_precoding(const MappingPlan& plan, const ChannelGains& gains,
                                        const NoiseModel& noise, const SolverConfig& config = {}) {
    if (!(config.rho_stop >= config.rho_init && config.rho_init > 0.0))
        throw std::domain_error("optimize_precoding: need rho_stop >= rho_init > 0");
    const auto pts = enumerate_points(plan, gains);
    const std::size_t n = pts.size();
    std::vector<double> c(n);
    double C = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = pts[i].h * pts[i].x;
        C += c[i];
    }
    PrecodeResult result;
    result.weights.w.assign(n, 1.0);
    if (C <= 0.0) return result;  // all points at zero intensity; nothing to precode

    const std::vector<double> identity_r = c;
    result.identity_min_distance =
        min_normalized_distance(identity_r, std::sqrt(noise.varsigma_sq));
    const double identity_bound = mi_lower_bound(plan, gains, noise).value;

    double best_obj = -std::numeric_limits<double>::infinity();
    std::vector<double> best_theta;
    bool all_converged = true;
    int rounds = 0;
    for (int restart = 0; restart < std::max(1, config.restarts); ++restart) {
        std::vector<double> theta(n, 0.0);
        if (restart > 0) {
            Rng rng(config.seed, static_cast<std::uint64_t>(restart));
            for (auto& t : theta) t = 0.25 * rng.normal();
        }
        int this_rounds = 1;
        double rho = config.rho_init;
        bool ok = detail::ascend(theta, c, C, noise.varsigma_sq, rho,
                                 config.max_inner_iterations, config.grad_tol);
        while (rho < config.rho_stop) {
            rho *= 2.0;
            ok = detail::ascend(theta, c, C, noise.varsigma_sq, rho,
                                config.max_inner_iterations, config.grad_tol) && ok;
            ++this_rounds;
        }
        rounds = this_rounds;
        all_converged = all_converged && ok;
        // score the restart by the true objective
        std::vector<double> r(n);
        double s = 0.0;
        const double th_max = *std::max_element(theta.begin(), theta.end());
        for (std::size_t i = 0; i < n; ++i) s += c[i] * std::exp(theta[i] - th_max);
        for (std::size_t i = 0; i < n; ++i) r[i] = c[i] * (C / s) * std::exp(theta[i] - th_max);
        const double obj = min_normalized_distance(r, std::sqrt(noise.varsigma_sq));
        if (obj > best_obj) {
            best_obj = obj;
            best_theta = theta;
        }
    }
    result.outer_rounds = rounds;
    result.converged = all_converged;

    // candidate weights from the best restart
    std::vector<double> w(n);
    {
        double s = 0.0;
        const double th_max = *std::max_element(best_theta.begin(), best_theta.end());
        for (std::size_t i = 0; i < n; ++i) s += c[i] * std::exp(best_theta[i] - th_max);
        const double A = C / s;
        for (std::size_t i = 0; i < n; ++i) w[i] = A * std::exp(best_theta[i] - th_max);
    }
    // exact restoration of the equality (guards against accumulated rounding)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += c[i] * w[i];
        const double fix = C / s;
        for (auto& wi : w) wi *= fix;
    }
    PrecodingWeights cand{w};
    const double cand_dist =
        min_normalized_distance(signal_space(cand, gains, plan), std::sqrt(noise.varsigma_sq));
    const double cand_bound = mi_lower_bound_precoded(plan, gains, noise, w).value;
    if (cand_dist >= result.identity_min_distance - 1e-12 &&
        cand_bound >= identity_bound - 1e-12) {
        result.weights = std::move(cand);
        result.min_distance = cand_dist;
    } else {
        result.min_distance = result.identity_min_distance;  // keep identity
    }
    return result;
}

} // namespace smvlc
