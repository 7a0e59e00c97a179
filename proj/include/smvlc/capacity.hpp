#pragma once

// Mutual information of the SM-VLC channel under input-dependent Gaussian
// noise: exact value by numerical expectation (Gauss-Hermite quadrature or
// Monte Carlo), the closed-form lower bound, the high/low-SNR limits, the
// constant asymptotic gap, and the precoded variant of the bound.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smvlc/cabm.hpp"
#include "smvlc/gauss_hermite.hpp"
#include "smvlc/link.hpp"
#include "smvlc/rng.hpp"

namespace smvlc {

enum class MiMethod { quadrature, monte_carlo, closed_form };

struct MiEstimate {
    double value = 0.0;
    double std_error = 0.0;
    MiMethod method = MiMethod::closed_form;
    bool degenerate = false;
};

namespace detail {

struct Mixture {
    std::vector<double> r;       // received point values (w h x)
    std::vector<double> v;       // 1 + r varsigma^2
    std::vector<double> ln_v;
    std::vector<bool> in_xi;     // branch of each point
    int a = 0;                   // M - 2^p
    int b = 0;                   // 2^{p+1} - M
    int p = 0, q = 0;
    double sigma_sq = 1.0;
};

inline Mixture make_mixture(const MappingPlan& plan, const ChannelGains& gains,
                            const NoiseModel& noise,
                            const std::vector<double>* weights = nullptr) {
    Mixture mx;
    const auto pts = enumerate_points(plan, gains);
    if (weights && weights->size() != pts.size())
        throw std::invalid_argument("precoding weight count differs from signal point count");
    mx.r.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double w = weights ? (*weights)[i] : 1.0;
        const double r = w * pts[i].h * pts[i].x;
        mx.r.push_back(r);
        mx.v.push_back(1.0 + r * noise.varsigma_sq);
        mx.ln_v.push_back(std::log(mx.v.back()));
        mx.in_xi.push_back(pts[i].in_xi);
    }
    mx.a = plan.M - (1 << plan.p);
    mx.b = (1 << (plan.p + 1)) - plan.M;
    mx.p = plan.p;
    mx.q = plan.q;
    mx.sigma_sq = noise.sigma_sq;
    return mx;
}

// Entropy-like constant of the exact expression (first line of the theorem).
inline double mi_const(int a, int b, int p, int q) {
    const double G = (static_cast<double>(a) * a + static_cast<double>(b) * b) / std::pow(4.0, p);
    double c = G * (p + 1);
    if (a > 0) c += a / std::pow(2.0, p) * std::log2(std::pow(2.0, p + q - 1) / a);
    c += b / std::pow(2.0, p) * std::log2(std::pow(2.0, p + q) / b);
    return c;
}

// log of the weighted mixture sum at observation offset z from point i's
// mean, max-shift stabilized. wa/wb weight the two branch sub-sums.
inline double ln_mixture(const Mixture& mx, std::size_t i, double z, double wa, double wb) {
    const double ln_wa = (wa > 0.0) ? std::log(wa) : 0.0;
    const double ln_wb = std::log(wb);
    double best = -std::numeric_limits<double>::infinity();
    thread_local std::vector<double> terms;
    terms.clear();
    for (std::size_t j = 0; j < mx.r.size(); ++j) {
        if (!mx.in_xi[j] && wa == 0.0) continue;
        const double dz = z + (mx.r[i] - mx.r[j]);
        const double lc = (mx.in_xi[j] ? ln_wb : ln_wa) -
                          dz * dz / (2.0 * mx.v[j] * mx.sigma_sq) - 0.5 * mx.ln_v[j];
        terms.push_back(lc);
        if (lc > best) best = lc;
    }
    double s = 0.0;
    for (double lc : terms) s += std::exp(lc - best);
    return best + std::log(s);
}

// Integrand of the expectation for point i: ln(numerator) - ln(mixture).
inline double mi_integrand(const Mixture& mx, std::size_t i, double z) {
    double wa = 1.0, wb = 1.0, extra = 0.0;
    if (mx.in_xi[i]) {
        wa = (mx.b > 0) ? static_cast<double>(mx.a) / mx.b : 0.0;
        extra = -std::log(2.0);
    } else {
        wb = static_cast<double>(mx.b) / mx.a;
    }
    const double ln_num =
        -z * z / (2.0 * mx.v[i] * mx.sigma_sq) - 0.5 * mx.ln_v[i] + extra;
    return ln_num - ln_mixture(mx, i, z, wa, wb);
}

inline double point_coefficient(const Mixture& mx, std::size_t i) {
    const double denom = std::pow(2.0, 2 * mx.p + mx.q);
    return (mx.in_xi[i] ? mx.b : mx.a) / denom;
}

inline bool is_degenerate(const Mixture& mx) {
    double lo = mx.r.front(), hi = mx.r.front();
    for (double r : mx.r) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return hi - lo <= 1e-295;
}

inline double mi_quadrature_value(const Mixture& mx, int nodes) {
    const auto gh = gauss_hermite(nodes);
    const double inv_sqrt_pi = 0.5641895835477562869480795;
    double total = mi_const(mx.a, mx.b, mx.p, mx.q);
    for (std::size_t i = 0; i < mx.r.size(); ++i) {
        const double coef = point_coefficient(mx, i);
        if (coef == 0.0) continue;
        const double scale = std::sqrt(2.0 * mx.v[i] * mx.sigma_sq);
        double acc = 0.0;
        for (std::size_t k = 0; k < gh.nodes.size(); ++k)
            acc += gh.weights[k] * mi_integrand(mx, i, scale * gh.nodes[k]);
        total += coef * acc * inv_sqrt_pi / std::log(2.0);
    }
    return total;
}

} // namespace detail

// Exact mutual information. Quadrature evaluates every expectation with the
// given node count (the reported std_error is a half-node refinement
// estimate); Monte Carlo splits `budget` draws across the signal points and
// reports the propagated standard error.
inline MiEstimate mutual_information(const MappingPlan& plan, const ChannelGains& gains,
                                     const NoiseModel& noise, MiMethod method = MiMethod::quadrature,
                                     std::uint64_t budget = 0, std::uint64_t seed = 0x5eed) {
    const auto mx = detail::make_mixture(plan, gains, noise);
    MiEstimate est;
    est.method = method;
    est.degenerate = detail::is_degenerate(mx);
    if (method == MiMethod::quadrature) {
        const int nodes = budget ? static_cast<int>(budget) : 96;
        est.value = detail::mi_quadrature_value(mx, nodes);
        const double coarse = detail::mi_quadrature_value(mx, (nodes + 1) / 2);
        est.std_error = std::abs(est.value - coarse);
    } else if (method == MiMethod::monte_carlo) {
        const std::uint64_t draws = budget ? budget : 100000;
        const std::uint64_t per_point =
            std::max<std::uint64_t>(2, draws / mx.r.size());
        double total = detail::mi_const(mx.a, mx.b, mx.p, mx.q);
        double var_sum = 0.0;
        const double ln2 = std::log(2.0);
        for (std::size_t i = 0; i < mx.r.size(); ++i) {
            const double coef = detail::point_coefficient(mx, i);
            if (coef == 0.0) continue;
            Rng rng(seed, i);
            const double sd = std::sqrt(mx.v[i] * mx.sigma_sq);
            double mean = 0.0, m2 = 0.0;
            for (std::uint64_t s = 0; s < per_point; ++s) {
                const double f = detail::mi_integrand(mx, i, sd * rng.normal()) / ln2;
                const double delta = f - mean;
                mean += delta / static_cast<double>(s + 1);
                m2 += delta * (f - mean);
            }
            total += coef * mean;
            const double var_mean = m2 / (static_cast<double>(per_point) - 1.0) /
                                    static_cast<double>(per_point);
            var_sum += coef * coef * var_mean;
        }
        est.value = total;
        est.std_error = std::sqrt(var_sum);
    } else {
        throw std::invalid_argument("mutual_information: method must be quadrature or monte-carlo");
    }
    return est;
}

namespace detail {

inline double lb_value(const Mixture& mx) {
    const double log2e = std::log2(std::exp(1.0));
    const double G =
        (static_cast<double>(mx.a) * mx.a + static_cast<double>(mx.b) * mx.b) / std::pow(4.0, mx.p);
    double total = G * (mx.p + 1 - 0.5 * log2e);
    if (mx.a > 0)
        total += mx.a / std::pow(2.0, mx.p) * std::log2(std::pow(2.0, mx.p + mx.q - 1) / mx.a);
    total += mx.b / std::pow(2.0, mx.p) * std::log2(std::pow(2.0, mx.p + mx.q) / mx.b);
    for (std::size_t i = 0; i < mx.r.size(); ++i) {
        const double coef = point_coefficient(mx, i);
        if (coef == 0.0) continue;
        double wa = 1.0, wb = 1.0;
        bool b_branch = mx.in_xi[i];
        if (b_branch)
            wa = (mx.b > 0) ? static_cast<double>(mx.a) / mx.b : 0.0;
        else
            wb = static_cast<double>(mx.b) / mx.a;
        double s = 0.0;
        for (std::size_t j = 0; j < mx.r.size(); ++j) {
            if (!mx.in_xi[j] && wa == 0.0) continue;
            const double d = mx.r[i] - mx.r[j];
            const double kernel = std::exp(-d * d / (4.0 * mx.v[j] * mx.sigma_sq));
            const double ratio = b_branch ? std::sqrt(2.0 * mx.v[i]) / std::sqrt(mx.v[j])
                                          : std::sqrt(mx.v[i]) / std::sqrt(2.0 * mx.v[j]);
            s += (mx.in_xi[j] ? wb : wa) * ratio * kernel;
        }
        total -= coef * std::log2(s);
    }
    return total;
}

} // namespace detail

// Closed-form lower bound on the mutual information.
inline MiEstimate mi_lower_bound(const MappingPlan& plan, const ChannelGains& gains,
                                 const NoiseModel& noise) {
    const auto mx = detail::make_mixture(plan, gains, noise);
    MiEstimate est;
    est.method = MiMethod::closed_form;
    est.degenerate = detail::is_degenerate(mx);
    est.value = detail::lb_value(mx);
    return est;
}

// Lower bound with per-point precoding weights w_{m,i} replacing h_m x_i by
// w_{m,i} h_m x_i throughout.
inline MiEstimate mi_lower_bound_precoded(const MappingPlan& plan, const ChannelGains& gains,
                                          const NoiseModel& noise,
                                          const std::vector<double>& weights) {
    const auto mx = detail::make_mixture(plan, gains, noise, &weights);
    MiEstimate est;
    est.method = MiMethod::closed_form;
    est.degenerate = detail::is_degenerate(mx);
    est.value = detail::lb_value(mx);
    return est;
}

// High-SNR limit of the exact mutual information (constants only).
inline double mi_high_snr_limit(const MappingPlan& plan) {
    const int a = plan.M - (1 << plan.p);
    const int b = (1 << (plan.p + 1)) - plan.M;
    if (a == 0) return plan.p + plan.q;  // log2(M N)
    double c = (static_cast<double>(a) * a * (plan.p + 1) + static_cast<double>(b) * b * plan.p) /
               std::pow(4.0, plan.p);
    c += a / std::pow(2.0, plan.p) * std::log2(std::pow(2.0, plan.p + plan.q - 1) / a);
    c += b / std::pow(2.0, plan.p) * std::log2(std::pow(2.0, plan.p + plan.q) / b);
    return c;
}

namespace detail {

// The two z-free ratio log-sums shared by the low-SNR limits of the exact
// expression and of the bound.
inline std::pair<double, double> ratio_logsums(const Mixture& mx) {
    double sA = 0.0, sB = 0.0;
    for (std::size_t i = 0; i < mx.r.size(); ++i) {
        double totA = 0.0, totB = 0.0;
        for (std::size_t j = 0; j < mx.r.size(); ++j) {
            const double ratio = std::sqrt(mx.v[i]) / std::sqrt(mx.v[j]);
            if (mx.in_xi[j])
                totB += ratio;
            else
                totA += ratio;
        }
        if (mx.in_xi[i]) {
            const double wa = (mx.b > 0 && mx.a > 0) ? static_cast<double>(mx.a) / mx.b : 0.0;
            sB += std::log2(wa * totA + totB);
        } else {
            sA += std::log2(totA + static_cast<double>(mx.b) / mx.a * totB);
        }
    }
    return {sA, sB};
}

} // namespace detail

// Low-SNR limit of the exact mutual information, closed form.
inline double mi_low_snr_limit(const MappingPlan& plan, const ChannelGains& gains,
                               double varsigma) {
    NoiseModel noise{1.0, varsigma * varsigma};
    const auto mx = detail::make_mixture(plan, gains, noise);
    const auto [sA, sB] = detail::ratio_logsums(mx);
    const double denom = std::pow(2.0, 2 * mx.p + mx.q);
    return mi_high_snr_limit(plan) - mx.a / denom * sA - mx.b / denom * sB;
}

// High-SNR limit of the lower bound.
inline double lb_high_snr_limit(const MappingPlan& plan) {
    const int a = plan.M - (1 << plan.p);
    const int b = (1 << (plan.p + 1)) - plan.M;
    const double log2e = std::log2(std::exp(1.0));
    if (a == 0) return plan.p + plan.q - 0.5 * (log2e - 1.0);
    double c = (static_cast<double>(a) * a * (plan.p + 1.5 - 0.5 * log2e) +
                static_cast<double>(b) * b * (plan.p + 0.5 - 0.5 * log2e)) /
               std::pow(4.0, plan.p);
    c += a / std::pow(2.0, plan.p) * std::log2(std::pow(2.0, plan.p + plan.q - 1) / a);
    c += b / std::pow(2.0, plan.p) * std::log2(std::pow(2.0, plan.p + plan.q) / b);
    return c;
}

// Low-SNR limit of the lower bound.
inline double lb_low_snr_limit(const MappingPlan& plan, const ChannelGains& gains,
                               double varsigma) {
    NoiseModel noise{1.0, varsigma * varsigma};
    const auto mx = detail::make_mixture(plan, gains, noise);
    const auto [sA, sB] = detail::ratio_logsums(mx);
    const double denom = std::pow(2.0, 2 * mx.p + mx.q);
    return lb_high_snr_limit(plan) - mx.a / denom * sA - mx.b / denom * sB;
}

// Constant gap between the exact mutual information and its lower bound in
// both asymptotic regimes.
inline double asymptotic_gap(const MappingPlan& plan) {
    const int a = plan.M - (1 << plan.p);
    const int b = (1 << (plan.p + 1)) - plan.M;
    const double log2e = std::log2(std::exp(1.0));
    if (a == 0) return 0.5 * (log2e - 1.0);
    return (static_cast<double>(a) * a + static_cast<double>(b) * b) /
           (2.0 * std::pow(4.0, plan.p)) * (log2e - 1.0);
}

namespace detail {

// Decomposition of the total information into the space part I(h;y|x) and
// the signal part I(x;y); their sum equals the exact expression identically.
// Kept internal: used by validation suites only.

inline double space_info_given_symbol(const MappingPlan& plan, const ChannelGains& gains,
                                      const NoiseModel& noise, int nodes = 96) {
    const auto gh = gauss_hermite(nodes);
    const double inv_sqrt_pi = 0.5641895835477562869480795;
    const int a = plan.M - (1 << plan.p);
    const int b = (1 << (plan.p + 1)) - plan.M;
    const double G =
        (static_cast<double>(a) * a + static_cast<double>(b) * b) / std::pow(4.0, plan.p);
    double total = G * (plan.p + 1);
    const double coef_den = std::pow(2.0, 2 * plan.p + plan.q);
    const double vs2 = noise.varsigma_sq;
    for (int led = 0; led < plan.M; ++led) {
        const bool xi_branch = plan.led_in_xi(led);
        const double coef = (xi_branch ? b : a) / coef_den;
        if (coef == 0.0) continue;
        const double hm = gains[static_cast<std::size_t>(led)];
        for (double x : plan.levels_for(led)) {
            const double v = 1.0 + hm * x * vs2;
            const double scale = std::sqrt(2.0 * v * noise.sigma_sq);
            double acc = 0.0;
            for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                const double z = scale * gh.nodes[k];
                const double ln_num =
                    -z * z / (2.0 * v * noise.sigma_sq) - 0.5 * std::log(v);
                double best = -std::numeric_limits<double>::infinity();
                std::vector<double> terms;
                for (int led2 = 0; led2 < plan.M; ++led2) {
                    if (plan.led_in_xi(led2) != xi_branch) continue;
                    const double h2 = gains[static_cast<std::size_t>(led2)];
                    const double v2 = 1.0 + h2 * x * vs2;
                    const double dz = z + (hm * x - h2 * x);
                    double lc = -dz * dz / (2.0 * v2 * noise.sigma_sq) - 0.5 * std::log(v2);
                    if (xi_branch) lc += std::log(2.0);
                    terms.push_back(lc);
                    best = std::max(best, lc);
                }
                double s = 0.0;
                for (double lc : terms) s += std::exp(lc - best);
                acc += gh.weights[k] * (ln_num - best - std::log(s));
            }
            total += coef * acc * inv_sqrt_pi / std::log(2.0);
        }
    }
    return total;
}

inline double symbol_info(const MappingPlan& plan, const ChannelGains& gains,
                          const NoiseModel& noise, int nodes = 96) {
    const auto gh = gauss_hermite(nodes);
    const double inv_sqrt_pi = 0.5641895835477562869480795;
    const auto mx = make_mixture(plan, gains, noise);
    const int a = mx.a, b = mx.b;
    double total = 0.0;
    if (a > 0) total += a / std::pow(2.0, plan.p) * std::log2(std::pow(2.0, plan.p + plan.q - 1) / a);
    total += b / std::pow(2.0, plan.p) * std::log2(std::pow(2.0, plan.p + plan.q) / b);
    const double coef_den = std::pow(2.0, 2 * plan.p + plan.q);
    const double vs2 = noise.varsigma_sq;
    for (int led = 0; led < plan.M; ++led) {
        const bool xi_branch = plan.led_in_xi(led);
        const double coef = (xi_branch ? b : a) / coef_den;
        if (coef == 0.0) continue;
        const double hm = gains[static_cast<std::size_t>(led)];
        for (double x : plan.levels_for(led)) {
            const double v = 1.0 + hm * x * vs2;
            const double scale = std::sqrt(2.0 * v * noise.sigma_sq);
            // numerator weights follow the output-mixture branch ratios
            double wa = 1.0, wb = 1.0;
            if (xi_branch)
                wa = (b > 0) ? static_cast<double>(a) / b : 0.0;
            else
                wb = static_cast<double>(b) / a;
            double acc = 0.0;
            for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                const double z = scale * gh.nodes[k];
                // numerator: weighted mixture over all pairs
                double best = -std::numeric_limits<double>::infinity();
                std::vector<double> terms;
                for (std::size_t j = 0; j < mx.r.size(); ++j) {
                    if (!mx.in_xi[j] && wa == 0.0) continue;
                    const double dz = z + (hm * x - mx.r[j]);
                    const double lc = (mx.in_xi[j] ? std::log(wb) : ((wa > 0.0) ? std::log(wa) : 0.0)) -
                                      dz * dz / (2.0 * mx.v[j] * noise.sigma_sq) -
                                      0.5 * mx.ln_v[j];
                    terms.push_back(lc);
                    best = std::max(best, lc);
                }
                double s = 0.0;
                for (double lc : terms) s += std::exp(lc - best);
                const double ln_num = best + std::log(s);
                // denominator: same-symbol mixture over the LED's own set
                best = -std::numeric_limits<double>::infinity();
                terms.clear();
                for (int led2 = 0; led2 < plan.M; ++led2) {
                    if (plan.led_in_xi(led2) != xi_branch) continue;
                    const double h2 = gains[static_cast<std::size_t>(led2)];
                    const double v2 = 1.0 + h2 * x * vs2;
                    const double dz = z + (hm * x - h2 * x);
                    const double lc = -dz * dz / (2.0 * v2 * noise.sigma_sq) - 0.5 * std::log(v2);
                    terms.push_back(lc);
                    best = std::max(best, lc);
                }
                s = 0.0;
                for (double lc : terms) s += std::exp(lc - best);
                acc += gh.weights[k] * (ln_num - best - std::log(s));
            }
            total -= coef * acc * inv_sqrt_pi / std::log(2.0);
        }
    }
    return total;
}

} // namespace detail

} // namespace smvlc
