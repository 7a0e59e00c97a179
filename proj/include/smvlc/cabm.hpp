#pragma once

// Channel-adaptive bit mapping: prefix-free space-domain codebook with code
// lengths p and p+1, mixed-order PAM in the signal domain, and the
// channel-adaptive reordering that assigns high PAM orders to strong LEDs.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "smvlc/geometry.hpp"

namespace smvlc {

struct SplitExponent {
    int p;
    bool exact;  // M == 2^p
};

// Largest p with 2^p <= M.
inline SplitExponent split_exponent(int M) {
    if (M < 2) throw std::domain_error("split_exponent: M must be at least 2");
    int p = 0;
    while ((1 << (p + 1)) <= M) ++p;
    return {p, (1 << p) == M};
}

// N equally spaced strictly positive intensity levels 2 P_t k/(N+1),
// k = 1..N, with arithmetic mean exactly P_t.
inline std::vector<double> pam_levels(int N, double Pt) {
    if (N < 1 || (N & (N - 1)) != 0)
        throw std::domain_error("pam_levels: order must be a power of two");
    if (!(Pt > 0.0)) throw std::domain_error("pam_levels: average power must be positive");
    std::vector<double> levels(N);
    for (int k = 1; k <= N; ++k) levels[k - 1] = 2.0 * Pt * k / (N + 1);
    return levels;
}

inline std::uint32_t binary_to_gray(std::uint32_t v) { return v ^ (v >> 1); }
inline std::uint32_t gray_to_binary(std::uint32_t g) {
    std::uint32_t v = g;
    for (std::uint32_t shift = 1; shift < 32; shift <<= 1) v ^= v >> shift;
    return v;
}

// Space-domain codebook for a given LED ordering. Positions 0..n_high-1 of
// the ordering get the p-bit codes (set Xi); the next M-2^p positions (Psi)
// get their p-bit pattern extended with '0'; the final M-2^p positions (Phi)
// reuse the Psi patterns extended with '1'. Kraft sum is exactly 1.
inline std::vector<std::string> build_space_codebook(int M, const std::vector<int>& order) {
    if (M < 1) throw std::domain_error("build_space_codebook: M must be positive");
    int p = 0;
    while ((1 << (p + 1)) <= M) ++p;
    const int n_high = (1 << (p + 1)) - M;  // |Xi|; equals M when M = 2^p
    auto bits_of = [](int value, int width) {
        std::string s(static_cast<std::size_t>(width), '0');
        for (int i = 0; i < width; ++i)
            if (value & (1 << (width - 1 - i))) s[static_cast<std::size_t>(i)] = '1';
        return s;
    };
    std::vector<std::string> codebook(static_cast<std::size_t>(M));
    for (int pos = 0; pos < M; ++pos) {
        std::string code;
        if (pos < n_high) {
            code = bits_of(pos, p);
        } else if (pos < (1 << p)) {
            code = bits_of(pos, p) + '0';
        } else {
            const int partner = pos - (1 << p) + n_high;
            code = bits_of(partner, p) + '1';
        }
        codebook[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = code;
    }
    return codebook;
}

struct MappingPlan {
    int M = 0;
    int K = 0;
    int p = 0;
    int q = 0;
    bool exact_power = false;
    double avg_power = 1.0;
    bool gray_labeling = false;
    std::vector<int> led_order;   // position -> LED (0-based)
    std::vector<int> pos_of_led;  // LED -> position
    int n_high = 0;               // |Xi|
    std::vector<std::string> codebook;  // by LED
    std::vector<int> pam_order;         // by LED
    std::vector<double> levels_a;       // 2^{q-1} levels (sets Psi/Phi); empty when M = 2^p
    std::vector<double> levels_b;       // 2^q levels (set Xi)

    bool led_in_xi(int led) const { return pos_of_led[static_cast<std::size_t>(led)] < n_high; }
    const std::vector<double>& levels_for(int led) const {
        return led_in_xi(led) ? levels_b : levels_a;
    }
    int space_bits(int led) const { return led_in_xi(led) ? p : p + 1; }
    int signal_bits(int led) const { return K - space_bits(led); }
};

struct ModOrderCombination {
    std::vector<int> orders;  // per LED
    double score = 0.0;       // normalized minimum distance of the winning assignment
};

struct EncodedSymbol {
    int led = 0;
    int sym = 0;
};

// One labeled point of the received signal space per valid (LED, symbol)
// pair, enumerated LED-major with ascending symbol index.
struct SignalPoint {
    int led = 0;
    int sym = 0;
    double h = 0.0;
    double x = 0.0;
    bool in_xi = false;
};

inline std::vector<SignalPoint> enumerate_points(const MappingPlan& plan,
                                                 const ChannelGains& gains) {
    if (static_cast<int>(gains.size()) != plan.M)
        throw std::invalid_argument("enumerate_points: gain count differs from plan");
    std::vector<SignalPoint> pts;
    for (int led = 0; led < plan.M; ++led) {
        const auto& lv = plan.levels_for(led);
        for (int i = 0; i < static_cast<int>(lv.size()); ++i)
            pts.push_back({led, i, gains[static_cast<std::size_t>(led)],
                           lv[static_cast<std::size_t>(i)], plan.led_in_xi(led)});
    }
    return pts;
}

// Minimum over ordered pairs of distinct (LED, symbol) labels of
// |h x - h' x'| / sqrt(1 + h x varsigma^2), normalized by the first
// (transmitted) point's noise term.
inline double d_min_prime(const ChannelGains& gains, const MappingPlan& plan, double varsigma) {
    const auto pts = enumerate_points(plan, gains);
    if (pts.size() < 2) throw std::domain_error("d_min_prime: fewer than 2 signal points");
    const double vs2 = varsigma * varsigma;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : pts) {
        const double denom = std::sqrt(1.0 + a.h * a.x * vs2);
        for (const auto& b : pts) {
            if (a.led == b.led && a.sym == b.sym) continue;
            best = std::min(best, std::abs(a.h * a.x - b.h * b.x) / denom);
        }
    }
    return best;
}

namespace detail {

// Score of a modulation-order assignment: the minimum PEP-dominant distance
// over each active LED's own constellation (ordered pairs, transmitted
// point's variance in the denominator). Cross-LED terms are excluded; they
// would be zeroed by shared intensity levels and carry no information about
// the order assignment itself.
inline double order_assignment_score(const ChannelGains& gains, const std::vector<int>& orders,
                                     double Pt, double varsigma) {
    const double vs2 = varsigma * varsigma;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < gains.size(); ++m) {
        const double h = gains[m];
        const auto lv = pam_levels(orders[m], Pt);
        for (std::size_t i = 0; i < lv.size(); ++i)
            for (std::size_t j = 0; j < lv.size(); ++j) {
                if (i == j) continue;
                const double d = h * std::abs(lv[i] - lv[j]) / std::sqrt(1.0 + h * lv[i] * vs2);
                best = std::min(best, d);
            }
    }
    return best;
}

} // namespace detail

// Exhaustive search over all C(M, 2^{p+1}-M) order assignments subject to
// the multiplicity constraints: 2^{p+1}-M LEDs carry 2^q-ary PAM and
// 2(M-2^p) LEDs carry 2^{q-1}-ary PAM. Ties resolve to the
// lexicographically smallest order vector.
inline ModOrderCombination optimize_orders(const ChannelGains& gains, int K, double varsigma,
                                           double Pt = 1.0) {
    const int M = static_cast<int>(gains.size());
    const auto se = split_exponent(M);
    const int q = K - se.p;
    if (q < 1) throw std::domain_error("optimize_orders: K too small, need q = K - p >= 1");
    const int hi = 1 << q;
    const int lo = 1 << (q - 1);
    if (se.exact) {
        ModOrderCombination out{std::vector<int>(static_cast<std::size_t>(M), hi), 0.0};
        out.score = detail::order_assignment_score(gains, out.orders, Pt, varsigma);
        return out;
    }
    if (M > 24)
        throw std::domain_error("optimize_orders: exhaustive search limited to M <= 24");
    const int n_high = (1 << (se.p + 1)) - M;

    ModOrderCombination best;
    best.score = -std::numeric_limits<double>::infinity();
    std::vector<int> comb(static_cast<std::size_t>(n_high));
    std::iota(comb.begin(), comb.end(), 0);
    auto lex_less = [](const std::vector<int>& a, const std::vector<int>& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    };
    for (;;) {
        std::vector<int> orders(static_cast<std::size_t>(M), lo);
        for (int idx : comb) orders[static_cast<std::size_t>(idx)] = hi;
        const double sc = detail::order_assignment_score(gains, orders, Pt, varsigma);
        if (sc > best.score || (sc == best.score && lex_less(orders, best.orders))) {
            best.orders = std::move(orders);
            best.score = sc;
        }
        // next combination
        int i = n_high - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == M - n_high + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n_high; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best;
}

// Assemble the full mapping plan. When `adaptive` is set the LED ordering
// sorts by optimized modulation order (descending), then channel gain
// (descending), then index; otherwise the natural order is used as the
// fixed-order baseline.
inline MappingPlan build_plan(const ChannelGains& gains, int K, double varsigma, bool adaptive,
                              double Pt = 1.0, bool gray_labeling = false) {
    const int M = static_cast<int>(gains.size());
    if (M < 1) throw std::domain_error("build_plan: no channel gains");
    MappingPlan plan;
    plan.M = M;
    plan.K = K;
    if (M == 1) {
        // single-transmitter degenerate case: every bit is a signal bit
        plan.p = 0;
        plan.exact_power = true;
    } else {
        const auto se = split_exponent(M);
        plan.p = se.p;
        plan.exact_power = se.exact;
    }
    plan.q = K - plan.p;
    if (plan.q < 1) throw std::domain_error("build_plan: K too small, need q = K - p >= 1");
    plan.avg_power = Pt;
    plan.gray_labeling = gray_labeling;
    plan.n_high = (1 << (plan.p + 1)) - M;

    std::vector<int> orders(static_cast<std::size_t>(M), 1 << plan.q);
    if (adaptive && !plan.exact_power)
        orders = optimize_orders(gains, K, varsigma, Pt).orders;

    plan.led_order.resize(static_cast<std::size_t>(M));
    std::iota(plan.led_order.begin(), plan.led_order.end(), 0);
    if (adaptive) {
        std::sort(plan.led_order.begin(), plan.led_order.end(), [&](int a, int b) {
            const auto sa = static_cast<std::size_t>(a);
            const auto sb = static_cast<std::size_t>(b);
            if (orders[sa] != orders[sb]) return orders[sa] > orders[sb];
            if (gains[sa] != gains[sb]) return gains[sa] > gains[sb];
            return a < b;
        });
    }
    plan.pos_of_led.resize(static_cast<std::size_t>(M));
    for (int pos = 0; pos < M; ++pos)
        plan.pos_of_led[static_cast<std::size_t>(plan.led_order[static_cast<std::size_t>(pos)])] = pos;

    plan.codebook = build_space_codebook(M, plan.led_order);
    plan.levels_b = pam_levels(1 << plan.q, Pt);
    if (!plan.exact_power && plan.q >= 1)
        plan.levels_a = pam_levels(1 << (plan.q - 1), Pt);
    plan.pam_order.resize(static_cast<std::size_t>(M));
    for (int led = 0; led < M; ++led)
        plan.pam_order[static_cast<std::size_t>(led)] =
            plan.led_in_xi(led) ? (1 << plan.q) : (1 << (plan.q - 1));
    return plan;
}

// Map one K-bit block (MSB first in bit K-1 ... bit 0 of `block`) onto an
// (LED, symbol) pair: longest-prefix match against the space codebook, then
// the remaining bits index the PAM level.
inline EncodedSymbol encode(const MappingPlan& plan, std::uint32_t block) {
    const int K = plan.K;
    auto bit_at = [&](int i) { return (block >> (K - 1 - i)) & 1u; };  // i-th bit, MSB first
    std::uint32_t v = 0;
    for (int i = 0; i < plan.p; ++i) v = (v << 1) | bit_at(i);
    int pos;
    int consumed;
    if (static_cast<int>(v) < plan.n_high) {
        pos = static_cast<int>(v);
        consumed = plan.p;
    } else {
        const std::uint32_t extra = bit_at(plan.p);
        pos = (extra == 0) ? static_cast<int>(v)
                           : static_cast<int>(v) - plan.n_high + (1 << plan.p);
        consumed = plan.p + 1;
    }
    const int led = plan.led_order[static_cast<std::size_t>(pos)];
    std::uint32_t s = 0;
    for (int i = consumed; i < K; ++i) s = (s << 1) | bit_at(i);
    if (plan.gray_labeling) s = gray_to_binary(s);
    return {led, static_cast<int>(s)};
}

// Exact inverse of encode.
inline std::uint32_t decode(const MappingPlan& plan, int led, int sym_index) {
    if (led < 0 || led >= plan.M) throw std::out_of_range("decode: LED index out of range");
    const int nsym = static_cast<int>(plan.levels_for(led).size());
    if (sym_index < 0 || sym_index >= nsym)
        throw std::out_of_range("decode: symbol index out of range for this LED's PAM order");
    const std::string& code = plan.codebook[static_cast<std::size_t>(led)];
    std::uint32_t block = 0;
    for (char c : code) block = (block << 1) | (c == '1' ? 1u : 0u);
    const int sig_bits = plan.K - static_cast<int>(code.size());
    std::uint32_t s = static_cast<std::uint32_t>(sym_index);
    if (plan.gray_labeling) s = binary_to_gray(s);
    return (block << sig_bits) | s;
}

struct Priors {
    std::vector<double> space;  // per LED
    double symbol_a = 0.0;      // per level of set A
    double symbol_b = 0.0;      // per level of set B
};

// Space priors 2^{-p} (Xi) / 2^{-(p+1)} (Psi and Phi); symbol priors
// (M-2^p)/2^{p+q-1} per A level and (2^{p+1}-M)/2^{p+q} per B level.
inline Priors prior_probabilities(const MappingPlan& plan) {
    Priors pr;
    pr.space.resize(static_cast<std::size_t>(plan.M));
    for (int led = 0; led < plan.M; ++led)
        pr.space[static_cast<std::size_t>(led)] =
            plan.led_in_xi(led) ? std::pow(2.0, -plan.p) : std::pow(2.0, -(plan.p + 1));
    const double a = plan.M - (1 << plan.p);
    const double b = (1 << (plan.p + 1)) - plan.M;
    pr.symbol_a = a / std::pow(2.0, plan.p + plan.q - 1);
    pr.symbol_b = b / std::pow(2.0, plan.p + plan.q);
    return pr;
}

} // namespace smvlc
