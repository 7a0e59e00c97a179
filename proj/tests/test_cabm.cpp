#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "smvlc/cabm.hpp"
#include "smvlc/io.hpp"
#include "smvlc/rng.hpp"

using namespace smvlc;

namespace {

const ChannelGains kFig4Gains{0.08, 0.15, 0.13, 0.25, 0.01, 0.22};

bool prefix_free(const std::vector<std::string>& codes) {
    for (std::size_t i = 0; i < codes.size(); ++i)
        for (std::size_t j = 0; j < codes.size(); ++j) {
            if (i == j) continue;
            if (codes[j].size() >= codes[i].size() &&
                codes[j].compare(0, codes[i].size(), codes[i]) == 0)
                return false;
        }
    return true;
}

double kraft_sum(const std::vector<std::string>& codes) {
    double s = 0.0;
    for (const auto& c : codes) s += std::pow(2.0, -static_cast<double>(c.size()));
    return s;
}

// independent scoring oracle: per-LED normalized minimum distance,
// written as a direct double loop over each LED's levels
double score_oracle(const ChannelGains& gains, const std::vector<int>& orders, double Pt,
                    double varsigma) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < gains.size(); ++m) {
        std::vector<double> lv(static_cast<std::size_t>(orders[m]));
        for (std::size_t k = 0; k < lv.size(); ++k)
            lv[k] = 2.0 * Pt * static_cast<double>(k + 1) / (orders[m] + 1);
        for (std::size_t i = 0; i < lv.size(); ++i)
            for (std::size_t j = 0; j < lv.size(); ++j)
                if (i != j)
                    best = std::min(best, gains[m] * std::abs(lv[i] - lv[j]) /
                                              std::sqrt(1.0 + gains[m] * lv[i] * varsigma * varsigma));
    }
    return best;
}

// exhaustive-search oracle over every feasible order assignment
std::vector<int> optimize_oracle(const ChannelGains& gains, int K, double varsigma) {
    const int M = static_cast<int>(gains.size());
    const auto se = split_exponent(M);
    const int q = K - se.p;
    const int n_high = (1 << (se.p + 1)) - M;
    std::vector<int> best;
    double best_score = -1.0;
    for (std::uint32_t mask = 0; mask < (1u << M); ++mask) {
        if (__builtin_popcount(mask) != n_high) continue;
        std::vector<int> orders(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m)
            orders[static_cast<std::size_t>(m)] = (mask >> m) & 1 ? (1 << q) : (1 << (q - 1));
        const double sc = score_oracle(gains, orders, 1.0, varsigma);
        if (best.empty() || sc > best_score ||
            (sc == best_score && std::lexicographical_compare(orders.begin(), orders.end(),
                                                              best.begin(), best.end()))) {
            best = orders;
            best_score = sc;
        }
    }
    return best;
}

} // namespace

TEST_CASE("split exponent") {
    CHECK(split_exponent(6).p == 2);
    CHECK_FALSE(split_exponent(6).exact);
    CHECK(split_exponent(8).p == 3);
    CHECK(split_exponent(8).exact);
    CHECK(split_exponent(5).p == 2);
    CHECK_FALSE(split_exponent(5).exact);
    CHECK_THROWS_AS(split_exponent(1), std::domain_error);
}

TEST_CASE("pam levels") {
    const auto lv2 = pam_levels(2, 1.0);
    REQUIRE(lv2.size() == 2);
    CHECK(lv2[0] == Catch::Approx(2.0 / 3.0));
    CHECK(lv2[1] == Catch::Approx(4.0 / 3.0));
    const auto lv8 = pam_levels(8, 0.5);
    REQUIRE(lv8.size() == 8);
    for (int k = 1; k <= 8; ++k) CHECK(lv8[k - 1] == Catch::Approx(2.0 * 0.5 * k / 9.0));
    for (int N : {2, 4, 8, 16, 32}) {
        const auto lv = pam_levels(N, 0.7);
        double mean = 0.0;
        for (double x : lv) {
            CHECK(x > 0.0);
            mean += x;
        }
        CHECK(mean / N == Catch::Approx(0.7).epsilon(1e-14));
        for (std::size_t i = 1; i < lv.size(); ++i) CHECK(lv[i] > lv[i - 1]);
    }
    CHECK_THROWS_AS(pam_levels(3, 1.0), std::domain_error);
    CHECK_THROWS_AS(pam_levels(2, 0.0), std::domain_error);
}

TEST_CASE("space codebook structure") {
    std::vector<int> natural6{0, 1, 2, 3, 4, 5};
    const auto cb6 = build_space_codebook(6, natural6);
    CHECK(cb6 == std::vector<std::string>{"00", "01", "100", "110", "101", "111"});
    CHECK(prefix_free(cb6));
    CHECK(kraft_sum(cb6) == 1.0);

    std::vector<int> natural5{0, 1, 2, 3, 4};
    const auto cb5 = build_space_codebook(5, natural5);
    int len2 = 0, len3 = 0;
    for (const auto& c : cb5) (c.size() == 2 ? len2 : len3)++;
    CHECK(len2 == 3);
    CHECK(len3 == 2);
    CHECK(kraft_sum(cb5) == 1.0);

    std::vector<int> natural4{0, 1, 2, 3};
    const auto cb4 = build_space_codebook(4, natural4);
    for (const auto& c : cb4) CHECK(c.size() == 2);
    CHECK(cb4 == std::vector<std::string>{"00", "01", "10", "11"});
}

TEST_CASE("codebook prefix-free with exact Kraft sum for all M up to 64") {
    for (int M = 2; M <= 64; ++M) {
        std::vector<int> order(static_cast<std::size_t>(M));
        std::iota(order.begin(), order.end(), 0);
        const auto cb = build_space_codebook(M, order);
        CHECK(prefix_free(cb));
        CHECK(kraft_sum(cb) == 1.0);
        const auto se = split_exponent(M);
        int n_short = 0, n_long = 0;
        for (const auto& c : cb) {
            if (static_cast<int>(c.size()) == se.p) ++n_short;
            else if (static_cast<int>(c.size()) == se.p + 1) ++n_long;
        }
        CHECK(n_short + n_long == M);
        CHECK(n_short == (1 << (se.p + 1)) - M);
        CHECK(n_long == 2 * (M - (1 << se.p)));
    }
}

TEST_CASE("order optimization reproduces the six-LED worked example") {
    const auto best = optimize_orders(kFig4Gains, 4, 0.0);
    CHECK(best.orders == std::vector<int>{2, 2, 2, 4, 2, 4});
    // robust to the input-dependent noise ratio
    for (double vs : {10.0, 50.0, 100.0})
        CHECK(optimize_orders(kFig4Gains, 4, vs).orders == std::vector<int>{2, 2, 2, 4, 2, 4});
}

TEST_CASE("order optimization ties resolve to the lexicographically smallest vector") {
    const ChannelGains equal{0.2, 0.2, 0.2, 0.2, 0.2, 0.2};
    CHECK(optimize_orders(equal, 4, 0.0).orders == std::vector<int>{2, 2, 2, 2, 4, 4});
}

TEST_CASE("order optimization equals the exhaustive oracle") {
    Rng rng(314);
    for (int M : {3, 5, 6, 7, 8}) {
        if (M == 8) {
            // power of two: unique all-high combination
            ChannelGains g(8, 0.1);
            CHECK(optimize_orders(g, 5, 0.0).orders == std::vector<int>(8, 4));
            continue;
        }
        for (int rep = 0; rep < 12; ++rep) {
            ChannelGains g(static_cast<std::size_t>(M));
            for (auto& x : g) x = 0.05 + 0.3 * rng.uniform01();
            const double vs = (rep % 2 == 0) ? 0.0 : 25.0;
            CHECK(optimize_orders(g, 5, vs).orders == optimize_oracle(g, 5, vs));
        }
    }
}

TEST_CASE("order optimization argmax invariant under common gain scaling") {
    Rng rng(55);
    for (int rep = 0; rep < 8; ++rep) {
        ChannelGains g(5);
        for (auto& x : g) x = 0.05 + 0.4 * rng.uniform01();
        ChannelGains g_scaled = g;
        const double c = 0.1 + 30.0 * rng.uniform01();
        for (auto& x : g_scaled) x *= c;
        CHECK(optimize_orders(g, 5, 0.0).orders == optimize_orders(g_scaled, 5, 0.0).orders);
    }
}

TEST_CASE("order optimization rejects infeasible bit budget") {
    CHECK_THROWS_AS(optimize_orders(kFig4Gains, 2, 0.0), std::domain_error);  // q = 0
}

TEST_CASE("adaptive plan for the six-LED worked example") {
    const auto plan = build_plan(kFig4Gains, 4, 0.0, true);
    // strongest optimized LEDs first: 4 and 6 (0-based 3 and 5)
    REQUIRE(plan.led_order.size() == 6);
    CHECK(plan.led_order[0] == 3);
    CHECK(plan.led_order[1] == 5);
    CHECK(plan.led_in_xi(3));
    CHECK(plan.led_in_xi(5));
    CHECK(plan.pam_order[3] == 4);
    CHECK(plan.pam_order[5] == 4);
    CHECK(plan.codebook[3].size() == 2);
    CHECK(plan.codebook[5].size() == 2);
    for (int led : {0, 1, 2, 4}) {
        CHECK(plan.pam_order[static_cast<std::size_t>(led)] == 2);
        CHECK(plan.codebook[static_cast<std::size_t>(led)].size() == 3);
    }
    // full adaptive ordering: order desc, then gain desc
    CHECK(plan.led_order == std::vector<int>{3, 5, 1, 2, 0, 4});
}

TEST_CASE("plan for power-of-two M ignores the adaptive order assignment") {
    const ChannelGains g{0.3, 0.1, 0.2, 0.4};
    const auto plan = build_plan(g, 3, 0.0, true);
    CHECK(plan.exact_power);
    for (int led = 0; led < 4; ++led) CHECK(plan.pam_order[static_cast<std::size_t>(led)] == 2);
    CHECK(plan.levels_a.empty());
}

TEST_CASE("three LEDs with five bits mix 16-ary and 8-ary PAM") {
    const ChannelGains g{0.2, 0.3, 0.25};
    const auto plan = build_plan(g, 5, 0.0, true);
    REQUIRE(plan.q == 4);
    int n16 = 0, n8 = 0;
    for (int led = 0; led < 3; ++led)
        (plan.pam_order[static_cast<std::size_t>(led)] == 16 ? n16 : n8)++;
    CHECK(n16 == 1);
    CHECK(n8 == 2);
    CHECK(plan.led_order[0] == 1);  // strongest LED carries the 16-ary PAM
}

TEST_CASE("encode basics") {
    const ChannelGains g4{0.1, 0.2, 0.3, 0.4};
    const auto plan4 = build_plan(g4, 3, 0.0, false);
    // bits 0,0,1: space 00 -> LED 1 (index 0), signal bit 1 -> second level
    const auto s = encode(plan4, 0b001);
    CHECK(s.led == 0);
    CHECK(s.sym == 1);

    const auto plan6 = build_plan(kFig4Gains, 4, 0.0, false);
    // natural order: codes 11x belong to Psi/Phi LEDs carrying 2-PAM
    for (std::uint32_t x : {0u, 1u}) {
        const auto e = encode(plan6, (0b110u << 1) | x);
        CHECK_FALSE(plan6.led_in_xi(e.led));
        CHECK(plan6.pam_order[static_cast<std::size_t>(e.led)] == 2);
        CHECK(e.sym == static_cast<int>(x));
    }
}

TEST_CASE("encode/decode bijection over all blocks") {
    for (int M : {3, 5, 6, 7}) {
        ChannelGains g(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m) g[static_cast<std::size_t>(m)] = 0.1 + 0.05 * m;
        for (bool adaptive : {false, true}) {
            const auto plan = build_plan(g, 5, 0.0, adaptive);
            std::set<std::pair<int, int>> seen;
            for (std::uint32_t block = 0; block < 32; ++block) {
                const auto s = encode(plan, block);
                CHECK(decode(plan, s.led, s.sym) == block);
                seen.insert({s.led, s.sym});
            }
            CHECK(seen.size() == 32);  // bijection onto the valid pairs
        }
    }
}

TEST_CASE("gray labeling round-trips and differs from natural") {
    const ChannelGains g{0.1, 0.2, 0.3, 0.25, 0.15};
    const auto plan = build_plan(g, 5, 0.0, true, 1.0, true);
    bool any_diff = false;
    const auto natural = build_plan(g, 5, 0.0, true, 1.0, false);
    for (std::uint32_t block = 0; block < 32; ++block) {
        const auto s = encode(plan, block);
        CHECK(decode(plan, s.led, s.sym) == block);
        if (encode(natural, block).sym != s.sym) any_diff = true;
    }
    CHECK(any_diff);
    CHECK_THROWS_AS(decode(plan, 0, 99), std::out_of_range);
}

TEST_CASE("bit conservation per LED") {
    for (int M : {3, 5, 6, 7, 12}) {
        ChannelGains g(static_cast<std::size_t>(M), 0.1);
        const auto plan = build_plan(g, 6, 0.0, false);
        for (int led = 0; led < M; ++led) {
            const int space = static_cast<int>(plan.codebook[static_cast<std::size_t>(led)].size());
            const int signal =
                static_cast<int>(std::log2(plan.pam_order[static_cast<std::size_t>(led)]));
            CHECK(space + signal == plan.K);
        }
    }
}

TEST_CASE("priors normalize and match the closed forms") {
    for (int M = 2; M <= 64; ++M) {
        ChannelGains g(static_cast<std::size_t>(M), 0.1);
        const auto se = split_exponent(M);
        const int K = std::min(10, se.p + 3);
        const auto plan = build_plan(g, K, 0.0, false);
        const auto pr = prior_probabilities(plan);
        double space_sum = 0.0;
        for (double v : pr.space) space_sum += v;
        CHECK(std::abs(space_sum - 1.0) < 1e-12);
        const double a = M - (1 << se.p);
        const double sym_sum = pr.symbol_a * (a > 0 ? (1 << (plan.q - 1)) : 0) +
                               pr.symbol_b * (1 << plan.q);
        CHECK(std::abs(sym_sum - 1.0) < 1e-12);
    }
    // worked values for M = 6, K = 4
    const auto plan = build_plan(kFig4Gains, 4, 0.0, true);
    const auto pr = prior_probabilities(plan);
    CHECK(pr.symbol_a == Catch::Approx(0.25).epsilon(1e-15));
    CHECK(pr.symbol_b == Catch::Approx(0.125).epsilon(1e-15));
    CHECK(pr.space[3] == Catch::Approx(0.25).epsilon(1e-15));   // LED 4 sits in Xi
    CHECK(pr.space[0] == Catch::Approx(0.125).epsilon(1e-15));  // LED 1 in Psi/Phi
}

TEST_CASE("normalized minimum distance of a plan") {
    // single LED with explicit {0, 2} constellation and h = 0.5
    MappingPlan plan;
    plan.M = 1;
    plan.K = 1;
    plan.p = 0;
    plan.q = 1;
    plan.exact_power = true;
    plan.avg_power = 1.0;
    plan.led_order = {0};
    plan.pos_of_led = {0};
    plan.n_high = 1;
    plan.codebook = {""};
    plan.pam_order = {2};
    plan.levels_b = {0.0, 2.0};
    CHECK(d_min_prime({0.5}, plan, 0.0) == Catch::Approx(1.0).epsilon(1e-15));
    // with input-dependent noise the pair transmitted from the high level is
    // noisier and sets the minimum
    CHECK(d_min_prime({0.5}, plan, 2.0) == Catch::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("normalized minimum distance equals a brute-force oracle") {
    const auto plan = build_plan(kFig4Gains, 4, 0.0, true);
    const auto pts = enumerate_points(plan, kFig4Gains);
    for (double vs : {0.0, 30.0}) {
        double oracle = std::numeric_limits<double>::infinity();
        for (const auto& a : pts)
            for (const auto& b : pts) {
                if (a.led == b.led && a.sym == b.sym) continue;
                oracle = std::min(oracle, std::abs(a.h * a.x - b.h * b.x) /
                                              std::sqrt(1.0 + a.h * a.x * vs * vs));
            }
        CHECK(d_min_prime(kFig4Gains, plan, vs) == oracle);
    }
}

TEST_CASE("plan serialization round-trip") {
    const auto plan = build_plan(kFig4Gains, 4, 25.0, true, 0.25);
    const auto j = plan_to_json(plan);
    const auto back = plan_from_json(j);
    CHECK(back.M == plan.M);
    CHECK(back.K == plan.K);
    CHECK(back.led_order == plan.led_order);
    CHECK(back.codebook == plan.codebook);
    CHECK(back.pam_order == plan.pam_order);
    CHECK(back.levels_a == plan.levels_a);
    CHECK(back.levels_b == plan.levels_b);
    // golden spot-check of the serialized codebook
    CHECK(j["codebook"][3] == "00");
    CHECK(j["codebook"][5] == "01");
}
