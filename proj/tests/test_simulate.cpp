#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "smvlc/simulate.hpp"

using namespace smvlc;

namespace {

const ChannelGains kGains5{0.53, 0.81, 1.07, 1.33, 1.61};

} // namespace

TEST_CASE("ml detection recovers noiseless transmissions") {
    const auto plan = build_plan(kGains5, 5, 0.0, true, 10.0);
    const NoiseModel noise{1.0, 0.0};
    for (const auto& pt : enumerate_points(plan, kGains5)) {
        const auto hat = ml_detect(pt.h * pt.x, plan, kGains5, noise);
        CHECK(hat.led == pt.led);
        CHECK(hat.sym == pt.sym);
    }
}

TEST_CASE("ml detection is nearest-neighbor when varsigma is zero") {
    const auto plan = build_plan(kGains5, 5, 0.0, true, 5.0);
    const NoiseModel noise{0.3, 0.0};
    const auto pts = enumerate_points(plan, kGains5);
    for (int i = 0; i <= 300; ++i) {
        const double y = -1.0 + 0.05 * i;
        const auto hat = ml_detect(y, plan, kGains5, noise);
        double bestd = std::numeric_limits<double>::infinity();
        for (const auto& pt : pts) bestd = std::min(bestd, std::abs(y - pt.h * pt.x));
        const auto got = std::abs(y - pts[0].h * 0.0);
        (void)got;
        double hatd = 0.0;
        for (const auto& pt : pts)
            if (pt.led == hat.led && pt.sym == hat.sym) hatd = std::abs(y - pt.h * pt.x);
        CHECK(hatd == Catch::Approx(bestd).epsilon(1e-12));
    }
}

TEST_CASE("ml detection equals the exhaustive likelihood oracle") {
    const auto plan = build_plan(kGains5, 5, 50.0, true, 5.0);
    const NoiseModel noise{0.2, 2500.0};
    const auto pts = enumerate_points(plan, kGains5);
    for (int i = 0; i <= 400; ++i) {
        const double y = -2.0 + 0.05 * i;
        const auto hat = ml_detect(y, plan, kGains5, noise);
        int best_led = -1, best_sym = -1;
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& pt : pts) {
            const double s = log_cond_pdf(y, pt.h, pt.x, noise);
            if (s > best) {
                best = s;
                best_led = pt.led;
                best_sym = pt.sym;
            }
        }
        CHECK(hat.led == best_led);
        CHECK(hat.sym == best_sym);
    }
}

TEST_CASE("near-noiseless BER is zero") {
    const auto plan = build_plan(kGains5, 5, 0.0, true, 10.0);
    const NoiseModel noise{1e-12, 0.0};
    const auto res = ber_monte_carlo(plan, kGains5, noise, 50000, 7);
    CHECK(res.bit_errors == 0);
    CHECK(res.ber == 0.0);
}

TEST_CASE("ber budget accounting and early stop") {
    const auto plan = build_plan(kGains5, 5, 0.0, true, 0.05);  // deep in the noise
    const NoiseModel noise{1.0, 0.0};
    BerOptions opts;
    opts.target_errors = 100;
    opts.chunk_frames = 500;
    const auto res = ber_monte_carlo(plan, kGains5, noise, 1000000, 7, opts);
    CHECK(res.bit_errors >= 100);
    CHECK(res.bits_simulated < 1000000);  // stopped early
    CHECK(res.ber == Catch::Approx(static_cast<double>(res.bit_errors) /
                                   static_cast<double>(res.bits_simulated)));
    CHECK(res.ci95_halfwidth > 0.0);
    CHECK_THROWS_AS(ber_monte_carlo(plan, kGains5, noise, 7, 7), std::domain_error);
}

TEST_CASE("ber result independent of worker count and reproducible") {
    const auto plan = build_plan(kGains5, 5, 0.0, true, 0.8);
    const NoiseModel noise{1.0, 0.0};
    BerOptions one;
    one.threads = 1;
    one.chunk_frames = 3000;
    BerOptions four;
    four.threads = 4;
    four.chunk_frames = 3000;
    const auto ra = ber_monte_carlo(plan, kGains5, noise, 200000, 42, one);
    const auto rb = ber_monte_carlo(plan, kGains5, noise, 200000, 42, four);
    const auto rc = ber_monte_carlo(plan, kGains5, noise, 200000, 42, four);
    CHECK(ra.bit_errors == rb.bit_errors);
    CHECK(ra.bits_simulated == rb.bits_simulated);
    CHECK(rb.bit_errors == rc.bit_errors);
    // a different seed gives a different stream
    const auto rd = ber_monte_carlo(plan, kGains5, noise, 200000, 43, four);
    CHECK(rd.bit_errors != ra.bit_errors);
}

TEST_CASE("all-zero gains reduce the detector to guessing") {
    const ChannelGains zeros(5, 0.0);
    const auto plan = build_plan(zeros, 5, 0.0, false, 1.0);
    const NoiseModel noise{1.0, 0.0};
    BerOptions opts;
    opts.target_errors = 1u << 30;  // no early stop
    const auto res = ber_monte_carlo(plan, zeros, noise, 500000, 11, opts);
    CHECK(res.ber >= 0.25);
    CHECK(res.ber <= 0.5 + 0.01);
}

TEST_CASE("plane sweep has its best point under the LED") {
    RoomScenario sc;
    sc.led_positions = {{2.5, 2.0, 3.0}};
    const NoiseModel noise{dbm_to_watts(-104.0), 0.0};
    // 5x5 grid includes the sub-LED point (2.5, 2.0)
    const auto rows = ber_plane_sweep(sc, 5, 5, 0.8, 5, dbm_to_watts(25.0), noise, 40000, 3);
    REQUIRE(rows.size() == 25);
    double best = 1.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].result.ber < best) {
            best = rows[i].result.ber;
            best_idx = i;
        }
    CHECK(rows[best_idx].x == Catch::Approx(2.5));
    CHECK(rows[best_idx].y == Catch::Approx(2.0));
    // determinism across runs
    const auto rows2 = ber_plane_sweep(sc, 5, 5, 0.8, 5, dbm_to_watts(25.0), noise, 40000, 3);
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(rows[i].result.bit_errors == rows2[i].result.bit_errors);
}
