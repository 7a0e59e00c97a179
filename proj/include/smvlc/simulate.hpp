#pragma once

// Monte Carlo BER engine with joint maximum-likelihood detection over
// (LED, symbol) hypotheses. The detector uses the hypothesis-dependent
// variance, so it is not a nearest-neighbor rule when varsigma > 0.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "smvlc/cabm.hpp"
#include "smvlc/geometry.hpp"
#include "smvlc/link.hpp"
#include "smvlc/rng.hpp"

namespace smvlc {

struct BerResult {
    double ber = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_simulated = 0;
    double ci95_halfwidth = 0.0;
};

namespace detail {

// Wilson score interval halfwidth for a proportion at 95% confidence.
inline double wilson_halfwidth(std::uint64_t errors, std::uint64_t n) {
    if (n == 0) return 0.5;
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(errors) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    return z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
}

// Precomputed ML detector: per hypothesis the mean, the inverse variance,
// and the log-normalization, plus the decoded bit block.
struct Detector {
    std::vector<double> mean;
    std::vector<double> half_inv_var;
    std::vector<double> half_ln_var;
    std::vector<std::uint32_t> block;
    std::vector<int> led, sym;

    Detector(const MappingPlan& plan, const ChannelGains& gains, const NoiseModel& noise) {
        const auto pts = enumerate_points(plan, gains);
        mean.reserve(pts.size());
        for (const auto& pt : pts) {
            const double hx = pt.h * pt.x;
            const double v = noise.variance_at(hx);
            mean.push_back(hx);
            half_inv_var.push_back(0.5 / v);
            half_ln_var.push_back(0.5 * std::log(v));
            block.push_back(decode(plan, pt.led, pt.sym));
            led.push_back(pt.led);
            sym.push_back(pt.sym);
        }
    }

    std::size_t detect(double y) const {
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < mean.size(); ++j) {
            const double d = y - mean[j];
            const double score = -d * d * half_inv_var[j] - half_ln_var[j];
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        return best;
    }
};

} // namespace detail

// Most likely (LED, symbol) pair for an observation, ties broken by
// enumeration order (LED-major, ascending symbol).
inline EncodedSymbol ml_detect(double y, const MappingPlan& plan, const ChannelGains& gains,
                               const NoiseModel& noise) {
    detail::Detector det(plan, gains, noise);
    const std::size_t j = det.detect(y);
    return {det.led[j], det.sym[j]};
}

struct BerOptions {
    std::uint64_t target_errors = 200;   // early stop once reached at a chunk boundary
    std::uint64_t chunk_frames = 20000;  // fixed partitioning; results do not depend on threads
    int threads = 0;                     // 0 = hardware concurrency
    std::uint64_t stream_base = 0;       // substream offset, for independent sweep points
};

// Transmit uniformly random K-bit blocks, detect, count bit errors.
// Deterministic for a fixed (seed, options): frames are partitioned into
// fixed chunks with per-chunk substreams and reduced in chunk order.
inline BerResult ber_monte_carlo(const MappingPlan& plan, const ChannelGains& gains,
                                 const NoiseModel& noise, std::uint64_t n_bits,
                                 std::uint64_t seed, const BerOptions& options = {}) {
    const int K = plan.K;
    if (n_bits == 0 || n_bits % static_cast<std::uint64_t>(K) != 0)
        throw std::domain_error("ber_monte_carlo: bit budget must be a positive multiple of K");
    const detail::Detector det(plan, gains, noise);
    const std::uint64_t total_frames = n_bits / static_cast<std::uint64_t>(K);
    const std::uint64_t chunk = std::max<std::uint64_t>(1, options.chunk_frames);
    const std::uint64_t n_chunks = (total_frames + chunk - 1) / chunk;

    auto run_chunk = [&](std::uint64_t ci) -> std::uint64_t {
        const std::uint64_t first = ci * chunk;
        const std::uint64_t count = std::min(chunk, total_frames - first);
        Rng rng(seed, options.stream_base + ci);
        std::uint64_t errors = 0;
        const std::uint32_t mask = (K < 32) ? ((1u << K) - 1u) : 0xffffffffu;
        for (std::uint64_t f = 0; f < count; ++f) {
            const std::uint32_t block = static_cast<std::uint32_t>(rng.next_u64()) & mask;
            const auto tx = encode(plan, block);
            const double hx =
                gains[static_cast<std::size_t>(tx.led)] *
                plan.levels_for(tx.led)[static_cast<std::size_t>(tx.sym)];
            const double y = hx + std::sqrt(noise.variance_at(hx)) * rng.normal();
            const std::uint32_t rx_block = det.block[det.detect(y)];
            errors += static_cast<std::uint64_t>(std::popcount(block ^ rx_block));
        }
        return errors;
    };

    int n_threads = options.threads > 0 ? options.threads
                                        : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;

    std::uint64_t bit_errors = 0;
    std::uint64_t frames_done = 0;
    std::uint64_t ci = 0;
    while (ci < n_chunks) {
        // one wave of parallel chunks, reduced in chunk order
        const std::uint64_t wave = std::min<std::uint64_t>(static_cast<std::uint64_t>(n_threads),
                                                           n_chunks - ci);
        std::vector<std::future<std::uint64_t>> futs;
        futs.reserve(wave);
        for (std::uint64_t k = 0; k < wave; ++k)
            futs.push_back(std::async(std::launch::async, run_chunk, ci + k));
        bool stop = false;
        for (std::uint64_t k = 0; k < wave; ++k) {
            const std::uint64_t e = futs[k].get();
            if (stop) continue;  // past the stopping boundary; discard
            bit_errors += e;
            frames_done += std::min(chunk, total_frames - (ci + k) * chunk);
            if (bit_errors >= options.target_errors) stop = true;
        }
        ci += wave;
        if (stop) break;
    }

    BerResult res;
    res.bit_errors = bit_errors;
    res.bits_simulated = frames_done * static_cast<std::uint64_t>(K);
    res.ber = res.bits_simulated ? static_cast<double>(bit_errors) /
                                       static_cast<double>(res.bits_simulated)
                                 : 0.0;
    res.ci95_halfwidth = detail::wilson_halfwidth(bit_errors, res.bits_simulated);
    return res;
}

struct PlaneBerPoint {
    double x = 0.0;
    double y = 0.0;
    BerResult result;
};

// BER over a rectangular grid of PD positions at fixed height. Supports a
// single-LED scenario (no spatial bits; all K bits carried by PAM).
inline std::vector<PlaneBerPoint> ber_plane_sweep(const RoomScenario& base, int nx, int ny,
                                                  double pd_height, int K, double Pt,
                                                  const NoiseModel& noise, std::uint64_t n_bits,
                                                  std::uint64_t seed,
                                                  const BerOptions& options = {}) {
    if (nx < 1 || ny < 1) throw std::domain_error("ber_plane_sweep: grid must be non-empty");
    std::vector<PlaneBerPoint> out;
    out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    std::uint64_t point_index = 0;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            RoomScenario sc = base;
            const double x = (nx == 1) ? base.room_dims[0] / 2
                                       : base.room_dims[0] * ix / (nx - 1);
            const double y = (ny == 1) ? base.room_dims[1] / 2
                                       : base.room_dims[1] * iy / (ny - 1);
            sc.pd_position = {x, y, pd_height};
            const auto gains = channel_vector(sc);
            const auto plan = build_plan(gains, K, std::sqrt(noise.varsigma_sq),
                                         /*adaptive=*/gains.size() > 1, Pt);
            BerOptions opts = options;
            opts.stream_base = options.stream_base + (point_index << 32);
            out.push_back({x, y, ber_monte_carlo(plan, gains, noise, n_bits, seed, opts)});
            ++point_index;
        }
    }
    return out;
}

} // namespace smvlc
