#pragma once

// Configuration-driven experiment runner. Parses a JSON config, validates
// it, and writes one CSV per run. Row order and number formatting are fixed
// so identical (config, seed) runs produce byte-identical output.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smvlc/capacity.hpp"
#include "smvlc/cabm.hpp"
#include "smvlc/geometry.hpp"
#include "smvlc/io.hpp"
#include "smvlc/link.hpp"
#include "smvlc/precode.hpp"
#include "smvlc/simulate.hpp"

namespace smvlc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { ber_sweep, ber_plane, mi_sweep, mi_vs_varsigma, precode_compare };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::ber_sweep: return "ber-sweep";
        case ExperimentKind::ber_plane: return "ber-plane";
        case ExperimentKind::mi_sweep: return "mi-sweep";
        case ExperimentKind::mi_vs_varsigma: return "mi-vs-varsigma";
        case ExperimentKind::precode_compare: return "precode-compare";
    }
    return "?";
}

struct SweepSpec {
    std::string variable;  // pt_dbm | snr_db | varsigma | pd_grid
    double from = 0.0;
    double to = 0.0;
    int points = 0;
    double at(int i) const {
        if (points <= 1) return from;
        return from + (to - from) * i / (points - 1);
    }
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::mi_sweep;
    std::optional<std::vector<double>> gains;  // explicit channel gains
    std::optional<RoomScenario> room;          // or geometry (gains derived)
    int k_bits = 4;
    bool adaptive = true;
    bool gray_labeling = false;
    double sigma_sq_dbm = -104.0;  // Table-style default noise floor
    double varsigma = 0.0;
    double pt_dbm = 20.0;   // fixed transmit power when not swept
    double snr_db = 20.0;   // fixed SNR when not swept
    SweepSpec sweep;
    std::uint64_t seed = 1;
    std::string out = "out.csv";
    int threads = 0;
    std::uint64_t bits_per_point = 1000000;
    std::uint64_t target_errors = 200;
    int quadrature_nodes = 96;
    // precoding solver
    double rho_init = 10.0;
    double rho_stop = 1e5;
    int restarts = 8;
    // plane sweep grid
    int grid_nx = 11;
    int grid_ny = 9;
    double pd_height = 0.8;
    bool noise_missing_sigma = false;  // noise block given without sigma_sq_dbm

    NoiseModel noise() const {
        return NoiseModel{dbm_to_watts(sigma_sq_dbm), varsigma * varsigma};
    }
    std::vector<double> channel() const {
        if (gains) return *gains;
        if (room) return channel_vector(*room);
        throw ConfigError("config has neither explicit gains nor room geometry");
    }
};

namespace detail {

template <typename T>
T field_or(const nlohmann::json& j, const char* name, T fallback) {
    if (auto it = j.find(name); it != j.end()) return it->get<T>();
    return fallback;
}

inline Vec3 vec3_from(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(where + ": expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace detail

// Parse a config document. Structural problems (wrong types, malformed
// fields) throw ConfigError; contract violations are collected by
// validate_config below.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ber-sweep") cfg.kind = ExperimentKind::ber_sweep;
    else if (kind == "ber-plane") cfg.kind = ExperimentKind::ber_plane;
    else if (kind == "mi-sweep") cfg.kind = ExperimentKind::mi_sweep;
    else if (kind == "mi-vs-varsigma") cfg.kind = ExperimentKind::mi_vs_varsigma;
    else if (kind == "precode-compare") cfg.kind = ExperimentKind::precode_compare;
    else throw ConfigError("kind: unknown experiment kind '" + kind + "'");

    if (auto it = j.find("scenario"); it != j.end()) {
        const auto& sc = *it;
        if (sc.contains("gains")) {
            cfg.gains = sc.at("gains").get<std::vector<double>>();
        } else {
            RoomScenario room;
            if (sc.contains("room_dims_m")) {
                auto v = sc.at("room_dims_m").get<std::vector<double>>();
                if (v.size() != 3) throw ConfigError("scenario.room_dims_m: expected 3 entries");
                room.room_dims = {v[0], v[1], v[2]};
            }
            if (sc.contains("led_positions_m")) {
                for (const auto& lp : sc.at("led_positions_m"))
                    room.led_positions.push_back(detail::vec3_from(lp, "scenario.led_positions_m"));
            }
            if (sc.contains("pd_position_m"))
                room.pd_position = detail::vec3_from(sc.at("pd_position_m"), "scenario.pd_position_m");
            room.pd_area_m2 = detail::field_or(sc, "pd_area_cm2", 1.0) * 1e-4;
            room.semi_angle_half_power_deg = detail::field_or(sc, "semi_angle_deg", 35.0);
            room.fov_deg = detail::field_or(sc, "fov_deg", 72.0);
            cfg.room = room;
        }
    }
    cfg.k_bits = detail::field_or(j, "k_bits", cfg.k_bits);
    cfg.adaptive = detail::field_or(j, "adaptive", cfg.adaptive);
    cfg.gray_labeling = detail::field_or(j, "gray_labeling", cfg.gray_labeling);
    if (auto it = j.find("noise"); it != j.end()) {
        if (it->contains("sigma_sq_dbm"))
            cfg.sigma_sq_dbm = it->at("sigma_sq_dbm").get<double>();
        else
            cfg.noise_missing_sigma = true;
        cfg.varsigma = detail::field_or(*it, "varsigma", 0.0);
    }
    cfg.pt_dbm = detail::field_or(j, "pt_dbm", cfg.pt_dbm);
    cfg.snr_db = detail::field_or(j, "snr_db", cfg.snr_db);
    if (auto it = j.find("sweep"); it != j.end()) {
        cfg.sweep.variable = it->at("variable").get<std::string>();
        cfg.sweep.from = detail::field_or(*it, "from", 0.0);
        cfg.sweep.to = detail::field_or(*it, "to", 0.0);
        cfg.sweep.points = detail::field_or(*it, "points", 0);
    }
    cfg.seed = detail::field_or<std::uint64_t>(j, "seed", cfg.seed);
    cfg.out = detail::field_or<std::string>(j, "out", cfg.out);
    cfg.threads = detail::field_or(j, "threads", cfg.threads);
    cfg.bits_per_point = detail::field_or<std::uint64_t>(j, "bits_per_point", cfg.bits_per_point);
    cfg.target_errors = detail::field_or<std::uint64_t>(j, "target_errors", cfg.target_errors);
    cfg.quadrature_nodes = detail::field_or(j, "quadrature_nodes", cfg.quadrature_nodes);
    if (auto it = j.find("precode"); it != j.end()) {
        cfg.rho_init = detail::field_or(*it, "rho_init", cfg.rho_init);
        cfg.rho_stop = detail::field_or(*it, "rho_stop", cfg.rho_stop);
        cfg.restarts = detail::field_or(*it, "restarts", cfg.restarts);
    }
    if (auto it = j.find("grid"); it != j.end()) {
        cfg.grid_nx = detail::field_or(*it, "nx", cfg.grid_nx);
        cfg.grid_ny = detail::field_or(*it, "ny", cfg.grid_ny);
        cfg.pd_height = detail::field_or(*it, "pd_height_m", cfg.pd_height);
    }
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        return parse_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

// Canonical JSON form of a parsed config; parse_config(config_to_json(c))
// reproduces c.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["kind"] = kind_name(cfg.kind);
    nlohmann::json sc;
    if (cfg.gains) {
        sc["gains"] = *cfg.gains;
    } else if (cfg.room) {
        const auto& r = *cfg.room;
        sc["room_dims_m"] = {r.room_dims[0], r.room_dims[1], r.room_dims[2]};
        nlohmann::json leds = nlohmann::json::array();
        for (const auto& lp : r.led_positions) leds.push_back({lp.x, lp.y, lp.z});
        sc["led_positions_m"] = leds;
        sc["pd_position_m"] = {r.pd_position.x, r.pd_position.y, r.pd_position.z};
        sc["pd_area_cm2"] = r.pd_area_m2 * 1e4;
        sc["semi_angle_deg"] = r.semi_angle_half_power_deg;
        sc["fov_deg"] = r.fov_deg;
    }
    j["scenario"] = sc;
    j["k_bits"] = cfg.k_bits;
    j["adaptive"] = cfg.adaptive;
    j["gray_labeling"] = cfg.gray_labeling;
    j["noise"] = {{"sigma_sq_dbm", cfg.sigma_sq_dbm}, {"varsigma", cfg.varsigma}};
    j["pt_dbm"] = cfg.pt_dbm;
    j["snr_db"] = cfg.snr_db;
    j["sweep"] = {{"variable", cfg.sweep.variable},
                  {"from", cfg.sweep.from},
                  {"to", cfg.sweep.to},
                  {"points", cfg.sweep.points}};
    j["seed"] = cfg.seed;
    j["out"] = cfg.out;
    j["threads"] = cfg.threads;
    j["bits_per_point"] = cfg.bits_per_point;
    j["target_errors"] = cfg.target_errors;
    j["quadrature_nodes"] = cfg.quadrature_nodes;
    j["precode"] = {{"rho_init", cfg.rho_init},
                    {"rho_stop", cfg.rho_stop},
                    {"restarts", cfg.restarts}};
    j["grid"] = {{"nx", cfg.grid_nx}, {"ny", cfg.grid_ny}, {"pd_height_m", cfg.pd_height}};
    return j;
}

// All contract violations, without running anything. Empty iff runnable.
inline std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> diags;
    std::vector<double> gains;
    if (!cfg.gains && !cfg.room) {
        diags.push_back("scenario: neither explicit gains nor room geometry given");
    } else {
        if (cfg.room) {
            auto room_diags = cfg.room->validate(false);
            for (auto& d : room_diags) diags.push_back("scenario: " + d);
        }
        try {
            gains = cfg.channel();
        } catch (const std::exception& e) {
            diags.push_back(std::string("scenario: ") + e.what());
        }
    }
    const int M = static_cast<int>(gains.size());
    if (M >= 1) {
        for (double g : gains)
            if (!(g >= 0.0) || !std::isfinite(g)) {
                diags.push_back("scenario: channel gains must be finite and non-negative");
                break;
            }
        if (M == 1 && cfg.kind != ExperimentKind::ber_plane)
            diags.push_back("scenario: a single LED is only supported by ber-plane");
        int p = 0;
        if (M > 1)
            while ((1 << (p + 1)) <= M) ++p;
        if (cfg.k_bits - p < 1)
            diags.push_back("k_bits: infeasible for M (constraint q = K - p >= 1 violated)");
        if (cfg.adaptive && M > 24 && (1 << p) != M)
            diags.push_back("scenario: adaptive order search is exhaustive, limited to M <= 24");
    }
    if (cfg.noise_missing_sigma)
        diags.push_back("noise.sigma_sq_dbm: required when a noise block is given");
    if (!(dbm_to_watts(cfg.sigma_sq_dbm) > 0.0)) diags.push_back("noise: sigma_sq must be positive");
    if (cfg.varsigma < 0.0) diags.push_back("noise: varsigma must be non-negative");

    const char* want = nullptr;
    switch (cfg.kind) {
        case ExperimentKind::ber_sweep: want = "pt_dbm"; break;
        case ExperimentKind::mi_sweep:
        case ExperimentKind::precode_compare: want = "snr_db"; break;
        case ExperimentKind::mi_vs_varsigma: want = "varsigma"; break;
        case ExperimentKind::ber_plane: want = "pd_grid"; break;
    }
    if (cfg.kind == ExperimentKind::ber_plane) {
        if (!cfg.room) diags.push_back("ber-plane: requires room geometry, not explicit gains");
        if (cfg.grid_nx < 1 || cfg.grid_ny < 1) diags.push_back("grid: must be non-empty");
        if (!cfg.sweep.variable.empty() && cfg.sweep.variable != want)
            diags.push_back("sweep.variable: ber-plane uses the pd_grid variable");
    } else {
        if (cfg.sweep.variable != want)
            diags.push_back(std::string("sweep.variable: kind ") + kind_name(cfg.kind) +
                            " sweeps " + want);
        if (cfg.sweep.points < 1) diags.push_back("sweep.points: sweep range is empty");
    }
    if (cfg.bits_per_point == 0 ||
        cfg.bits_per_point % static_cast<std::uint64_t>(cfg.k_bits) != 0)
        diags.push_back("bits_per_point: must be a positive multiple of k_bits");
    if (!(cfg.rho_stop >= cfg.rho_init && cfg.rho_init > 0.0))
        diags.push_back("precode: need rho_stop >= rho_init > 0");
    return diags;
}

namespace detail {

inline std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace detail

// Run one experiment and return the CSV text (header + rows, LF endings).
inline std::string run_experiment(const ExperimentConfig& cfg) {
    {
        const auto diags = validate_config(cfg);
        if (!diags.empty()) {
            std::string msg = "invalid config:";
            for (const auto& d : diags) msg += "\n  " + d;
            throw ConfigError(msg);
        }
    }
    const auto noise = cfg.noise();
    const double varsigma = cfg.varsigma;
    std::ostringstream csv;

    switch (cfg.kind) {
        case ExperimentKind::mi_sweep:
        case ExperimentKind::precode_compare: {
            const auto gains = cfg.channel();
            const bool precoded = cfg.kind == ExperimentKind::precode_compare;
            csv << "snr_db,mi_exact,mi_lower,mi_hi_limit,mi_lo_limit";
            if (precoded) csv << ",mi_lower_precoded";
            csv << "\n";
            struct Row {
                double snr_db, mi, lb, hi, lo, lbp;
            };
            auto compute = [&](int i) {
                const double snr_db = cfg.sweep.at(i);
                const double Pt = SnrPoint{std::pow(10.0, snr_db / 10.0)}.transmit_power(noise);
                const auto plan =
                    build_plan(gains, cfg.k_bits, varsigma, cfg.adaptive, Pt, cfg.gray_labeling);
                Row row{};
                row.snr_db = snr_db;
                row.mi = mutual_information(plan, gains, noise, MiMethod::quadrature,
                                            static_cast<std::uint64_t>(cfg.quadrature_nodes))
                             .value;
                row.lb = mi_lower_bound(plan, gains, noise).value;
                row.hi = mi_high_snr_limit(plan);
                row.lo = mi_low_snr_limit(plan, gains, varsigma);
                if (precoded) {
                    SolverConfig scfg;
                    scfg.rho_init = cfg.rho_init;
                    scfg.rho_stop = cfg.rho_stop;
                    scfg.restarts = cfg.restarts;
                    scfg.seed = cfg.seed;
                    const auto pre = optimize_precoding(plan, gains, noise, scfg);
                    row.lbp = mi_lower_bound_precoded(plan, gains, noise, pre.weights.w).value;
                }
                return row;
            };
            std::vector<std::future<Row>> futs;
            int workers = cfg.threads > 0 ? cfg.threads
                                          : static_cast<int>(std::thread::hardware_concurrency());
            if (workers < 1) workers = 1;
            std::vector<Row> rows(static_cast<std::size_t>(cfg.sweep.points));
            for (int base = 0; base < cfg.sweep.points; base += workers) {
                futs.clear();
                const int top = std::min(cfg.sweep.points, base + workers);
                for (int i = base; i < top; ++i)
                    futs.push_back(std::async(std::launch::async, compute, i));
                for (int i = base; i < top; ++i)
                    rows[static_cast<std::size_t>(i)] = futs[static_cast<std::size_t>(i - base)].get();
            }
            for (const auto& row : rows) {
                csv << detail::fmt9(row.snr_db) << ',' << detail::fmt9(row.mi) << ','
                    << detail::fmt9(row.lb) << ',' << detail::fmt9(row.hi) << ','
                    << detail::fmt9(row.lo);
                if (precoded) csv << ',' << detail::fmt9(row.lbp);
                csv << "\n";
            }
            break;
        }
        case ExperimentKind::mi_vs_varsigma: {
            const auto gains = cfg.channel();
            csv << "varsigma,mi_exact,mi_lower\n";
            const double Pt = SnrPoint{std::pow(10.0, cfg.snr_db / 10.0)}.transmit_power(noise);
            for (int i = 0; i < cfg.sweep.points; ++i) {
                const double vs = cfg.sweep.at(i);
                const NoiseModel nm{noise.sigma_sq, vs * vs};
                const auto plan =
                    build_plan(gains, cfg.k_bits, vs, cfg.adaptive, Pt, cfg.gray_labeling);
                const double mi = mutual_information(plan, gains, nm, MiMethod::quadrature,
                                                     static_cast<std::uint64_t>(cfg.quadrature_nodes))
                                      .value;
                const double lb = mi_lower_bound(plan, gains, nm).value;
                csv << detail::fmt9(vs) << ',' << detail::fmt9(mi) << ',' << detail::fmt9(lb)
                    << "\n";
            }
            break;
        }
        case ExperimentKind::ber_sweep: {
            const auto gains = cfg.channel();
            csv << "pt_dbm,ber_adaptive,ber_fixed,ci_adaptive,ci_fixed\n";
            BerOptions opts;
            opts.threads = cfg.threads;
            opts.target_errors = cfg.target_errors;
            for (int i = 0; i < cfg.sweep.points; ++i) {
                const double pt_dbm = cfg.sweep.at(i);
                const double Pt = dbm_to_watts(pt_dbm);
                const auto plan_a = build_plan(gains, cfg.k_bits, varsigma, true, Pt,
                                               cfg.gray_labeling);
                const auto plan_f = build_plan(gains, cfg.k_bits, varsigma, false, Pt,
                                               cfg.gray_labeling);
                BerOptions oa = opts;
                oa.stream_base = (static_cast<std::uint64_t>(i) << 33);
                BerOptions of = opts;
                of.stream_base = (static_cast<std::uint64_t>(i) << 33) | (1ull << 32);
                const auto ra = ber_monte_carlo(plan_a, gains, noise, cfg.bits_per_point,
                                                cfg.seed, oa);
                const auto rf = ber_monte_carlo(plan_f, gains, noise, cfg.bits_per_point,
                                                cfg.seed, of);
                csv << detail::fmt9(pt_dbm) << ',' << detail::fmt9(ra.ber) << ','
                    << detail::fmt9(rf.ber) << ',' << detail::fmt9(ra.ci95_halfwidth) << ','
                    << detail::fmt9(rf.ci95_halfwidth) << "\n";
            }
            break;
        }
        case ExperimentKind::ber_plane: {
            csv << "x_m,y_m,ber,ci95\n";
            BerOptions opts;
            opts.threads = cfg.threads;
            opts.target_errors = cfg.target_errors;
            const auto rows = ber_plane_sweep(*cfg.room, cfg.grid_nx, cfg.grid_ny, cfg.pd_height,
                                              cfg.k_bits, dbm_to_watts(cfg.pt_dbm), noise,
                                              cfg.bits_per_point, cfg.seed, opts);
            for (const auto& r : rows)
                csv << detail::fmt9(r.x) << ',' << detail::fmt9(r.y) << ','
                    << detail::fmt9(r.result.ber) << ',' << detail::fmt9(r.result.ci95_halfwidth)
                    << "\n";
            break;
        }
    }
    return csv.str();
}

// Run and write to cfg.out.
inline void run_experiment_to_file(const ExperimentConfig& cfg) {
    const std::string csv = run_experiment(cfg);
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + cfg.out);
    f << csv;
}

} // namespace smvlc
