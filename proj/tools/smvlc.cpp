// Command-line experiment runner. `run` executes a JSON config and writes a
// CSV; `validate` lists contract violations without running.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "smvlc/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw smvlc::ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial-modulation VLC link simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::int64_t seed_override = -1;
    int threads_override = 0;

    auto* run = app.add_subcommand("run", "run an experiment config and write its CSV");
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_override, "override the output CSV path");
    run->add_option("--seed", seed_override, "override the RNG seed");
    run->add_option("--threads", threads_override, "override the worker thread count");

    auto* validate = app.add_subcommand("validate", "list config problems without running");
    validate->add_option("config", config_path, "JSON experiment config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = smvlc::parse_config_text(read_file(config_path));
        if (app.got_subcommand(validate)) {
            const auto diags = smvlc::validate_config(cfg);
            for (const auto& d : diags) std::cout << d << "\n";
            if (!diags.empty()) return 1;
            std::cout << "ok\n";
            return 0;
        }
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (!out_override.empty()) cfg.out = out_override;
        if (threads_override > 0) cfg.threads = threads_override;
        smvlc::run_experiment_to_file(cfg);
        std::cout << cfg.out << "\n";
        return 0;
    } catch (const smvlc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
