// Command-line front end for the sweeps and the state-space dump.

#include "eolsec/errors.hpp"
#include "eolsec/experiment.hpp"
#include "eolsec/state_space.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

enum Exit : int { ok = 0, bad_config = 1, numerical = 2, io = 3 };

eolsec::ExperimentConfig load(const std::string& path) { return eolsec::load_config(path); }

int guarded(auto&& body) {
    try {
        return body();
    } catch (const eolsec::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return io;
    } catch (const eolsec::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return bad_config;
    } catch (const eolsec::StateBudgetExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return bad_config;
    } catch (const eolsec::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return bad_config;
    } catch (const eolsec::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reconfiguration and defragmentation analysis of elastic optical links"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> engine;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool no_timestamp = false;

    auto* run = app.add_subcommand("run", "Evaluate the configured grid and write CSV/JSON output");
    run->add_option("--config", config_path, "JSON configuration file")->required();
    run->add_option("--engine", engine, "analytic, mc or both")
        ->check(CLI::IsMember({"analytic", "mc", "both"}));
    run->add_option("--seed", seed, "Base seed for the simulation");
    run->add_option("--out-dir", out_dir, "Output directory");
    run->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp so reruns are byte-identical");

    auto* dump = app.add_subcommand("dump-states", "List the regular states of the configured link");
    dump->add_option("--config", config_path, "JSON configuration file")->required();

    auto* validate = app.add_subcommand("validate", "Check a configuration file and exit");
    validate->add_option("--config", config_path, "JSON configuration file")->required();

    CLI11_PARSE(app, argc, argv);

    if (*run) {
        return guarded([&] {
            auto cfg = load(config_path);
            if (engine) cfg.engine = eolsec::parse_engine(*engine);
            if (seed) cfg.seed = *seed;
            if (out_dir) cfg.out_dir = *out_dir;
            if (no_timestamp) cfg.timestamp = false;
            return eolsec::run_experiments(cfg, std::cerr);
        });
    }
    if (*dump) {
        return guarded([&] {
            const auto cfg = load(config_path);
            const auto space = eolsec::build_state_space(
                cfg.base_profile(), {cfg.state_budget, cfg.randomize_empty});
            space.dump(std::cout);
            return static_cast<int>(ok);
        });
    }
    return guarded([&] {
        const auto cfg = load(config_path);
        std::cout << "ok: C=" << cfg.capacity << ", " << cfg.demands.size() << " classes, "
                  << eolsec::count_regular_states(cfg.base_profile()) << " regular states\n";
        return static_cast<int>(ok);
    });
}
