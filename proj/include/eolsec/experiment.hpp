#pragma once

// Configuration-driven parameter sweeps over the analytic and simulated
// engines, with CSV and JSON output.

#include "eolsec/ctmc.hpp"
#include "eolsec/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eolsec {

inline constexpr int config_schema_version = 1;

/// Bad configuration content; `path` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Engine { Analytic, MonteCarlo, Both };

[[nodiscard]] std::string_view to_string(Engine engine);
[[nodiscard]] Engine parse_engine(std::string_view name);

struct ExperimentConfig {
    int capacity = 0;
    std::vector<int> demands;
    std::vector<double> service_rates;
    /// Uniform-split mode: total offered load per grid point.
    std::vector<double> loads_erlang;
    /// Explicit mode: one lambda per class; mutually exclusive with loads.
    std::optional<std::vector<double>> arrival_rates;

    std::vector<VariantKind> variants;
    std::vector<double> rp_rates;        ///< lambda_S axis
    std::vector<double> reconfig_rates;  ///< mu_d axis
    std::vector<int> windows;            ///< W axis

    Engine engine = Engine::Both;
    double solver_tol = 1e-10;
    std::size_t state_budget = 5'000'000;
    bool randomize_empty = false;

    double horizon = std::numeric_limits<double>::infinity();
    std::uint64_t max_arrivals = 100'000;
    double warmup = 20.0;
    std::size_t replications = 10;
    std::uint64_t seed = default_seed;
    unsigned threads = 0;

    double data_rate = 1.0;            ///< b
    std::optional<double> security_mu; ///< defaults to mu of class 1

    std::filesystem::path out_dir = "results";
    std::string csv_name = "results.csv";
    std::string summary_name = "summary.json";
    bool timestamp = true;

    [[nodiscard]] DemandProfile base_profile() const;
    /// One profile per load point, or the single explicit-rate profile.
    [[nodiscard]] std::vector<DemandProfile> traffic_points() const;
    [[nodiscard]] double mu_for_security() const;
};

/// Parses and validates a JSON configuration tree.
[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& tree);
/// Reads a file; IoError if unreadable, ConfigError if malformed.
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
    VariantKind variant = VariantKind::Regular;
    Engine engine = Engine::Analytic;  ///< Analytic or MonteCarlo
    int capacity = 0;
    double load = 0.0;
    double lambda_s = 0.0;
    double mu_d = 0.0;
    std::vector<double> rb;
    std::vector<double> fb;
    double rcb = 0.0;
    double bp = 0.0;
    std::vector<double> p_sa;
    std::vector<double> lambda_frac;
    /// Solver residual (analytic) or BP 95% half-width (MC).
    double residual_or_ci = 0.0;
    double wall_ms = 0.0;
    /// MC only: half-widths for rcb and the summed fb.
    double rcb_ci = 0.0;
    double fb_total_ci = 0.0;
    std::vector<double> p_sa_any;
    std::optional<EventCounts> counts;
    bool failed = false;
    std::string error;

    [[nodiscard]] double fb_total() const;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    bool fell_back_to_mc = false;
    bool numerical_failure = false;
    std::vector<std::string> log;
};

/// Evaluates the whole grid; rows are in grid order (variant, load,
/// lambda_S, mu_d, engine) regardless of execution order.
[[nodiscard]] ExperimentResult run_grid(const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& result,
               bool timestamp);
/// Analytic/MC comparison for cells evaluated by both engines.
[[nodiscard]] nlohmann::json comparison_summary(const ExperimentConfig& cfg,
                                                const ExperimentResult& result);

/// Runs the grid and writes the CSV and JSON summary under cfg.out_dir.
/// Returns the process exit status (0 ok, 2 numerical failure).
int run_experiments(const ExperimentConfig& cfg, std::ostream& log);

} // namespace eolsec
