#pragma once

// Discrete-event simulation of the link under the regular, RaaS and
// RaaS-DaaS variants, for capacities beyond exact enumeration.

#include "eolsec/ctmc.hpp"
#include "eolsec/link_model.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace eolsec {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t default_seed = 20170523;

struct SimConfig {
    DemandProfile profile;
    ModelVariant variant;
    /// Simulated time per replication. May be infinite when max_arrivals is set.
    double horizon = std::numeric_limits<double>::infinity();
    /// Stop once this many call arrivals were seen after warmup; 0 = no limit.
    std::uint64_t max_arrivals = 0;
    double warmup = 0.0;
    std::size_t replications = 10;
    std::uint64_t seed = default_seed;
    std::vector<int> window_widths;
    bool randomize_empty = false;
    /// All C - W + 1 window positions are scored when C is at most this.
    int exact_window_limit = 128;
    /// Window positions sampled per event above exact_window_limit.
    int window_samples = 64;
    /// Batches used for the confidence interval of a single replication.
    std::size_t batches = 20;
    /// Worker threads for replications; 0 = hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_half_width = 0.0;  ///< 95%
    std::size_t samples = 0;

    [[nodiscard]] bool covers(double value) const {
        return value >= mean - ci_half_width && value <= mean + ci_half_width;
    }
};

/// Mean, standard error and 95% Student-t half-width; NaN samples skipped.
[[nodiscard]] Estimate make_estimate(const std::vector<double>& samples);

struct EventCounts {
    std::uint64_t call_arrivals = 0;
    std::uint64_t accepted = 0;
    std::uint64_t resource_blocked = 0;
    std::uint64_t frag_blocked = 0;
    std::uint64_t reconfig_blocked = 0;
    std::uint64_t departures = 0;
    std::uint64_t rp_arrivals = 0;
    std::uint64_t rp_discarded = 0;  ///< RP arrivals during reconfiguration
    std::uint64_t raas_started = 0;
    std::uint64_t daas_started = 0;

    EventCounts& operator+=(const EventCounts& other);
};

struct SimResult {
    std::vector<Estimate> rb;  ///< per class, time fraction
    std::vector<Estimate> fb;  ///< per class, time fraction
    Estimate total_fb;
    Estimate rcb;
    Estimate bp;
    /// Fraction of call arrivals lost, counted directly.
    Estimate lost_fraction;
    std::vector<int> window_widths;
    /// Attack survival across randomizations (RP events only).
    std::vector<Estimate> p_sa;
    /// Attack survival across any reconfiguration (RP and DaaS).
    std::vector<Estimate> p_sa_any;
    EventCounts counts;  ///< summed over replications, post-warmup
    std::size_t replications = 0;
    bool batch_means = false;
};

[[nodiscard]] SimResult run_simulation(const SimConfig& cfg);

/// Uniform over all arrangements with the pattern.
[[nodiscard]] Arrangement sample_random_arrangement(const ConnectionPattern& n,
                                                    const DemandProfile& profile, Rng& rng);

/// Uniform over the arrangements with the pattern whose free slots form a
/// single block.
[[nodiscard]] Arrangement sample_defragmented_arrangement(const ConnectionPattern& n,
                                                          const DemandProfile& profile, Rng& rng);

} // namespace eolsec
