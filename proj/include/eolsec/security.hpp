#pragma once

// Eavesdropping metrics for randomized spectrum allocation.
//
// An eavesdropper watches W contiguous slots starting at slot j. An attack
// survives a randomization when the connections lying fully inside the
// window are the same per class before and after, and no connection
// straddles the window edges afterwards.

#include "eolsec/state_space.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace eolsec {

using BigCount = boost::multiprecision::cpp_int;

struct ObservationWindow {
    int start = 1;  ///< first observed slot, 1-based
    int width = 1;

    [[nodiscard]] int end() const noexcept { return start + width - 1; }
    /// 1 <= start <= C - width + 1
    void validate(int capacity) const;
};

/// (E + sum n_k)! / (E! prod n_k!): orderings of E free slots and the
/// connections, same-class connections indistinguishable.
[[nodiscard]] BigCount multinomial(int free_slots, std::span<const int> counts);

/// R_n: number of arrangements with the given pattern.
[[nodiscard]] BigCount total_rearrangements(const ConnectionPattern& n, const DemandProfile& profile);

struct WindowView {
    ConnectionPattern inside;  ///< connections lying fully inside the window
    bool straddles = false;    ///< some connection crosses a window edge
};

[[nodiscard]] WindowView inside_pattern(const Arrangement& arr, const DemandProfile& profile,
                                        const ObservationWindow& window);

enum class CountMethod { Enumeration, Partition };

/// Inside and outside factors of the partition count.
struct PartitionCount {
    BigCount inside;   ///< orderings within the window
    BigCount outside;  ///< left/right splits of the remaining tokens, times their orderings
    [[nodiscard]] BigCount total() const { return inside * outside; }
};

/// Straddle-free arrangements of pattern `full` whose inside pattern equals
/// `inside` for the window. Zero when the split is infeasible.
[[nodiscard]] PartitionCount partition_count(const ConnectionPattern& full,
                                             const ConnectionPattern& inside,
                                             const DemandProfile& profile,
                                             const ObservationWindow& window);

/// R^j_{n_W}(S): arrangements with the same pattern as arr, no straddler,
/// and the same inside pattern as arr.
[[nodiscard]] BigCount count_matching_rearrangements(const Arrangement& arr,
                                                     const DemandProfile& profile,
                                                     const ObservationWindow& window,
                                                     CountMethod method,
                                                     std::size_t enumeration_budget = 10'000'000);

/// Per-state success probability with windows placed uniformly.
[[nodiscard]] double state_attack_success(const Arrangement& arr, const DemandProfile& profile,
                                          int width);

/// P^W_SA: per-state success averaged under pi restricted to the non-empty
/// regular states. Only the regular prefix of pi is read. NaN if those
/// states carry no mass.
[[nodiscard]] double attack_success_probability(std::span<const double> pi, const StateSpace& space,
                                                int width);

struct ObservableData {
    double amount = 0.0;    ///< D: data observed until the N_r-th randomization
    double fraction = 0.0;  ///< Lambda = mu D / b
};

/// Requires lambda_s / mu to be a positive integer N_r (NonIntegerRpRatio
/// otherwise) and 0 <= p <= 1.
[[nodiscard]] ObservableData observable_fraction(double p, double lambda_s, double mu,
                                                 double b = 1.0);

struct WindowSecurity {
    int width = 0;
    double attack_probability = 0.0;
    /// NaN when lambda_S / mu is not a positive integer
    double observable_amount = 0.0;
    double observable_fraction = 0.0;
};

struct SecurityReport {
    std::vector<WindowSecurity> windows;
    double lambda_s = 0.0;
    double mu = 1.0;
    double b = 1.0;
};

[[nodiscard]] SecurityReport security_report(std::span<const double> pi, const StateSpace& space,
                                             std::span<const int> widths, double lambda_s,
                                             double mu, double b = 1.0);

/// Precomputed slot map of one arrangement for O(K) window queries.
class WindowScanner {
public:
    WindowScanner(const Arrangement& arr, const DemandProfile& profile);

    [[nodiscard]] bool straddles(int start, int width) const;
    [[nodiscard]] int inside_count(std::size_t k, int start, int width) const;
    /// Same fully-inside count for every class.
    [[nodiscard]] bool same_inside(const WindowScanner& other, int start, int width) const;
    /// Success indicator of one window: other (after) has no straddler and
    /// the same inside pattern as this (before).
    [[nodiscard]] bool survives(const WindowScanner& after, int start, int width) const;
    /// Fraction of the C - W + 1 windows that survive.
    [[nodiscard]] double survival_fraction(const WindowScanner& after, int width) const;

private:
    int capacity_;
    std::vector<int> demands_;
    std::vector<int> first_;  // per slot: start slot of the covering connection, 0 if free
    std::vector<int> last_;   // per slot: end slot of the covering connection, 0 if free
    // starts_[k][s] = class-k connections starting before slot s, s in [1, C + 1]
    std::vector<std::vector<int>> starts_;
};

} // namespace eolsec
