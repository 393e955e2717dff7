#pragma once

// Occupancy model of a single elastic optical link.
//
// A link has C spectrum slots. A class-k connection occupies d_k contiguous
// slots. The occupancy state is stored as an ordered token sequence, one
// token per free slot and one token per connection, so two adjacent
// connections of the same class remain distinct from a single wider block.
//
// Class indices are 0-based in this API and rendered 1-based ("C1" is class
// index 0). Slot positions are 1-based.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eolsec {

struct TrafficClass {
    int demand = 1;             ///< slots per connection
    double arrival_rate = 0.0;  ///< lambda_k
    double service_rate = 1.0;  ///< mu_k
};

class DemandProfile {
public:
    DemandProfile(int capacity, std::vector<TrafficClass> classes);

    [[nodiscard]] int capacity() const noexcept { return capacity_; }
    [[nodiscard]] std::size_t num_classes() const noexcept { return classes_.size(); }
    [[nodiscard]] const TrafficClass& traffic(std::size_t k) const { return classes_.at(k); }
    [[nodiscard]] const std::vector<TrafficClass>& classes() const noexcept { return classes_; }
    [[nodiscard]] int demand(std::size_t k) const { return classes_.at(k).demand; }

    [[nodiscard]] double total_arrival_rate() const noexcept;
    /// Offered load in Erlang: sum_k lambda_k d_k / mu_k.
    [[nodiscard]] double load_erlang() const noexcept;

    /// Same capacity, demands and service rates; arrival rates replaced.
    [[nodiscard]] DemandProfile with_arrival_rates(std::span<const double> rates) const;
    /// Splits a total load uniformly over the classes: lambda_k = lambda / K.
    [[nodiscard]] DemandProfile with_uniform_load(double load_erlang) const;

    bool operator==(const DemandProfile& other) const;

private:
    int capacity_;
    std::vector<TrafficClass> classes_;
};

/// One element of an arrangement: a single free slot or a whole connection.
struct Token {
    std::uint8_t code = 0;  // 0 = free slot, k + 1 = connection of class k

    [[nodiscard]] static constexpr Token free() noexcept { return Token{0}; }
    [[nodiscard]] static constexpr Token conn(std::size_t k) noexcept {
        return Token{static_cast<std::uint8_t>(k + 1)};
    }
    [[nodiscard]] constexpr bool is_free() const noexcept { return code == 0; }
    [[nodiscard]] constexpr std::size_t cls() const noexcept { return code - 1u; }

    auto operator<=>(const Token&) const = default;
};

class ConnectionPattern {
public:
    ConnectionPattern() = default;
    explicit ConnectionPattern(std::size_t num_classes) : counts_(num_classes, 0) {}
    explicit ConnectionPattern(std::vector<int> counts) : counts_(std::move(counts)) {}

    [[nodiscard]] std::size_t num_classes() const noexcept { return counts_.size(); }
    [[nodiscard]] int operator[](std::size_t k) const { return counts_[k]; }
    [[nodiscard]] int& operator[](std::size_t k) { return counts_[k]; }
    [[nodiscard]] const std::vector<int>& counts() const noexcept { return counts_; }

    /// Total number of connections.
    [[nodiscard]] int connections() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return connections() == 0; }
    [[nodiscard]] int used_slots(const DemandProfile& profile) const;
    /// E = C - sum_k n_k d_k; negative when the pattern does not fit.
    [[nodiscard]] int free_slots(const DemandProfile& profile) const;

    /// "(1,0,2)"
    [[nodiscard]] std::string render() const;

    auto operator<=>(const ConnectionPattern&) const = default;

private:
    std::vector<int> counts_;
};

class Arrangement {
public:
    Arrangement() = default;
    explicit Arrangement(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    /// All-free link of the given capacity.
    [[nodiscard]] static Arrangement empty(int capacity);
    /// Parses the rendered form, e.g. "F F C1 F F".
    [[nodiscard]] static Arrangement parse(std::string_view text);

    [[nodiscard]] std::span<const Token> tokens() const noexcept { return tokens_; }
    [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
    [[nodiscard]] const Token& operator[](std::size_t i) const { return tokens_[i]; }

    /// Total slot width under the profile's demands.
    [[nodiscard]] int width(const DemandProfile& profile) const;
    /// Width equals C and every connection class exists in the profile.
    [[nodiscard]] bool valid_for(const DemandProfile& profile) const;

    /// Tokens separated by spaces: "F" for free slots, "C<k>" for connections.
    [[nodiscard]] std::string render() const;

    auto operator<=>(const Arrangement&) const = default;

private:
    std::vector<Token> tokens_;
};

struct ArrangementHash {
    std::size_t operator()(const Arrangement& arr) const noexcept;
};

enum class Admission { Accept, FragBlocked, ResourceBlocked };

[[nodiscard]] ConnectionPattern pattern(const Arrangement& arr, const DemandProfile& profile);

/// Sizes of the maximal free runs in slot order.
[[nodiscard]] std::vector<int> free_fragments(const Arrangement& arr);

[[nodiscard]] Admission classify(const Arrangement& arr, const DemandProfile& profile, std::size_t k);

/// a(S, k): number of distinct positions a class-k connection can take.
[[nodiscard]] std::size_t allocation_ways(const Arrangement& arr, const DemandProfile& profile,
                                          std::size_t k);

/// Every arrangement reachable by admitting one class-k connection.
/// Throws InvalidArgument unless classify(arr, k) == Accept.
[[nodiscard]] std::vector<Arrangement> placements(const Arrangement& arr,
                                                  const DemandProfile& profile, std::size_t k);

struct Removal {
    Arrangement target;
    int multiplicity = 1;
};

/// Every arrangement reachable by one class-k departure, identical targets
/// merged. Throws InvalidArgument when no class-k connection is present.
[[nodiscard]] std::vector<Removal> removals(const Arrangement& arr, const DemandProfile& profile,
                                            std::size_t k);

/// All free slots form a single block (or there are none).
[[nodiscard]] bool is_defragmented(const Arrangement& arr);

} // namespace eolsec
