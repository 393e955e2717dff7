#pragma once

#include "eolsec/link_model.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace eolsec {

struct SpaceOptions {
    /// Upper bound on the number of regular states.
    std::size_t state_budget = 5'000'000;
    /// Also create a randomization state for the empty pattern.
    bool randomize_empty = false;
};

/// Number of arrangements of total width C, i.e. the regular state count,
/// computed without enumeration. Saturates at the largest finite double.
[[nodiscard]] double count_regular_states(const DemandProfile& profile);

/// Regular occupancy states plus the auxiliary randomization (RaaS) and
/// defragmentation (DaaS) states and the set structures over them.
///
/// Regular states are ordered by pattern (lexicographic on the count vector)
/// and then by token sequence (free < C1 < C2 < ...). Patterns are indexed
/// in the same order. Immutable once built.
class StateSpace {
public:
    [[nodiscard]] const DemandProfile& profile() const noexcept { return profile_; }
    [[nodiscard]] const SpaceOptions& options() const noexcept { return options_; }

    [[nodiscard]] std::size_t num_regular() const noexcept { return regular_.size(); }
    [[nodiscard]] std::size_t num_raas() const noexcept { return raas_.size(); }
    [[nodiscard]] std::size_t num_daas() const noexcept { return daas_.size(); }
    [[nodiscard]] std::size_t num_patterns() const noexcept { return patterns_.size(); }

    [[nodiscard]] const Arrangement& regular(std::size_t i) const { return regular_.at(i); }
    [[nodiscard]] const std::vector<Arrangement>& regular_states() const noexcept { return regular_; }
    [[nodiscard]] std::optional<std::size_t> find(const Arrangement& arr) const;

    [[nodiscard]] const ConnectionPattern& pattern(std::size_t p) const { return patterns_.at(p); }
    [[nodiscard]] std::optional<std::size_t> find_pattern(const ConnectionPattern& n) const;
    /// Pattern index of regular state i.
    [[nodiscard]] std::size_t pattern_of(std::size_t i) const { return pattern_of_.at(i); }

    /// Gamma: regular states sharing pattern index p.
    [[nodiscard]] const std::vector<std::size_t>& gamma(std::size_t p) const { return gamma_.at(p); }
    /// Gamma by pattern; empty for patterns that do not fit.
    [[nodiscard]] std::vector<std::size_t> gamma_of(const ConnectionPattern& n) const;

    /// Pattern index served by RaaS state r / DaaS state d.
    [[nodiscard]] std::size_t raas_pattern(std::size_t r) const { return raas_.at(r); }
    [[nodiscard]] std::size_t daas_pattern(std::size_t d) const { return daas_.at(d); }
    [[nodiscard]] std::optional<std::size_t> raas_of_pattern(std::size_t p) const;
    [[nodiscard]] std::optional<std::size_t> daas_of_pattern(std::size_t p) const;

    /// FB(k): regular states where class k is fragmentation-blocked.
    [[nodiscard]] const std::vector<std::size_t>& frag_blocked(std::size_t k) const { return frag_blocked_.at(k); }
    /// RB(k): regular states where class k is resource-blocked.
    [[nodiscard]] const std::vector<std::size_t>& res_blocked(std::size_t k) const { return res_blocked_.at(k); }
    /// FT(Sd): defragmented targets of DaaS state d.
    [[nodiscard]] const std::vector<std::size_t>& defrag_targets(std::size_t d) const { return ft_sets_.at(d); }
    /// FF(Sd, k) = Gamma(Sd) intersected with FB(k).
    [[nodiscard]] const std::vector<std::size_t>& defrag_sources(std::size_t d, std::size_t k) const;

    /// Per-state admission of class k, cached at build time.
    [[nodiscard]] Admission admission(std::size_t i, std::size_t k) const {
        return admission_[i * profile_.num_classes() + k];
    }

    /// One line per regular state: index TAB pattern TAB tokens.
    void dump(std::ostream& out) const;

    friend StateSpace build_state_space(const DemandProfile& profile, const SpaceOptions& options);

private:
    StateSpace(DemandProfile profile, SpaceOptions options)
        : profile_(std::move(profile)), options_(options) {}

    DemandProfile profile_;
    SpaceOptions options_;
    std::vector<Arrangement> regular_;
    std::unordered_map<Arrangement, std::size_t, ArrangementHash> index_;
    std::vector<ConnectionPattern> patterns_;
    std::map<ConnectionPattern, std::size_t> pattern_index_;
    std::vector<std::size_t> pattern_of_;
    std::vector<std::vector<std::size_t>> gamma_;
    std::vector<std::size_t> raas_;
    std::vector<std::size_t> daas_;
    std::vector<std::optional<std::size_t>> raas_of_pattern_;
    std::vector<std::optional<std::size_t>> daas_of_pattern_;
    std::vector<std::vector<std::size_t>> frag_blocked_;
    std::vector<std::vector<std::size_t>> res_blocked_;
    std::vector<std::vector<std::size_t>> ft_sets_;
    std::vector<std::vector<std::vector<std::size_t>>> ff_sets_;
    std::vector<Admission> admission_;
};

/// Enumerates every arrangement of width C. Throws StateBudgetExceeded when
/// the regular state count would exceed options.state_budget.
[[nodiscard]] StateSpace build_state_space(const DemandProfile& profile,
                                           const SpaceOptions& options = {});

} // namespace eolsec
