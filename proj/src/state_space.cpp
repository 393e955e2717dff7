#include "eolsec/state_space.hpp"

#include "eolsec/errors.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace eolsec {

namespace {

void enumerate(const DemandProfile& profile, int remaining, std::vector<Token>& prefix,
               std::vector<Arrangement>& out) {
    if (remaining == 0) {
        out.emplace_back(prefix);
        return;
    }
    prefix.push_back(Token::free());
    enumerate(profile, remaining - 1, prefix, out);
    prefix.pop_back();
    for (std::size_t k = 0; k < profile.num_classes(); ++k) {
        if (profile.demand(k) <= remaining) {
            prefix.push_back(Token::conn(k));
            enumerate(profile, remaining - profile.demand(k), prefix, out);
            prefix.pop_back();
        }
    }
}

} // namespace

double count_regular_states(const DemandProfile& profile) {
    const int c = profile.capacity();
    std::vector<double> ways(static_cast<std::size_t>(c) + 1, 0.0);
    ways[0] = 1.0;
    for (int w = 1; w <= c; ++w) {
        double total = ways[w - 1];
        for (const auto& cls : profile.classes()) {
            if (cls.demand <= w) total += ways[w - cls.demand];
        }
        ways[w] = std::min(total, std::numeric_limits<double>::max());
    }
    return ways[c];
}

std::optional<std::size_t> StateSpace::find(const Arrangement& arr) const {
    auto it = index_.find(arr);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> StateSpace::find_pattern(const ConnectionPattern& n) const {
    auto it = pattern_index_.find(n);
    if (it == pattern_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::size_t> StateSpace::gamma_of(const ConnectionPattern& n) const {
    if (auto p = find_pattern(n)) return gamma_[*p];
    return {};
}

std::optional<std::size_t> StateSpace::raas_of_pattern(std::size_t p) const {
    return raas_of_pattern_.at(p);
}

std::optional<std::size_t> StateSpace::daas_of_pattern(std::size_t p) const {
    return daas_of_pattern_.at(p);
}

const std::vector<std::size_t>& StateSpace::defrag_sources(std::size_t d, std::size_t k) const {
    return ff_sets_.at(d).at(k);
}

void StateSpace::dump(std::ostream& out) const {
    for (std::size_t i = 0; i < regular_.size(); ++i) {
        out << i << '\t' << patterns_[pattern_of_[i]].render() << '\t' << regular_[i].render()
            << '\n';
    }
}

StateSpace build_state_space(const DemandProfile& profile, const SpaceOptions& options) {
    const double estimate = count_regular_states(profile);
    if (estimate > static_cast<double>(options.state_budget)) {
        throw StateBudgetExceeded(estimate, options.state_budget);
    }

    StateSpace space(profile, options);
    const std::size_t num_classes = profile.num_classes();

    std::vector<Arrangement> all;
    all.reserve(static_cast<std::size_t>(estimate));
    std::vector<Token> prefix;
    enumerate(profile, profile.capacity(), prefix, all);

    std::vector<std::pair<ConnectionPattern, Arrangement>> keyed;
    keyed.reserve(all.size());
    for (auto& arr : all) keyed.emplace_back(pattern(arr, profile), std::move(arr));
    std::sort(keyed.begin(), keyed.end());

    space.regular_.reserve(keyed.size());
    space.pattern_of_.reserve(keyed.size());
    for (auto& [n, arr] : keyed) {
        if (space.patterns_.empty() || space.patterns_.back() != n) {
            space.pattern_index_.emplace(n, space.patterns_.size());
            space.patterns_.push_back(n);
            space.gamma_.emplace_back();
        }
        const std::size_t i = space.regular_.size();
        space.index_.emplace(arr, i);
        space.pattern_of_.push_back(space.patterns_.size() - 1);
        space.gamma_.back().push_back(i);
        space.regular_.push_back(std::move(arr));
    }

    const std::size_t n_states = space.regular_.size();
    space.admission_.resize(n_states * num_classes);
    space.frag_blocked_.assign(num_classes, {});
    space.res_blocked_.assign(num_classes, {});
    std::vector<bool> pattern_fragmentable(space.patterns_.size(), false);
    for (std::size_t i = 0; i < n_states; ++i) {
        for (std::size_t k = 0; k < num_classes; ++k) {
            const Admission a = classify(space.regular_[i], profile, k);
            space.admission_[i * num_classes + k] = a;
            if (a == Admission::FragBlocked) {
                space.frag_blocked_[k].push_back(i);
                pattern_fragmentable[space.pattern_of_[i]] = true;
            } else if (a == Admission::ResourceBlocked) {
                space.res_blocked_[k].push_back(i);
            }
        }
    }

    space.raas_of_pattern_.assign(space.patterns_.size(), std::nullopt);
    space.daas_of_pattern_.assign(space.patterns_.size(), std::nullopt);
    for (std::size_t p = 0; p < space.patterns_.size(); ++p) {
        if (!space.patterns_[p].empty() || options.randomize_empty) {
            space.raas_of_pattern_[p] = space.raas_.size();
            space.raas_.push_back(p);
        }
        if (pattern_fragmentable[p]) {
            const std::size_t d = space.daas_.size();
            space.daas_of_pattern_[p] = d;
            space.daas_.push_back(p);

            std::vector<std::size_t> targets;
            for (std::size_t i : space.gamma_[p]) {
                if (is_defragmented(space.regular_[i])) targets.push_back(i);
            }
            space.ft_sets_.push_back(std::move(targets));

            std::vector<std::vector<std::size_t>> sources(num_classes);
            for (std::size_t i : space.gamma_[p]) {
                for (std::size_t k = 0; k < num_classes; ++k) {
                    if (space.admission(i, k) == Admission::FragBlocked) sources[k].push_back(i);
                }
            }
            space.ff_sets_.push_back(std::move(sources));
        }
    }
    return space;
}

} // namespace eolsec
