#include "eolsec/link_model.hpp"

#include "eolsec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace eolsec {

DemandProfile::DemandProfile(int capacity, std::vector<TrafficClass> classes)
    : capacity_(capacity), classes_(std::move(classes)) {
    if (capacity_ < 1) {
        throw InvalidArgument("capacity must be positive");
    }
    if (classes_.empty()) {
        throw InvalidArgument("at least one traffic class is required");
    }
    if (classes_.size() > 254) {
        throw InvalidArgument("at most 254 traffic classes are supported");
    }
    for (std::size_t k = 0; k < classes_.size(); ++k) {
        const auto& c = classes_[k];
        const auto where = "class " + std::to_string(k + 1) + ": ";
        if (c.demand < 1 || c.demand > capacity_) {
            throw InvalidArgument(where + "demand must lie in [1, C]");
        }
        if (!(c.arrival_rate >= 0.0) || !std::isfinite(c.arrival_rate)) {
            throw InvalidArgument(where + "arrival rate must be finite and >= 0");
        }
        if (!(c.service_rate > 0.0) || !std::isfinite(c.service_rate)) {
            throw InvalidArgument(where + "service rate must be finite and > 0");
        }
    }
}

double DemandProfile::total_arrival_rate() const noexcept {
    double total = 0.0;
    for (const auto& c : classes_) total += c.arrival_rate;
    return total;
}

double DemandProfile::load_erlang() const noexcept {
    double load = 0.0;
    for (const auto& c : classes_) load += c.arrival_rate * c.demand / c.service_rate;
    return load;
}

DemandProfile DemandProfile::with_arrival_rates(std::span<const double> rates) const {
    if (rates.size() != classes_.size()) {
        throw InvalidArgument("arrival rate list length does not match the class count");
    }
    auto classes = classes_;
    for (std::size_t k = 0; k < classes.size(); ++k) classes[k].arrival_rate = rates[k];
    return DemandProfile(capacity_, std::move(classes));
}

DemandProfile DemandProfile::with_uniform_load(double load_erlang) const {
    if (!(load_erlang >= 0.0)) {
        throw InvalidArgument("load must be >= 0");
    }
    // load = (lambda / K) * sum_k d_k / mu_k
    double per_unit = 0.0;
    for (const auto& c : classes_) per_unit += c.demand / c.service_rate;
    const double lambda_k = load_erlang / per_unit;
    std::vector<double> rates(classes_.size(), lambda_k);
    return with_arrival_rates(rates);
}

bool DemandProfile::operator==(const DemandProfile& other) const {
    if (capacity_ != other.capacity_ || classes_.size() != other.classes_.size()) return false;
    for (std::size_t k = 0; k < classes_.size(); ++k) {
        const auto& a = classes_[k];
        const auto& b = other.classes_[k];
        if (a.demand != b.demand || a.arrival_rate != b.arrival_rate ||
            a.service_rate != b.service_rate) {
            return false;
        }
    }
    return true;
}

int ConnectionPattern::connections() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), 0);
}

int ConnectionPattern::used_slots(const DemandProfile& profile) const {
    int used = 0;
    for (std::size_t k = 0; k < counts_.size(); ++k) used += counts_[k] * profile.demand(k);
    return used;
}

int ConnectionPattern::free_slots(const DemandProfile& profile) const {
    return profile.capacity() - used_slots(profile);
}

std::string ConnectionPattern::render() const {
    std::string out = "(";
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(counts_[k]);
    }
    out += ')';
    return out;
}

Arrangement Arrangement::empty(int capacity) {
    return Arrangement(std::vector<Token>(static_cast<std::size_t>(capacity), Token::free()));
}

Arrangement Arrangement::parse(std::string_view text) {
    std::vector<Token> tokens;
    std::istringstream in{std::string(text)};
    std::string word;
    while (in >> word) {
        if (word == "F") {
            tokens.push_back(Token::free());
        } else if (word.size() > 1 && word[0] == 'C') {
            int k = 0;
            try {
                k = std::stoi(word.substr(1));
            } catch (const std::exception&) {
                throw InvalidArgument("bad token '" + word + "'");
            }
            if (k < 1 || k > 254) throw InvalidArgument("bad class in token '" + word + "'");
            tokens.push_back(Token::conn(static_cast<std::size_t>(k - 1)));
        } else {
            throw InvalidArgument("bad token '" + word + "'");
        }
    }
    return Arrangement(std::move(tokens));
}

int Arrangement::width(const DemandProfile& profile) const {
    int w = 0;
    for (auto t : tokens_) w += t.is_free() ? 1 : profile.demand(t.cls());
    return w;
}

bool Arrangement::valid_for(const DemandProfile& profile) const {
    for (auto t : tokens_) {
        if (!t.is_free() && t.cls() >= profile.num_classes()) return false;
    }
    return width(profile) == profile.capacity();
}

std::string Arrangement::render() const {
    std::string out;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (i) out += ' ';
        if (tokens_[i].is_free()) {
            out += 'F';
        } else {
            out += 'C';
            out += std::to_string(tokens_[i].cls() + 1);
        }
    }
    return out;
}

std::size_t ArrangementHash::operator()(const Arrangement& arr) const noexcept {
    const auto tokens = arr.tokens();
    const std::string_view bytes(reinterpret_cast<const char*>(tokens.data()), tokens.size());
    return std::hash<std::string_view>{}(bytes);
}

ConnectionPattern pattern(const Arrangement& arr, const DemandProfile& profile) {
    ConnectionPattern n(profile.num_classes());
    for (auto t : arr.tokens()) {
        if (!t.is_free()) ++n[t.cls()];
    }
    return n;
}

std::vector<int> free_fragments(const Arrangement& arr) {
    std::vector<int> fragments;
    int run = 0;
    for (auto t : arr.tokens()) {
        if (t.is_free()) {
            ++run;
        } else if (run > 0) {
            fragments.push_back(run);
            run = 0;
        }
    }
    if (run > 0) fragments.push_back(run);
    return fragments;
}

Admission classify(const Arrangement& arr, const DemandProfile& profile, std::size_t k) {
    const int d = profile.demand(k);
    int total = 0;
    int largest = 0;
    for (int f : free_fragments(arr)) {
        total += f;
        largest = std::max(largest, f);
    }
    if (largest >= d) return Admission::Accept;
    if (total >= d) return Admission::FragBlocked;
    return Admission::ResourceBlocked;
}

std::size_t allocation_ways(const Arrangement& arr, const DemandProfile& profile, std::size_t k) {
    const int d = profile.demand(k);
    std::size_t ways = 0;
    for (int f : free_fragments(arr)) {
        if (f >= d) ways += static_cast<std::size_t>(f - d + 1);
    }
    return ways;
}

std::vector<Arrangement> placements(const Arrangement& arr, const DemandProfile& profile,
                                    std::size_t k) {
    if (classify(arr, profile, k) != Admission::Accept) {
        throw InvalidArgument("class " + std::to_string(k + 1) + " cannot be admitted in " +
                              arr.render());
    }
    const int d = profile.demand(k);
    const auto tokens = arr.tokens();
    std::vector<Arrangement> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (!tokens[i].is_free()) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < tokens.size() && tokens[end].is_free()) ++end;
        const int run = static_cast<int>(end - i);
        // the new connection starts `offset` slots into the run
        for (int offset = 0; offset + d <= run; ++offset) {
            std::vector<Token> next;
            next.reserve(tokens.size() - d + 1);
            next.insert(next.end(), tokens.begin(), tokens.begin() + static_cast<long>(i) + offset);
            next.push_back(Token::conn(k));
            next.insert(next.end(), tokens.begin() + static_cast<long>(i) + offset + d,
                        tokens.end());
            out.emplace_back(std::move(next));
        }
        i = end;
    }
    return out;
}

std::vector<Removal> removals(const Arrangement& arr, const DemandProfile& profile,
                              std::size_t k) {
    const auto tokens = arr.tokens();
    const int d = profile.demand(k);
    std::vector<Removal> out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] != Token::conn(k)) continue;
        std::vector<Token> next;
        next.reserve(tokens.size() + d - 1);
        next.insert(next.end(), tokens.begin(), tokens.begin() + static_cast<long>(i));
        next.insert(next.end(), static_cast<std::size_t>(d), Token::free());
        next.insert(next.end(), tokens.begin() + static_cast<long>(i) + 1, tokens.end());
        Arrangement target(std::move(next));
        auto same = std::find_if(out.begin(), out.end(),
                                 [&](const Removal& r) { return r.target == target; });
        if (same != out.end()) {
            ++same->multiplicity;
        } else {
            out.push_back({std::move(target), 1});
        }
    }
    if (out.empty()) {
        throw InvalidArgument("no class-" + std::to_string(k + 1) + " connection in " +
                              arr.render());
    }
    return out;
}

bool is_defragmented(const Arrangement& arr) {
    return free_fragments(arr).size() <= 1;
}

} // namespace eolsec
