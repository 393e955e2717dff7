#include "eolsec/security.hpp"

#include "eolsec/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace eolsec {

namespace {

double ratio_to_double(const BigCount& num, const BigCount& den) {
    return boost::multiprecision::cpp_rational(num, den).convert_to<double>();
}

} // namespace

void ObservationWindow::validate(int capacity) const {
    if (width < 1 || width > capacity) {
        throw InvalidArgument("window width " + std::to_string(width) + " outside [1, " +
                              std::to_string(capacity) + "]");
    }
    if (start < 1 || start > capacity - width + 1) {
        throw InvalidArgument("window start " + std::to_string(start) + " outside [1, " +
                              std::to_string(capacity - width + 1) + "]");
    }
}

BigCount multinomial(int free_slots, std::span<const int> counts) {
    if (free_slots < 0) return 0;
    // product over classes of C(E + n_1 + ... + n_k, n_k); each partial
    // product stays integral
    BigCount result = 1;
    long running = free_slots;
    for (int n : counts) {
        if (n < 0) return 0;
        for (int i = 1; i <= n; ++i) {
            ++running;
            result *= running;
            result /= i;
        }
    }
    return result;
}

BigCount total_rearrangements(const ConnectionPattern& n, const DemandProfile& profile) {
    const int free = n.free_slots(profile);
    if (free < 0) throw InvalidArgument("pattern " + n.render() + " does not fit the link");
    return multinomial(free, n.counts());
}

WindowView inside_pattern(const Arrangement& arr, const DemandProfile& profile,
                          const ObservationWindow& window) {
    window.validate(profile.capacity());
    WindowView view{ConnectionPattern(profile.num_classes()), false};
    int slot = 1;
    for (auto t : arr.tokens()) {
        if (t.is_free()) {
            ++slot;
            continue;
        }
        const int first = slot;
        const int last = slot + profile.demand(t.cls()) - 1;
        if (first >= window.start && last <= window.end()) {
            ++view.inside[t.cls()];
        } else if (first <= window.end() && last >= window.start) {
            view.straddles = true;
        }
        slot = last + 1;
    }
    return view;
}

PartitionCount partition_count(const ConnectionPattern& full, const ConnectionPattern& inside,
                               const DemandProfile& profile, const ObservationWindow& window) {
    window.validate(profile.capacity());
    const std::size_t num_classes = profile.num_classes();
    PartitionCount out{0, 0};

    const int inside_free = window.width - inside.used_slots(profile);
    if (inside_free < 0) return out;
    std::vector<int> outside(num_classes);
    for (std::size_t k = 0; k < num_classes; ++k) {
        outside[k] = full[k] - inside[k];
        if (outside[k] < 0) return out;
    }
    out.inside = multinomial(inside_free, inside.counts());

    // Split the outside connections between the left and right segments;
    // free slots fill whatever remains on each side.
    const int left_cap = window.start - 1;
    const int right_cap = profile.capacity() - window.end();
    std::vector<int> left(num_classes, 0);
    std::vector<int> right(num_classes);
    while (true) {
        int left_used = 0;
        int right_used = 0;
        for (std::size_t k = 0; k < num_classes; ++k) {
            right[k] = outside[k] - left[k];
            left_used += left[k] * profile.demand(k);
            right_used += right[k] * profile.demand(k);
        }
        const int left_free = left_cap - left_used;
        const int right_free = right_cap - right_used;
        if (left_free >= 0 && right_free >= 0) {
            out.outside += multinomial(left_free, left) * multinomial(right_free, right);
        }
        std::size_t k = 0;
        while (k < num_classes && left[k] == outside[k]) left[k++] = 0;
        if (k == num_classes) break;
        ++left[k];
    }
    return out;
}

BigCount count_matching_rearrangements(const Arrangement& arr, const DemandProfile& profile,
                                       const ObservationWindow& window, CountMethod method,
                                       std::size_t enumeration_budget) {
    const WindowView before = inside_pattern(arr, profile, window);
    const ConnectionPattern full = pattern(arr, profile);
    if (method == CountMethod::Partition) {
        return partition_count(full, before.inside, profile, window).total();
    }

    if (total_rearrangements(full, profile) > enumeration_budget) {
        throw StateBudgetExceeded(ratio_to_double(total_rearrangements(full, profile), 1),
                                  enumeration_budget);
    }
    std::vector<Token> tokens(arr.tokens().begin(), arr.tokens().end());
    std::sort(tokens.begin(), tokens.end());
    BigCount matches = 0;
    do {
        const WindowView after = inside_pattern(Arrangement(tokens), profile, window);
        if (!after.straddles && after.inside == before.inside) ++matches;
    } while (std::next_permutation(tokens.begin(), tokens.end()));
    return matches;
}

double state_attack_success(const Arrangement& arr, const DemandProfile& profile, int width) {
    const int c = profile.capacity();
    ObservationWindow{1, width}.validate(c);
    const ConnectionPattern full = pattern(arr, profile);
    BigCount matches = 0;
    for (int start = 1; start <= c - width + 1; ++start) {
        matches += count_matching_rearrangements(arr, profile, {start, width},
                                                 CountMethod::Partition);
    }
    return ratio_to_double(matches, total_rearrangements(full, profile) * (c - width + 1));
}

double attack_success_probability(std::span<const double> pi, const StateSpace& space, int width) {
    const DemandProfile& profile = space.profile();
    const int c = profile.capacity();
    ObservationWindow{1, width}.validate(c);
    if (pi.size() < space.num_regular()) {
        throw InvalidArgument("distribution shorter than the regular state count");
    }

    using Key = std::tuple<std::size_t, int, std::vector<int>>;
    std::map<Key, BigCount> memo;
    const int positions = c - width + 1;

    double weighted = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < space.num_regular(); ++i) {
        const std::size_t p = space.pattern_of(i);
        const ConnectionPattern& full = space.pattern(p);
        if (full.empty() || pi[i] <= 0.0) continue;
        BigCount matches = 0;
        for (int start = 1; start <= positions; ++start) {
            const ObservationWindow window{start, width};
            const WindowView view = inside_pattern(space.regular(i), profile, window);
            Key key{p, start, view.inside.counts()};
            auto it = memo.find(key);
            if (it == memo.end()) {
                it = memo.emplace(std::move(key),
                                  partition_count(full, view.inside, profile, window).total())
                         .first;
            }
            matches += it->second;
        }
        const double success =
            ratio_to_double(matches, total_rearrangements(full, profile) * positions);
        weighted += pi[i] * success;
        mass += pi[i];
    }
    if (mass <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return weighted / mass;
}

ObservableData observable_fraction(double p, double lambda_s, double mu, double b) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("attack probability must lie in [0, 1]");
    if (!(mu > 0.0)) throw InvalidArgument("service rate must be positive");
    if (!(b > 0.0)) throw InvalidArgument("data rate b must be positive");
    const double ratio = lambda_s / mu;
    const double rounds = std::round(ratio);
    if (!(lambda_s > 0.0) || rounds < 1.0 ||
        std::abs(ratio - rounds) > 1e-9 * std::max(1.0, ratio)) {
        throw NonIntegerRpRatio(ratio);
    }

    // 1 + p + ... + p^(N_r - 1)
    double series = 0.0;
    if (p == 1.0) {
        series = rounds;
    } else if (p == 0.0) {
        series = 1.0;
    } else {
        series = -std::expm1(rounds * std::log(p)) / (1.0 - p);
    }
    ObservableData out;
    out.amount = b / lambda_s * series;
    out.fraction = mu * out.amount / b;
    return out;
}

SecurityReport security_report(std::span<const double> pi, const StateSpace& space,
                               std::span<const int> widths, double lambda_s, double mu, double b) {
    SecurityReport report;
    report.lambda_s = lambda_s;
    report.mu = mu;
    report.b = b;
    for (int w : widths) {
        WindowSecurity entry;
        entry.width = w;
        entry.attack_probability = attack_success_probability(pi, space, w);
        try {
            const auto data = observable_fraction(entry.attack_probability, lambda_s, mu, b);
            entry.observable_amount = data.amount;
            entry.observable_fraction = data.fraction;
        } catch (const InvalidArgument&) {
            entry.observable_amount = std::numeric_limits<double>::quiet_NaN();
            entry.observable_fraction = std::numeric_limits<double>::quiet_NaN();
        }
        report.windows.push_back(entry);
    }
    return report;
}

WindowScanner::WindowScanner(const Arrangement& arr, const DemandProfile& profile)
    : capacity_(profile.capacity()),
      first_(static_cast<std::size_t>(capacity_) + 2, 0),
      last_(static_cast<std::size_t>(capacity_) + 2, 0),
      starts_(profile.num_classes(), std::vector<int>(static_cast<std::size_t>(capacity_) + 2, 0)) {
    demands_.reserve(profile.num_classes());
    for (const auto& c : profile.classes()) demands_.push_back(c.demand);
    int slot = 1;
    for (auto t : arr.tokens()) {
        if (t.is_free()) {
            ++slot;
            continue;
        }
        const int d = demands_[t.cls()];
        for (int s = slot; s < slot + d; ++s) {
            first_[static_cast<std::size_t>(s)] = slot;
            last_[static_cast<std::size_t>(s)] = slot + d - 1;
        }
        ++starts_[t.cls()][static_cast<std::size_t>(slot) + 1];
        slot += d;
    }
    for (auto& prefix : starts_) {
        for (std::size_t s = 2; s < prefix.size(); ++s) prefix[s] += prefix[s - 1];
    }
}

bool WindowScanner::straddles(int start, int width) const {
    const int end = start + width - 1;
    const auto a = static_cast<std::size_t>(start);
    const auto b = static_cast<std::size_t>(end);
    return (first_[a] != 0 && first_[a] < start) || (last_[b] != 0 && last_[b] > end);
}

int WindowScanner::inside_count(std::size_t k, int start, int width) const {
    const int latest_start = start + width - demands_[k];
    if (latest_start < start) return 0;
    const auto& prefix = starts_[k];
    return prefix[static_cast<std::size_t>(latest_start) + 1] - prefix[static_cast<std::size_t>(start)];
}

bool WindowScanner::same_inside(const WindowScanner& other, int start, int width) const {
    for (std::size_t k = 0; k < demands_.size(); ++k) {
        if (inside_count(k, start, width) != other.inside_count(k, start, width)) return false;
    }
    return true;
}

bool WindowScanner::survives(const WindowScanner& after, int start, int width) const {
    return !after.straddles(start, width) && same_inside(after, start, width);
}

double WindowScanner::survival_fraction(const WindowScanner& after, int width) const {
    const int positions = capacity_ - width + 1;
    int hits = 0;
    for (int start = 1; start <= positions; ++start) {
        if (survives(after, start, width)) ++hits;
    }
    return static_cast<double>(hits) / positions;
}

} // namespace eolsec
