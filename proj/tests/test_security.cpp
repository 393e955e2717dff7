#include "eolsec/errors.hpp"
#include "eolsec/security.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace eolsec;

namespace {

DemandProfile c7() { return oracle::profile(7, {3, 4}); }
DemandProfile c14() { return oracle::profile(14, {2, 3, 4}); }

// The eavesdropping example: a 3-slot connection inside [6, 9], the 2-slot
// one to the left and the 4-slot one to the right, 5 free slots.
Arrangement observed() { return Arrangement::parse("F F F C1 C2 F C3 F"); }

Arrangement arr(const char* text) { return Arrangement::parse(text); }

}  // namespace

TEST_CASE("multinomial counts") {
    const std::vector<int> none{0, 0};
    const std::vector<int> one_each{1, 1, 1};
    CHECK(multinomial(7, none) == 1);
    CHECK(multinomial(5, one_each) == 336);
    CHECK(multinomial(0, std::vector<int>{1, 1}) == 2);
    CHECK(multinomial(-1, none) == 0);
    CHECK(total_rearrangements(ConnectionPattern(std::vector<int>{0, 0}), c7()) == 1);
    CHECK(total_rearrangements(ConnectionPattern(std::vector<int>{1, 1}), c7()) == 2);
    CHECK(total_rearrangements(ConnectionPattern(std::vector<int>{1, 1, 1}), c14()) == 336);
    CHECK(oracle::permutations(observed()) == 336);
    CHECK_THROWS_AS((void)total_rearrangements(ConnectionPattern(std::vector<int>{2, 1}), c7()), InvalidArgument);
    // large links stay exact
    CHECK(total_rearrangements(ConnectionPattern(std::vector<int>{3, 2, 2}), oracle::profile(100, {5, 10, 15})) ==
          BigCount("5665448880"));
}

TEST_CASE("window validation") {
    CHECK_THROWS_AS(ObservationWindow({0, 3}).validate(7), InvalidArgument);
    CHECK_THROWS_AS(ObservationWindow({6, 3}).validate(7), InvalidArgument);
    CHECK_THROWS_AS(ObservationWindow({1, 8}).validate(7), InvalidArgument);
    CHECK_NOTHROW(ObservationWindow({5, 3}).validate(7));
}

TEST_CASE("inside pattern") {
    const auto p = c14();
    auto view = inside_pattern(observed(), p, {6, 4});
    CHECK(view.inside == ConnectionPattern(std::vector<int>{0, 1, 0}));
    CHECK_FALSE(view.straddles);

    view = inside_pattern(observed(), p, {1, 14});
    CHECK(view.inside == pattern(observed(), p));
    CHECK_FALSE(view.straddles);

    view = inside_pattern(arr("C2 C1"), c7(), {1, 3});
    CHECK(view.inside == ConnectionPattern(std::vector<int>{0, 0}));
    CHECK(view.straddles);
}

TEST_CASE("eavesdropping example counts") {
    const auto p = c14();
    const ObservationWindow w{6, 4};
    CHECK(1.0 / (p.capacity() - w.width + 1) == doctest::Approx(1.0 / 11));
    const auto parts = partition_count(pattern(observed(), p), ConnectionPattern(std::vector<int>{0, 1, 0}), p, w);
    CHECK(parts.inside == 2);
    CHECK(parts.outside == 16);
    CHECK(parts.total() == 32);
    CHECK(count_matching_rearrangements(observed(), p, w, CountMethod::Partition) == 32);
    CHECK(count_matching_rearrangements(observed(), p, w, CountMethod::Enumeration) == 32);
    CHECK(oracle::window_matches(observed(), p, 6, 4) == 32);
}

TEST_CASE("single match on a full link") {
    const auto p = c7();
    CHECK(count_matching_rearrangements(arr("C1 C2"), p, {1, 3}, CountMethod::Partition) == 1);
    CHECK(count_matching_rearrangements(arr("C1 C2"), p, {1, 3}, CountMethod::Enumeration) == 1);
}

TEST_CASE("enumeration budget") {
    CHECK_THROWS_AS((void)count_matching_rearrangements(observed(), c14(), {6, 4}, CountMethod::Enumeration, 100),
                    StateBudgetExceeded);
}

TEST_CASE("per-state success on a full link matches brute force") {
    const auto p = c7();
    for (const char* text : {"C1 C2", "C2 C1"}) {
        const auto a = arr(text);
        for (int w = 1; w <= 7; ++w) {
            std::uint64_t hits = 0;
            for (int j = 1; j <= 7 - w + 1; ++j) hits += oracle::window_matches(a, p, j, w);
            const double want = static_cast<double>(hits) / (2.0 * (7 - w + 1));
            CHECK(state_attack_success(a, p, w) == doctest::Approx(want).epsilon(1e-15));
        }
        CHECK(state_attack_success(a, p, 7) == 1.0);
    }
}

TEST_CASE("attack success probability over a distribution") {
    const auto p = c7();
    const auto s = build_state_space(p);
    std::vector<double> pi(s.num_regular(), 0.0);

    // mass on the empty state only: nothing to attack
    pi[0] = 1.0;
    CHECK(std::isnan(attack_success_probability(pi, s, 3)));

    // the empty state is excluded and the rest renormalized
    const auto a = *s.find(arr("C1 C2"));
    const auto b = *s.find(arr("F F C1 F F"));
    pi[0] = 0.5;
    pi[a] = 0.125;
    pi[b] = 0.375;
    for (int w = 1; w <= 7; ++w) {
        const double want = 0.25 * state_attack_success(arr("C1 C2"), p, w) +
                            0.75 * state_attack_success(arr("F F C1 F F"), p, w);
        CHECK(attack_success_probability(pi, s, w) == doctest::Approx(want).epsilon(1e-14));
    }
    CHECK(attack_success_probability(pi, s, 7) == 1.0);
}

TEST_CASE("observable fraction") {
    CHECK(observable_fraction(1.0, 5.0, 1.0).fraction == doctest::Approx(1.0));
    CHECK(observable_fraction(0.0, 4.0, 1.0).fraction == doctest::Approx(0.25));
    CHECK(observable_fraction(0.3, 2.0, 2.0).fraction == doctest::Approx(1.0));
    const auto d = observable_fraction(0.5, 3.0, 1.0, 2.0);
    CHECK(d.amount == doctest::Approx(2.0 / 3.0 * (1 + 0.5 + 0.25)));
    CHECK(d.fraction == doctest::Approx(1.75 / 3.0));
    CHECK_THROWS_AS((void)observable_fraction(0.5, 2.5, 1.0), NonIntegerRpRatio);
    CHECK_THROWS_AS((void)observable_fraction(0.5, 0.0, 1.0), NonIntegerRpRatio);
    CHECK_THROWS_AS((void)observable_fraction(1.5, 2.0, 1.0), InvalidArgument);
    // decreasing in the RP rate for p < 1
    double prev = 2.0;
    for (int n = 1; n <= 10; ++n) {
        const double f = observable_fraction(0.4, n, 1.0).fraction;
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("window scanner agrees with the slot-level reference") {
    const auto p = c14();
    const auto s = build_state_space(p);
    const Arrangement before = observed();
    const WindowScanner sb(before, p);
    for (std::size_t i = 0; i < s.num_regular(); i += 7) {
        const auto& after = s.regular(i);
        if (pattern(after, p) != pattern(before, p)) continue;
        const WindowScanner sa(after, p);
        for (int w = 1; w <= 14; ++w) {
            int hits = 0;
            for (int j = 1; j <= 14 - w + 1; ++j) {
                const auto ib = oracle::inside(before, p, j, w);
                const auto ia = oracle::inside(after, p, j, w);
                CHECK(sa.straddles(j, w) == ia.straddle);
                for (std::size_t k = 0; k < 3; ++k) CHECK(sa.inside_count(k, j, w) == ia.counts[k]);
                const bool ok = !ia.straddle && ia.counts == ib.counts;
                CHECK(sb.survives(sa, j, w) == ok);
                hits += ok ? 1 : 0;
            }
            CHECK(sb.survival_fraction(sa, w) == doctest::Approx(static_cast<double>(hits) / (14 - w + 1)));
        }
    }
}

TEST_CASE("partition counting equals brute force on small links") {
    for (const auto& p : {c7(), oracle::profile(9, {2, 3}), oracle::profile(10, {1, 3, 4})}) {
        const auto s = build_state_space(p);
        for (std::size_t q = 0; q < s.num_patterns(); ++q) {
            CHECK(total_rearrangements(s.pattern(q), p) == s.gamma(q).size());
        }
        for (std::size_t i = 0; i < s.num_regular(); ++i) {
            const auto& a = s.regular(i);
            const BigCount total = total_rearrangements(pattern(a, p), p);
            for (int w = 1; w <= p.capacity(); ++w) {
                for (int j = 1; j <= p.capacity() - w + 1; ++j) {
                    const BigCount got = count_matching_rearrangements(a, p, {j, w}, CountMethod::Partition);
                    CHECK(got == oracle::window_matches(a, p, j, w));
                    CHECK(got == count_matching_rearrangements(a, p, {j, w}, CountMethod::Enumeration));
                    CHECK(got <= total);
                }
            }
            for (int w = 1; w <= p.capacity(); ++w) {
                const double ps = state_attack_success(a, p, w);
                CHECK(ps >= 0.0);
                CHECK(ps <= 1.0);
            }
        }
    }
}
