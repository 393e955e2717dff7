#include "eolsec/errors.hpp"
#include "eolsec/link_model.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>

using namespace eolsec;

namespace {

DemandProfile c7() { return oracle::profile(7, {3, 4}); }

Arrangement arr(const char* text) { return Arrangement::parse(text); }

}  // namespace

TEST_CASE("profile validation") {
    CHECK_THROWS_AS(oracle::profile(0, {1}), InvalidArgument);
    CHECK_THROWS_AS(oracle::profile(5, {6}), InvalidArgument);
    CHECK_THROWS_AS(oracle::profile(5, {0}), InvalidArgument);
    CHECK_THROWS_AS(oracle::profile(5, {}), InvalidArgument);
    CHECK_THROWS_AS(oracle::profile(5, {2}, {-1.0}), InvalidArgument);
    CHECK_THROWS_AS(oracle::profile(5, {2}, {1.0}, {0.0}), InvalidArgument);
}

TEST_CASE("uniform load splits the arrival rate evenly") {
    const auto p = oracle::profile(20, {4, 6, 8}).with_uniform_load(18.0);
    for (std::size_t k = 0; k < 3; ++k) CHECK(p.traffic(k).arrival_rate == doctest::Approx(1.0));
    CHECK(p.load_erlang() == doctest::Approx(18.0));
    CHECK(p.total_arrival_rate() == doctest::Approx(3.0));
}

TEST_CASE("arrangement parsing and rendering round-trip") {
    const auto a = arr("F C1 F C2");
    CHECK(a.render() == "F C1 F C2");
    CHECK(a.width(c7()) == 2 + 3 + 4);
    CHECK_FALSE(a.valid_for(c7()));
    CHECK(arr("C1 F F F F").valid_for(c7()));
    CHECK(Arrangement::empty(7).render() == "F F F F F F F");
    CHECK_THROWS_AS((void)Arrangement::parse("F X"), InvalidArgument);
}

TEST_CASE("connection patterns") {
    const auto p = c7();
    CHECK(pattern(Arrangement::empty(7), p) == ConnectionPattern(std::vector<int>{0, 0}));
    CHECK(pattern(arr("C1 F F F F"), p) == ConnectionPattern(std::vector<int>{1, 0}));
    CHECK(pattern(arr("C1 C2"), p) == ConnectionPattern(std::vector<int>{1, 1}));
    CHECK(ConnectionPattern(std::vector<int>{1, 1}).render() == "(1,1)");
}

TEST_CASE("free fragments") {
    CHECK(free_fragments(Arrangement::empty(7)) == std::vector<int>{7});
    CHECK(free_fragments(arr("F F C1 F F")) == std::vector<int>{2, 2});
    CHECK(free_fragments(arr("F C1 F F F")) == std::vector<int>{1, 3});
}

TEST_CASE("admission classification") {
    const auto p = c7();
    CHECK(classify(arr("F F C1 F F"), p, 1) == Admission::FragBlocked);
    CHECK(classify(arr("F F C1 F F"), p, 0) == Admission::FragBlocked);
    CHECK(classify(arr("C1 F F F F"), p, 1) == Admission::Accept);
    CHECK(classify(arr("C1 C1 F"), p, 0) == Admission::ResourceBlocked);
    CHECK(classify(arr("C1 C1 F"), p, 1) == Admission::ResourceBlocked);
}

TEST_CASE("allocation ways") {
    const auto p = c7();
    CHECK(allocation_ways(Arrangement::empty(7), p, 0) == 5);
    CHECK(allocation_ways(Arrangement::empty(7), p, 1) == 4);
    CHECK(allocation_ways(arr("C1 F F F F"), p, 1) == 1);
    const auto targets = placements(arr("C1 F F F F"), p, 1);
    REQUIRE(targets.size() == 1);
    CHECK(targets[0] == arr("C1 C2"));
    CHECK_THROWS_AS((void)placements(arr("F F C1 F F"), p, 1), InvalidArgument);
}

TEST_CASE("removals") {
    const auto p = c7();
    auto r = removals(arr("C1 F F F F"), p, 0);
    REQUIRE(r.size() == 1);
    CHECK(r[0].target == Arrangement::empty(7));
    CHECK(r[0].multiplicity == 1);

    r = removals(arr("C1 C1 F"), p, 0);
    REQUIRE(r.size() == 2);
    std::set<Arrangement> targets{r[0].target, r[1].target};
    CHECK(targets == std::set<Arrangement>{arr("F F F C1 F"), arr("C1 F F F F")});
    CHECK(r[0].multiplicity == 1);
    CHECK(r[1].multiplicity == 1);

    r = removals(arr("C1 C2"), p, 1);
    REQUIRE(r.size() == 1);
    CHECK(r[0].target == arr("C1 F F F F"));

    CHECK_THROWS_AS((void)removals(Arrangement::empty(7), p, 0), InvalidArgument);
}

TEST_CASE("defragmented states") {
    CHECK(is_defragmented(arr("C1 F F F F")));
    CHECK_FALSE(is_defragmented(arr("F F C1 F F")));
    CHECK(is_defragmented(arr("C1 C2")));
}

TEST_CASE("link-model properties over every arrangement of several links") {
    const std::vector<DemandProfile> profiles = {c7(), oracle::profile(9, {2, 3}),
                                                 oracle::profile(10, {1, 3, 4}),
                                                 oracle::profile(12, {2, 3, 4})};
    for (const auto& p : profiles) {
        CAPTURE(p.capacity());
        for (std::size_t k = 0; k < p.num_classes(); ++k) {
            CHECK(allocation_ways(Arrangement::empty(p.capacity()), p, k) ==
                  static_cast<std::size_t>(p.capacity() - p.demand(k) + 1));
        }
        for (const auto& a : oracle::all_arrangements(p)) {
            CAPTURE(a.render());
            const auto n = pattern(a, p);
            const auto [longest, total] = oracle::free_runs(a, p);
            for (std::size_t k = 0; k < p.num_classes(); ++k) {
                const int d = p.demand(k);
                const Admission expected = d > total     ? Admission::ResourceBlocked
                                           : d > longest ? Admission::FragBlocked
                                                         : Admission::Accept;
                CHECK(classify(a, p, k) == expected);
                if (is_defragmented(a)) CHECK(classify(a, p, k) != Admission::FragBlocked);

                if (expected == Admission::Accept) {
                    const auto got = placements(a, p, k);
                    const auto want = oracle::placements(a, p, k);
                    CHECK(std::set<Arrangement>(got.begin(), got.end()) == want);
                    CHECK(got.size() == allocation_ways(a, p, k));
                    for (const auto& t : got) {
                        CHECK(t.valid_for(p));
                        auto m = n;
                        ++m[k];
                        CHECK(pattern(t, p) == m);
                        bool back = false;
                        for (const auto& r : removals(t, p, k)) back = back || r.target == a;
                        CHECK(back);
                    }
                } else {
                    CHECK(allocation_ways(a, p, k) == 0);
                }
                if (n[k] > 0) {
                    int multiplicity = 0;
                    for (const auto& r : removals(a, p, k)) {
                        CHECK(r.target.valid_for(p));
                        auto m = n;
                        --m[k];
                        CHECK(pattern(r.target, p) == m);
                        multiplicity += r.multiplicity;
                    }
                    CHECK(multiplicity == n[k]);
                }
            }
        }
    }
}
