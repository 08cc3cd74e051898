#include <doctest.h>

#include <set>

#include "pomg/error.hpp"
#include "pomg/policy.hpp"
#include "support.hpp"

using namespace pomg;

namespace {

// Every own history (o_0, a_0, ..., o_h) for one player.
std::vector<std::pair<std::vector<int>, std::vector<int>>> all_histories(const PomgSpec& spec, int player, int h) {
    std::vector<int> radices;
    for (int t = 0; t <= h; ++t) {
        radices.push_back(spec.observations[player]);
        if (t < h) radices.push_back(spec.actions[player]);
    }
    std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
    test::for_each_digits(radices, [&](const std::vector<int>& d) {
        std::vector<int> o, a;
        for (std::size_t k = 0; k < d.size(); ++k) (k % 2 == 0 ? o : a).push_back(d[k]);
        out.emplace_back(o, a);
    });
    return out;
}

}  // namespace

TEST_CASE("history keys biject onto [0, key count)") {
    const PomgSpec spec{3, 2, 1, {2, 3}, {3, 2}};
    for (int i = 0; i < 2; ++i) {
        std::set<std::size_t> full, reactive;
        for (int h = 0; h < spec.horizon; ++h) {
            for (const auto& [o, a] : all_histories(spec, i, h)) {
                const PlayerHistory hist{i, h, o, a};
                const auto key = history_key(spec, PolicyClass::FullHistory, hist);
                CHECK(full.insert(key).second);
                const auto d = decode_history_key(spec, i, PolicyClass::FullHistory, key);
                CHECK(d.step == h);
                CHECK(d.observations == o);
                CHECK(d.actions == a);
                reactive.insert(history_key(spec, PolicyClass::Reactive, hist));
            }
        }
        CHECK(full.size() == history_key_count(spec, i, PolicyClass::FullHistory));
        CHECK(*full.rbegin() + 1 == full.size());
        CHECK(reactive.size() == history_key_count(spec, i, PolicyClass::Reactive));
        CHECK(*reactive.rbegin() + 1 == reactive.size());
    }
}

TEST_CASE("reactive keys decode to the last observation only") {
    const PomgSpec spec{3, 1, 1, {2}, {3}};
    const auto d = decode_history_key(spec, 0, PolicyClass::Reactive, 7);
    CHECK(d.step == 2);
    CHECK(d.observations == std::vector<int>{-1, -1, 1});
    CHECK(describe_history_key(spec, 0, PolicyClass::Reactive, 7).find("h=2") != std::string::npos);
}

TEST_CASE("policy counts and canonical order") {
    const PomgSpec spec{2, 2, 1, {2, 3}, {2, 1}};
    CHECK(det_policy_count(spec, 0, PolicyClass::Reactive) == 16);
    CHECK(det_policy_count(spec, 1, PolicyClass::Reactive) == 9);
    // player 0 full history: 2 + 2*2*2 = 10 keys.
    CHECK(det_policy_count(spec, 0, PolicyClass::FullHistory) == 1024);
    CHECK(det_policy_count_string(spec, 0, PolicyClass::FullHistory) == "1024");
    CHECK_THROWS_AS(det_policy_count(spec, 0, PolicyClass::FullHistory, 1000), Fault);
    const PomgSpec big{6, 1, 1, {3}, {4}};
    CHECK(det_policy_count_string(big, 0, PolicyClass::FullHistory).find('^') != std::string::npos);

    const auto all = enumerate_det_policies(spec, 1, PolicyClass::Reactive);
    REQUIRE(all.size() == 9);
    CHECK(all[0].table == std::vector<int>{0, 0});
    CHECK(all[1].table == std::vector<int>{0, 1});
    CHECK(all[3].table == std::vector<int>{1, 0});
    for (std::size_t p = 0; p < all.size(); ++p) CHECK(det_policy_at(spec, 1, PolicyClass::Reactive, p) == all[p]);
    for (std::size_t p = 1; p < all.size(); ++p) CHECK(all[p - 1].table < all[p].table);
}

TEST_CASE("pure strategy sets flatten profiles row-major") {
    const PomgSpec spec{1, 3, 1, {2, 3, 2}, {1, 1, 1}};
    const auto sets = PureStrategySets::enumerate(spec, PolicyClass::Reactive);
    CHECK(sets.sizes() == std::vector<int>{2, 3, 2});
    CHECK(sets.profile_count() == 12);
    for (std::size_t f = 0; f < 12; ++f) CHECK(sets.flat(sets.profile(f)) == f);
    CHECK(sets.profile(7) == std::vector<int>{1, 0, 1});
}

TEST_CASE("missing table entries fault with the history") {
    const PomgSpec spec{2, 1, 1, {2}, {2}};
    DetPolicy p{0, PolicyClass::Reactive, {0, kUnsetAction, 1, 1}};
    const std::vector<int> o{1}, a{};
    CHECK_THROWS_WITH_AS(p.act(spec, PlayerHistory{0, 0, o, a}), doctest::Contains("h=0"), Fault);
}

TEST_CASE("mixture helpers") {
    const auto pi = product_policy({Mixture{{0, 2}, {0.25, 0.75}}, Mixture{{1}, {1.0}}});
    CHECK(pi.product_form);
    CHECK_NOTHROW(pi.check());
    const auto m0 = marginalize(pi, 0);
    CHECK(m0.strategies == std::vector<int>{0, 2});
    CHECK(m0.weights[1] == doctest::Approx(0.75));

    MixedJointPolicy corr{{{0, 0}, {1, 1}}, {0.5, 0.5}, true};
    CHECK_THROWS_AS(corr.check(), Fault);
    corr.product_form = false;
    CHECK_NOTHROW(corr.check());
    const auto rest = exclude(corr, 0);
    CHECK(rest.profiles == std::vector<Profile>{{0}, {1}});

    const auto swapped = apply_modification(StrategyModification{0, {1, 1}}, corr);
    CHECK(swapped.support == std::vector<Profile>{{1, 0}, {1, 1}});
    CHECK_THROWS_AS(apply_modification(StrategyModification{0, {1}}, corr), Fault);

    MixedJointPolicy dup{{{1, 0}, {0, 0}, {1, 0}}, {0.2, 0.3, 0.5}, false};
    dup.canonicalize();
    CHECK(dup.support == std::vector<Profile>{{0, 0}, {1, 0}});
    CHECK(dup.weights[1] == doctest::Approx(0.7));
}
