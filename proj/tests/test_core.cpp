#include <doctest.h>

#include <map>

#include "pomg/core.hpp"
#include "pomg/error.hpp"
#include "pomg/likelihood.hpp"
#include "pomg/model_io.hpp"
#include "support.hpp"

using namespace pomg;

TEST_CASE("flatten is row-major with the first radix slowest") {
    const std::vector<int> radices{2, 3, 4};
    CHECK(flatten(radices, std::vector<int>{1, 0, 0}) == 12);
    CHECK(flatten(radices, std::vector<int>{0, 1, 0}) == 4);
    for (std::size_t i = 0; i < 24; ++i) CHECK(flatten(radices, unflatten(radices, i)) == i);
    CHECK_THROWS_AS(radix_product(std::vector<int>(70, 2)), Fault);
}

TEST_CASE("uniform01 stays in [0,1) and sample_index follows the weights") {
    Rng rng(42);
    for (int t = 0; t < 10000; ++t) {
        const double u = uniform01(rng);
        REQUIRE(u >= 0);
        REQUIRE(u < 1);
    }
    const std::vector<double> w{1, 0, 3};
    std::map<std::size_t, int> counts;
    for (int t = 0; t < 40000; ++t) ++counts[sample_index(w, rng)];
    CHECK(counts[1] == 0);
    CHECK(counts[0] / 40000.0 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("spec encoders agree with flatten") {
    const PomgSpec spec{2, 3, 1, {2, 3, 2}, {1, 2, 2}};
    for (int a = 0; a < spec.joint_actions(); ++a) CHECK(spec.encode_action(spec.decode_action(a)) == a);
    CHECK(spec.encode_action(std::vector<int>{1, 2, 1}) == 11);
    CHECK(spec.joint_observations() == 4);
}

TEST_CASE("validate_model flags broken columns") {
    Rng rng(1);
    const PomgSpec spec{2, 2, 2, {2, 1}, {2, 2}};
    auto m = test::random_model(spec, rng);
    CHECK(validate_model(m).ok());
    m.transition(1, 0, 1, 0) += 0.1;
    m.reward(0, 0, 1) = 1.5;
    const auto report = validate_model(m);
    CHECK(report.violations.size() == 2);
    CHECK(report.summary().find("trans") != std::string::npos);
}

TEST_CASE("sampled trajectories match exact probabilities") {
    Rng gen(7);
    const PomgSpec spec{2, 2, 2, {2, 1}, {2, 1}};
    const auto m = test::random_model(spec, gen);
    const ActionRule rule = [](const PlayerHistory& h, Rng&) { return h.player == 0 ? h.observations.back() : 0; };
    Rng rng(9);
    std::map<std::vector<int>, int> counts;
    const int n = 60000;
    for (int t = 0; t < n; ++t) {
        const auto tr = sample_trajectory(m, rule, rng);
        REQUIRE(tr.horizon() == 2);
        ++counts[tr.observations];
    }
    for (const auto& [obs, c] : counts) {
        const std::vector<int> act{spec.encode_action(std::vector<int>{spec.decode_observation(obs[0])[0], 0}),
                                   spec.encode_action(std::vector<int>{spec.decode_observation(obs[1])[0], 0})};
        const double p = forward_prob(m, act, obs);
        CHECK(c / double(n) == doctest::Approx(p).epsilon(0.03));
    }
}

TEST_CASE("model JSON round-trips exactly") {
    Rng rng(3);
    const PomgSpec spec{3, 2, 3, {2, 2}, {2, 3}};
    const auto m = test::random_model(spec, rng);
    const auto back = model_from_json(nlohmann::json::parse(model_to_json(m, {{"note", "x"}}).dump()));
    CHECK(back.spec == m.spec);
    CHECK(back.trans == m.trans);
    CHECK(back.emit == m.emit);
    CHECK(back.rewards == m.rewards);
    auto doc = model_to_json(m);
    doc["mu1"][0] = 2.0;
    CHECK_THROWS_AS(model_from_json(doc), Fault);
}
