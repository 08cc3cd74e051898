// Seeded property sweeps over generated instances.

#include <doctest.h>

#include <cmath>

#include "pomg/envs.hpp"
#include "pomg/kernels.hpp"
#include "pomg/omle.hpp"
#include "pomg/revealing.hpp"
#include "support.hpp"

using namespace pomg;

namespace {

PomgSpec draw_spec(Rng& rng, bool undercomplete) {
    const int S = 1 + static_cast<int>(uniform01(rng) * 3);
    PomgSpec spec{1 + static_cast<int>(uniform01(rng) * 3), 2, S, {}, {}};
    for (int i = 0; i < 2; ++i) spec.actions.push_back(1 + static_cast<int>(uniform01(rng) * 2));
    spec.observations = {S + (undercomplete ? 1 : 0), 1 + static_cast<int>(uniform01(rng) * 2)};
    return spec;
}

}  // namespace

TEST_CASE("generated models are valid and meet their revealing target") {
    Rng rng(1);
    for (int t = 0; t < 40; ++t) {
        const auto spec = draw_spec(rng, true);
        const double alpha = 0.05 * uniform01(rng);
        RandomPomgOptions opt;
        opt.sharpness = 1 + 10 * uniform01(rng);
        opt.binary_rewards = t % 2 == 0;
        const auto m = random_revealing_pomg(spec, alpha, 1000 + t, opt);
        CHECK(validate_model(m).ok());
        CHECK(check_single_step(m, alpha));
        const auto fam = candidate_family_around(m, 4, uniform01(rng), t, {}, opt.sharpness);
        for (const auto& c : fam.models) CHECK(validate_model(c).ok());
    }
}

TEST_CASE("m-step matrix columns are conditional distributions per action sequence") {
    Rng rng(2);
    for (int t = 0; t < 30; ++t) {
        const auto spec = draw_spec(rng, false);
        const auto m = test::random_model(spec, rng);
        for (int win = 1; win <= spec.horizon; ++win) {
            const auto M = build_m_step_matrix(m, spec.horizon - win, win).matrix;
            const double seqs = std::pow(spec.joint_actions(), win - 1);
            for (std::size_t s = 0; s < M.cols; ++s) {
                double total = 0;
                for (std::size_t r = 0; r < M.rows; ++r) total += M(r, s);
                CHECK(total == doctest::Approx(seqs).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("log-likelihoods are nonpositive and additive") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const auto spec = draw_spec(rng, false);
        const auto m = test::random_model(spec, rng);
        const ActionRule uniform = [&](const PlayerHistory& h, Rng& r) {
            return static_cast<int>(uniform01(r) * spec.actions[h.player]);
        };
        Dataset a, b;
        for (int k = 0; k < 10; ++k) a.push_back({"", sample_trajectory(m, uniform, rng)});
        for (int k = 0; k < 10; ++k) b.push_back({"", sample_trajectory(m, uniform, rng)});
        Dataset ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        CHECK(log_likelihood(m, a) <= 0);
        CHECK(log_likelihood(m, ab) == doctest::Approx(log_likelihood(m, a) + log_likelihood(m, b)).epsilon(1e-12));
    }
}

TEST_CASE("values lie in [0, H] for rewards in [0, 1]") {
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto spec = draw_spec(rng, false);
        const auto m = test::random_model(spec, rng);
        const auto sets = PureStrategySets::enumerate(spec, PolicyClass::Reactive);
        const auto v = kernels::value_tensors(std::span<const PomgModel>(&m, 1), sets);
        for (double x : v.values) {
            CHECK(x >= 0);
            CHECK(x <= spec.horizon + 1e-12);
        }
    }
}

TEST_CASE("optimism holds for random confidence sets containing the truth") {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto spec = draw_spec(rng, true);
        const auto truth = random_revealing_pomg(spec, 0.0, 50 + t);
        const auto fam = candidate_family_around(truth, 5, 0.5, t);
        const auto sets = PureStrategySets::enumerate(spec, PolicyClass::Reactive);
        ConfidenceSet set{{*fam.truth_index}, 1, 0};
        for (std::size_t c = 0; c < fam.size(); ++c)
            if (c != *fam.truth_index && uniform01(rng) < 0.5) set.members.push_back(c);
        std::sort(set.members.begin(), set.members.end());
        const auto v = kernels::value_tensors(fam.models, sets);
        const auto og = optimistic_game(set, v, sets.sizes());
        const auto tg = value_game(v, *fam.truth_index, sets.sizes());
        for (int i = 0; i < 2; ++i)
            for (std::size_t p = 0; p < tg.payoffs[i].size(); ++p) {
                CHECK(og.game.payoffs[i][p] >= tg.payoffs[i][p]);
                CHECK(set.contains(og.argmax[i][p]));
            }
    }
}

TEST_CASE("equilibria of optimistic games satisfy their own constraints") {
    Rng rng(6);
    for (int t = 0; t < 30; ++t) {
        const auto g = test::random_game(1 + static_cast<int>(uniform01(rng) * 4),
                                         1 + static_cast<int>(uniform01(rng) * 4), rng);
        for (auto eq : {EqType::Nash, EqType::CCE, EqType::CE}) {
            const auto d = solve_equilibrium(g, eq);
            const auto inc = regret_increment(eq == EqType::Nash ? EqType::CCE : eq, g, d);
            CHECK(inc.clamped <= 1e-6);
        }
    }
}

TEST_CASE("correlated solvers handle duplicated and nearly duplicated strategies") {
    Rng rng(7);
    for (int t = 0; t < 40; ++t) {
        const int m = 2 + static_cast<int>(uniform01(rng) * 3), k = 2 + static_cast<int>(uniform01(rng) * 3);
        const auto base = test::random_game(m, k, rng);
        // Each strategy appears twice; the copy is shifted by at most 1e-6.
        auto g = NormalFormGame::zeros({2 * m, 2 * k});
        for (int i = 0; i < 2 * m; ++i)
            for (int j = 0; j < 2 * k; ++j)
                for (int p = 0; p < 2; ++p) {
                    const double shift = (i >= m || j >= k) ? 1e-6 * uniform01(rng) * (t % 3) : 0.0;
                    g.payoffs[p][i * 2 * k + j] = base.payoffs[p][(i % m) * k + j % k] + shift;
                }
        const auto d = solve_cce(g);
        const auto e = solve_ce(g);
        for (int p = 0; p < 2; ++p) {
            CHECK(test::audit_cce(g, d, p) <= 1e-6);
            CHECK(test::audit_ce(g, e, p) <= 1e-6);
        }
    }
}
