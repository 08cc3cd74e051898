// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "../support.hpp"
#include "pomg/cli.hpp"
#include "pomg/envs.hpp"
#include "pomg/equilibria.hpp"
#include "pomg/likelihood.hpp"
#include "pomg/omle.hpp"
#include "pomg/revealing.hpp"

using namespace pomg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Guards a criterion so an unexpected fault is reported as FAIL, not a crash.
void criterion(int id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("unexpected fault: ") + e.what());
    }
}

// --- shared experimental setup ---------------------------------------------------

constexpr double kAlpha = 0.1;
constexpr int kPooled = 20;

const PomgSpec kGeneralSpec{2, 2, 2, {2, 2}, {2, 1}};
const PomgSpec kZeroSumSpec{2, 2, 2, {2, 2}, {2, 2}};

struct Instance {
    PomgModel truth;
    CandidateFamily family;
};

RevealingPredicate single_step(double alpha) {
    return [alpha](const PomgModel& m) { return check_single_step(m, alpha); };
}

Instance make_instance(const PomgSpec& spec, bool zero_sum, int t) {
    RandomPomgOptions opt;
    opt.sharpness = 12;
    opt.binary_rewards = true;
    opt.shared_zero_sum = zero_sum;
    Instance inst;
    inst.truth = random_revealing_pomg(spec, kAlpha, 100 + t, opt);
    inst.family = candidate_family_around(inst.truth, 8, 1.0, 200 + t, single_step(kAlpha), 12.0);
    return inst;
}

OmleOptions make_options(const PomgSpec& spec, int K, EqType eq, std::uint64_t seed) {
    OmleOptions o;
    o.episodes = K;
    o.beta = beta_schedule(spec, K, 1.0, 0.05);
    o.eq = eq;
    o.cls = PolicyClass::Reactive;
    o.seed = seed;
    o.alpha = kAlpha;
    o.nash_budget = 16;
    return o;
}

NormalFormGame true_game(const PomgModel& m, PolicyClass cls) {
    const auto sets = PureStrategySets::enumerate(m.spec, cls);
    return value_game(kernels::value_tensors(std::span<const PomgModel>(&m, 1), sets), 0, sets.sizes());
}

JointDistribution uniform_product(const std::vector<int>& sizes) {
    std::vector<std::vector<double>> marg;
    for (int s : sizes) marg.push_back(std::vector<double>(s, 1.0 / s));
    return JointDistribution::product(marg);
}

struct Pooled {
    double avg50 = 0, avg400 = 0, cum400 = 0, baseline = 0;
    int zero_runs = 0;
};

std::string describe(const Pooled& p) {
    return fmt("mean regret(400)/400 = %.5f vs 0.5 x mean regret(50)/50 = %.5f; mean cumulative %.3f vs 0.6 x "
               "uniform baseline %.3f",
               p.avg400, 0.5 * p.avg50, p.cum400, 0.6 * p.baseline);
}

bool sublinear(const Pooled& p) { return p.avg400 < 0.5 * p.avg50 && p.cum400 <= 0.6 * p.baseline; }

Pooled pooled_equilibrium(EqType eq) {
    const bool zs = eq == EqType::Nash;
    const auto& spec = zs ? kZeroSumSpec : kGeneralSpec;
    Pooled p;
    for (int t = 0; t < kPooled; ++t) {
        const auto inst = make_instance(spec, zs, t);
        const auto r = run_omle_equilibrium(inst.truth, inst.family, make_options(spec, 400, eq, t));
        const auto g = true_game(inst.truth, PolicyClass::Reactive);
        p.avg50 += r.logs[49].cumulative / 50 / kPooled;
        p.avg400 += r.logs[399].cumulative / 400 / kPooled;
        p.cum400 += r.logs[399].cumulative / kPooled;
        p.baseline += 400 * regret_increment(eq, g, uniform_product(g.sizes)).clamped / kPooled;
    }
    return p;
}

Pooled pooled_adversary() {
    Pooled p;
    for (int t = 0; t < kPooled; ++t) {
        const auto inst = make_instance(kGeneralSpec, false, t);
        const auto r = run_omle_adversary(inst.truth, inst.family, make_options(kGeneralSpec, 400, EqType::CCE, t),
                                          [](const AdversaryContext& c) { return best_response_opponent(c); });
        const auto ctx = adversary_context(true_game(inst.truth, PolicyClass::Reactive));
        const std::vector<double> x(ctx.true_payoff.size(), 1.0 / ctx.true_payoff.size());
        const auto y = best_response_opponent(ctx)(0, x);
        p.avg50 += r.logs[49].cumulative / 50 / kPooled;
        p.avg400 += r.logs[399].cumulative / 400 / kPooled;
        p.cum400 += r.logs[399].cumulative / kPooled;
        p.baseline += 400 * maximin_regret_increment(ctx, x, y).clamped / kPooled;
    }
    return p;
}

// --- criteria -----------------------------------------------------------------------

void likelihood_oracle() {
    const auto t0 = Clock::now();
    Rng rng(1);
    double worst = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const int S = 1 + inst % 3, H = 1 + (inst / 3) % 3;
        const PomgSpec spec{H, 2, S, {2, 2}, {2, 1 + inst % 2}};
        const auto m = test::random_model(spec, rng);
        std::vector<int> act(H);
        for (auto& a : act) a = static_cast<int>(uniform01(rng) * spec.joint_actions());
        test::for_each_digits(std::vector<int>(H, spec.joint_observations()), [&](const std::vector<int>& obs) {
            const double want = test::brute_force_prob(m, act, obs);
            worst = std::max(worst, std::abs(forward_prob(m, act, obs) - want));
        });
    }
    const double secs = since(t0);
    report(1, worst <= 1e-12 && secs < 10,
           fmt("50 instances, max |forward - brute force| = %.2e, %.2f s", worst, secs));
}

void revealing_checks() {
    bool ok = true;
    std::string detail;
    for (int L : {2, 3, 4}) {
        const auto inst = hard_instance_singlestep(L, L);
        ok = ok && check_single_step(inst.model, 1.0);
    }
    double min_multi = 1e9, max_single = 0;
    for (int H : {3, 4, 5}) {
        const auto inst = hard_instance_multistep(H, H);
        const auto ms = multi_step_sigmas(inst.model, 2);
        min_multi = std::min(min_multi, *std::min_element(ms.begin(), ms.end()));
        const auto ss = single_step_sigmas(inst.model);
        max_single = std::max(max_single, *std::min_element(ss.begin(), ss.end()));
        ok = ok && check_multi_step(inst.model, 2, 1.0) && !check_single_step(inst.model, 1e-6);
    }
    report(2, ok,
           fmt("single-step instance passes at alpha=1 (L=2..4); multi-step min sigma(m=2) = %.4f, "
               "single-step min sigma = %.1e (H=3..5)",
               min_multi, max_single));
}

void solver_soundness() {
    Rng rng(3);
    double gap = 0, cce_dev = 0, ce_swap = 0, ce_as_cce = 0;
    for (int t = 0; t < 100; ++t) {
        const int m = 1 + static_cast<int>(uniform01(rng) * 4), k = 1 + static_cast<int>(uniform01(rng) * 4);
        const auto g = test::random_game(m, k, rng);
        std::vector<std::vector<double>> u(m, std::vector<double>(k));
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j) u[i][j] = g.payoffs[0][i * k + j];
        const auto zs = solve_zero_sum(u);
        double lower = 1e300, upper = -1e300;
        for (int j = 0; j < k; ++j) {
            double v = 0;
            for (int i = 0; i < m; ++i) v += zs.row[i] * u[i][j];
            lower = std::min(lower, v);
        }
        for (int i = 0; i < m; ++i) {
            double v = 0;
            for (int j = 0; j < k; ++j) v += zs.column[j] * u[i][j];
            upper = std::max(upper, v);
        }
        gap = std::max(gap, upper - lower);
        const auto cce = solve_cce(g);
        const auto ce = solve_ce(g);
        for (int i = 0; i < 2; ++i) {
            cce_dev = std::max(cce_dev, test::audit_cce(g, cce, i));
            ce_swap = std::max(ce_swap, test::audit_ce(g, ce, i));
            ce_as_cce = std::max(ce_as_cce, test::audit_cce(g, ce, i));
        }
    }
    report(3, gap <= 1e-7 && cce_dev <= 1e-6 && ce_swap <= 1e-6 && ce_as_cce <= 1e-6,
           fmt("100 games: duality gap %.1e, CCE deviation %.1e, CE swap %.1e, CE as CCE %.1e", gap, cce_dev, ce_swap,
               ce_as_cce));
}

void modification_dominance() {
    Rng rng(4);
    double worst = 1e300;
    for (int t = 0; t < 50; ++t) {
        const auto g = test::random_game(2 + t % 3, 2 + (t / 3) % 3, rng);
        const auto d = test::random_distribution(g.sizes, rng);
        for (int i = 0; i < 2; ++i) worst = std::min(worst, best_swap_gain(g, d, i) - exploitability(g, d, i));
    }
    report(4, worst >= -1e-9, fmt("50 mixtures: min(swap gain - exploitability) = %.3e", worst));
}

void optimism() {
    const auto inst = make_instance(kGeneralSpec, false, 0);
    auto opt = make_options(kGeneralSpec, 100, EqType::CCE, 0);
    int episodes_in = 0;
    std::size_t entries = 0;
    double worst = 1e300;
    opt.observer = [&](const EpisodeContext& ctx) {
        if (!ctx.set->contains(*inst.family.truth_index)) return;
        ++episodes_in;
        for (std::size_t i = 0; i < ctx.true_game->payoffs.size(); ++i)
            for (std::size_t p = 0; p < ctx.true_game->payoffs[i].size(); ++p) {
                worst = std::min(worst, ctx.game->game.payoffs[i][p] - ctx.true_game->payoffs[i][p]);
                ++entries;
            }
    };
    run_omle_equilibrium(inst.truth, inst.family, opt);
    report(5, episodes_in > 0 && worst >= 0,
           fmt("%d/100 episodes with the truth in B, %zu entries audited, min(optimistic - true) = %.3e",
               episodes_in, entries, worst));
}

void coverage() {
    const auto t0 = Clock::now();
    int covered = 0;
    const int runs = 200, K = 200;
    for (int r = 0; r < runs; ++r) {
        const auto inst = make_instance(kGeneralSpec, false, 1000 + r);
        const auto res = run_omle_equilibrium(inst.truth, inst.family, make_options(kGeneralSpec, K, EqType::CCE, r));
        bool all = true;
        for (const auto& log : res.logs) all = all && log.truth_in_set.value_or(false);
        covered += all;
    }
    const double secs = since(t0);
    report(6, covered >= 0.95 * runs && secs < 300,
           fmt("truth in B^k for all k <= %d in %d/%d runs, %.1f s", K, covered, runs, secs));
}

void sublinearity() {
    const auto t0 = Clock::now();
    const auto cce = pooled_equilibrium(EqType::CCE);
    const auto ce = pooled_equilibrium(EqType::CE);
    const auto nash = pooled_equilibrium(EqType::Nash);
    const double secs = since(t0);
    report(7, sublinear(cce) && sublinear(ce) && sublinear(nash) && secs < 900,
           fmt("%d instances per mode, %.1f s", kPooled, secs) + "; CCE: " + describe(cce) + "; CE: " + describe(ce) +
               "; Nash: " + describe(nash));
}

void multistep() {
    const PomgSpec spec{3, 2, 3, {2, 2}, {2, 1}};
    const int m = 2, runs = 200, K = 200;
    const double alpha = 0.05;
    const auto t0 = Clock::now();
    int covered = 0;
    bool counts = true;
    RandomPomgOptions ro;
    ro.sharpness = 12;
    ro.binary_rewards = true;
    for (int r = 0; r < runs; ++r) {
        const auto truth = random_multistep_revealing_pomg(spec, m, alpha, 5000 + r, ro);
        const auto fam = candidate_family_around(
            truth, 8, 1.0, 6000 + r, [&](const PomgModel& x) { return check_multi_step(x, m, alpha); }, 12.0);
        auto opt = make_options(spec, K, EqType::CCE, r);
        opt.m = m;
        opt.alpha = alpha;
        const auto res = run_omle_multistep(truth, fam, opt);
        bool all = true;
        for (const auto& log : res.logs) {
            all = all && log.truth_in_set.value_or(false);
            counts = counts && log.trajectories.size() == static_cast<std::size_t>(spec.horizon - m + 1);
        }
        covered += all;
    }
    const double secs = since(t0);
    report(8, covered >= 0.95 * runs && counts,
           fmt("H=3, m=2: truth in B^k for all k <= %d in %d/%d runs; %s H-m+1 = 2 entries per episode; %.1f s", K,
               covered, runs, counts ? "always" : "NOT always", secs));
}

void adversary() {
    const auto p = pooled_adversary();
    const auto inst = make_instance(kGeneralSpec, false, 0);
    const CandidateFamily single{{inst.truth}, 0};
    const auto r = run_omle_adversary(inst.truth, single, make_options(kGeneralSpec, 50, EqType::CCE, 0),
                                      [](const AdversaryContext& c) { return best_response_opponent(c); });
    double worst = 0;
    for (const auto& log : r.logs) worst = std::max(worst, log.increment_raw);
    report(9, sublinear(p) && worst <= 1e-6,
           describe(p) + fmt("; singleton family max increment over 50 episodes = %.1e", worst));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int quiet_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pomg_lab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    const int code = cli_main(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old);
    return code;
}

void determinism() {
    const auto dir = fs::temp_directory_path() / "pomg_acceptance_replay";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string common = R"(
policy_class: reactive
episodes: 40
seed: 7
candidates: {count: 8, scale: 1, noise_sharpness: 12, seed: 3}
beta: {c: 1, delta: 0.05}
)";
    const std::string env2 = R"(env:
  source: random-revealing
  seed: 5
  alpha_target: 0.1
  sharpness: 12
  binary_rewards: true
  spec: {horizon: 2, num_players: 2, num_states: 2, actions: [2, 2], observations: [2, 1]}
alpha: 0.1
)";
    const std::string env3 = R"(env:
  source: random-multistep
  seed: 5
  m: 2
  alpha_target: 0.05
  sharpness: 12
  spec: {horizon: 3, num_players: 2, num_states: 3, actions: [2, 2], observations: [2, 1]}
m: 2
alpha: 0.05
)";
    const std::vector<std::pair<std::string, std::string>> configs{
        {"eq", "algorithm: omle-eq\neq_type: ce" + common + env2},
        {"multistep", "algorithm: omle-multistep\neq_type: cce" + common + env3},
        {"adversary", "algorithm: omle-adversary\nopponent: best-response" + common + env2},
    };
    int identical = 0;
    for (const auto& [name, text] : configs) {
        const auto cfg = dir / (name + ".yaml");
        std::ofstream(cfg) << text;
        const auto a = dir / (name + "_a"), b = dir / (name + "_b");
        if (quiet_cli({"run", cfg.string(), "--output-dir", a.string()}) != 0) continue;
        if (quiet_cli({"--threads", "1", "run", (a / "manifest.json").string(), "--output-dir", b.string()}) != 0)
            continue;
        const auto x = slurp(a / "episodes.jsonl"), y = slurp(b / "episodes.jsonl");
        identical += !x.empty() && x == y;
    }
    report(10, identical == 3,
           fmt("%d/3 runs (omle-eq, omle-multistep, omle-adversary) replayed from their manifests byte-identically",
               identical));
}

}  // namespace

int main() {
    criterion(1, likelihood_oracle);
    criterion(2, revealing_checks);
    criterion(3, solver_soundness);
    criterion(4, modification_dominance);
    criterion(5, optimism);
    criterion(6, coverage);
    criterion(7, sublinearity);
    criterion(8, multistep);
    criterion(9, adversary);
    criterion(10, determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
