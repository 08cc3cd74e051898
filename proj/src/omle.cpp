#include "pomg/omle.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>

#include "pomg/error.hpp"
#include "pomg/model_io.hpp"
#include "pomg/revealing.hpp"

namespace pomg {

std::string to_string(EqType eq) {
    switch (eq) {
        case EqType::Nash: return "nash";
        case EqType::CCE: return "cce";
        case EqType::CE: return "ce";
    }
    return "unknown";
}

EqType eq_type_from_string(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "nash") return EqType::Nash;
    if (lower == "cce") return EqType::CCE;
    if (lower == "ce") return EqType::CE;
    throw Fault("unknown eq_type \"" + name + "\" (expected Nash, CCE or CE)");
}

NormalFormGame value_game(const kernels::ValueTensors& values, std::size_t model, const std::vector<int>& sizes) {
    auto g = NormalFormGame::zeros(sizes);
    for (int i = 0; i < values.players; ++i) {
        const auto t = values.tensor(model, i);
        g.payoffs[i].assign(t.begin(), t.end());
    }
    return g;
}

OptimisticGame optimistic_game(const ConfidenceSet& set, const kernels::ValueTensors& values,
                               const std::vector<int>& sizes) {
    if (set.members.empty()) throw Fault("optimistic_game: empty confidence set");
    OptimisticGame og{NormalFormGame::zeros(sizes), {}};
    og.argmax.assign(values.players, std::vector<std::size_t>(values.profiles, set.members.front()));
    for (int i = 0; i < values.players; ++i) {
        auto& u = og.game.payoffs[i];
        u.assign(values.profiles, -std::numeric_limits<double>::infinity());
        for (std::size_t c : set.members) {
            const auto t = values.tensor(c, i);
            for (std::size_t p = 0; p < values.profiles; ++p) {
                if (t[p] > u[p]) {
                    u[p] = t[p];
                    og.argmax[i][p] = c;
                }
            }
        }
    }
    return og;
}

OptimisticGame optimistic_game(const ConfidenceSet& set, const CandidateFamily& candidates,
                               const PureStrategySets& sets, std::size_t budget) {
    return optimistic_game(set, kernels::value_tensors(candidates.models, sets, budget), sets.sizes());
}

void check_nash_gate(const std::vector<int>& sizes, int strategy_budget) {
    if (sizes.size() != 2)
        throw Fault("Nash mode is limited to two-player games (this game has " + std::to_string(sizes.size()) +
                    " players); use CCE or CE");
    if (sizes[0] > strategy_budget || sizes[1] > strategy_budget)
        throw Fault("Nash mode is limited to " + std::to_string(strategy_budget) +
                    " pure strategies per player (this game has " + std::to_string(sizes[0]) + "x" +
                    std::to_string(sizes[1]) + "); use CCE or CE");
}

JointDistribution solve_equilibrium(const NormalFormGame& game, EqType eq, int nash_budget) {
    switch (eq) {
        case EqType::Nash: check_nash_gate(game.sizes, nash_budget); return solve_nash_2p(game, nash_budget);
        case EqType::CCE: return solve_cce(game);
        case EqType::CE: return solve_ce(game);
    }
    throw Fault("unknown equilibrium type");
}

namespace {

RegretIncrement collect(std::vector<double> per_player) {
    RegretIncrement r;
    r.per_player = std::move(per_player);
    r.raw = *std::max_element(r.per_player.begin(), r.per_player.end());
    r.clamped = std::max(0.0, r.raw);
    return r;
}

void require_product(const JointDistribution& pi) {
    const int n = static_cast<int>(pi.sizes.size());
    std::vector<std::vector<double>> marg(n);
    for (int i = 0; i < n; ++i) marg[i].assign(pi.sizes[i], 0.0);
    for (std::size_t f = 0; f < pi.prob.size(); ++f) {
        const auto p = unflatten(pi.sizes, f);
        for (int i = 0; i < n; ++i) marg[i][p[i]] += pi.prob[f];
    }
    const auto prod = JointDistribution::product(marg);
    for (std::size_t f = 0; f < pi.prob.size(); ++f)
        if (std::abs(prod.prob[f] - pi.prob[f]) > 1e-9)
            throw Fault("Nash regret needs a product policy; this policy is correlated");
}

}  // namespace

RegretIncrement nash_regret_increment(const NormalFormGame& true_game, const JointDistribution& pi) {
    require_product(pi);
    return cce_regret_increment(true_game, pi);
}

RegretIncrement cce_regret_increment(const NormalFormGame& true_game, const JointDistribution& pi) {
    std::vector<double> gains;
    for (int i = 0; i < true_game.num_players(); ++i) gains.push_back(deviation_gain(true_game, pi, i));
    return collect(std::move(gains));
}

RegretIncrement ce_regret_increment(const NormalFormGame& true_game, const JointDistribution& pi) {
    std::vector<double> gains;
    for (int i = 0; i < true_game.num_players(); ++i) gains.push_back(best_swap_gain(true_game, pi, i));
    return collect(std::move(gains));
}

RegretIncrement regret_increment(EqType eq, const NormalFormGame& true_game, const JointDistribution& pi) {
    switch (eq) {
        case EqType::Nash: return nash_regret_increment(true_game, pi);
        case EqType::CCE: return cce_regret_increment(true_game, pi);
        case EqType::CE: return ce_regret_increment(true_game, pi);
    }
    throw Fault("unknown equilibrium type");
}

RegretIncrement regret_increment(EqType eq, const PomgModel& true_model, const PureStrategySets& sets,
                                 const MixedJointPolicy& pi, std::size_t budget) {
    if (eq == EqType::Nash && !pi.product_form) throw Fault("Nash regret needs a product policy");
    const auto values = kernels::value_tensors(std::span<const PomgModel>(&true_model, 1), sets, budget);
    const auto sizes = sets.sizes();
    return regret_increment(eq, value_game(values, 0, sizes), JointDistribution::from_mixture(pi, sizes));
}

// --- logs ----------------------------------------------------------------

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::json distribution_to_json(const JointDistribution& d) {
    nlohmann::json support = nlohmann::json::array(), weights = nlohmann::json::array();
    for (std::size_t f = 0; f < d.prob.size(); ++f) {
        if (d.prob[f] <= 0) continue;
        support.push_back(unflatten(d.sizes, f));
        weights.push_back(d.prob[f]);
    }
    return {{"sizes", d.sizes}, {"support", support}, {"weights", weights}};
}

JointDistribution distribution_from_json(const nlohmann::json& doc) {
    JointDistribution d;
    d.sizes = doc.at("sizes").get<std::vector<int>>();
    d.prob.assign(radix_product(d.sizes), 0.0);
    const auto& support = doc.at("support");
    const auto& weights = doc.at("weights");
    if (support.size() != weights.size()) throw Fault("policy: support and weights differ in length");
    for (std::size_t k = 0; k < support.size(); ++k)
        d.prob[flatten(d.sizes, support[k].get<std::vector<int>>())] = weights[k].get<double>();
    return d;
}

}  // namespace

nlohmann::json episode_to_json(const EpisodeLog& log, const PomgSpec& spec) {
    nlohmann::json trajs = nlohmann::json::array();
    for (std::size_t t = 0; t < log.trajectories.size(); ++t) {
        auto j = trajectory_to_json(log.trajectories[t], spec);
        j["policy"] = t < log.rollins.size() ? log.rollins[t] : std::string();
        trajs.push_back(std::move(j));
    }
    nlohmann::json out = {
        {"k", log.k},
        {"metric", log.metric},
        {"policy", distribution_to_json(log.policy)},
        {"mu", log.mu},
        {"trajectories", trajs},
        {"set_size", log.set_size},
        {"increment_raw", log.increment_raw},
        {"increment", log.increment},
        {"cumulative", log.cumulative},
        {"oracle", "true-model"},
    };
    if (log.truth_in_set) out["truth_in_set"] = *log.truth_in_set;
    return out;
}

EpisodeLog episode_from_json(const nlohmann::json& doc, const PomgSpec& spec) {
    EpisodeLog log;
    try {
        log.k = doc.at("k").get<int>();
        log.metric = doc.at("metric").get<std::string>();
        log.policy = distribution_from_json(doc.at("policy"));
        log.mu = doc.at("mu").get<Profile>();
        for (const auto& t : doc.at("trajectories")) {
            log.trajectories.push_back(trajectory_from_json(t, spec));
            log.rollins.push_back(t.value("policy", std::string()));
        }
        log.set_size = doc.at("set_size").get<std::size_t>();
        log.increment_raw = doc.at("increment_raw").get<double>();
        log.increment = doc.at("increment").get<double>();
        log.cumulative = doc.at("cumulative").get<double>();
        if (doc.contains("truth_in_set")) log.truth_in_set = doc["truth_in_set"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw Fault(std::string("episode log: ") + e.what());
    }
    return log;
}

void write_episodes_jsonl(std::ostream& out, std::span<const EpisodeLog> logs, const PomgSpec& spec) {
    for (const auto& log : logs) out << episode_to_json(log, spec).dump() << '\n';
}

std::vector<EpisodeLog> read_episodes_jsonl(std::istream& in, const PomgSpec& spec) {
    std::vector<EpisodeLog> logs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            logs.push_back(episode_from_json(nlohmann::json::parse(line), spec));
        } catch (const std::exception& e) {
            throw Fault("episode log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return logs;
}

void write_summary_csv(std::ostream& out, std::span<const EpisodeLog> logs) {
    out << "k,metric,increment,cumulative,set_size\n";
    for (const auto& log : logs)
        out << log.k << ',' << log.metric << ',' << format_double(log.increment) << ','
            << format_double(log.cumulative) << ',' << log.set_size << '\n';
}

const JointDistribution& OmleResult::output_policy() const {
    if (!output_episode) throw Fault("no policies: the run has no episodes");
    return logs.at(*output_episode - 1).policy;
}

// --- learners --------------------------------------------------------------

namespace {

enum Stream : std::uint32_t { kEnvStream = 1, kLearnerStream = 2, kOpponentStream = 3 };

Rng make_stream(std::uint64_t seed, Stream id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id)};
    return Rng(seq);
}

std::string profile_string(const Profile& p) {
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
    return s + "]";
}

// State shared by the three learners.
class Learner {
public:
    Learner(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt,
            const RevealingPredicate& revealing)
        : env_(env), candidates_(candidates), opt_(opt) {
        env.spec.check();
        if (candidates.models.empty()) throw Fault("empty B1: the candidate family is empty");
        for (const auto& m : candidates.models)
            if (!(m.spec == env.spec)) throw Fault("candidate family and environment have different specs");
        if (opt.episodes < 0) throw Fault("episode count must be >= 0");
        if (!(opt.beta >= 0)) throw Fault("beta must be nonnegative");
        admissible_.resize(candidates.size());
        bool any = false;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            admissible_[c] = revealing ? revealing(candidates.models[c]) : 1;
            any = any || admissible_[c];
        }
        if (!any) throw Fault("empty B1: no candidate passes the revealing condition at alpha=" +
                              format_double(opt.alpha));
        sets_ = PureStrategySets::enumerate(env.spec, opt.cls, opt.policy_budget);
        sizes_ = sets_.sizes();
        values_ = kernels::value_tensors(candidates.models, sets_, opt.value_budget);
        const auto truth = kernels::value_tensors(std::span<const PomgModel>(&env, 1), sets_, opt.value_budget);
        true_game_ = value_game(truth, 0, sizes_);
        lls_.assign(candidates.size(), 0.0);
    }

    ConfidenceSet confidence_set() const { return confidence_set_from_scores(lls_, admissible_, opt_.beta); }

    void add_data(std::span<const DatasetEntry> entries) {
        const auto delta = kernels::log_likelihoods(candidates_.models, entries);
        for (std::size_t c = 0; c < lls_.size(); ++c) lls_[c] += delta[c];
    }

    void finish(EpisodeLog& log, const ConfidenceSet& set, const RegretIncrement& inc, double& cumulative) {
        log.set_size = set.size();
        if (candidates_.truth_index) log.truth_in_set = set.contains(*candidates_.truth_index);
        log.increment_raw = inc.raw;
        log.increment = inc.clamped;
        cumulative += inc.clamped;
        log.cumulative = cumulative;
    }

    void choose_output(OmleResult& result, Rng& rng) const {
        if (result.logs.empty()) return;
        const auto K = result.logs.size();
        result.output_episode = 1 + static_cast<int>(std::min<std::size_t>(K - 1, uniform01(rng) * K));
    }

    const PomgModel& env_;
    const CandidateFamily& candidates_;
    const OmleOptions& opt_;
    std::vector<char> admissible_;
    PureStrategySets sets_;
    std::vector<int> sizes_;
    kernels::ValueTensors values_;
    NormalFormGame true_game_;
    std::vector<double> lls_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared episode loop of Algorithms 1 and 2; rollins == 0 means a single
// on-policy trajectory.
OmleResult run_self_play(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt,
                         const RevealingPredicate& revealing, bool multistep) {
    if (opt.eq == EqType::Nash) {
        // Gate before any expensive work.
        std::vector<int> sizes;
        for (int i = 0; i < env.spec.num_players; ++i)
            sizes.push_back(static_cast<int>(std::min<std::size_t>(
                det_policy_count(env.spec, i, opt.cls, opt.policy_budget), static_cast<std::size_t>(1) << 30)));
        check_nash_gate(sizes, opt.nash_budget);
    }
    Learner L(env, candidates, opt, revealing);
    const auto& spec = env.spec;
    Rng env_rng = make_stream(opt.seed, kEnvStream);
    Rng learner_rng = make_stream(opt.seed, kLearnerStream);
    OmleResult result;
    double cumulative = 0;
    // Selection is deterministic, so an unchanged optimistic game keeps its equilibrium.
    NormalFormGame last_game;
    JointDistribution last_policy;
    for (int k = 1; k <= opt.episodes; ++k) {
        const auto t0 = Clock::now();
        const auto set = L.confidence_set();
        const auto og = optimistic_game(set, L.values_, L.sizes_);
        if (opt.observer) opt.observer({k, &set, &og, &L.true_game_, &L.values_});
        EpisodeLog log;
        log.k = k;
        log.metric = to_string(opt.eq);
        if (k == 1 || og.game.sizes != last_game.sizes || og.game.payoffs != last_game.payoffs) {
            last_policy = solve_equilibrium(og.game, opt.eq, opt.nash_budget);
            last_game = og.game;
        }
        log.policy = last_policy;
        const std::size_t mu_flat = sample_index(log.policy.prob, learner_rng);
        log.mu = L.sets_.profile(mu_flat);
        const auto mu = L.sets_.joint(log.mu);
        const auto follow = mu.rule(spec);
        Dataset fresh;
        if (!multistep) {
            fresh.push_back({"mu=" + profile_string(log.mu), sample_trajectory(env, follow, env_rng)});
        } else {
            for (int h = 0; h + opt.m <= spec.horizon; ++h) {
                const ActionRule rollin = [&, h](const PlayerHistory& hist, Rng& rng) {
                    if (hist.step < h) return follow(hist, rng);
                    const int A = spec.actions[hist.player];
                    return std::min(A - 1, static_cast<int>(uniform01(rng) * A));
                };
                fresh.push_back({"mu=" + profile_string(log.mu) + ";rollin=" + std::to_string(h),
                                 sample_trajectory(env, rollin, env_rng)});
            }
        }
        for (const auto& e : fresh) {
            log.trajectories.push_back(e.trajectory);
            log.rollins.push_back(e.policy);
        }
        L.add_data(fresh);
        L.finish(log, set, regret_increment(opt.eq, L.true_game_, log.policy), cumulative);
        log.wall_seconds = seconds_since(t0);
        result.logs.push_back(std::move(log));
    }
    L.choose_output(result, learner_rng);
    return result;
}

}  // namespace

OmleResult run_omle_equilibrium(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt) {
    RevealingPredicate revealing;
    if (opt.alpha > 0) revealing = [a = opt.alpha](const PomgModel& m) { return check_single_step(m, a); };
    return run_self_play(env, candidates, opt, revealing, false);
}

OmleResult run_omle_multistep(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt) {
    if (opt.m < 1 || opt.m > env.spec.horizon)
        throw Fault("multi-step window m=" + std::to_string(opt.m) + " must lie in [1, H=" +
                    std::to_string(env.spec.horizon) + "]");
    RevealingPredicate revealing;
    if (opt.alpha > 0)
        revealing = [a = opt.alpha, m = opt.m](const PomgModel& model) { return check_multi_step(model, m, a); };
    return run_self_play(env, candidates, opt, revealing, true);
}

// --- adversary -----------------------------------------------------------

AdversaryContext adversary_context(const NormalFormGame& true_game) {
    if (true_game.num_players() < 2) throw Fault("the adversary setting needs two or more players");
    AdversaryContext ctx;
    ctx.opponent_sizes.assign(true_game.sizes.begin() + 1, true_game.sizes.end());
    const std::size_t opp = radix_product(ctx.opponent_sizes);
    ctx.true_payoff.assign(true_game.sizes[0], std::vector<double>(opp));
    for (int s = 0; s < true_game.sizes[0]; ++s)
        for (std::size_t j = 0; j < opp; ++j) ctx.true_payoff[s][j] = true_game.payoffs[0][s * opp + j];
    return ctx;
}

namespace {

double bilinear(const std::vector<std::vector<double>>& u, std::span<const double> x, std::span<const double> y) {
    double v = 0;
    for (std::size_t s = 0; s < u.size(); ++s) {
        if (x[s] == 0) continue;
        for (std::size_t j = 0; j < y.size(); ++j) v += x[s] * u[s][j] * y[j];
    }
    return v;
}

}  // namespace

RegretIncrement maximin_regret_increment(const AdversaryContext& ctx, std::span<const double> learner_mix,
                                         std::span<const double> opponent_mix) {
    const double maximin = solve_zero_sum(ctx.true_payoff).value;
    return collect({maximin - bilinear(ctx.true_payoff, learner_mix, opponent_mix)});
}

Opponent fixed_opponent(std::vector<double> mix) {
    return [mix = std::move(mix)](int, std::span<const double>) { return mix; };
}

Opponent uniform_opponent(const AdversaryContext& ctx) {
    const std::size_t n = radix_product(ctx.opponent_sizes);
    return fixed_opponent(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Opponent best_response_opponent(const AdversaryContext& ctx) {
    return [u = ctx.true_payoff](int, std::span<const double> x) {
        const std::size_t n = u.front().size();
        std::size_t best = 0;
        double best_v = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0;
            for (std::size_t s = 0; s < u.size(); ++s) v += x[s] * u[s][j];
            if (v < best_v - 1e-12) {
                best_v = v;
                best = j;
            }
        }
        std::vector<double> y(n, 0.0);
        y[best] = 1.0;
        return y;
    };
}

OmleResult run_omle_adversary(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt,
                              const std::function<Opponent(const AdversaryContext&)>& make_opponent) {
    if (env.spec.num_players < 2) throw Fault("the adversary setting needs two or more players");
    RevealingPredicate revealing;
    if (opt.alpha > 0) revealing = [a = opt.alpha](const PomgModel& m) { return check_single_step(m, a); };
    Learner L(env, candidates, opt, revealing);
    const auto& spec = env.spec;
    const auto ctx = adversary_context(L.true_game_);
    const double true_maximin = solve_zero_sum(ctx.true_payoff).value;
    const Opponent opponent = make_opponent(ctx);
    const std::size_t opp = radix_product(ctx.opponent_sizes);

    // Candidate maximin solutions never change; solve each admissible one once.
    std::vector<ZeroSumSolution> maximin(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (!L.admissible_[c]) continue;
        maximin[c] = solve_zero_sum(adversary_context(value_game(L.values_, c, L.sizes_)).true_payoff);
    }

    Rng env_rng = make_stream(opt.seed, kEnvStream);
    Rng learner_rng = make_stream(opt.seed, kLearnerStream);
    Rng opponent_rng = make_stream(opt.seed, kOpponentStream);
    OmleResult result;
    double cumulative = 0;
    for (int k = 1; k <= opt.episodes; ++k) {
        const auto t0 = Clock::now();
        const auto set = L.confidence_set();
        if (opt.observer) opt.observer({k, &set, nullptr, &L.true_game_, &L.values_});
        std::size_t chosen = set.members.front();
        for (std::size_t c : set.members)
            if (maximin[c].value > maximin[chosen].value + 1e-12) chosen = c;
        const auto& x = maximin[chosen].row;
        auto y = opponent(k, x);
        if (y.size() != opp) throw Fault("opponent returned a distribution of the wrong size");
        double ysum = 0;
        for (double v : y) {
            if (!(v >= 0)) throw Fault("opponent returned a negative probability");
            ysum += v;
        }
        if (std::abs(ysum - 1) > 1e-9) throw Fault("opponent distribution does not sum to 1");

        EpisodeLog log;
        log.k = k;
        log.metric = "maximin";
        log.policy = JointDistribution{L.sizes_, std::vector<double>(L.sets_.profile_count(), 0.0)};
        for (std::size_t s = 0; s < x.size(); ++s)
            for (std::size_t j = 0; j < opp; ++j) log.policy.prob[s * opp + j] = x[s] * y[j];
        const std::size_t s0 = sample_index(x, learner_rng);
        const std::size_t j0 = sample_index(y, opponent_rng);
        log.mu = L.sets_.profile(s0 * opp + j0);
        const auto mu = L.sets_.joint(log.mu);
        Dataset fresh{{"mu=" + profile_string(log.mu), sample_trajectory(env, mu.rule(spec), env_rng)}};
        log.trajectories.push_back(fresh.front().trajectory);
        log.rollins.push_back(fresh.front().policy);
        L.add_data(fresh);
        RegretIncrement inc = collect({true_maximin - bilinear(ctx.true_payoff, x, y)});
        L.finish(log, set, inc, cumulative);
        log.wall_seconds = seconds_since(t0);
        result.logs.push_back(std::move(log));
    }
    L.choose_output(result, learner_rng);
    return result;
}

}  // namespace pomg
