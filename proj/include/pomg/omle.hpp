#pragma once

// Optimistic MLE learners over a finite candidate family, and exact regret
// oracles computed on the true model.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pomg/equilibria.hpp"
#include "pomg/kernels.hpp"
#include "pomg/likelihood.hpp"
#include "pomg/policy.hpp"

namespace pomg {

enum class EqType { Nash, CCE, CE };
std::string to_string(EqType eq);
EqType eq_type_from_string(const std::string& name);

/// The game whose profile entries are the values of the pure profile under
/// one model.
NormalFormGame value_game(const kernels::ValueTensors& values, std::size_t model, const std::vector<int>& sizes);

struct OptimisticGame {
    NormalFormGame game;
    /// argmax[i][profile]: candidate index attaining the entry (lowest on ties).
    std::vector<std::vector<std::size_t>> argmax;
};

/// U_i[p] = max over members of values(model, i, p).
OptimisticGame optimistic_game(const ConfidenceSet& set, const kernels::ValueTensors& values,
                               const std::vector<int>& sizes);
OptimisticGame optimistic_game(const ConfidenceSet& set, const CandidateFamily& candidates,
                               const PureStrategySets& sets, std::size_t budget = kDefaultValueBudget);

/// Throws Fault for Nash outside two-player games within the strategy budget.
void check_nash_gate(const std::vector<int>& sizes, int strategy_budget = kDefaultNashStrategyBudget);

JointDistribution solve_equilibrium(const NormalFormGame& game, EqType eq,
                                    int nash_budget = kDefaultNashStrategyBudget);

struct RegretIncrement {
    double raw = 0;                  // max over players, unclamped
    double clamped = 0;              // max(raw, 0)
    std::vector<double> per_player;  // unclamped
};

/// true_game is value_game of the true model over the same pure sets.
RegretIncrement nash_regret_increment(const NormalFormGame& true_game, const JointDistribution& pi);
RegretIncrement cce_regret_increment(const NormalFormGame& true_game, const JointDistribution& pi);
RegretIncrement ce_regret_increment(const NormalFormGame& true_game, const JointDistribution& pi);
RegretIncrement regret_increment(EqType eq, const NormalFormGame& true_game, const JointDistribution& pi);

/// Same oracles starting from the model; enumerates the class.
RegretIncrement regret_increment(EqType eq, const PomgModel& true_model, const PureStrategySets& sets,
                                 const MixedJointPolicy& pi, std::size_t budget = kDefaultValueBudget);

struct EpisodeLog {
    int k = 0;  // 1-based
    std::string metric;
    JointDistribution policy;  // pi^k over pure profiles
    Profile mu;                // sampled deterministic joint policy
    std::vector<Trajectory> trajectories;
    std::vector<std::string> rollins;  // dataset policy record per trajectory
    std::size_t set_size = 0;
    std::optional<bool> truth_in_set;
    double increment_raw = 0;
    double increment = 0;  // clamped
    double cumulative = 0;
    double wall_seconds = 0;  // kept out of the JSON-lines
};

nlohmann::json episode_to_json(const EpisodeLog& log, const PomgSpec& spec);
EpisodeLog episode_from_json(const nlohmann::json& doc, const PomgSpec& spec);
void write_episodes_jsonl(std::ostream& out, std::span<const EpisodeLog> logs, const PomgSpec& spec);
std::vector<EpisodeLog> read_episodes_jsonl(std::istream& in, const PomgSpec& spec);
/// Columns k,metric,increment,cumulative,set_size.
void write_summary_csv(std::ostream& out, std::span<const EpisodeLog> logs);

/// What an observer sees at the start of episode k, after B^k is built.
struct EpisodeContext {
    int k = 0;
    const ConfidenceSet* set = nullptr;
    const OptimisticGame* game = nullptr;  // null in the adversary setting
    const NormalFormGame* true_game = nullptr;
    const kernels::ValueTensors* values = nullptr;
};

struct OmleOptions {
    int episodes = 0;
    double beta = 0;
    EqType eq = EqType::CCE;
    PolicyClass cls = PolicyClass::Reactive;
    std::uint64_t seed = 0;
    /// Revealing filter for B^1; alpha <= 0 disables it.
    double alpha = 0;
    int m = 1;
    std::size_t policy_budget = kDefaultPolicyBudget;
    std::size_t value_budget = kDefaultValueBudget;
    int nash_budget = kDefaultNashStrategyBudget;
    std::function<void(const EpisodeContext&)> observer;
};

struct OmleResult {
    std::vector<EpisodeLog> logs;
    std::optional<int> output_episode;  // 1-based k of the output policy

    /// pi^out; Fault "no policies" when the run had no episodes.
    const JointDistribution& output_policy() const;
};

OmleResult run_omle_equilibrium(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt);

/// Each episode runs H-m+1 roll-ins: follow mu^k for h steps, then uniform
/// joint actions.
OmleResult run_omle_multistep(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt);

/// Opponent distribution over the other players' joint pure profiles
/// (flattened like PureStrategySets without player 0), given the episode and
/// the learner's announced mixed strategy.
using Opponent = std::function<std::vector<double>(int k, std::span<const double> learner_mix)>;

struct AdversaryContext {
    std::vector<int> opponent_sizes;
    /// Player 0's payoff on the true model: true_payoff[s0][opponent profile].
    std::vector<std::vector<double>> true_payoff;
};

Opponent fixed_opponent(std::vector<double> mix);
Opponent uniform_opponent(const AdversaryContext& ctx);
/// Pure best response on the true model, lowest index on ties.
Opponent best_response_opponent(const AdversaryContext& ctx);

/// Learner controls player 0. The opponent factory is called once with the
/// context before the first episode.
OmleResult run_omle_adversary(const PomgModel& env, const CandidateFamily& candidates, const OmleOptions& opt,
                              const std::function<Opponent(const AdversaryContext&)>& make_opponent);

/// max_x min_y x^T U y - x_k^T U y_k on the true payoff.
RegretIncrement maximin_regret_increment(const AdversaryContext& ctx, std::span<const double> learner_mix,
                                         std::span<const double> opponent_mix);

AdversaryContext adversary_context(const NormalFormGame& true_game);

}  // namespace pomg
