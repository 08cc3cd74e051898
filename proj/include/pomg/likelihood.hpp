#pragma once

// Exact trajectory likelihoods, values of joint policies, and the MLE
// confidence set over a finite candidate family.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pomg/core.hpp"
#include "pomg/policy.hpp"

namespace pomg {

/// P(o_{1:H} | a_{1:H}) by the normalized forward recursion: start from mu1,
/// weight by the emission column of o_h, record and divide out the mass,
/// push through P_h(.|., a_h). Returns the product of recorded masses.
double forward_prob(const PomgModel& model, std::span<const int> actions, std::span<const int> observations);

/// Sum of log masses from the same recursion; -inf when the probability is 0.
double log_forward_prob(const PomgModel& model, std::span<const int> actions, std::span<const int> observations);

struct DatasetEntry {
    std::string policy;  // opaque record of the executed policy
    Trajectory trajectory;
};
using Dataset = std::vector<DatasetEntry>;

/// Sum of log P(o | a) over the dataset. Policy records are ignored: the
/// policy factor of P^pi(tau) is identical for every model and cancels in
/// every likelihood comparison.
double log_likelihood(const PomgModel& model, const Dataset& data);

inline constexpr std::size_t kDefaultValueBudget = 10'000'000;

/// V_i^mu for every player i, summed exactly over joint observation
/// sequences. Branches of probability zero are pruned; the budget bounds the
/// number of positive-probability sequences and a Fault reports the count
/// reached.
std::vector<double> policy_values(const PomgModel& model, const JointDetPolicy& mu,
                                  std::size_t budget = kDefaultValueBudget);
double policy_value(const PomgModel& model, const JointDetPolicy& mu, int player,
                    std::size_t budget = kDefaultValueBudget);

double mixed_value(const PomgModel& model, const PureStrategySets& sets, const MixedJointPolicy& pi, int player,
                   std::size_t budget = kDefaultValueBudget);

struct CandidateFamily {
    std::vector<PomgModel> models;
    std::optional<std::size_t> truth_index;  // harness bookkeeping only

    std::size_t size() const { return models.size(); }
};

struct ConfidenceSet {
    std::vector<std::size_t> members;  // ascending candidate indices
    double beta = 0;
    double max_log_likelihood = 0;

    bool contains(std::size_t index) const;
    std::size_t size() const { return members.size(); }
};

using RevealingPredicate = std::function<bool(const PomgModel&)>;

/// Members are admissible candidates with log-likelihood >= max - beta, the
/// max also taken over admissible candidates only. Faults on an empty
/// admissible set ("empty B1") or when every admissible candidate gives the
/// data zero probability.
ConfidenceSet confidence_set_from_scores(std::span<const double> log_likelihoods, std::span<const char> admissible,
                                         double beta);

ConfidenceSet build_confidence_set(const CandidateFamily& candidates, const Dataset& data, double beta,
                                   const RevealingPredicate& revealing);

/// c * (H (S^2 A + S O) log(S A O H K) + log(K / delta)) with joint A and O.
double beta_schedule(const PomgSpec& spec, int episodes, double c = 1.0, double delta = 0.05);

/// One JSON object per line: {"policy": ..., "obs": [...], "act": [...]}.
void write_dataset_jsonl(std::ostream& out, const Dataset& data, const PomgSpec& spec);
Dataset read_dataset_jsonl(std::istream& in, const PomgSpec& spec);

}  // namespace pomg
