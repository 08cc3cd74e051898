#pragma once

// Deterministic history-dependent policies, their canonical enumeration,
// and finite mixtures over joint deterministic policies.
//
// History keys. A player's history at step h is (o_0, a_0, ..., o_h).
//   full-history: keys are ordered by length, then lexicographically with
//                 the digits (o_0, a_0, ..., o_h) and o most significant
//                 first; key count is sum_h O_i^(h+1) A_i^h.
//   reactive:     key = h * O_i + o_h; key count is H * O_i.
// The policy with pure-strategy index p assigns table[k] = k-th digit of p
// written in base A_i with key 0 most significant, so index order is
// lexicographic over the table.

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "pomg/core.hpp"

namespace pomg {

enum class PolicyClass { FullHistory, Reactive };

std::string to_string(PolicyClass cls);
PolicyClass policy_class_from_string(const std::string& name);

std::size_t history_key_count(const PomgSpec& spec, int player, PolicyClass cls);
std::size_t history_key(const PomgSpec& spec, PolicyClass cls, const PlayerHistory& hist);
/// Inverse of history_key. Reactive keys only carry the last observation;
/// earlier entries are -1.
struct DecodedHistory {
    int step = 0;
    std::vector<int> observations;
    std::vector<int> actions;
};
DecodedHistory decode_history_key(const PomgSpec& spec, int player, PolicyClass cls, std::size_t key);

/// Human-readable "h=1 o=(0,1) a=(1)" form of a key, for error messages.
std::string describe_history_key(const PomgSpec& spec, int player, PolicyClass cls, std::size_t key);

inline constexpr int kUnsetAction = -1;

struct DetPolicy {
    int player = 0;
    PolicyClass cls = PolicyClass::FullHistory;
    std::vector<int> table;  // indexed by history key; kUnsetAction = missing

    /// Throws Fault naming the history if the entry is missing.
    int act(const PomgSpec& spec, const PlayerHistory& hist) const;

    bool operator==(const DetPolicy&) const = default;
};

struct JointDetPolicy {
    std::vector<DetPolicy> players;

    /// Throws Fault if the policies do not fit the spec.
    void check(const PomgSpec& spec) const;
    ActionRule rule(const PomgSpec& spec) const;
};

inline constexpr std::size_t kDefaultPolicyBudget = 1'000'000;

/// Number of deterministic policies as an exact decimal string
/// (or "A^K" when it does not fit in 64 bits).
std::string det_policy_count_string(const PomgSpec& spec, int player, PolicyClass cls);

/// Number of deterministic policies; throws Fault with the exact count if it
/// exceeds `budget`.
std::size_t det_policy_count(const PomgSpec& spec, int player, PolicyClass cls,
                             std::size_t budget = kDefaultPolicyBudget);

/// The policy with a given pure-strategy index in the canonical order.
DetPolicy det_policy_at(const PomgSpec& spec, int player, PolicyClass cls, std::size_t index);

std::vector<DetPolicy> enumerate_det_policies(const PomgSpec& spec, int player, PolicyClass cls,
                                              std::size_t budget = kDefaultPolicyBudget);

/// Per-player enumerated pure strategies; defines the pure-strategy indices
/// used by games, mixtures and modifications.
struct PureStrategySets {
    PolicyClass cls = PolicyClass::FullHistory;
    std::vector<std::vector<DetPolicy>> per_player;

    static PureStrategySets enumerate(const PomgSpec& spec, PolicyClass cls,
                                      std::size_t budget = kDefaultPolicyBudget);

    std::vector<int> sizes() const;
    std::size_t profile_count() const;
    std::vector<int> profile(std::size_t flat) const;
    std::size_t flat(std::span<const int> profile) const;
    JointDetPolicy joint(std::span<const int> profile) const;
};

/// A distribution over one player's pure strategies.
struct Mixture {
    std::vector<int> strategies;
    std::vector<double> weights;
};

using Profile = std::vector<int>;

/// Finite distribution over joint pure-strategy profiles.
struct MixedJointPolicy {
    std::vector<Profile> support;
    std::vector<double> weights;
    bool product_form = false;

    /// Throws Fault unless weights are nonnegative and sum to 1 within 1e-9,
    /// and (when product_form) the joint weights factorize within 1e-9.
    void check() const;
    /// Sorts by profile and merges duplicates.
    void canonicalize();
    int num_players() const { return support.empty() ? 0 : static_cast<int>(support.front().size()); }
};

/// Point mass on one profile.
MixedJointPolicy point_mass(const Profile& profile);

MixedJointPolicy product_policy(const std::vector<Mixture>& marginals);

struct StrategyModification {
    int player = 0;
    std::vector<int> swap;  // swap[pure index] = replacement pure index
};

MixedJointPolicy apply_modification(const StrategyModification& phi, const MixedJointPolicy& pi);

/// Player i's marginal, sorted by strategy index.
Mixture marginalize(const MixedJointPolicy& pi, int player);

/// Joint distribution of the other players (profiles with player i removed).
struct ExcludedMixture {
    std::vector<Profile> profiles;
    std::vector<double> weights;
};
ExcludedMixture exclude(const MixedJointPolicy& pi, int player);

nlohmann::json policy_to_json(const DetPolicy& policy);
DetPolicy policy_from_json(const nlohmann::json& doc, const PomgSpec& spec);

}  // namespace pomg
