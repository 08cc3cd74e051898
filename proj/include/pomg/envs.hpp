#pragma once

// Built-in environments: the two hardness constructions, random revealing
// generators and perturbed candidate families.

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pomg/core.hpp"
#include "pomg/likelihood.hpp"
#include "pomg/policy.hpp"

namespace pomg {

/// Two-player game with max-player 0 and min-player 1; rewards are
/// constant-sum (r_1 + r_2 = 1 on rewarded steps) so both stay in [0,1].
///
/// Levels 1..L of circles followed by a rectangle level, so H = L + 1 and
/// S = 4L. State ids: u_1 = 0, l_1 = 1, then per level l = 2..L the block
/// 2 + 4(l-2) + {u_{l,0}, u_{l,1}, l_{l,0}, l_{l,1}}, then R+ = 4L-2 and
/// R- = 4L-1. The max-player observes the state id. The min-player observes
/// o_null = S on black circles and the state id on red circles and
/// rectangles.
struct HardSingleStepInstance {
    PomgModel model;
    int L = 2;
    std::uint64_t seed = 0;
    /// red[l-2] = (upper red offset, lower red offset) in {0,1} for level l.
    std::vector<std::pair<int, int>> red;

    bool is_red(int state) const;
    bool is_upper(int state) const;
    /// The min-player's informed strategy: b0 when she has seen an upper
    /// red circle, b1 for a lower one, b0 otherwise. Full-history table;
    /// sized O_2^H, so only small L fit.
    DetPolicy scripted_min_policy() const;
    ActionRule scripted_min_rule() const;
    /// Max-player policy that steps onto the black circle of every level.
    DetPolicy red_avoiding_max_policy() const;
    nlohmann::json metadata() const;
};

HardSingleStepInstance hard_instance_singlestep(int L, std::uint64_t seed);

/// States p0 = 0, p1 = 1, q0 = 2, q1 = 3. Shared observations per player:
/// o_dummy = 0, o0 = 1, o1 = 2. r_1(o1) = 1, r_2 = 1 - r_1.
struct HardMultiStepInstance {
    PomgModel model;
    std::uint64_t seed = 0;
    std::vector<int> x;  // x[h] for h = 0 .. H-2

    /// Min-player always plays b0.
    DetPolicy fixed_opponent_policy() const;
    nlohmann::json metadata() const;
};

HardMultiStepInstance hard_instance_multistep(int H, std::uint64_t seed);

struct RandomPomgOptions {
    /// Columns are drawn as w_j proportional to E_j^sharpness with E_j
    /// standard exponential: 1 is Dirichlet(1), larger is peakier.
    double sharpness = 1.0;
    /// Every player sees the same observation (needs equal O_i) and
    /// r_2 = 1 - r_1. Two players only.
    bool shared_zero_sum = false;
    /// Rewards drawn from {0, 1} instead of [0, 1].
    bool binary_rewards = false;
};

inline constexpr int kRejectionBudget = 1000;

/// Random stochastic model whose emissions are resampled until
/// min_h sigma_S(O_h) >= alpha_target. Needs O >= S.
PomgModel random_revealing_pomg(const PomgSpec& spec, double alpha_target, std::uint64_t seed,
                                const RandomPomgOptions& options = {});

/// Same, for the m-step condition; for specs with O < S.
PomgModel random_multistep_revealing_pomg(const PomgSpec& spec, int m, double alpha_target, std::uint64_t seed,
                                          const RandomPomgOptions& options = {});

/// Random probability vector of length n (see RandomPomgOptions::sharpness).
std::vector<double> random_simplex(int n, double sharpness, Rng& rng);

/// {truth} plus count-1 copies with every transition and emission column
/// replaced by (1-scale) col + scale noise, the noise drawn by
/// random_simplex(., noise_sharpness, .) (Dirichlet(1) by default); mu1 and
/// rewards are kept. The truth sits at a seed-chosen index. Copies failing
/// `revealing` are redrawn, kRejectionBudget draws in total.
CandidateFamily candidate_family_around(const PomgModel& truth, int count, double scale, std::uint64_t seed,
                                        const RevealingPredicate& revealing = {}, double noise_sharpness = 1.0);

}  // namespace pomg
