#pragma once

// Normal-form games over enumerated pure strategies and their equilibria.
//
// Profiles are flattened row-major with player 0 slowest, matching
// PureStrategySets::flat().

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "pomg/policy.hpp"

namespace pomg {

struct NormalFormGame {
    std::vector<int> sizes;                     // pure-strategy count per player
    std::vector<std::vector<double>> payoffs;  // payoffs[i][flat profile]

    static NormalFormGame zeros(std::vector<int> sizes);
    /// Two-player game from row/column payoff matrices (m x k each).
    static NormalFormGame bimatrix(const std::vector<std::vector<double>>& row,
                                   const std::vector<std::vector<double>>& col);

    int num_players() const { return static_cast<int>(sizes.size()); }
    std::size_t profile_count() const;
    /// Distance in flat index between strategies s and s+1 of a player.
    std::size_t stride(int player) const;
    std::vector<int> profile(std::size_t flat) const;
    std::size_t flat(std::span<const int> profile) const;
    /// Throws Fault unless all tensors match `sizes` and are finite.
    void check() const;
};

/// Probability over flat profiles.
struct JointDistribution {
    std::vector<int> sizes;
    std::vector<double> prob;

    void check(double tol = 1e-8) const;
    /// Drops entries <= 0 and converts to a mixture over profiles.
    MixedJointPolicy to_mixture(bool product_form) const;
    static JointDistribution from_mixture(const MixedJointPolicy& pi, std::vector<int> sizes);
    static JointDistribution product(const std::vector<std::vector<double>>& marginals);
};

double expected_payoff(const NormalFormGame& game, const JointDistribution& dist, int player);

/// max over pure deviations s' of E[U_i(s', s_-i)] - E[U_i], unclamped.
double deviation_gain(const NormalFormGame& game, const JointDistribution& dist, int player);
/// deviation_gain clamped at 0.
double exploitability(const NormalFormGame& game, const JointDistribution& dist, int player);
/// Sum over recommended s_i of max_{s'} E[(U_i(s',s_-i) - U_i(s)) 1{s_i}]; >= 0.
double best_swap_gain(const NormalFormGame& game, const JointDistribution& dist, int player);

struct ZeroSumSolution {
    double value = 0;                // to the row player
    std::vector<double> row;         // maximin strategy
    std::vector<double> column;      // minimax strategy
};

/// Solves max_x min_y x^T U y by two LPs (one per player).
ZeroSumSolution solve_zero_sum(const std::vector<std::vector<double>>& payoff);

inline constexpr int kDefaultNashStrategyBudget = 12;

/// Support enumeration for two-player games: supports are tried in order of
/// (max size, equal sizes first, lexicographic) and each pair is tested by an
/// LP feasibility problem, which also handles degenerate games. The first
/// pair whose solution passes an exploitability audit (<= 1e-6) is returned.
JointDistribution solve_nash_2p(const NormalFormGame& game, int strategy_budget = kDefaultNashStrategyBudget);

/// Maximizes the sum of expected payoffs subject to the coarse correlated
/// constraints.
JointDistribution solve_cce(const NormalFormGame& game);
/// Maximizes the sum of expected payoffs subject to the per-recommendation
/// swap constraints.
JointDistribution solve_ce(const NormalFormGame& game);

nlohmann::json game_to_json(const NormalFormGame& game);
NormalFormGame game_from_json(const nlohmann::json& doc);
/// Nested dense tensor with one axis per player.
nlohmann::json tensor_to_json(std::span<const double> flat, std::span<const int> sizes);
std::vector<double> tensor_from_json(const nlohmann::json& doc, std::span<const int> sizes);

}  // namespace pomg
