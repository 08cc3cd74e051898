#pragma once

// Tabular episodic partially observable Markov game: shape, parameters,
// validation, trajectory sampling.
//
// Steps are 0-based internally (h = 0 .. H-1). Joint actions and joint
// observations are flattened row-major over players, player 0 varying
// slowest; flatten()/unflatten() are the only encoders used anywhere.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pomg {

using Rng = std::mt19937_64;

/// Uniform double in [0,1) built from the top 53 bits; identical on every
/// platform, unlike std::uniform_real_distribution.
double uniform01(Rng& rng);

/// Index drawn from a discrete distribution given by nonnegative weights
/// (need not be normalized). Uses exactly one call to uniform01.
std::size_t sample_index(std::span<const double> weights, Rng& rng);

std::size_t flatten(std::span<const int> radices, std::span<const int> digits);
std::vector<int> unflatten(std::span<const int> radices, std::size_t index);

/// Product of radices; throws Fault if it does not fit in 63 bits.
std::size_t radix_product(std::span<const int> radices);

struct PomgSpec {
    int horizon = 1;
    int num_players = 1;
    int num_states = 1;
    std::vector<int> actions;       // A_i per player
    std::vector<int> observations;  // O_i per player

    int joint_actions() const;       // A = prod A_i
    int joint_observations() const;  // O = prod O_i

    /// Throws Fault if any count is < 1 or the vectors disagree with
    /// num_players.
    void check() const;

    std::vector<int> decode_action(int joint) const;
    std::vector<int> decode_observation(int joint) const;
    int encode_action(std::span<const int> per_player) const;
    int encode_observation(std::span<const int> per_player) const;

    bool operator==(const PomgSpec&) const = default;
};

/// Dense model parameters. Layouts:
///   trans[((h*S + s)*A + a)*S + s2] = P_h(s2 | s, a)
///   emit[(h*S + s)*O + o]           = O_h(o | s)
///   rewards[i][h*O_i + o_i]         = r_{i,h}(o_i)
struct PomgModel {
    PomgSpec spec;
    std::vector<double> mu1;
    std::vector<double> trans;
    std::vector<double> emit;
    std::vector<std::vector<double>> rewards;

    /// All-zero parameters of the right sizes (not a valid model).
    static PomgModel zeros(const PomgSpec& spec);

    double transition(int h, int s, int a, int s2) const;
    double& transition(int h, int s, int a, int s2);
    double emission(int h, int o, int s) const;
    double& emission(int h, int o, int s);
    double reward(int player, int h, int o) const;
    double& reward(int player, int h, int o);

    /// Pointer to the column P_h(. | s, a), length S.
    const double* transition_column(int h, int s, int a) const;
    /// Pointer to the column O_h(. | s), length O.
    const double* emission_column(int h, int s) const;
};

inline constexpr double kStochasticTolerance = 1e-9;

struct Violation {
    std::string where;    // e.g. "trans h=1 s=0 a=3"
    std::string what;     // e.g. "column sum 0.9"
    double residual = 0;  // signed deviation from the constraint
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary(std::size_t max_items = 10) const;
};

ValidationReport validate_model(const PomgModel& model);

struct Trajectory {
    std::vector<int> observations;  // joint observation index per step
    std::vector<int> actions;       // joint action index per step
    std::vector<int> states;        // latent states; debug only

    int horizon() const { return static_cast<int>(observations.size()); }
    bool operator==(const Trajectory&) const = default;
};

/// A player's own view at step h: o_{i,0..h} and a_{i,0..h-1}.
struct PlayerHistory {
    int player = 0;
    int step = 0;
    std::span<const int> observations;  // length step+1
    std::span<const int> actions;       // length step
};

/// Returns player i's action given her own history. The rng is the
/// episode's random source, for rules that randomize (e.g. uniform play).
using ActionRule = std::function<int(const PlayerHistory&, Rng&)>;

/// Draws s_0 ~ mu1, then per step: joint observation ~ O_h(.|s), each
/// player's action from `rule` in player order, s' ~ P_h(.|s,a).
Trajectory sample_trajectory(const PomgModel& model, const ActionRule& rule, Rng& rng);

/// Sum over steps of r_{i,h}(o_{i,h}) read from the trajectory.
double trajectory_return(const Trajectory& traj, int player, const PomgModel& model);

}  // namespace pomg
