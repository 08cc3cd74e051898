#include "pomg/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pomg/error.hpp"

namespace pomg {

double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
    double total = 0;
    for (double w : weights) total += w;
    if (weights.empty() || !(total > 0)) throw Fault("sample_index: weights have no positive mass");
    const double u = uniform01(rng) * total;
    double acc = 0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0) continue;
        acc += weights[i];
        last_positive = i;
        if (u < acc) return i;
    }
    return last_positive;
}

std::size_t flatten(std::span<const int> radices, std::span<const int> digits) {
    std::size_t index = 0;
    for (std::size_t k = 0; k < radices.size(); ++k) {
        index = index * static_cast<std::size_t>(radices[k]) + static_cast<std::size_t>(digits[k]);
    }
    return index;
}

std::vector<int> unflatten(std::span<const int> radices, std::size_t index) {
    std::vector<int> digits(radices.size());
    for (std::size_t k = radices.size(); k-- > 0;) {
        const auto r = static_cast<std::size_t>(radices[k]);
        digits[k] = static_cast<int>(index % r);
        index /= r;
    }
    return digits;
}

std::size_t radix_product(std::span<const int> radices) {
    std::size_t p = 1;
    for (int r : radices) {
        if (r < 1) throw Fault("radix_product: nonpositive radix");
        if (p > (std::numeric_limits<std::size_t>::max() >> 1) / static_cast<std::size_t>(r))
            throw Fault("radix_product: overflow");
        p *= static_cast<std::size_t>(r);
    }
    return p;
}

int PomgSpec::joint_actions() const { return static_cast<int>(radix_product(actions)); }
int PomgSpec::joint_observations() const { return static_cast<int>(radix_product(observations)); }

void PomgSpec::check() const {
    if (horizon < 1) throw Fault("spec: horizon must be >= 1");
    if (num_players < 1) throw Fault("spec: num_players must be >= 1");
    if (num_states < 1) throw Fault("spec: num_states must be >= 1");
    if (static_cast<int>(actions.size()) != num_players)
        throw Fault("spec: actions list has " + std::to_string(actions.size()) + " entries, expected " +
                    std::to_string(num_players));
    if (static_cast<int>(observations.size()) != num_players)
        throw Fault("spec: observations list has " + std::to_string(observations.size()) +
                    " entries, expected " + std::to_string(num_players));
    for (int i = 0; i < num_players; ++i) {
        if (actions[i] < 1) throw Fault("spec: player " + std::to_string(i) + " has no actions");
        if (observations[i] < 1) throw Fault("spec: player " + std::to_string(i) + " has no observations");
    }
    if (radix_product(actions) > (1u << 30) || radix_product(observations) > (1u << 30))
        throw Fault("spec: joint action/observation space too large");
}

std::vector<int> PomgSpec::decode_action(int joint) const { return unflatten(actions, static_cast<std::size_t>(joint)); }
std::vector<int> PomgSpec::decode_observation(int joint) const {
    return unflatten(observations, static_cast<std::size_t>(joint));
}
int PomgSpec::encode_action(std::span<const int> per_player) const {
    return static_cast<int>(flatten(actions, per_player));
}
int PomgSpec::encode_observation(std::span<const int> per_player) const {
    return static_cast<int>(flatten(observations, per_player));
}

PomgModel PomgModel::zeros(const PomgSpec& spec) {
    spec.check();
    PomgModel m;
    m.spec = spec;
    const std::size_t H = spec.horizon, S = spec.num_states;
    const std::size_t A = spec.joint_actions(), O = spec.joint_observations();
    m.mu1.assign(S, 0.0);
    m.trans.assign(H * S * A * S, 0.0);
    m.emit.assign(H * S * O, 0.0);
    m.rewards.resize(spec.num_players);
    for (int i = 0; i < spec.num_players; ++i) m.rewards[i].assign(H * spec.observations[i], 0.0);
    return m;
}

namespace {
inline std::size_t trans_index(const PomgSpec& sp, int h, int s, int a, int s2) {
    const std::size_t S = sp.num_states, A = sp.joint_actions();
    return ((static_cast<std::size_t>(h) * S + s) * A + a) * S + s2;
}
inline std::size_t emit_index(const PomgSpec& sp, int h, int o, int s) {
    const std::size_t S = sp.num_states, O = sp.joint_observations();
    return (static_cast<std::size_t>(h) * S + s) * O + o;
}
}  // namespace

double PomgModel::transition(int h, int s, int a, int s2) const { return trans[trans_index(spec, h, s, a, s2)]; }
double& PomgModel::transition(int h, int s, int a, int s2) { return trans[trans_index(spec, h, s, a, s2)]; }
double PomgModel::emission(int h, int o, int s) const { return emit[emit_index(spec, h, o, s)]; }
double& PomgModel::emission(int h, int o, int s) { return emit[emit_index(spec, h, o, s)]; }
double PomgModel::reward(int player, int h, int o) const {
    return rewards[player][static_cast<std::size_t>(h) * spec.observations[player] + o];
}
double& PomgModel::reward(int player, int h, int o) {
    return rewards[player][static_cast<std::size_t>(h) * spec.observations[player] + o];
}
const double* PomgModel::transition_column(int h, int s, int a) const { return &trans[trans_index(spec, h, s, a, 0)]; }
const double* PomgModel::emission_column(int h, int s) const { return &emit[emit_index(spec, h, 0, s)]; }

std::string ValidationReport::summary(std::size_t max_items) const {
    if (ok()) return "ok";
    std::ostringstream out;
    out << violations.size() << " violation(s)";
    for (std::size_t k = 0; k < violations.size() && k < max_items; ++k) {
        const auto& v = violations[k];
        out << "; " << v.where << ": " << v.what << " (residual " << v.residual << ")";
    }
    if (violations.size() > max_items) out << "; ...";
    return out.str();
}

ValidationReport validate_model(const PomgModel& model) {
    ValidationReport report;
    auto add = [&](std::string where, std::string what, double residual) {
        report.violations.push_back({std::move(where), std::move(what), residual});
    };
    const auto& sp = model.spec;
    try {
        sp.check();
    } catch (const Fault& e) {
        add("spec", e.what(), 0);
        return report;
    }
    const int H = sp.horizon, S = sp.num_states, A = sp.joint_actions(), O = sp.joint_observations();
    if (model.mu1.size() != static_cast<std::size_t>(S) || model.trans.size() != std::size_t(H) * S * A * S ||
        model.emit.size() != std::size_t(H) * S * O || model.rewards.size() != static_cast<std::size_t>(sp.num_players)) {
        add("shape", "parameter arrays do not match the spec", 0);
        return report;
    }
    for (int i = 0; i < sp.num_players; ++i) {
        if (model.rewards[i].size() != std::size_t(H) * sp.observations[i]) {
            add("shape", "reward table of player " + std::to_string(i) + " has wrong size", 0);
            return report;
        }
    }

    auto check_distribution = [&](const double* p, int len, const std::string& where) {
        double sum = 0;
        for (int k = 0; k < len; ++k) {
            if (!std::isfinite(p[k])) {
                add(where, "non-finite entry at index " + std::to_string(k), p[k]);
                return;
            }
            if (p[k] < 0) add(where, "negative entry at index " + std::to_string(k), p[k]);
            sum += p[k];
        }
        if (std::abs(sum - 1.0) > kStochasticTolerance) {
            std::ostringstream what;
            what.precision(17);
            what << "sums to " << sum;
            add(where, what.str(), sum - 1.0);
        }
    };

    check_distribution(model.mu1.data(), S, "mu1");
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                check_distribution(model.transition_column(h, s, a), S,
                                   "trans h=" + std::to_string(h) + " s=" + std::to_string(s) + " a=" + std::to_string(a));
            }
            check_distribution(model.emission_column(h, s), O, "emit h=" + std::to_string(h) + " s=" + std::to_string(s));
        }
    }
    for (int i = 0; i < sp.num_players; ++i) {
        for (int h = 0; h < H; ++h) {
            for (int o = 0; o < sp.observations[i]; ++o) {
                const double r = model.reward(i, h, o);
                if (!(r >= 0.0 && r <= 1.0)) {
                    add("reward i=" + std::to_string(i) + " h=" + std::to_string(h) + " o=" + std::to_string(o),
                        "reward out of [0,1]", r < 0 ? r : r - 1.0);
                }
            }
        }
    }
    return report;
}

Trajectory sample_trajectory(const PomgModel& model, const ActionRule& rule, Rng& rng) {
    const auto& sp = model.spec;
    const int H = sp.horizon, S = sp.num_states, n = sp.num_players;
    const int O = sp.joint_observations();
    Trajectory traj;
    traj.observations.reserve(H);
    traj.actions.reserve(H);
    traj.states.reserve(H);

    std::vector<std::vector<int>> own_obs(n), own_act(n);
    int s = static_cast<int>(sample_index(model.mu1, rng));
    std::vector<int> act(n);
    for (int h = 0; h < H; ++h) {
        traj.states.push_back(s);
        const int o = static_cast<int>(sample_index({model.emission_column(h, s), static_cast<std::size_t>(O)}, rng));
        traj.observations.push_back(o);
        const auto obs = sp.decode_observation(o);
        for (int i = 0; i < n; ++i) own_obs[i].push_back(obs[i]);
        for (int i = 0; i < n; ++i) {
            PlayerHistory hist{i, h, own_obs[i], own_act[i]};
            act[i] = rule(hist, rng);
            if (act[i] < 0 || act[i] >= sp.actions[i])
                throw Fault("sample_trajectory: action " + std::to_string(act[i]) + " out of range for player " +
                            std::to_string(i));
        }
        for (int i = 0; i < n; ++i) own_act[i].push_back(act[i]);
        const int a = sp.encode_action(act);
        traj.actions.push_back(a);
        s = static_cast<int>(sample_index({model.transition_column(h, s, a), static_cast<std::size_t>(S)}, rng));
    }
    return traj;
}

double trajectory_return(const Trajectory& traj, int player, const PomgModel& model) {
    const auto& sp = model.spec;
    if (player < 0 || player >= sp.num_players) throw Fault("trajectory_return: player index out of range");
    double total = 0;
    for (int h = 0; h < traj.horizon(); ++h) {
        const int o = sp.decode_observation(traj.observations[h])[player];
        total += model.reward(player, h, o);
    }
    return total;
}

}  // namespace pomg
