#include "pomg/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "pomg/error.hpp"
#include "pomg/model_io.hpp"

namespace pomg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Runs the normalized recursion, calling on_mass(h, mass) per step. Returns
// false as soon as a mass is zero.
template <typename OnMass>
bool forward_recursion(const PomgModel& model, std::span<const int> actions, std::span<const int> observations,
                       OnMass&& on_mass) {
    const auto& sp = model.spec;
    const int H = sp.horizon, S = sp.num_states, O = sp.joint_observations();
    if (static_cast<int>(actions.size()) != H || static_cast<int>(observations.size()) != H)
        throw Fault("forward_prob: sequences must have length H=" + std::to_string(H));
    std::vector<double> belief(model.mu1), next(S);
    for (int h = 0; h < H; ++h) {
        const int o = observations[h];
        double mass = 0;
        for (int s = 0; s < S; ++s) {
            belief[s] *= model.emission_column(h, s)[o];
            mass += belief[s];
        }
        on_mass(h, mass);
        if (!(mass > 0)) return false;
        if (h + 1 == H) break;
        std::fill(next.begin(), next.end(), 0.0);
        const int a = actions[h];
        for (int s = 0; s < S; ++s) {
            const double w = belief[s] / mass;
            if (w == 0) continue;
            const double* col = model.transition_column(h, s, a);
            for (int s2 = 0; s2 < S; ++s2) next[s2] += w * col[s2];
        }
        belief.swap(next);
    }
    (void)O;
    return true;
}

}  // namespace

double forward_prob(const PomgModel& model, std::span<const int> actions, std::span<const int> observations) {
    double prob = 1;
    const bool positive = forward_recursion(model, actions, observations, [&](int, double m) { prob *= m; });
    return positive ? prob : 0.0;
}

double log_forward_prob(const PomgModel& model, std::span<const int> actions, std::span<const int> observations) {
    double total = 0;
    const bool positive = forward_recursion(model, actions, observations, [&](int, double m) {
        if (m > 0) total += std::log(m);
    });
    return positive ? total : kNegInf;
}

double log_likelihood(const PomgModel& model, const Dataset& data) {
    double total = 0;
    for (const auto& entry : data) {
        const double lp = log_forward_prob(model, entry.trajectory.actions, entry.trajectory.observations);
        if (lp == kNegInf) return kNegInf;
        total += lp;
    }
    return total;
}

namespace {

struct ValueSearch {
    const PomgModel& model;
    const JointDetPolicy& mu;
    std::size_t budget;
    int H, S, O, n;
    std::vector<std::vector<int>> own_obs, own_act;
    std::vector<std::vector<int>> obs_digits;  // decoded joint observations
    std::vector<double> values;
    std::size_t leaves = 0;

    ValueSearch(const PomgModel& m, const JointDetPolicy& policy, std::size_t b)
        : model(m), mu(policy), budget(b), H(m.spec.horizon), S(m.spec.num_states),
          O(m.spec.joint_observations()), n(m.spec.num_players), own_obs(n), own_act(n), values(n, 0.0) {
        for (int o = 0; o < O; ++o) obs_digits.push_back(m.spec.decode_observation(o));
        for (int i = 0; i < n; ++i) {
            own_obs[i].resize(H);
            own_act[i].resize(H);
        }
    }

    // alpha[s] = P(o_{0:h-1}, s_h = s | actions induced by mu).
    void visit(int h, const std::vector<double>& alpha) {
        std::vector<double> weighted(S), next(S);
        std::vector<int> act(n);
        for (int o = 0; o < O; ++o) {
            double mass = 0;
            for (int s = 0; s < S; ++s) {
                weighted[s] = alpha[s] * model.emission_column(h, s)[o];
                mass += weighted[s];
            }
            if (!(mass > 0)) continue;
            const auto& digits = obs_digits[o];
            for (int i = 0; i < n; ++i) values[i] += mass * model.reward(i, h, digits[i]);
            if (h + 1 == H) {
                if (++leaves > budget)
                    throw Fault("policy_value: more than " + std::to_string(budget) +
                                " positive-probability observation sequences");
                continue;
            }
            for (int i = 0; i < n; ++i) {
                own_obs[i][h] = digits[i];
                PlayerHistory hist{i, h, std::span<const int>(own_obs[i].data(), h + 1),
                                   std::span<const int>(own_act[i].data(), h)};
                act[i] = mu.players[i].act(model.spec, hist);
                own_act[i][h] = act[i];
            }
            const int a = model.spec.encode_action(act);
            std::fill(next.begin(), next.end(), 0.0);
            for (int s = 0; s < S; ++s) {
                if (weighted[s] == 0) continue;
                const double* col = model.transition_column(h, s, a);
                for (int s2 = 0; s2 < S; ++s2) next[s2] += weighted[s] * col[s2];
            }
            visit(h + 1, next);
        }
    }
};

}  // namespace

std::vector<double> policy_values(const PomgModel& model, const JointDetPolicy& mu, std::size_t budget) {
    mu.check(model.spec);
    ValueSearch search(model, mu, budget);
    search.visit(0, model.mu1);
    return search.values;
}

double policy_value(const PomgModel& model, const JointDetPolicy& mu, int player, std::size_t budget) {
    if (player < 0 || player >= model.spec.num_players) throw Fault("policy_value: player out of range");
    return policy_values(model, mu, budget)[player];
}

double mixed_value(const PomgModel& model, const PureStrategySets& sets, const MixedJointPolicy& pi, int player,
                   std::size_t budget) {
    pi.check();
    double total = 0;
    for (std::size_t k = 0; k < pi.support.size(); ++k) {
        if (pi.weights[k] == 0) continue;
        total += pi.weights[k] * policy_value(model, sets.joint(pi.support[k]), player, budget);
    }
    return total;
}

bool ConfidenceSet::contains(std::size_t index) const {
    return std::binary_search(members.begin(), members.end(), index);
}

ConfidenceSet confidence_set_from_scores(std::span<const double> log_likelihoods, std::span<const char> admissible,
                                         double beta) {
    if (beta < 0) throw Fault("confidence set: beta must be nonnegative");
    ConfidenceSet set;
    set.beta = beta;
    bool any = false;
    double best = kNegInf;
    for (std::size_t k = 0; k < log_likelihoods.size(); ++k) {
        if (!admissible[k]) continue;
        any = true;
        best = std::max(best, log_likelihoods[k]);
    }
    if (!any) throw Fault("empty B1: no candidate passes the revealing condition");
    if (best == kNegInf)
        throw Fault("confidence set: every admissible candidate assigns zero probability to the data");
    set.max_log_likelihood = best;
    for (std::size_t k = 0; k < log_likelihoods.size(); ++k) {
        if (admissible[k] && log_likelihoods[k] >= best - beta) set.members.push_back(k);
    }
    return set;
}

ConfidenceSet build_confidence_set(const CandidateFamily& candidates, const Dataset& data, double beta,
                                   const RevealingPredicate& revealing) {
    std::vector<double> scores(candidates.size());
    std::vector<char> admissible(candidates.size());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        admissible[k] = revealing ? revealing(candidates.models[k]) : 1;
        scores[k] = admissible[k] ? log_likelihood(candidates.models[k], data) : kNegInf;
    }
    return confidence_set_from_scores(scores, admissible, beta);
}

double beta_schedule(const PomgSpec& spec, int episodes, double c, double delta) {
    if (episodes < 1) throw Fault("beta_schedule: need at least one episode");
    if (!(delta > 0 && delta <= 1)) throw Fault("beta_schedule: delta must lie in (0,1]");
    const double H = spec.horizon, S = spec.num_states;
    const double A = spec.joint_actions(), O = spec.joint_observations(), K = episodes;
    return c * (H * (S * S * A + S * O) * std::log(S * A * O * H * K) + std::log(K / delta));
}

void write_dataset_jsonl(std::ostream& out, const Dataset& data, const PomgSpec& spec) {
    for (const auto& entry : data) {
        auto line = trajectory_to_json(entry.trajectory, spec);
        line["policy"] = entry.policy;
        out << line.dump() << '\n';
    }
}

Dataset read_dataset_jsonl(std::istream& in, const PomgSpec& spec) {
    Dataset data;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto doc = nlohmann::json::parse(line);
            data.push_back({doc.at("policy").get<std::string>(), trajectory_from_json(doc, spec)});
        } catch (const nlohmann::json::exception& e) {
            throw Fault("dataset line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Fault& e) {
            throw Fault("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return data;
}

}  // namespace pomg
