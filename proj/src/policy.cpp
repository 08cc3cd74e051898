#include "pomg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "pomg/error.hpp"

namespace pomg {

std::string to_string(PolicyClass cls) { return cls == PolicyClass::Reactive ? "reactive" : "full-history"; }

PolicyClass policy_class_from_string(const std::string& name) {
    if (name == "reactive") return PolicyClass::Reactive;
    if (name == "full-history" || name == "full_history") return PolicyClass::FullHistory;
    throw Fault("unknown policy class \"" + name + "\" (expected full-history or reactive)");
}

namespace {

std::size_t checked_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > std::numeric_limits<std::size_t>::max() / 4 / a) throw Fault("history key count overflows");
    return a * b;
}

// Number of full-history keys of length h+1 observations.
std::size_t histories_at(std::size_t O, std::size_t A, int h) {
    std::size_t n = O;
    for (int t = 0; t < h; ++t) n = checked_mul(checked_mul(n, A), O);
    return n;
}

}  // namespace

std::size_t history_key_count(const PomgSpec& spec, int player, PolicyClass cls) {
    const std::size_t O = spec.observations.at(player), A = spec.actions.at(player);
    if (cls == PolicyClass::Reactive) return static_cast<std::size_t>(spec.horizon) * O;
    std::size_t total = 0;
    for (int h = 0; h < spec.horizon; ++h) total += histories_at(O, A, h);
    return total;
}

std::size_t history_key(const PomgSpec& spec, PolicyClass cls, const PlayerHistory& hist) {
    const std::size_t O = spec.observations[hist.player], A = spec.actions[hist.player];
    if (cls == PolicyClass::Reactive) return static_cast<std::size_t>(hist.step) * O + hist.observations[hist.step];
    std::size_t offset = 0;
    for (int t = 0; t < hist.step; ++t) offset += histories_at(O, A, t);
    std::size_t index = static_cast<std::size_t>(hist.observations[0]);
    for (int t = 1; t <= hist.step; ++t) {
        index = (index * A + static_cast<std::size_t>(hist.actions[t - 1])) * O +
                static_cast<std::size_t>(hist.observations[t]);
    }
    return offset + index;
}

DecodedHistory decode_history_key(const PomgSpec& spec, int player, PolicyClass cls, std::size_t key) {
    const std::size_t O = spec.observations.at(player), A = spec.actions.at(player);
    DecodedHistory out;
    if (cls == PolicyClass::Reactive) {
        out.step = static_cast<int>(key / O);
        out.observations.assign(out.step + 1, -1);
        out.observations[out.step] = static_cast<int>(key % O);
        return out;
    }
    int h = 0;
    while (h < spec.horizon && key >= histories_at(O, A, h)) key -= histories_at(O, A, h++);
    out.step = h;
    out.observations.resize(h + 1);
    out.actions.resize(h);
    for (int t = h; t >= 0; --t) {
        out.observations[t] = static_cast<int>(key % O);
        key /= O;
        if (t > 0) {
            out.actions[t - 1] = static_cast<int>(key % A);
            key /= A;
        }
    }
    return out;
}

std::string describe_history_key(const PomgSpec& spec, int player, PolicyClass cls, std::size_t key) {
    const auto d = decode_history_key(spec, player, cls, key);
    std::ostringstream out;
    out << "player " << player << " h=" << d.step;
    if (cls == PolicyClass::Reactive) {
        out << " o=" << d.observations.back();
        return out.str();
    }
    out << " o=(";
    for (int t = 0; t <= d.step; ++t) out << (t ? "," : "") << d.observations[t];
    out << ") a=(";
    for (int t = 0; t < d.step; ++t) out << (t ? "," : "") << d.actions[t];
    out << ")";
    return out.str();
}

int DetPolicy::act(const PomgSpec& spec, const PlayerHistory& hist) const {
    const std::size_t key = history_key(spec, cls, hist);
    if (key >= table.size() || table[key] == kUnsetAction)
        throw Fault("policy has no action for history " + describe_history_key(spec, player, cls, key));
    return table[key];
}

void JointDetPolicy::check(const PomgSpec& spec) const {
    if (static_cast<int>(players.size()) != spec.num_players)
        throw Fault("joint policy has " + std::to_string(players.size()) + " players, spec has " +
                    std::to_string(spec.num_players));
    for (int i = 0; i < spec.num_players; ++i) {
        const auto& p = players[i];
        if (p.player != i) throw Fault("joint policy entry " + std::to_string(i) + " belongs to another player");
        if (p.table.size() != history_key_count(spec, i, p.cls))
            throw Fault("policy of player " + std::to_string(i) + " has a table of the wrong size");
        for (int a : p.table)
            if (a != kUnsetAction && (a < 0 || a >= spec.actions[i]))
                throw Fault("policy of player " + std::to_string(i) + " has an out-of-range action");
    }
}

ActionRule JointDetPolicy::rule(const PomgSpec& spec) const {
    return [this, &spec](const PlayerHistory& hist, Rng&) { return players[hist.player].act(spec, hist); };
}

std::string det_policy_count_string(const PomgSpec& spec, int player, PolicyClass cls) {
    const std::size_t keys = history_key_count(spec, player, cls);
    const int A = spec.actions.at(player);
    if (A == 1) return "1";
    const double log10_count = static_cast<double>(keys) * std::log10(static_cast<double>(A));
    if (log10_count > 4000) return std::to_string(A) + "^" + std::to_string(keys);
    // Schoolbook decimal multiplication; exact.
    std::vector<int> digits{1};
    for (std::size_t k = 0; k < keys; ++k) {
        int carry = 0;
        for (auto& d : digits) {
            const int v = d * A + carry;
            d = v % 10;
            carry = v / 10;
        }
        while (carry) {
            digits.push_back(carry % 10);
            carry /= 10;
        }
    }
    std::string s;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) s.push_back(static_cast<char>('0' + *it));
    return s;
}

std::size_t det_policy_count(const PomgSpec& spec, int player, PolicyClass cls, std::size_t budget) {
    const std::size_t keys = history_key_count(spec, player, cls);
    const std::size_t A = spec.actions.at(player);
    std::size_t count = 1;
    for (std::size_t k = 0; k < keys && A > 1; ++k) {
        if (count > budget / A) {
            throw Fault("policy enumeration for player " + std::to_string(player) + " (" + to_string(cls) +
                        ") needs " + det_policy_count_string(spec, player, cls) + " policies (" +
                        std::to_string(A) + "^" + std::to_string(keys) + "), budget is " + std::to_string(budget));
        }
        count *= A;
    }
    if (count > budget)
        throw Fault("policy enumeration for player " + std::to_string(player) + " needs " + std::to_string(count) +
                    " policies, budget is " + std::to_string(budget));
    return count;
}

DetPolicy det_policy_at(const PomgSpec& spec, int player, PolicyClass cls, std::size_t index) {
    const std::size_t keys = history_key_count(spec, player, cls);
    const std::size_t A = spec.actions.at(player);
    DetPolicy p{player, cls, std::vector<int>(keys, 0)};
    for (std::size_t k = keys; k-- > 0 && index > 0;) {
        p.table[k] = static_cast<int>(index % A);
        index /= A;
    }
    if (index != 0) throw Fault("det_policy_at: index out of range");
    return p;
}

std::vector<DetPolicy> enumerate_det_policies(const PomgSpec& spec, int player, PolicyClass cls, std::size_t budget) {
    const std::size_t count = det_policy_count(spec, player, cls, budget);
    const std::size_t keys = history_key_count(spec, player, cls);
    const int A = spec.actions.at(player);
    std::vector<DetPolicy> out;
    out.reserve(count);
    DetPolicy current{player, cls, std::vector<int>(keys, 0)};
    for (std::size_t p = 0; p < count; ++p) {
        out.push_back(current);
        // Increment the base-A counter, last key least significant.
        for (std::size_t k = keys; k-- > 0;) {
            if (++current.table[k] < A) break;
            current.table[k] = 0;
        }
    }
    return out;
}

PureStrategySets PureStrategySets::enumerate(const PomgSpec& spec, PolicyClass cls, std::size_t budget) {
    PureStrategySets sets;
    sets.cls = cls;
    for (int i = 0; i < spec.num_players; ++i) sets.per_player.push_back(enumerate_det_policies(spec, i, cls, budget));
    return sets;
}

std::vector<int> PureStrategySets::sizes() const {
    std::vector<int> s;
    for (const auto& p : per_player) s.push_back(static_cast<int>(p.size()));
    return s;
}

std::size_t PureStrategySets::profile_count() const { return radix_product(sizes()); }
std::vector<int> PureStrategySets::profile(std::size_t flat_index) const { return unflatten(sizes(), flat_index); }
std::size_t PureStrategySets::flat(std::span<const int> prof) const { return flatten(sizes(), prof); }

JointDetPolicy PureStrategySets::joint(std::span<const int> prof) const {
    JointDetPolicy j;
    for (std::size_t i = 0; i < per_player.size(); ++i) j.players.push_back(per_player[i].at(prof[i]));
    return j;
}

void MixedJointPolicy::check() const {
    if (support.size() != weights.size()) throw Fault("mixture: support and weights differ in length");
    if (support.empty()) throw Fault("mixture: empty support");
    double total = 0;
    for (double w : weights) {
        if (!(w >= 0)) throw Fault("mixture: negative or non-finite weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Fault("mixture: weights sum to " + std::to_string(total));
    if (product_form) {
        const int n = num_players();
        std::vector<Mixture> marg;
        for (int i = 0; i < n; ++i) marg.push_back(marginalize(*this, i));
        std::map<Profile, double> joint;
        for (std::size_t k = 0; k < support.size(); ++k) joint[support[k]] += weights[k];
        // Every profile of the product of marginal supports must carry the product weight.
        std::vector<int> radices;
        for (const auto& m : marg) radices.push_back(static_cast<int>(m.strategies.size()));
        const std::size_t total_profiles = radix_product(radices);
        for (std::size_t f = 0; f < total_profiles; ++f) {
            const auto digits = unflatten(radices, f);
            Profile p(n);
            double expected = 1;
            for (int i = 0; i < n; ++i) {
                p[i] = marg[i].strategies[digits[i]];
                expected *= marg[i].weights[digits[i]];
            }
            const auto it = joint.find(p);
            const double got = it == joint.end() ? 0.0 : it->second;
            if (std::abs(got - expected) > 1e-9) throw Fault("mixture: flagged product-form but does not factorize");
        }
    }
}

void MixedJointPolicy::canonicalize() {
    std::map<Profile, double> merged;
    for (std::size_t k = 0; k < support.size(); ++k) merged[support[k]] += weights[k];
    support.clear();
    weights.clear();
    for (auto& [p, w] : merged) {
        support.push_back(p);
        weights.push_back(w);
    }
}

MixedJointPolicy point_mass(const Profile& profile) { return MixedJointPolicy{{profile}, {1.0}, true}; }

MixedJointPolicy product_policy(const std::vector<Mixture>& marginals) {
    if (marginals.empty()) throw Fault("product_policy: no marginals");
    std::vector<int> radices;
    for (std::size_t i = 0; i < marginals.size(); ++i) {
        const auto& m = marginals[i];
        if (m.strategies.size() != m.weights.size() || m.strategies.empty())
            throw Fault("product_policy: marginal " + std::to_string(i) + " is malformed");
        double total = 0;
        for (double w : m.weights) {
            if (w < 0) throw Fault("product_policy: marginal " + std::to_string(i) + " has a negative weight");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw Fault("product_policy: marginal " + std::to_string(i) + " weights sum to " + std::to_string(total));
        radices.push_back(static_cast<int>(m.strategies.size()));
    }
    MixedJointPolicy pi;
    pi.product_form = true;
    const std::size_t count = radix_product(radices);
    for (std::size_t f = 0; f < count; ++f) {
        const auto digits = unflatten(radices, f);
        Profile p(marginals.size());
        double w = 1;
        for (std::size_t i = 0; i < marginals.size(); ++i) {
            p[i] = marginals[i].strategies[digits[i]];
            w *= marginals[i].weights[digits[i]];
        }
        pi.support.push_back(std::move(p));
        pi.weights.push_back(w);
    }
    return pi;
}

MixedJointPolicy apply_modification(const StrategyModification& phi, const MixedJointPolicy& pi) {
    MixedJointPolicy out;
    out.product_form = pi.product_form;
    for (std::size_t k = 0; k < pi.support.size(); ++k) {
        Profile p = pi.support[k];
        const int s = p.at(phi.player);
        if (s < 0 || static_cast<std::size_t>(s) >= phi.swap.size())
            throw Fault("apply_modification: pure strategy " + std::to_string(s) + " of player " +
                        std::to_string(phi.player) + " is not covered by the modification");
        p[phi.player] = phi.swap[s];
        out.support.push_back(std::move(p));
        out.weights.push_back(pi.weights[k]);
    }
    out.canonicalize();
    return out;
}

Mixture marginalize(const MixedJointPolicy& pi, int player) {
    std::map<int, double> merged;
    for (std::size_t k = 0; k < pi.support.size(); ++k) merged[pi.support[k].at(player)] += pi.weights[k];
    Mixture m;
    for (auto [s, w] : merged) {
        m.strategies.push_back(s);
        m.weights.push_back(w);
    }
    return m;
}

ExcludedMixture exclude(const MixedJointPolicy& pi, int player) {
    std::map<Profile, double> merged;
    for (std::size_t k = 0; k < pi.support.size(); ++k) {
        Profile rest = pi.support[k];
        rest.erase(rest.begin() + player);
        merged[rest] += pi.weights[k];
    }
    ExcludedMixture out;
    for (auto& [p, w] : merged) {
        out.profiles.push_back(p);
        out.weights.push_back(w);
    }
    return out;
}

nlohmann::json policy_to_json(const DetPolicy& policy) {
    return nlohmann::json{{"player", policy.player}, {"class", to_string(policy.cls)}, {"table", policy.table}};
}

DetPolicy policy_from_json(const nlohmann::json& doc, const PomgSpec& spec) {
    DetPolicy p;
    try {
        p.player = doc.at("player").get<int>();
        p.cls = policy_class_from_string(doc.at("class").get<std::string>());
        p.table = doc.at("table").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw Fault(std::string("policy: ") + e.what());
    }
    if (p.player < 0 || p.player >= spec.num_players) throw Fault("policy: player out of range");
    if (p.table.size() != history_key_count(spec, p.player, p.cls)) throw Fault("policy: table has the wrong size");
    for (int a : p.table)
        if (a != kUnsetAction && (a < 0 || a >= spec.actions[p.player])) throw Fault("policy: action out of range");
    return p;
}

}  // namespace pomg
