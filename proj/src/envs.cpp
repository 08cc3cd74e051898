#include "pomg/envs.hpp"

#include <cmath>

#include "pomg/error.hpp"
#include "pomg/revealing.hpp"

namespace pomg {

namespace {

// --- single-step hard instance -------------------------------------------

int level_of(int s, int L) {
    if (s < 2) return 1;
    if (s >= 4 * L - 2) return L + 1;
    return 2 + (s - 2) / 4;
}

int block_start(int level) { return 2 + 4 * (level - 2); }

}  // namespace

bool HardSingleStepInstance::is_upper(int s) const {
    const int level = level_of(s, L);
    if (level == 1) return s == 0;
    if (level == L + 1) return s == 4 * L - 2;
    return (s - block_start(level)) < 2;
}

bool HardSingleStepInstance::is_red(int s) const {
    const int level = level_of(s, L);
    if (level == 1 || level == L + 1) return false;
    const int off = s - block_start(level);
    const auto [up, low] = red[level - 2];
    return off < 2 ? off == up : off - 2 == low;
}

HardSingleStepInstance hard_instance_singlestep(int L, std::uint64_t seed) {
    if (L < 2) throw Fault("hard_instance_singlestep: L must be >= 2");
    const int S = 4 * L, H = L + 1;
    HardSingleStepInstance inst;
    inst.L = L;
    inst.seed = seed;
    Rng rng(seed);
    for (int level = 2; level <= L; ++level) {
        const int up = uniform01(rng) < 0.5 ? 0 : 1;
        const int low = uniform01(rng) < 0.5 ? 0 : 1;
        inst.red.emplace_back(up, low);
    }

    PomgSpec spec{H, 2, S, {2, 2}, {S, S + 1}};
    auto m = PomgModel::zeros(spec);
    m.mu1[0] = m.mu1[1] = 0.5;
    const int r_plus = 4 * L - 2, r_minus = 4 * L - 1;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            const int o2 = inst.is_red(s) || level_of(s, L) == L + 1 ? s : S;
            m.emission(h, spec.encode_observation(std::vector<int>{s, o2}), s) = 1.0;
            for (int a1 = 0; a1 < 2; ++a1) {
                for (int b = 0; b < 2; ++b) {
                    const int a = spec.encode_action(std::vector<int>{a1, b});
                    int next = s;
                    if (level_of(s, L) == h + 1 && h + 1 < L) {
                        next = block_start(h + 2) + (inst.is_upper(s) ? 0 : 2) + a1;
                    } else if (level_of(s, L) == L && h == L - 1) {
                        const bool to_plus = inst.is_upper(s) ? b == 1 : b == 0;
                        next = to_plus ? r_plus : r_minus;
                    }
                    m.transition(h, s, a, next) = 1.0;
                }
            }
        }
    }
    m.reward(0, L, r_plus) = 1.0;
    m.reward(1, L, r_minus) = 1.0;
    inst.model = std::move(m);
    return inst;
}

namespace {

// Action of the informed min-player given her observations so far.
int scripted_min_action(const HardSingleStepInstance& inst, int step, std::span<const int> observations) {
    if (step != inst.L - 1) return 0;
    for (int o : observations) {
        if (o >= 0 && o < inst.model.spec.num_states && inst.is_red(o)) return inst.is_upper(o) ? 0 : 1;
    }
    return 0;
}

}  // namespace

DetPolicy HardSingleStepInstance::scripted_min_policy() const {
    const auto& spec = model.spec;
    DetPolicy p{1, PolicyClass::FullHistory, {}};
    const std::size_t keys = history_key_count(spec, 1, PolicyClass::FullHistory);
    if (keys > kDefaultPolicyBudget * 10)
        throw Fault("scripted_min_policy: " + std::to_string(keys) + " history keys; use scripted_min_rule");
    p.table.resize(keys);
    for (std::size_t k = 0; k < keys; ++k) {
        const auto d = decode_history_key(spec, 1, PolicyClass::FullHistory, k);
        p.table[k] = scripted_min_action(*this, d.step, d.observations);
    }
    return p;
}

ActionRule HardSingleStepInstance::scripted_min_rule() const {
    return [inst = *this](const PlayerHistory& hist, Rng&) {
        return scripted_min_action(inst, hist.step, hist.observations);
    };
}

DetPolicy HardSingleStepInstance::red_avoiding_max_policy() const {
    const int S = model.spec.num_states, H = model.spec.horizon;
    DetPolicy p{0, PolicyClass::Reactive, std::vector<int>(static_cast<std::size_t>(H) * S, 0)};
    for (int h = 0; h + 2 <= L; ++h) {
        for (int s = 0; s < S; ++s) {
            if (level_of(s, L) != h + 1) continue;
            const auto [up, low] = red[h];  // level h+2
            p.table[h * S + s] = 1 - (is_upper(s) ? up : low);
        }
    }
    return p;
}

nlohmann::json HardSingleStepInstance::metadata() const {
    nlohmann::json reds = nlohmann::json::array();
    for (auto [up, low] : red) reds.push_back({up, low});
    return {{"generator", "hard-singlestep"}, {"L", L}, {"seed", seed}, {"red", reds}};
}

// --- multi-step hard instance ---------------------------------------------

HardMultiStepInstance hard_instance_multistep(int H, std::uint64_t seed) {
    if (H < 3) throw Fault("hard_instance_multistep: H must be >= 3");
    HardMultiStepInstance inst;
    inst.seed = seed;
    Rng rng(seed);
    for (int h = 0; h + 1 < H; ++h) inst.x.push_back(uniform01(rng) < 0.5 ? 0 : 1);

    constexpr int p0 = 0, p1 = 1, q0 = 2, q1 = 3;
    constexpr int dummy = 0, o0 = 1, o1 = 2;
    PomgSpec spec{H, 2, 4, {2, 2}, {3, 3}};
    auto m = PomgModel::zeros(spec);
    m.mu1[p1] = 1.0;
    for (int h = 0; h < H; ++h) {
        const bool last = h + 1 == H;
        const int emitted[4] = {last ? o0 : dummy, last ? o1 : dummy, o0, o1};
        for (int s = 0; s < 4; ++s) {
            m.emission(h, emitted[s] * 3 + emitted[s], s) = 1.0;
            for (int a1 = 0; a1 < 2; ++a1) {
                for (int b = 0; b < 2; ++b) {
                    int next = s;
                    if (!last) {
                        if (s == q0 || s == q1) next = q1;
                        else if (s == p1 && a1 == inst.x[h] && b == 0) next = p1;
                        else if (b == 1) next = s == p1 ? q1 : q0;
                        else next = p0;
                    }
                    m.transition(h, s, a1 * 2 + b, next) = 1.0;
                }
            }
        }
        m.reward(0, h, o1) = 1.0;
        m.reward(1, h, dummy) = 1.0;
        m.reward(1, h, o0) = 1.0;
    }
    inst.model = std::move(m);
    return inst;
}

DetPolicy HardMultiStepInstance::fixed_opponent_policy() const {
    const auto& spec = model.spec;
    return {1, PolicyClass::Reactive, std::vector<int>(history_key_count(spec, 1, PolicyClass::Reactive), 0)};
}

nlohmann::json HardMultiStepInstance::metadata() const {
    return {{"generator", "hard-multistep"}, {"H", model.spec.horizon}, {"seed", seed}, {"x", x}};
}

// --- random generators ------------------------------------------------------

std::vector<double> random_simplex(int n, double sharpness, Rng& rng) {
    std::vector<double> w(n);
    double total = 0;
    for (auto& v : w) {
        v = std::pow(-std::log1p(-uniform01(rng)), sharpness);
        total += v;
    }
    if (!(total > 0)) {
        std::fill(w.begin(), w.end(), 1.0 / n);
        return w;
    }
    for (auto& v : w) v /= total;
    return w;
}

namespace {

void check_shared(const PomgSpec& spec) {
    if (spec.num_players != 2 || spec.observations[0] != spec.observations[1])
        throw Fault("shared zero-sum generation needs two players with equal observation counts");
}

// Everything except emissions.
PomgModel random_dynamics(const PomgSpec& spec, const RandomPomgOptions& opt, Rng& rng) {
    spec.check();
    if (opt.shared_zero_sum) check_shared(spec);
    auto m = PomgModel::zeros(spec);
    const int H = spec.horizon, S = spec.num_states, A = spec.joint_actions();
    m.mu1 = random_simplex(S, opt.sharpness, rng);
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const auto col = random_simplex(S, opt.sharpness, rng);
                for (int s2 = 0; s2 < S; ++s2) m.transition(h, s, a, s2) = col[s2];
            }
    for (int i = 0; i < spec.num_players; ++i)
        for (int h = 0; h < H; ++h)
            for (int o = 0; o < spec.observations[i]; ++o)
                m.reward(i, h, o) = opt.shared_zero_sum && i == 1 ? 1.0 - m.reward(0, h, o) : opt.binary_rewards ? (uniform01(rng) < 0.5 ? 0.0 : 1.0) : uniform01(rng);
    return m;
}

void draw_emissions(PomgModel& m, const RandomPomgOptions& opt, Rng& rng) {
    const auto& spec = m.spec;
    const int O = spec.joint_observations(), Oi = spec.observations[0];
    for (int h = 0; h < spec.horizon; ++h) {
        for (int s = 0; s < spec.num_states; ++s) {
            if (opt.shared_zero_sum) {
                const auto col = random_simplex(Oi, opt.sharpness, rng);
                for (int o = 0; o < O; ++o) m.emission(h, o, s) = 0.0;
                for (int o = 0; o < Oi; ++o) m.emission(h, o * Oi + o, s) = col[o];
            } else {
                const auto col = random_simplex(O, opt.sharpness, rng);
                for (int o = 0; o < O; ++o) m.emission(h, o, s) = col[o];
            }
        }
    }
}

template <class Accept>
PomgModel rejection_sample(const PomgSpec& spec, std::uint64_t seed, const RandomPomgOptions& opt, Accept accept,
                           const std::string& what) {
    Rng rng(seed);
    auto m = random_dynamics(spec, opt, rng);
    for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
        draw_emissions(m, opt, rng);
        if (accept(m)) return m;
    }
    throw Fault(what + ": no draw reached the alpha target in " + std::to_string(kRejectionBudget) + " attempts");
}

}  // namespace

PomgModel random_revealing_pomg(const PomgSpec& spec, double alpha_target, std::uint64_t seed,
                                const RandomPomgOptions& options) {
    spec.check();
    if (spec.joint_observations() < spec.num_states)
        throw Fault("random_revealing_pomg: needs O >= S (O=" + std::to_string(spec.joint_observations()) +
                    ", S=" + std::to_string(spec.num_states) + ")");
    const int effective_o = options.shared_zero_sum ? spec.observations[0] : spec.joint_observations();
    if (effective_o < spec.num_states && alpha_target > 0)
        throw Fault("random_revealing_pomg: shared observations give rank < S");
    return rejection_sample(
        spec, seed, options, [&](const PomgModel& m) { return check_single_step(m, alpha_target); },
        "random_revealing_pomg");
}

PomgModel random_multistep_revealing_pomg(const PomgSpec& spec, int m, double alpha_target, std::uint64_t seed,
                                          const RandomPomgOptions& options) {
    spec.check();
    return rejection_sample(
        spec, seed, options, [&](const PomgModel& model) { return check_multi_step(model, m, alpha_target); },
        "random_multistep_revealing_pomg");
}

// --- candidate families -----------------------------------------------------

CandidateFamily candidate_family_around(const PomgModel& truth, int count, double scale, std::uint64_t seed,
                                        const RevealingPredicate& revealing, double noise_sharpness) {
    if (count < 1) throw Fault("candidate_family_around: count must be >= 1");
    if (!(scale >= 0 && scale <= 1)) throw Fault("candidate_family_around: scale must lie in [0,1]");
    const auto& spec = truth.spec;
    const int H = spec.horizon, S = spec.num_states, A = spec.joint_actions(), O = spec.joint_observations();
    Rng rng(seed);
    CandidateFamily fam;
    const auto truth_at = static_cast<std::size_t>(uniform01(rng) * count);
    fam.truth_index = truth_at;
    int draws = 0;
    for (int c = 0; c < count; ++c) {
        if (static_cast<std::size_t>(c) == truth_at) {
            fam.models.push_back(truth);
            continue;
        }
        while (true) {
            if (draws++ >= kRejectionBudget)
                throw Fault("candidate_family_around: regeneration budget of " + std::to_string(kRejectionBudget) +
                            " draws exhausted");
            PomgModel m = truth;
            for (int h = 0; h < H; ++h) {
                for (int s = 0; s < S; ++s) {
                    for (int a = 0; a < A; ++a) {
                        const auto noise = random_simplex(S, noise_sharpness, rng);
                        for (int s2 = 0; s2 < S; ++s2)
                            m.transition(h, s, a, s2) = (1 - scale) * m.transition(h, s, a, s2) + scale * noise[s2];
                    }
                    const auto noise = random_simplex(O, noise_sharpness, rng);
                    for (int o = 0; o < O; ++o) m.emission(h, o, s) = (1 - scale) * m.emission(h, o, s) + scale * noise[o];
                }
            }
            if (!revealing || revealing(m)) {
                fam.models.push_back(std::move(m));
                break;
            }
        }
    }
    return fam;
}

}  // namespace pomg
