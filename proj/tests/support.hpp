#pragma once

// Test helpers: a direct random model generator and brute-force oracles that
// share no code with the library's recursions.

#include <cmath>
#include <algorithm>
#include <functional>
#include <vector>

#include "pomg/core.hpp"
#include "pomg/equilibria.hpp"

namespace pomg::test {

inline std::vector<double> random_column(int n, Rng& rng) {
    std::vector<double> w(n);
    double total = 0;
    for (auto& x : w) total += (x = uniform01(rng) + 1e-3);
    for (auto& x : w) x /= total;
    return w;
}

inline PomgModel random_model(const PomgSpec& spec, Rng& rng) {
    auto m = PomgModel::zeros(spec);
    const int S = spec.num_states, A = spec.joint_actions(), O = spec.joint_observations();
    m.mu1 = random_column(S, rng);
    for (int h = 0; h < spec.horizon; ++h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const auto col = random_column(S, rng);
                for (int s2 = 0; s2 < S; ++s2) m.transition(h, s, a, s2) = col[s2];
            }
            const auto col = random_column(O, rng);
            for (int o = 0; o < O; ++o) m.emission(h, o, s) = col[o];
        }
        for (int i = 0; i < spec.num_players; ++i)
            for (int o = 0; o < spec.observations[i]; ++o) m.reward(i, h, o) = uniform01(rng);
    }
    return m;
}

/// Sum over every latent path s_0..s_{H-1}.
inline double brute_force_prob(const PomgModel& m, const std::vector<int>& actions, const std::vector<int>& obs) {
    const int S = m.spec.num_states, H = m.spec.horizon;
    std::vector<int> path(H, 0);
    double total = 0;
    while (true) {
        double p = m.mu1[path[0]];
        for (int h = 0; h < H; ++h) {
            p *= m.emission(h, obs[h], path[h]);
            if (h + 1 < H) p *= m.transition(h, path[h], actions[h], path[h + 1]);
        }
        total += p;
        int d = H - 1;
        while (d >= 0 && ++path[d] == S) path[d--] = 0;
        if (d < 0) break;
    }
    return total;
}

/// Calls f on every digit vector with the given radices.
inline void for_each_digits(const std::vector<int>& radices, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> d(radices.size(), 0);
    while (true) {
        f(d);
        int i = static_cast<int>(d.size()) - 1;
        while (i >= 0 && ++d[i] == radices[i]) d[i--] = 0;
        if (i < 0) return;
    }
}

inline NormalFormGame random_game(int m, int k, Rng& rng) {
    std::vector<std::vector<double>> r(m, std::vector<double>(k)), c = r;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
            r[i][j] = 2 * uniform01(rng) - 1;
            c[i][j] = 2 * uniform01(rng) - 1;
        }
    return NormalFormGame::bimatrix(r, c);
}

inline JointDistribution random_distribution(const std::vector<int>& sizes, Rng& rng) {
    JointDistribution d;
    d.sizes = sizes;
    std::size_t n = 1;
    for (int s : sizes) n *= s;
    d.prob = random_column(static_cast<int>(n), rng);
    return d;
}

// Written out directly for two players.
inline double audit_cce(const NormalFormGame& g, const JointDistribution& d, int player) {
    const int m = g.sizes[0], k = g.sizes[1];
    auto U = [&](int i, int j) { return g.payoffs[player][i * k + j]; };
    double base = 0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) base += d.prob[i * k + j] * U(i, j);
    double best = -1e300;
    const int n = player == 0 ? m : k;
    for (int dev = 0; dev < n; ++dev) {
        double v = 0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < k; ++j) v += d.prob[i * k + j] * (player == 0 ? U(dev, j) : U(i, dev));
        best = std::max(best, v);
    }
    return best - base;
}

inline double audit_ce(const NormalFormGame& g, const JointDistribution& d, int player) {
    const int m = g.sizes[0], k = g.sizes[1];
    auto U = [&](int i, int j) { return g.payoffs[player][i * k + j]; };
    const int n = player == 0 ? m : k;
    double total = 0;
    for (int rec = 0; rec < n; ++rec) {
        double best = 0;
        for (int dev = 0; dev < n; ++dev) {
            double gain = 0;
            if (player == 0)
                for (int j = 0; j < k; ++j) gain += d.prob[rec * k + j] * (U(dev, j) - U(rec, j));
            else
                for (int i = 0; i < m; ++i) gain += d.prob[i * k + rec] * (U(i, dev) - U(i, rec));
            best = std::max(best, gain);
        }
        total += best;
    }
    return total;
}

}  // namespace pomg::test
