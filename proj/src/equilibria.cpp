#include "pomg/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "pomg/error.hpp"
#include "pomg/lp.hpp"

namespace pomg {

NormalFormGame NormalFormGame::zeros(std::vector<int> sizes) {
    NormalFormGame g;
    g.sizes = std::move(sizes);
    const std::size_t count = g.profile_count();
    g.payoffs.assign(g.sizes.size(), std::vector<double>(count, 0.0));
    return g;
}

NormalFormGame NormalFormGame::bimatrix(const std::vector<std::vector<double>>& row,
                                        const std::vector<std::vector<double>>& col) {
    if (row.empty() || row.size() != col.size()) throw Fault("bimatrix: payoff matrices differ in shape");
    const int m = static_cast<int>(row.size()), k = static_cast<int>(row.front().size());
    auto g = zeros({m, k});
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(row[i].size()) != k || static_cast<int>(col[i].size()) != k)
            throw Fault("bimatrix: payoff matrices differ in shape");
        for (int j = 0; j < k; ++j) {
            g.payoffs[0][i * k + j] = row[i][j];
            g.payoffs[1][i * k + j] = col[i][j];
        }
    }
    return g;
}

std::size_t NormalFormGame::profile_count() const { return radix_product(sizes); }

std::size_t NormalFormGame::stride(int player) const {
    std::size_t s = 1;
    for (std::size_t j = player + 1; j < sizes.size(); ++j) s *= sizes[j];
    return s;
}

std::vector<int> NormalFormGame::profile(std::size_t f) const { return unflatten(sizes, f); }
std::size_t NormalFormGame::flat(std::span<const int> p) const { return flatten(sizes, p); }

void NormalFormGame::check() const {
    if (sizes.empty()) throw Fault("game: no players");
    if (payoffs.size() != sizes.size()) throw Fault("game: one payoff tensor per player required");
    const std::size_t count = profile_count();
    for (const auto& t : payoffs) {
        if (t.size() != count) throw Fault("game: payoff tensor has the wrong size");
        for (double v : t)
            if (!std::isfinite(v)) throw Fault("game: non-finite payoff");
    }
}

void JointDistribution::check(double tol) const {
    double total = 0;
    for (double p : prob) {
        if (p < -tol || !std::isfinite(p)) throw Fault("distribution: negative or non-finite entry");
        total += p;
    }
    if (std::abs(total - 1.0) > tol) throw Fault("distribution: sums to " + std::to_string(total));
}

MixedJointPolicy JointDistribution::to_mixture(bool product_form) const {
    MixedJointPolicy pi;
    pi.product_form = product_form;
    double total = 0;
    for (double p : prob)
        if (p > 0) total += p;
    for (std::size_t f = 0; f < prob.size(); ++f) {
        if (prob[f] <= 0) continue;
        pi.support.push_back(unflatten(sizes, f));
        pi.weights.push_back(prob[f] / total);
    }
    return pi;
}

JointDistribution JointDistribution::from_mixture(const MixedJointPolicy& pi, std::vector<int> sizes) {
    JointDistribution d{std::move(sizes), {}};
    d.prob.assign(radix_product(d.sizes), 0.0);
    for (std::size_t k = 0; k < pi.support.size(); ++k) d.prob[flatten(d.sizes, pi.support[k])] += pi.weights[k];
    return d;
}

JointDistribution JointDistribution::product(const std::vector<std::vector<double>>& marginals) {
    JointDistribution d;
    for (const auto& m : marginals) d.sizes.push_back(static_cast<int>(m.size()));
    const std::size_t count = radix_product(d.sizes);
    d.prob.assign(count, 0.0);
    for (std::size_t f = 0; f < count; ++f) {
        const auto p = unflatten(d.sizes, f);
        double w = 1;
        for (std::size_t i = 0; i < marginals.size(); ++i) w *= marginals[i][p[i]];
        d.prob[f] = w;
    }
    return d;
}

double expected_payoff(const NormalFormGame& game, const JointDistribution& dist, int player) {
    double v = 0;
    const auto& u = game.payoffs.at(player);
    for (std::size_t f = 0; f < dist.prob.size(); ++f) v += dist.prob[f] * u[f];
    return v;
}

namespace {

void check_shapes(const NormalFormGame& game, const JointDistribution& dist) {
    if (dist.sizes != game.sizes || dist.prob.size() != game.profile_count())
        throw Fault("distribution shape does not match the game");
}

}  // namespace

double deviation_gain(const NormalFormGame& game, const JointDistribution& dist, int player) {
    check_shapes(game, dist);
    const auto& u = game.payoffs.at(player);
    const std::size_t stride = game.stride(player);
    const int ni = game.sizes[player];
    std::vector<double> deviate(ni, 0.0);
    double current = 0;
    for (std::size_t f = 0; f < dist.prob.size(); ++f) {
        const double p = dist.prob[f];
        if (p == 0) continue;
        current += p * u[f];
        const int own = static_cast<int>((f / stride) % ni);
        const std::size_t base = f - static_cast<std::size_t>(own) * stride;
        for (int s = 0; s < ni; ++s) deviate[s] += p * u[base + s * stride];
    }
    return *std::max_element(deviate.begin(), deviate.end()) - current;
}

double exploitability(const NormalFormGame& game, const JointDistribution& dist, int player) {
    return std::max(0.0, deviation_gain(game, dist, player));
}

double best_swap_gain(const NormalFormGame& game, const JointDistribution& dist, int player) {
    check_shapes(game, dist);
    const auto& u = game.payoffs.at(player);
    const std::size_t stride = game.stride(player);
    const int ni = game.sizes[player];
    // gain[rec][s'] = E[(U(s', s_-i) - U(s)) 1{s_i = rec}]
    std::vector<double> gain(static_cast<std::size_t>(ni) * ni, 0.0);
    for (std::size_t f = 0; f < dist.prob.size(); ++f) {
        const double p = dist.prob[f];
        if (p == 0) continue;
        const int own = static_cast<int>((f / stride) % ni);
        const std::size_t base = f - static_cast<std::size_t>(own) * stride;
        for (int s = 0; s < ni; ++s) gain[own * ni + s] += p * (u[base + s * stride] - u[f]);
    }
    double total = 0;
    for (int rec = 0; rec < ni; ++rec) {
        double best = 0;
        for (int s = 0; s < ni; ++s) best = std::max(best, gain[rec * ni + s]);
        total += best;
    }
    return total;
}

namespace {

// max v s.t. x^T U >= v 1, sum x = 1, x >= 0, with U shifted positive so
// that v >= 0 is not binding.
std::pair<double, std::vector<double>> maximin(const std::vector<std::vector<double>>& u) {
    const std::size_t m = u.size(), k = u.front().size();
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& row : u)
        for (double v : row) lo = std::min(lo, v);
    const double shift = 1.0 - lo;
    lp::Problem prob;
    prob.num_vars = m + 1;
    prob.objective.assign(m + 1, 0.0);
    prob.objective[m] = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> c(m + 1, 0.0);
        for (std::size_t i = 0; i < m; ++i) c[i] = -(u[i][j] + shift);
        c[m] = 1.0;
        prob.add(std::move(c), lp::Sense::LessEqual, 0.0);
    }
    std::vector<double> sum(m + 1, 1.0);
    sum[m] = 0.0;
    prob.add(std::move(sum), lp::Sense::Equal, 1.0);
    const auto sol = lp::solve(prob);
    if (sol.status != lp::Status::Optimal) throw Fault("solve_zero_sum: LP " + lp::to_string(sol.status));
    std::vector<double> x(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(m));
    double total = 0;
    for (auto& v : x) {
        v = std::max(0.0, v);
        total += v;
    }
    for (auto& v : x) v /= total;
    return {sol.x[m] - shift, x};
}

}  // namespace

ZeroSumSolution solve_zero_sum(const std::vector<std::vector<double>>& payoff) {
    if (payoff.empty() || payoff.front().empty()) throw Fault("solve_zero_sum: empty payoff matrix");
    const std::size_t m = payoff.size(), k = payoff.front().size();
    for (const auto& row : payoff) {
        if (row.size() != k) throw Fault("solve_zero_sum: ragged payoff matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw Fault("solve_zero_sum: non-finite payoff");
    }
    std::vector<std::vector<double>> neg_t(k, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < k; ++j) neg_t[j][i] = -payoff[i][j];
    auto [v_row, x] = maximin(payoff);
    auto [v_col, y] = maximin(neg_t);
    (void)v_col;
    return {v_row, std::move(x), std::move(y)};
}

namespace {

// All size-k subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> subsets_of_size(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

// Mixed strategy over `own` (columns of u) such that every strategy in
// `indifferent` (rows of u) attains the maximum row payoff. u is m x k and
// positive. Returns empty when infeasible.
std::vector<double> indifference_mix(const std::vector<std::vector<double>>& u, const std::vector<int>& indifferent,
                                     const std::vector<int>& own) {
    const std::size_t m = u.size(), nv = own.size() + 1;
    std::vector<char> in_set(m, 0);
    for (int i : indifferent) in_set[i] = 1;
    lp::Problem prob;
    prob.num_vars = nv;
    prob.objective.assign(nv, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> c(nv, 0.0);
        for (std::size_t j = 0; j < own.size(); ++j) c[j] = u[i][own[j]];
        c[own.size()] = -1.0;
        prob.add(std::move(c), in_set[i] ? lp::Sense::Equal : lp::Sense::LessEqual, 0.0);
    }
    std::vector<double> sum(nv, 1.0);
    sum[own.size()] = 0.0;
    prob.add(std::move(sum), lp::Sense::Equal, 1.0);
    const auto sol = lp::solve(prob);
    if (sol.status != lp::Status::Optimal) return {};
    const std::size_t k = u.front().size();
    std::vector<double> y(k, 0.0);
    double total = 0;
    for (std::size_t j = 0; j < own.size(); ++j) {
        y[own[j]] = std::max(0.0, sol.x[j]);
        total += y[own[j]];
    }
    if (!(total > 0)) return {};
    for (auto& v : y) v /= total;
    return y;
}

}  // namespace

JointDistribution solve_nash_2p(const NormalFormGame& game, int strategy_budget) {
    game.check();
    if (game.num_players() != 2)
        throw Fault("solve_nash_2p: Nash computation is limited to two-player games; use CCE or CE instead");
    const int m = game.sizes[0], k = game.sizes[1];
    if (m > strategy_budget || k > strategy_budget)
        throw Fault("solve_nash_2p: " + std::to_string(m) + "x" + std::to_string(k) +
                    " game exceeds the Nash strategy budget of " + std::to_string(strategy_budget) +
                    " per player; use CCE or CE instead");
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& t : game.payoffs)
        for (double v : t) lo = std::min(lo, v);
    const double shift = 1.0 - lo;
    // a[i][j]: row payoffs; bt[j][i]: column payoffs transposed.
    std::vector<std::vector<double>> a(m, std::vector<double>(k)), bt(k, std::vector<double>(m));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) {
            a[i][j] = game.payoffs[0][i * k + j] + shift;
            bt[j][i] = game.payoffs[1][i * k + j] + shift;
        }
    }

    std::vector<std::pair<int, int>> size_pairs;
    for (int s = 1; s <= std::min(m, k); ++s) size_pairs.emplace_back(s, s);
    std::vector<std::pair<int, int>> unequal;
    for (int p = 1; p <= m; ++p)
        for (int q = 1; q <= k; ++q)
            if (p != q) unequal.emplace_back(p, q);
    std::stable_sort(unequal.begin(), unequal.end(), [](auto l, auto r) {
        return std::make_pair(l.first + l.second, l.first) < std::make_pair(r.first + r.second, r.first);
    });
    size_pairs.insert(size_pairs.end(), unequal.begin(), unequal.end());

    for (auto [p, q] : size_pairs) {
        const auto rows = subsets_of_size(m, p);
        const auto cols = subsets_of_size(k, q);
        for (const auto& I : rows) {
            for (const auto& J : cols) {
                auto y = indifference_mix(a, I, J);
                if (y.empty()) continue;
                auto x = indifference_mix(bt, J, I);
                if (x.empty()) continue;
                auto dist = JointDistribution::product({x, y});
                if (exploitability(game, dist, 0) <= 1e-6 && exploitability(game, dist, 1) <= 1e-6) return dist;
            }
        }
    }
    throw Fault("solve_nash_2p: support enumeration found no equilibrium within tolerance");
}

namespace {

JointDistribution solve_correlated_lp(const NormalFormGame& game, bool swap_constraints) {
    const int n = game.num_players();
    const std::size_t P = game.profile_count();
    lp::Problem prob;
    prob.num_vars = P;
    prob.objective.assign(P, 0.0);
    for (int i = 0; i < n; ++i)
        for (std::size_t f = 0; f < P; ++f) prob.objective[f] += game.payoffs[i][f];
    prob.add(std::vector<double>(P, 1.0), lp::Sense::Equal, 1.0);

    for (int i = 0; i < n; ++i) {
        const auto& u = game.payoffs[i];
        const std::size_t stride = game.stride(i);
        const int ni = game.sizes[i];
        for (int rec = 0; rec < (swap_constraints ? ni : 1); ++rec) {
            for (int dev = 0; dev < ni; ++dev) {
                if (swap_constraints && dev == rec) continue;
                std::vector<double> c(P, 0.0);
                bool nonzero = false;
                for (std::size_t f = 0; f < P; ++f) {
                    const int own = static_cast<int>((f / stride) % ni);
                    if (swap_constraints && own != rec) continue;
                    const std::size_t alt = f - static_cast<std::size_t>(own) * stride + dev * stride;
                    c[f] = u[alt] - u[f];
                    nonzero = nonzero || c[f] != 0;
                }
                if (nonzero) prob.add(std::move(c), lp::Sense::LessEqual, 0.0);
            }
        }
    }
    const std::string name = swap_constraints ? "solve_ce" : "solve_cce";
    auto distribution = [&](const lp::Solution& sol) {
        JointDistribution d{game.sizes, sol.x};
        double total = 0;
        for (auto& p : d.prob) {
            if (p < 0) p = 0;
            total += p;
        }
        for (auto& p : d.prob) p /= total;
        return d;
    };
    // Checked against the exhaustive gain oracles, not the LP residual.
    auto holds = [&](const JointDistribution& d) {
        for (int i = 0; i < n; ++i)
            if ((swap_constraints ? best_swap_gain(game, d, i) : deviation_gain(game, d, i)) > 1e-7) return false;
        return true;
    };
    auto sol = lp::solve(prob);
    if (sol.status == lp::Status::Optimal && holds(distribution(sol))) return distribution(sol);
    if (!sol.exact) {
        sol = lp::solve(prob, {.arithmetic = lp::Arithmetic::Exact});
        if (sol.status == lp::Status::Optimal && holds(distribution(sol))) return distribution(sol);
    }
    if (sol.status != lp::Status::Optimal) throw Fault(name + ": LP " + lp::to_string(sol.status));
    throw Fault(name + ": LP solution violates an equilibrium constraint by more than 1e-7");
}

// Subgame on the kept strategies of each player.
NormalFormGame restrict_game(const NormalFormGame& game, const std::vector<std::vector<int>>& keep) {
    std::vector<int> sizes;
    for (const auto& k : keep) sizes.push_back(static_cast<int>(k.size()));
    auto sub = NormalFormGame::zeros(sizes);
    const int n = game.num_players();
    for (std::size_t f = 0; f < sub.profile_count(); ++f) {
        std::size_t full = 0;
        for (int i = 0; i < n; ++i) full += keep[i][(f / sub.stride(i)) % sizes[i]] * game.stride(i);
        for (int i = 0; i < n; ++i) sub.payoffs[i][f] = game.payoffs[i][full];
    }
    return sub;
}

// Merges strategies whose payoffs agree for every player and opponent
// profile up to `tol`, then solves the reduced LP and lifts the result.
JointDistribution solve_correlated(const NormalFormGame& game, bool swap_constraints) {
    game.check();
    const int n = game.num_players();
    double scale = 1.0;
    for (const auto& u : game.payoffs)
        for (double x : u) scale = std::max(scale, std::abs(x));
    const double tol = 1e-9 * scale;
    std::vector<std::vector<int>> keep(n);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < game.sizes[i]; ++a) keep[i].push_back(a);
    for (bool changed = true; changed;) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            const auto sub = restrict_game(game, keep);
            const std::size_t stride = sub.stride(i);
            const int ni = sub.sizes[i];
            std::vector<bool> drop(ni, false);
            for (int b = 1; b < ni; ++b)
                for (int a = 0; a < b && !drop[b]; ++a) {
                    if (drop[a]) continue;
                    bool same = true;
                    for (std::size_t f = 0; f < sub.profile_count() && same; ++f) {
                        if (static_cast<int>((f / stride) % ni) != a) continue;
                        const std::size_t g = f + static_cast<std::size_t>(b - a) * stride;
                        for (int j = 0; j < n && same; ++j) same = std::abs(sub.payoffs[j][f] - sub.payoffs[j][g]) <= tol;
                    }
                    drop[b] = same;
                }
            std::vector<int> kept;
            for (int b = 0; b < ni; ++b)
                if (!drop[b]) kept.push_back(keep[i][b]);
            changed = changed || kept.size() != keep[i].size();
            keep[i] = std::move(kept);
        }
    }
    const auto sub = restrict_game(game, keep);
    const auto reduced = solve_correlated_lp(sub, swap_constraints);
    JointDistribution d{game.sizes, std::vector<double>(game.profile_count(), 0.0)};
    for (std::size_t f = 0; f < sub.profile_count(); ++f) {
        std::size_t full = 0;
        for (int i = 0; i < n; ++i) full += keep[i][(f / sub.stride(i)) % sub.sizes[i]] * game.stride(i);
        d.prob[full] = reduced.prob[f];
    }
    return d;
}

}  // namespace

JointDistribution solve_cce(const NormalFormGame& game) { return solve_correlated(game, false); }
JointDistribution solve_ce(const NormalFormGame& game) { return solve_correlated(game, true); }

nlohmann::json tensor_to_json(std::span<const double> flat_values, std::span<const int> sizes) {
    if (sizes.size() == 1) return nlohmann::json(std::vector<double>(flat_values.begin(), flat_values.end()));
    const std::size_t block = flat_values.size() / static_cast<std::size_t>(sizes[0]);
    nlohmann::json out = nlohmann::json::array();
    for (int s = 0; s < sizes[0]; ++s) out.push_back(tensor_to_json(flat_values.subspan(s * block, block), sizes.subspan(1)));
    return out;
}

std::vector<double> tensor_from_json(const nlohmann::json& doc, std::span<const int> sizes) {
    if (!doc.is_array() || doc.size() != static_cast<std::size_t>(sizes[0]))
        throw Fault("tensor: expected an array of length " + std::to_string(sizes[0]));
    std::vector<double> out;
    for (const auto& item : doc) {
        if (sizes.size() == 1) {
            if (!item.is_number()) throw Fault("tensor: expected a number");
            out.push_back(item.get<double>());
        } else {
            auto sub = tensor_from_json(item, sizes.subspan(1));
            out.insert(out.end(), sub.begin(), sub.end());
        }
    }
    return out;
}

nlohmann::json game_to_json(const NormalFormGame& game) {
    nlohmann::json payoffs = nlohmann::json::array();
    for (const auto& t : game.payoffs) payoffs.push_back(tensor_to_json(t, game.sizes));
    return nlohmann::json{{"sizes", game.sizes}, {"payoffs", payoffs}};
}

NormalFormGame game_from_json(const nlohmann::json& doc) {
    NormalFormGame g;
    try {
        g.sizes = doc.at("sizes").get<std::vector<int>>();
        const auto& payoffs = doc.at("payoffs");
        if (!payoffs.is_array() || payoffs.size() != g.sizes.size())
            throw Fault("game: payoffs must hold one tensor per player");
        for (const auto& t : payoffs) g.payoffs.push_back(tensor_from_json(t, g.sizes));
    } catch (const nlohmann::json::exception& e) {
        throw Fault(std::string("game: ") + e.what());
    }
    g.check();
    return g;
}

}  // namespace pomg
