#include "pomg/revealing.hpp"

#include <algorithm>
#include <cmath>

#include "pomg/error.hpp"

namespace pomg {

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    DenseMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (rows[r].size() != m.cols) throw Fault("DenseMatrix: ragged rows");
        for (std::size_t c = 0; c < m.cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

std::vector<double> symmetric_eigenvalues(DenseMatrix a) {
    const std::size_t n = a.rows;
    if (a.cols != n) throw Fault("symmetric_eigenvalues: matrix is not square");
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0, diag = 0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += a(p, p) * a(p, p);
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off <= 1e-32 * std::max(diag, 1e-300)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t k = 0; k < n; ++k) eig[k] = a(k, k);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double sigma_s_min(const DenseMatrix& matrix) {
    const std::size_t R = matrix.rows, S = matrix.cols;
    if (S == 0) throw Fault("sigma_s_min: matrix has no columns");
    if (S > R) throw Fault("sigma_s_min: needs at least as many rows as columns");
    for (double v : matrix.data)
        if (!std::isfinite(v)) throw Fault("sigma_s_min: non-finite entry");
    DenseMatrix gram(S, S);
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t i = 0; i < S; ++i) {
            const double ri = matrix(r, i);
            if (ri == 0) continue;
            for (std::size_t j = i; j < S; ++j) gram(i, j) += ri * matrix(r, j);
        }
    }
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
    const double smallest = symmetric_eigenvalues(std::move(gram)).front();
    return std::sqrt(std::max(0.0, smallest));
}

DenseMatrix emission_matrix(const PomgModel& model, int h) {
    const int S = model.spec.num_states, O = model.spec.joint_observations();
    DenseMatrix m(O, S);
    for (int o = 0; o < O; ++o)
        for (int s = 0; s < S; ++s) m(o, s) = model.emission(h, o, s);
    return m;
}

MStepMatrix build_m_step_matrix(const PomgModel& model, int h, int m) {
    const auto& sp = model.spec;
    const int H = sp.horizon, S = sp.num_states, A = sp.joint_actions(), O = sp.joint_observations();
    if (m < 1) throw Fault("build_m_step_matrix: window must be >= 1");
    if (h < 0 || h + m > H)
        throw Fault("build_m_step_matrix: window m=" + std::to_string(m) + " starting at step " + std::to_string(h) +
                    " exceeds horizon H=" + std::to_string(H));
    std::size_t obs_rows = 1, act_seqs = 1;
    for (int t = 0; t < m; ++t) obs_rows *= static_cast<std::size_t>(O);
    for (int t = 0; t + 1 < m; ++t) act_seqs *= static_cast<std::size_t>(A);
    MStepMatrix out{h, m, DenseMatrix(act_seqs * obs_rows, S)};

    std::vector<int> act_seq(std::max(m - 1, 0));
    // Depth-first over observation sequences; alpha is the unnormalized
    // state distribution before emitting at step h+t.
    auto recurse = [&](auto&& self, int t, const std::vector<double>& alpha, std::size_t obs_prefix,
                       std::size_t row_base, int s0) -> void {
        std::vector<double> weighted(S), next(S);
        for (int o = 0; o < O; ++o) {
            double mass = 0;
            for (int s = 0; s < S; ++s) {
                weighted[s] = alpha[s] * model.emission_column(h + t, s)[o];
                mass += weighted[s];
            }
            const std::size_t prefix = obs_prefix * O + o;
            if (t + 1 == m) {
                out.matrix(row_base + prefix, s0) = mass;
                continue;
            }
            std::fill(next.begin(), next.end(), 0.0);
            if (mass > 0) {
                for (int s = 0; s < S; ++s) {
                    if (weighted[s] == 0) continue;
                    const double* col = model.transition_column(h + t, s, act_seq[t]);
                    for (int s2 = 0; s2 < S; ++s2) next[s2] += weighted[s] * col[s2];
                }
            }
            self(self, t + 1, next, prefix, row_base, s0);
        }
    };

    for (std::size_t aflat = 0; aflat < act_seqs; ++aflat) {
        std::size_t rem = aflat;
        for (int t = m - 2; t >= 0; --t) {
            act_seq[t] = static_cast<int>(rem % A);
            rem /= A;
        }
        for (int s0 = 0; s0 < S; ++s0) {
            std::vector<double> alpha(S, 0.0);
            alpha[s0] = 1.0;
            recurse(recurse, 0, alpha, 0, aflat * obs_rows, s0);
        }
    }
    return out;
}

std::vector<double> single_step_sigmas(const PomgModel& model) {
    const int S = model.spec.num_states, O = model.spec.joint_observations();
    if (O < S)
        throw Fault("single-step revealing check needs an undercomplete model (O=" + std::to_string(O) +
                    " < S=" + std::to_string(S) + "); use the multi-step check");
    std::vector<double> sig;
    for (int h = 0; h < model.spec.horizon; ++h) sig.push_back(sigma_s_min(emission_matrix(model, h)));
    return sig;
}

std::vector<double> multi_step_sigmas(const PomgModel& model, int m) {
    const int H = model.spec.horizon, S = model.spec.num_states;
    if (m < 1 || m > H) throw Fault("multi-step check: window m=" + std::to_string(m) + " must lie in [1, H]");
    std::vector<double> sig;
    for (int h = 0; h + m <= H; ++h) {
        const auto M = build_m_step_matrix(model, h, m);
        sig.push_back(M.matrix.rows < static_cast<std::size_t>(S) ? 0.0 : sigma_s_min(M.matrix));
    }
    return sig;
}

bool check_single_step(const PomgModel& model, double alpha) {
    const auto sig = single_step_sigmas(model);
    return *std::min_element(sig.begin(), sig.end()) >= alpha - kAlphaSlack;
}

bool check_multi_step(const PomgModel& model, int m, double alpha) {
    const auto sig = multi_step_sigmas(model, m);
    return *std::min_element(sig.begin(), sig.end()) >= alpha - kAlphaSlack;
}

}  // namespace pomg
