#pragma once

// Weakly-revealing checks: the S-th singular value of the emission matrices
// and of the m-step emission-action matrices.

#include <cstddef>
#include <vector>

#include "pomg/core.hpp"

namespace pomg {

/// Row-major dense matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(DenseMatrix a);

/// The S-th (smallest) singular value of a rows x S matrix with rows >= S,
/// as the square root of the smallest Gram eigenvalue. Squaring the matrix
/// costs up to half the significant digits near zero.
double sigma_s_min(const DenseMatrix& matrix);

/// O_h as an O x S matrix.
DenseMatrix emission_matrix(const PomgModel& model, int h);

struct MStepMatrix {
    int step = 0;
    int window = 1;
    /// (A^(m-1) * O^m) x S; row = flat(action seq) * O^m + flat(observation seq),
    /// sequences flattened with the earliest step most significant.
    DenseMatrix matrix;
};

/// [M_h]_{(a,o),s} = P(o_{h:h+m-1} = o | s_h = s, a_{h:h+m-2} = a).
/// Requires h + m <= H (0-based h).
MStepMatrix build_m_step_matrix(const PomgModel& model, int h, int m);

inline constexpr double kAlphaSlack = 1e-9;

/// sigma_S(O_h) for every step. Faults when O < S.
std::vector<double> single_step_sigmas(const PomgModel& model);
/// sigma_S(M_h) for h = 0 .. H-m (0 when M_h has fewer rows than S).
std::vector<double> multi_step_sigmas(const PomgModel& model, int m);

/// min_h sigma_S(O_h) >= alpha - 1e-9. Faults when O < S: the single-step
/// condition needs an undercomplete model.
bool check_single_step(const PomgModel& model, double alpha);
bool check_multi_step(const PomgModel& model, int m, double alpha);

}  // namespace pomg
