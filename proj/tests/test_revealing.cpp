#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pomg/error.hpp"
#include "pomg/revealing.hpp"
#include "support.hpp"

using namespace pomg;

namespace {

// Number of eigenvalues below x, from the signs of the LDL^T pivots of A - xI.
int inertia_below(const DenseMatrix& a, double x) {
    const std::size_t n = a.rows;
    std::vector<double> m(a.data);
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] -= x;
    int negatives = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double d = m[k * n + k];
        if (d == 0) d = 1e-300;
        if (d < 0) ++negatives;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m[i * n + k] / d;
            for (std::size_t j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
        }
    }
    return negatives;
}

// k-th smallest eigenvalue by bisection on the inertia count.
double bisect_eigenvalue(const DenseMatrix& a, int k) {
    double bound = 0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        double r = 0;
        for (std::size_t j = 0; j < a.cols; ++j) r += std::abs(a(i, j));
        bound = std::max(bound, r);
    }
    double lo = -bound - 1, hi = bound + 1;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inertia_below(a, mid) > k ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

DenseMatrix random_symmetric(std::size_t n, Rng& rng) {
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = 2 * uniform01(rng) - 1;
    return a;
}

}  // namespace

TEST_CASE("Jacobi eigenvalues agree with inertia bisection") {
    Rng rng(99);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 6);
        const auto a = random_symmetric(n, rng);
        const auto ev = symmetric_eigenvalues(a);
        REQUIRE(ev.size() == n);
        CHECK(std::is_sorted(ev.begin(), ev.end()));
        double trace = 0;
        for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
        double sum = 0;
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(ev[k] == doctest::Approx(bisect_eigenvalue(a, static_cast<int>(k))).epsilon(1e-9));
            sum += ev[k];
        }
        CHECK(sum == doctest::Approx(trace).epsilon(1e-10));
    }
}

TEST_CASE("sigma_s_min on known matrices") {
    CHECK(sigma_s_min(DenseMatrix::from_rows({{1, 0}, {0, 1}, {0, 0}})) == doctest::Approx(1));
    CHECK(sigma_s_min(DenseMatrix::from_rows({{3, 0}, {0, 0.5}})) == doctest::Approx(0.5));
    CHECK(sigma_s_min(DenseMatrix::from_rows({{1, 1}, {1, 1}})) == doctest::Approx(0).epsilon(1e-6));
    // Rotation scaled by 2: both singular values are 2.
    const double c = std::cos(0.3), s = std::sin(0.3);
    CHECK(sigma_s_min(DenseMatrix::from_rows({{2 * c, -2 * s}, {2 * s, 2 * c}})) == doctest::Approx(2));
    CHECK_THROWS_AS(sigma_s_min(DenseMatrix::from_rows({{1, 0, 0}, {0, 1, 0}})), Fault);
}

TEST_CASE("single-step check on identity emissions") {
    const PomgSpec spec{2, 1, 3, {1}, {3}};
    Rng rng(1);
    auto m = test::random_model(spec, rng);
    for (int h = 0; h < 2; ++h)
        for (int s = 0; s < 3; ++s)
            for (int o = 0; o < 3; ++o) m.emission(h, o, s) = o == s ? 1.0 : 0.0;
    CHECK(check_single_step(m, 1.0));
    CHECK_FALSE(check_single_step(m, 1.01));
    const PomgSpec over{2, 1, 3, {1}, {2}};
    CHECK_THROWS_AS(check_single_step(test::random_model(over, rng), 0.1), Fault);
}

TEST_CASE("m-step matrix follows the chain rule") {
    Rng rng(17);
    const PomgSpec spec{3, 2, 3, {2, 1}, {2, 1}};
    const auto m = test::random_model(spec, rng);
    const int S = 3, A = 2, O = 2;
    for (int win = 1; win <= 3; ++win) {
        for (int h = 0; h + win <= 3; ++h) {
            const auto M = build_m_step_matrix(m, h, win);
            const auto rows = static_cast<std::size_t>(std::pow(A, win - 1) * std::pow(O, win));
            REQUIRE(M.matrix.rows == rows);
            REQUIRE(M.matrix.cols == static_cast<std::size_t>(S));
            std::vector<int> radices(win - 1, A);
            radices.insert(radices.end(), win, O);
            std::vector<int> latent(win - 1, S);
            std::size_t row = 0;
            test::for_each_digits(radices, [&](const std::vector<int>& d) {
                for (int s = 0; s < S; ++s) {
                    double want = 0;
                    test::for_each_digits(latent, [&](const std::vector<int>& path) {
                        double p = 1;
                        int cur = s;
                        for (int t = 0; t < win; ++t) {
                            p *= m.emission(h + t, d[win - 1 + t], cur);
                            if (t + 1 < win) {
                                p *= m.transition(h + t, cur, d[t], path[t]);
                                cur = path[t];
                            }
                        }
                        want += p;
                    });
                    CHECK(M.matrix(row, s) == doctest::Approx(want).epsilon(1e-13));
                }
                ++row;
            });
        }
    }
    const auto one = build_m_step_matrix(m, 1, 1).matrix;
    const auto em = emission_matrix(m, 1);
    CHECK(one.data == em.data);
    CHECK_THROWS_AS(build_m_step_matrix(m, 2, 2), Fault);
}
