#pragma once

// Dense two-phase tableau simplex for the small LPs that arise from
// normal-form games. Floating point uses Bland's rule (lowest index enters,
// lowest basic index leaves on ratio ties). The exact mode pivots on GMP
// integers with a common denominator after rounding equilibrated input to a
// 2^-40 grid.

#include <cstddef>
#include <string>
#include <vector>

namespace pomg::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Constraint {
    std::vector<double> coeffs;  // length = num_vars
    Sense sense = Sense::LessEqual;
    double rhs = 0;
};

/// maximize objective . x subject to constraints, x >= 0.
struct Problem {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<Constraint> constraints;

    void add(std::vector<double> coeffs, Sense sense, double rhs) {
        constraints.push_back({std::move(coeffs), sense, rhs});
    }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };
std::string to_string(Status status);

enum class Arithmetic { Automatic, Exact, Floating };

struct Options {
    // Automatic runs in doubles and repeats in exact arithmetic when that
    // fails and the tableau has at most exact_cell_limit cells.
    Arithmetic arithmetic = Arithmetic::Automatic;
    std::size_t exact_cell_limit = 20'000;
    double pivot_tolerance = 1e-9;
    double feasibility_tolerance = 1e-9;
    std::size_t max_iterations = 200'000;
};

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> x;
    double objective = 0;
    std::size_t iterations = 0;
    bool exact = false;
};

Solution solve(const Problem& problem, const Options& options = {});

}  // namespace pomg::lp
