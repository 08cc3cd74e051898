#include "pomg/lp.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>

#include "pomg/error.hpp"

namespace pomg::lp {

std::string to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration limit";
        case Status::Numerical: return "lost precision";
    }
    return "unknown";
}

namespace {

// Constraint rows after sign normalization (rhs >= 0) and equilibration to
// unit max coefficient, with slack and artificial columns appended.
struct Standard {
    std::size_t rows = 0, cols = 0, art_begin = 0;
    std::vector<double> cells;  // rows x (cols + 1), rhs last
    std::vector<std::size_t> basis;
};

Standard standardize(const Problem& problem) {
    const std::size_t n = problem.num_vars, m = problem.constraints.size();
    std::size_t num_slack = 0, num_art = 0;
    std::vector<Sense> senses;
    for (const auto& con : problem.constraints) {
        Sense s = con.sense;
        if (con.rhs < 0 && s != Sense::Equal) s = s == Sense::LessEqual ? Sense::GreaterEqual : Sense::LessEqual;
        senses.push_back(s);
        if (s != Sense::Equal) ++num_slack;
        if (s != Sense::LessEqual) ++num_art;
    }
    Standard st;
    st.rows = m;
    st.art_begin = n + num_slack;
    st.cols = st.art_begin + num_art;
    st.cells.assign(m * (st.cols + 1), 0.0);
    st.basis.resize(m);
    std::size_t next_slack = n, next_art = st.art_begin;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& con = problem.constraints[r];
        double scale = 0;
        for (double v : con.coeffs) scale = std::max(scale, std::abs(v));
        if (scale == 0) scale = 1.0;
        const double sign = con.rhs < 0 ? -1.0 : 1.0;
        double* row = &st.cells[r * (st.cols + 1)];
        for (std::size_t j = 0; j < n; ++j) row[j] = sign * con.coeffs[j] / scale;
        row[st.cols] = sign * con.rhs / scale;
        if (senses[r] == Sense::LessEqual) {
            row[next_slack] = 1.0;
            st.basis[r] = next_slack++;
        } else {
            if (senses[r] == Sense::GreaterEqual) row[next_slack++] = -1.0;
            row[next_art] = 1.0;
            st.basis[r] = next_art++;
        }
    }
    return st;
}

// Doubles with absolute tolerances. Row `rows_` holds reduced costs.
class FloatTableau {
public:
    FloatTableau(const Standard& st, const Options& opt)
        : rows_(st.rows), cols_(st.cols), cells_(st.cells), opt_(opt) {
        cells_.resize((rows_ + 1) * (cols_ + 1), 0.0);
    }

    std::size_t rows() const { return rows_; }
    bool cost_positive(std::size_t c) const { return at(rows_, c) > opt_.pivot_tolerance; }
    bool cost_greater(std::size_t a, std::size_t b) const { return at(rows_, a) > at(rows_, b); }
    bool pivot_positive(std::size_t r, std::size_t c) const { return at(r, c) > opt_.pivot_tolerance; }
    bool pivot_nonzero(std::size_t r, std::size_t c) const { return std::abs(at(r, c)) > opt_.pivot_tolerance; }
    bool magnitude_greater(std::size_t r, std::size_t a, std::size_t b) const {
        return std::abs(at(r, a)) > std::abs(at(r, b));
    }
    bool rhs_positive(std::size_t r) const { return at(r, cols_) > 0; }
    double value(std::size_t r) const { return at(r, cols_); }
    // Sign of rhs(a)/col(a) - rhs(b)/col(b), ties within 1e-12.
    int compare_ratio(std::size_t a, std::size_t b, std::size_t c) const {
        const double d = at(a, cols_) / at(a, c) - at(b, cols_) / at(b, c);
        return d < -1e-12 ? -1 : d > 1e-12 ? 1 : 0;
    }
    bool infeasible(double artificial_sum) const {
        return artificial_sum > opt_.feasibility_tolerance * static_cast<double>(std::max<std::size_t>(1, rows_));
    }

    void pivot(std::size_t pr, std::size_t pc) {
        double* prow = row(pr);
        const double inv = 1.0 / prow[pc];
        for (std::size_t c = 0; c <= cols_; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            double* x = row(r);
            const double f = x[pc];
            if (f == 0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) x[c] -= f * prow[c];
            x[pc] = 0.0;
        }
        // Rounding noise on degenerate rows would otherwise break ratio ties.
        for (std::size_t r = 0; r < rows_; ++r)
            if (std::abs(at(r, cols_)) <= opt_.feasibility_tolerance) row(r)[cols_] = 0.0;
    }

    void load_objective(const std::vector<double>& c, const std::vector<std::size_t>& basis) {
        double* cost = row(rows_);
        for (std::size_t j = 0; j <= cols_; ++j) cost[j] = j < c.size() ? c[j] : 0.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            const double cb = c[basis[r]];
            if (cb == 0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) cost[j] -= cb * at(r, j);
        }
    }

    double artificial_sum(const std::vector<std::size_t>& basis, std::size_t art_begin) const {
        double s = 0;
        for (std::size_t r = 0; r < rows_; ++r)
            if (basis[r] >= art_begin) s += at(r, cols_);
        return s;
    }

private:
    double at(std::size_t r, std::size_t c) const { return cells_[r * (cols_ + 1) + c]; }
    double* row(std::size_t r) { return &cells_[r * (cols_ + 1)]; }

    std::size_t rows_, cols_;
    std::vector<double> cells_;
    const Options& opt_;
};

// Fraction-free integer tableau: the true entry is cell / denom_, denom_ > 0.
// Input is rounded to a 2^-40 grid, moving each equilibrated coefficient by
// at most 2^-41. Bareiss updates keep every cell integral without gcds.
class ExactTableau {
public:
    explicit ExactTableau(const Standard& st) : rows_(st.rows), cols_(st.cols), cells_((rows_ + 1) * (cols_ + 1)) {
        for (std::size_t i = 0; i < st.cells.size(); ++i) cells_[i] = integer(st.cells[i]);
    }

    std::size_t rows() const { return rows_; }
    bool cost_positive(std::size_t c) const { return sgn(at(rows_, c)) > 0; }
    bool cost_greater(std::size_t a, std::size_t b) const { return at(rows_, a) > at(rows_, b); }
    bool pivot_positive(std::size_t r, std::size_t c) const { return sgn(at(r, c)) > 0; }
    bool pivot_nonzero(std::size_t r, std::size_t c) const { return sgn(at(r, c)) != 0; }
    bool magnitude_greater(std::size_t r, std::size_t a, std::size_t b) const {
        return mpz_cmpabs(at(r, a).get_mpz_t(), at(r, b).get_mpz_t()) > 0;
    }
    bool rhs_positive(std::size_t r) const { return sgn(at(r, cols_)) > 0; }
    double value(std::size_t r) const { return mpq_class(at(r, cols_), denom_).get_d(); }
    int compare_ratio(std::size_t a, std::size_t b, std::size_t c) const {
        const int s = cmp(mpz_class(at(a, cols_) * at(b, c)), mpz_class(at(b, cols_) * at(a, c)));
        return s < 0 ? -1 : s > 0 ? 1 : 0;
    }
    bool infeasible(const mpz_class& artificial_sum) const { return sgn(artificial_sum) > 0; }

    void pivot(std::size_t pr, std::size_t pc) {
        const mpz_class p = at(pr, pc);
        const mpz_class* prow = row(pr);
        mpz_class tmp;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            mpz_class* x = row(r);
            const mpz_class f = x[pc];
            const bool eliminate = sgn(f) != 0;
            // x = (p x - f prow) / denom, exact by Sylvester's identity.
            for (std::size_t c = 0; c <= cols_; ++c) {
                if (sgn(x[c]) == 0 && (!eliminate || sgn(prow[c]) == 0)) continue;
                x[c] *= p;
                if (eliminate && sgn(prow[c]) != 0) {
                    tmp = f * prow[c];
                    x[c] -= tmp;
                }
                mpz_divexact(x[c].get_mpz_t(), x[c].get_mpz_t(), denom_.get_mpz_t());
            }
        }
        denom_ = p;
        if (sgn(denom_) < 0) {
            for (auto& v : cells_) v = -v;
            denom_ = -denom_;
        }
    }

    void load_objective(const std::vector<double>& c, const std::vector<std::size_t>& basis) {
        std::vector<mpz_class> ci(c.size());
        for (std::size_t j = 0; j < c.size(); ++j) ci[j] = integer(c[j]);
        mpz_class* cost = row(rows_);
        for (std::size_t j = 0; j <= cols_; ++j) cost[j] = j < ci.size() ? mpz_class(ci[j] * denom_) : mpz_class(0);
        // Numerators over denom_, as if the row had been pivoted from the start.
        for (std::size_t r = 0; r < rows_; ++r) {
            const mpz_class& cb = ci[basis[r]];
            if (sgn(cb) == 0) continue;
            for (std::size_t j = 0; j <= cols_; ++j)
                if (sgn(at(r, j)) != 0) cost[j] -= cb * at(r, j);
        }
    }

    mpz_class artificial_sum(const std::vector<std::size_t>& basis, std::size_t art_begin) const {
        mpz_class s = 0;
        for (std::size_t r = 0; r < rows_; ++r)
            if (basis[r] >= art_begin) s += at(r, cols_);
        return s;
    }

private:
    static mpz_class integer(double x) { return mpz_class(std::nearbyint(x * 1099511627776.0)); }  // 2^40
    const mpz_class& at(std::size_t r, std::size_t c) const { return cells_[r * (cols_ + 1) + c]; }
    mpz_class* row(std::size_t r) { return &cells_[r * (cols_ + 1)]; }

    std::size_t rows_, cols_;
    std::vector<mpz_class> cells_;
    mpz_class denom_ = 1;
};

// Columns [0, active_cols) may enter. With `bland` the lowest index enters;
// otherwise the largest reduced cost enters until a run of degenerate pivots
// as long as the row count, after which Bland's rule takes over until the
// objective moves again. Either way the lowest basic index leaves on ties.
template <class Tab>
Status iterate(Tab& t, std::vector<std::size_t>& basis, std::size_t active_cols, bool bland,
               std::size_t max_iterations, std::size_t& iterations) {
    std::size_t degenerate_run = 0;
    while (true) {
        if (iterations >= max_iterations) return Status::IterationLimit;
        const bool lowest = bland || degenerate_run >= t.rows();
        std::size_t enter = active_cols;
        for (std::size_t c = 0; c < active_cols; ++c) {
            if (!t.cost_positive(c)) continue;
            if (enter == active_cols || t.cost_greater(c, enter)) enter = c;
            if (lowest) break;
        }
        if (enter == active_cols) return Status::Optimal;
        std::size_t leave = t.rows();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            if (!t.pivot_positive(r, enter)) continue;
            if (leave == t.rows()) {
                leave = r;
                continue;
            }
            const int c = t.compare_ratio(r, leave, enter);
            if (c < 0 || (c == 0 && basis[r] < basis[leave])) leave = r;
        }
        if (leave == t.rows()) return Status::Unbounded;
        degenerate_run = t.rhs_positive(leave) ? 0 : degenerate_run + 1;
        t.pivot(leave, enter);
        basis[leave] = enter;
        ++iterations;
    }
}

template <class Tab>
Solution two_phase(Tab& t, const Standard& st, const Problem& problem, bool bland, std::size_t max_iterations) {
    const std::size_t n = problem.num_vars, m = st.rows, total = st.cols, art_begin = st.art_begin;
    std::vector<std::size_t> basis = st.basis;
    Solution sol;
    if (art_begin < total) {
        std::vector<double> phase1(total, 0.0);
        for (std::size_t j = art_begin; j < total; ++j) phase1[j] = -1.0;
        t.load_objective(phase1, basis);
        const Status status = iterate(t, basis, total, bland, max_iterations, sol.iterations);
        // Phase 1 is bounded; any other status means lost precision.
        if (status != Status::Optimal) {
            sol.status = status == Status::IterationLimit ? status : Status::Numerical;
            return sol;
        }
        if (t.infeasible(t.artificial_sum(basis, art_begin))) {
            sol.status = Status::Infeasible;
            return sol;
        }
        // Drive zero-level artificials out on the largest entry. A row whose
        // artificial cannot leave is redundant and stays at level 0.
        for (std::size_t r = 0; r < m; ++r) {
            if (basis[r] < art_begin) continue;
            std::size_t best = art_begin;
            for (std::size_t j = 0; j < art_begin; ++j)
                if (t.pivot_nonzero(r, j) && (best == art_begin || t.magnitude_greater(r, j, best))) best = j;
            if (best == art_begin) continue;
            t.pivot(r, best);
            basis[r] = best;
        }
    }

    std::vector<double> phase2(total, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = problem.objective[j];
    t.load_objective(phase2, basis);
    sol.status = iterate(t, basis, art_begin, bland, max_iterations, sol.iterations);
    if (sol.status != Status::Optimal) return sol;

    sol.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] < n) sol.x[basis[r]] = t.value(r);
    sol.objective = 0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += problem.objective[j] * sol.x[j];
    return sol;
}

}  // namespace

Solution solve(const Problem& problem, const Options& opt) {
    const std::size_t n = problem.num_vars;
    if (problem.objective.size() != n) throw Fault("lp: objective length differs from num_vars");
    for (const auto& con : problem.constraints) {
        if (con.coeffs.size() != n) throw Fault("lp: constraint length differs from num_vars");
        for (double v : con.coeffs)
            if (!std::isfinite(v)) throw Fault("lp: non-finite coefficient");
        if (!std::isfinite(con.rhs)) throw Fault("lp: non-finite rhs");
    }
    const Standard st = standardize(problem);
    auto exact = [&] {
        ExactTableau t(st);
        Solution sol = two_phase(t, st, problem, false, opt.max_iterations);
        sol.exact = true;
        return sol;
    };
    if (opt.arithmetic == Arithmetic::Exact) return exact();
    const bool fallback =
        opt.arithmetic == Arithmetic::Automatic && (st.rows + 1) * (st.cols + 1) <= opt.exact_cell_limit;
    // A float run this long is cycling on rounding noise.
    const std::size_t budget = fallback ? std::min(opt.max_iterations, 50 * (st.rows + st.cols)) : opt.max_iterations;
    FloatTableau t(st, opt);
    Solution sol = two_phase(t, st, problem, true, budget);
    if (fallback && sol.status != Status::Optimal) return exact();
    return sol;
}

}  // namespace pomg::lp
