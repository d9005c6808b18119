#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "autoint/common.hpp"

namespace autoint {

namespace detail {

struct SimpsonState {
    const std::function<double(double)>* f;
    double tol_excess = 0.0;
    long long evals = 0;
};

inline double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm, double fb, double whole,
                              double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = (*st.f)(lm);
    const double frm = (*st.f)(rm);
    st.evals += 2;
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = (left + right - whole) / 15.0;
    if (std::fabs(err) <= tol || depth <= 0) {
        if (depth <= 0 && std::fabs(err) > tol) st.tol_excess += std::fabs(err) - tol;
        return left + right + err;
    }
    return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with Richardson correction. tol is an absolute
// error budget for the whole interval; subintervals that are forced to stop
// at max_depth contribute their residual to an excess ledger, and the call
// fails only if that excess exceeds the budget.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int max_depth = 48, long long* eval_count = nullptr) {
    if (a == b) return 0.0;
    detail::SimpsonState st;
    st.f = &f;
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    st.evals = 3;
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double r = detail::simpson_recurse(st, a, b, fa, fm, fb, whole, tol, max_depth);
    if (eval_count != nullptr) *eval_count += st.evals;
    if (st.tol_excess > tol)
        throw OracleError("adaptive quadrature did not converge to the requested tolerance");
    return r;
}

// Cumulative integral of f over [a, b] on a uniform grid of n intervals
// (n even): prefix[i] ~= int_a^{x_i} f. Even nodes use composite Simpson;
// odd nodes the half-panel rule. O(h^4) on smooth integrands.
inline std::vector<double> cumulative_integral(const std::vector<double>& fvals, double a, double b) {
    const size_t n = fvals.size() - 1;
    const double h = (b - a) / static_cast<double>(n);
    std::vector<double> prefix(fvals.size(), 0.0);
    for (size_t i = 0; i + 2 <= n; i += 2) {
        prefix[i + 1] = prefix[i] + h / 12.0 * (5.0 * fvals[i] + 8.0 * fvals[i + 1] - fvals[i + 2]);
        prefix[i + 2] = prefix[i] + h / 3.0 * (fvals[i] + 4.0 * fvals[i + 1] + fvals[i + 2]);
    }
    return prefix;
}

// Composite Simpson over a precomputed uniform grid (n even).
inline double composite_simpson(const std::vector<double>& fvals, double a, double b) {
    const size_t n = fvals.size() - 1;
    const double h = (b - a) / static_cast<double>(n);
    double acc = 0.0;
    for (size_t i = 0; i + 2 <= n; i += 2) acc += fvals[i] + 4.0 * fvals[i + 1] + fvals[i + 2];
    return acc * h / 3.0;
}

}  // namespace autoint
