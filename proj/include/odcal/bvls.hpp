#pragma once

#include <odcal/types.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <vector>

namespace odcal {

struct BvlsOptions {
    double tol = 1e-8;  ///< KKT tolerance on the gradient A'^T (A'x - b)
    int max_iter = -1;  ///< outer iterations; default 10 * n + 100
};

template <typename Scalar>
struct BvlsResult {
    VectorX<Scalar> x;
    Scalar objective = 0; ///< ||A'x - b||_2
    Scalar kkt = 0;       ///< largest KKT violation at x
    int iterations = 0;
    bool converged = false; ///< false: best iterate returned after max_iter
};

/// Largest violation of the box-constrained least-squares optimality conditions
/// given the gradient `g` at `x`: |g| on free components, -g at the lower bound,
/// g at the upper bound.
template <typename Scalar>
Scalar kkt_violation(const VectorX<Scalar>& x, const VectorX<Scalar>& g, const VectorX<Scalar>& lower,
                     const VectorX<Scalar>& upper)
{
    Scalar worst = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool at_lower = x[i] <= lower[i];
        const bool at_upper = x[i] >= upper[i];
        Scalar v;
        if (at_lower && at_upper)
            v = 0;
        else if (at_lower)
            v = std::max<Scalar>(0, -g[i]);
        else if (at_upper)
            v = std::max<Scalar>(0, g[i]);
        else
            v = std::abs(g[i]);
        worst = std::max(worst, v);
    }
    return worst;
}

namespace detail {

/// Stark-Parker active-set iteration over a least-squares problem.
///
/// `Problem` provides `residual(x)`, `gradient(r)` and `solve_free(free, x)`;
/// the latter returns the unconstrained minimizer over the `free` components
/// with every other component held at its value in `x`. Every step is a convex
/// combination towards a subspace minimizer, so the objective never increases.
template <typename Scalar, typename Problem>
BvlsResult<Scalar> bvls_active_set(const Problem& problem, VectorX<Scalar> x, const VectorX<Scalar>& lower,
                                   const VectorX<Scalar>& upper, const BvlsOptions& options)
{
    const Eigen::Index n = x.size();
    const int max_iter = options.max_iter >= 0 ? options.max_iter : static_cast<int>(10 * n + 100);
    const Scalar tol = static_cast<Scalar>(options.tol);

    // -1 at lower, +1 at upper, 0 free, 2 fixed (lower == upper).
    std::vector<int> state(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lower[i] == upper[i]) {
            x[i] = lower[i];
            state[i] = 2;
        } else if (x[i] <= lower[i]) {
            x[i] = lower[i];
            state[i] = -1;
        } else if (x[i] >= upper[i]) {
            x[i] = upper[i];
            state[i] = 1;
        }
    }

    std::vector<Eigen::Index> free;
    auto inner_loop = [&] {
        for (;;) {
            free.clear();
            for (Eigen::Index i = 0; i < n; ++i)
                if (state[i] == 0)
                    free.push_back(i);
            if (free.empty())
                return;
            const VectorX<Scalar> z = problem.solve_free(free, x);
            Scalar alpha = 1;
            std::size_t hit = free.size();
            int hit_state = 0;
            for (std::size_t j = 0; j < free.size(); ++j) {
                const Eigen::Index i = free[j];
                if (z[j] < lower[i] || z[j] > upper[i]) {
                    const bool low = z[j] < lower[i];
                    const Scalar bound = low ? lower[i] : upper[i];
                    const Scalar a = (bound - x[i]) / (z[j] - x[i]);
                    if (hit == free.size() || a < alpha) {
                        alpha = a;
                        hit = j;
                        hit_state = low ? -1 : 1;
                    }
                }
            }
            if (hit == free.size()) {
                for (std::size_t j = 0; j < free.size(); ++j)
                    x[free[j]] = z[j];
                return;
            }
            alpha = std::clamp<Scalar>(alpha, 0, 1);
            for (std::size_t j = 0; j < free.size(); ++j) {
                const Eigen::Index i = free[j];
                x[i] = std::clamp(x[i] + alpha * (z[j] - x[i]), lower[i], upper[i]);
            }
            const Eigen::Index i = free[hit];
            x[i] = hit_state < 0 ? lower[i] : upper[i];
            state[i] = hit_state;
        }
    };

    inner_loop();

    BvlsResult<Scalar> result;
    for (int iter = 0;; ++iter) {
        const VectorX<Scalar> g = problem.gradient(problem.residual(x));
        Scalar free_violation = 0;
        Scalar bound_violation = 0;
        Eigen::Index enter = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (state[i] == 0) {
                free_violation = std::max(free_violation, std::abs(g[i]));
            } else if (state[i] != 2) {
                const Scalar v = g[i] * state[i];
                if (v > bound_violation) {
                    bound_violation = v;
                    enter = i;
                }
            }
        }
        result.iterations = iter;
        if (bound_violation <= tol) {
            result.converged = free_violation <= tol;
            break;
        }
        if (iter >= max_iter)
            break;
        state[enter] = 0;
        inner_loop();
    }

    const auto r = problem.residual(x);
    result.objective = r.norm();
    result.kkt = kkt_violation<Scalar>(x, problem.gradient(r), lower, upper);
    result.converged = result.converged || result.kkt <= tol;
    result.x = std::move(x);
    return result;
}

template <typename Scalar>
struct DenseLeastSquares {
    const MatrixX<Scalar>& a;
    const VectorX<Scalar>& b;

    VectorX<Scalar> residual(const VectorX<Scalar>& x) const { return a * x - b; }
    VectorX<Scalar> gradient(const VectorX<Scalar>& r) const { return a.transpose() * r; }

    VectorX<Scalar> solve_free(const std::vector<Eigen::Index>& free, const VectorX<Scalar>& x) const
    {
        const MatrixX<Scalar> af = a(Eigen::all, free);
        const VectorX<Scalar> rhs = b - a * x + af * x(free);
        return af.completeOrthogonalDecomposition().solve(rhs);
    }
};

} // namespace detail

/// Bounded-variable least squares min ||A x - b||_2 s.t. lower <= x <= upper
/// for a dense matrix. The iteration starts from the clamped `x0` (default: lower
/// bound where finite, else upper, else 0).
template <typename Scalar>
BvlsResult<Scalar> bvls(const MatrixX<Scalar>& a, const VectorX<Scalar>& b, const VectorX<Scalar>& lower,
                        const VectorX<Scalar>& upper, const BvlsOptions& options = {},
                        const VectorX<Scalar>* x0 = nullptr)
{
    if (a.rows() != b.size() || a.cols() != lower.size() || a.cols() != upper.size())
        throw Error("bvls: dimension mismatch");
    if ((lower.array() > upper.array()).any())
        throw Error("bvls: lower bound above upper bound");
    VectorX<Scalar> start(a.cols());
    if (x0) {
        start = *x0;
    } else {
        for (Eigen::Index i = 0; i < start.size(); ++i)
            start[i] = std::isfinite(lower[i]) ? lower[i] : (std::isfinite(upper[i]) ? upper[i] : Scalar(0));
    }
    start = start.cwiseMax(lower).cwiseMin(upper);
    detail::DenseLeastSquares<Scalar> problem{a, b};
    return detail::bvls_active_set<Scalar>(problem, std::move(start), lower, upper, options);
}

/// Upper-level calibration problem min ||A'X - b~||_2 with A' = [A; lambda I]
/// and b~ = [c~; lambda X~]. The lambda I block is never materialized.
struct StackedSystem {
    SparseMatrixXd a;  ///< sensors x OD pairs
    VectorXd counts;   ///< c~
    VectorXd prior;    ///< X~
    double lambda = 1.0;
    VectorXd lower;
    VectorXd upper;

    Eigen::Index num_od() const { return a.cols(); }
    Eigen::Index num_sensors() const { return a.rows(); }

    VectorXd b_tilde() const;
    SparseMatrixXd a_prime() const;
    /// Stacked residual A'x - b~.
    VectorXd residual(const VectorXd& x) const;
    VectorXd gradient(const VectorXd& residual) const;
    double objective(const VectorXd& x) const { return residual(x).norm(); }
};

struct BoundsConfig {
    double u_factor = 10.0;
    double u_floor = 1.0;
};

/// Builds the stacked system with l = 0 and u = u_factor * max(X~, u_floor).
StackedSystem make_stacked_system(SparseMatrixXd sensor_by_od, VectorXd counts, VectorXd prior, double lambda,
                                  const BoundsConfig& bounds = {});

/// Solves the stacked system from the feasible start clamp(X~).
BvlsResult<double> solve(const StackedSystem& sys, const BvlsOptions& options = {});

/// Matrix Market coordinate dump of A' followed by b~ as a dense array.
void write_matrix_market(std::ostream& out, const StackedSystem& sys);

} // namespace odcal
