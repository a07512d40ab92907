#pragma once

#include <odcal/types.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using odcal::MatrixXd;
using odcal::VectorXd;

struct BoxLsq {
    MatrixXd a;
    VectorXd b;
    VectorXd lower;
    VectorXd upper;
};

/// Random dense instance with at most `max_n` variables and a finite box.
inline BoxLsq random_box_lsq(std::mt19937_64& rng, int max_n)
{
    std::uniform_int_distribution<int> dim(1, max_n);
    const int n = dim(rng);
    std::uniform_int_distribution<int> extra(0, 4);
    const int m = n + extra(rng);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> lo(-2.0, 1.0), width(0.2, 3.0);
    BoxLsq p;
    p.a.resize(m, n);
    for (auto& x : p.a.reshaped())
        x = g(rng);
    p.b.resize(m);
    for (auto& x : p.b)
        x = 2.0 * g(rng);
    p.lower.resize(n);
    p.upper.resize(n);
    for (int i = 0; i < n; ++i) {
        p.lower[i] = lo(rng);
        p.upper[i] = p.lower[i] + width(rng);
    }
    return p;
}

/// ||Ax - b||_2 through the Gram matrix: x'Gx - 2h'x + b'b.
struct GramObjective {
    MatrixXd gram;
    VectorXd h;
    double bb = 0;

    explicit GramObjective(const BoxLsq& p) : gram(p.a.transpose() * p.a), h(p.a.transpose() * p.b), bb(p.b.squaredNorm()) {}

    double operator()(const VectorXd& x) const
    {
        return std::sqrt(std::max(0.0, x.dot(gram * x) - 2 * h.dot(x) + bb));
    }
};

/// Nested grid search: evaluates a regular grid over the current box, then
/// shrinks the box around the best point and repeats.
inline VectorXd nested_grid_minimizer(const BoxLsq& p, int points = 7, double shrink = 0.5, double min_width = 1e-9)
{
    const GramObjective f(p);
    const Eigen::Index n = p.lower.size();
    VectorXd lo = p.lower, hi = p.upper;
    VectorXd best = (lo + hi) / 2;
    double best_f = f(best);
    std::vector<int> idx(static_cast<std::size_t>(n));
    VectorXd x(n);
    while ((hi - lo).maxCoeff() > min_width) {
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            for (Eigen::Index i = 0; i < n; ++i)
                x[i] = lo[i] + (hi[i] - lo[i]) * idx[static_cast<std::size_t>(i)] / (points - 1);
            const double v = f(x);
            if (v < best_f) {
                best_f = v;
                best = x;
            }
            Eigen::Index i = 0;
            while (i < n && ++idx[static_cast<std::size_t>(i)] == points)
                idx[static_cast<std::size_t>(i++)] = 0;
            if (i == n)
                break;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const double half = (hi[i] - lo[i]) * shrink / 2;
            lo[i] = std::max(p.lower[i], best[i] - half);
            hi[i] = std::min(p.upper[i], best[i] + half);
        }
    }
    return best;
}

/// Exact minimum by enumerating every assignment of each variable to its lower
/// bound, its upper bound or free, solving the free part without constraints
/// and keeping the best feasible candidate.
inline double face_enumeration_minimum(const BoxLsq& p)
{
    const Eigen::Index n = p.lower.size();
    const GramObjective f(p);
    std::vector<int> s(static_cast<std::size_t>(n), 0);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        VectorXd x(n);
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int si = s[static_cast<std::size_t>(i)];
            if (si == 0)
                x[i] = p.lower[i];
            else if (si == 1)
                x[i] = p.upper[i];
            else
                free.push_back(i);
        }
        bool feasible = true;
        if (!free.empty()) {
            VectorXd rhs = p.b;
            for (Eigen::Index i = 0; i < n; ++i)
                if (s[static_cast<std::size_t>(i)] != 2)
                    rhs -= p.a.col(i) * x[i];
            const MatrixXd af = p.a(Eigen::all, free);
            const VectorXd z = af.colPivHouseholderQr().solve(rhs);
            for (std::size_t j = 0; j < free.size(); ++j) {
                const Eigen::Index i = free[j];
                x[i] = z[static_cast<Eigen::Index>(j)];
                if (x[i] < p.lower[i] - 1e-12 || x[i] > p.upper[i] + 1e-12)
                    feasible = false;
            }
        }
        if (feasible)
            best = std::min(best, f(x.cwiseMax(p.lower).cwiseMin(p.upper)));
        Eigen::Index i = 0;
        while (i < n && ++s[static_cast<std::size_t>(i)] == 3)
            s[static_cast<std::size_t>(i++)] = 0;
        if (i == n)
            break;
    }
    return best;
}

} // namespace oracle
