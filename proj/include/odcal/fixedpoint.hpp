#pragma once

#include <odcal/metrics.hpp>

#include <limits>
#include <utility>
#include <vector>

namespace odcal {

struct FpConfig {
    double d = 5.0;               ///< upper clamp multiplier on free-flow times
    int iteration_number = 10;    ///< outer iterations, two map evaluations each
    double denom_epsilon = 1e-9;  ///< Aitken denominators below this fall back to plain iteration
    double tolerance = 0.0;       ///< stop once the relative error (percent) drops below; 0 disables
};

/// Componentwise clamp of raw travel times into [nu, d * nu].
template <typename A, typename B>
VectorX<typename A::Scalar> clamp_map(const Eigen::MatrixBase<A>& tau_raw, const Eigen::MatrixBase<B>& nu, double d)
{
    using S = typename A::Scalar;
    return tau_raw.cwiseMin(static_cast<S>(d) * nu).cwiseMax(nu);
}

/// Aitken delta-squared update tau0 - (tau1 - tau0)^2 / (tau2 - 2 tau1 + tau0),
/// componentwise, clamped into [nu, d * nu].
template <typename Scalar>
VectorX<Scalar> steffensen_step(const VectorX<Scalar>& tau0, const VectorX<Scalar>& tau1,
                                const VectorX<Scalar>& tau2, const VectorX<Scalar>& nu, const FpConfig& cfg)
{
    if (tau0.size() != tau1.size() || tau0.size() != tau2.size() || tau0.size() != nu.size())
        throw Error("steffensen_step: length mismatch");
    VectorX<Scalar> out(tau0.size());
    for (Eigen::Index i = 0; i < tau0.size(); ++i) {
        const Scalar denom = tau2[i] - 2 * tau1[i] + tau0[i];
        if (std::abs(denom) < static_cast<Scalar>(cfg.denom_epsilon)) {
            out[i] = tau1[i];
        } else {
            const Scalar diff = tau1[i] - tau0[i];
            out[i] = tau0[i] - diff * diff / denom;
        }
        if (!std::isfinite(out[i]))
            out[i] = tau1[i];
    }
    return clamp_map(out, nu, cfg.d);
}

template <typename Scalar>
struct FixedPointResult {
    VectorX<Scalar> tau_star;
    std::vector<Scalar> error_trace;     ///< relative error per outer iteration, percent
    std::vector<Scalar> min_error_trace; ///< running minimum of error_trace
    int evaluations = 0;                 ///< calls of the map
};

/// Steffensen fixed-point iteration on a clamped map.
///
/// Each outer iteration evaluates tau1 = f_bar(tau0) and tau2 = f_bar(tau1),
/// extrapolates, clamps, and measures the relative error against tau0. The
/// iterate with the smallest error is returned.
template <typename Scalar, typename Map>
FixedPointResult<Scalar> run_fixed_point(Map&& f_bar, VectorX<Scalar> tau0, const VectorX<Scalar>& nu,
                                         const FpConfig& cfg)
{
    if (!(cfg.d > 1) || cfg.iteration_number < 1)
        throw Error("run_fixed_point: need d > 1 and at least one iteration");
    FixedPointResult<Scalar> res;
    res.tau_star = tau0;
    Scalar min_error = std::numeric_limits<Scalar>::infinity();
    for (int n = 0; n < cfg.iteration_number; ++n) {
        const VectorX<Scalar> tau1 = f_bar(tau0);
        const VectorX<Scalar> tau2 = f_bar(tau1);
        res.evaluations += 2;
        VectorX<Scalar> tau = steffensen_step<Scalar>(tau0, tau1, tau2, nu, cfg);
        const Scalar error = rel_error(tau0, tau);
        if (error < min_error) {
            min_error = error;
            res.tau_star = tau;
        }
        res.error_trace.push_back(error);
        res.min_error_trace.push_back(min_error);
        tau0 = std::move(tau);
        if (cfg.tolerance > 0 && error < cfg.tolerance)
            break;
    }
    return res;
}

} // namespace odcal
