#pragma once

#include <odcal/types.hpp>

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <vector>

namespace odcal {

/// RMSE(y, y*) = ||y - y*||_2 / sqrt(N).
template <typename A, typename B>
typename A::Scalar rmse(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& y_star)
{
    if (y.size() != y_star.size())
        throw Error("rmse: length mismatch");
    if (y.size() == 0)
        throw Error("rmse: empty vectors");
    using std::sqrt;
    return (y - y_star).norm() / sqrt(static_cast<typename A::Scalar>(y.size()));
}

/// RMSE divided by the mean of the true vector, in percent.
template <typename A, typename B>
typename A::Scalar nrmse(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& y_star)
{
    const auto mean = y.mean();
    if (mean == 0)
        throw Error("nrmse: true vector has zero mean");
    return rmse(y, y_star) / mean * 100;
}

/// Relative error ||y - y*||_2 / ||y||_2 in percent. Not symmetric in its arguments.
template <typename A, typename B>
typename A::Scalar rel_error(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& y_star)
{
    if (y.size() != y_star.size())
        throw Error("rel_error: length mismatch");
    const auto denom = y.norm();
    if (!(denom > 0))
        throw Error("rel_error: true vector is zero");
    return (y - y_star).norm() / denom * 100;
}

/// rel_error that treats two zero vectors as a perfect match and a nonzero
/// estimate of a zero truth as +inf.
template <typename A, typename B>
typename A::Scalar rel_error_or_zero(const Eigen::MatrixBase<A>& y, const Eigen::MatrixBase<B>& y_star)
{
    using S = typename A::Scalar;
    if (y.norm() > 0)
        return rel_error(y, y_star);
    return y_star.norm() > 0 ? std::numeric_limits<S>::infinity() : S(0);
}

/// Errors of one calibrate-and-simulate round, percentages except speed.
struct ErrorRecord {
    int iteration = 0;
    double od_cal_err = 0.0;     ///< eps(c~, A X*)
    double cal_to_sim_err = 0.0; ///< eps(A X*, c*)
    double iter_err = 0.0;       ///< eps(c~, c*)
    double fp_err = 0.0;         ///< eps(tau_prev, tau)
    double mean_speed = 0.0;     ///< m/s
};

/// Pearson correlation of (od_cal_err, cal_to_sim_err, iter_err, fp_err,
/// mean_speed) over the records. Entries involving a constant column are NaN.
MatrixXd covariance_report(const std::vector<ErrorRecord>& records);

/// Pearson correlation matrix of the columns of `data`; NaN where undefined.
MatrixXd correlation_matrix(const MatrixXd& data);

} // namespace odcal
