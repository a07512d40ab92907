#include <odcal/metrics.hpp>

#include <limits>

namespace odcal {

MatrixXd correlation_matrix(const MatrixXd& data)
{
    if (data.rows() < 3)
        throw Error("correlation_matrix: at least 3 records are required");
    const MatrixXd centered = data.rowwise() - data.colwise().mean();
    const MatrixXd cov = centered.transpose() * centered;
    const VectorXd sd = cov.diagonal().cwiseSqrt();
    MatrixXd corr(cov.rows(), cov.cols());
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < cov.cols(); ++j) {
            if (sd[i] > 0 && sd[j] > 0)
                corr(i, j) = i == j ? 1.0 : cov(i, j) / (sd[i] * sd[j]);
            else
                corr(i, j) = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return corr;
}

MatrixXd covariance_report(const std::vector<ErrorRecord>& records)
{
    MatrixXd data(static_cast<Eigen::Index>(records.size()), 5);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        data.row(static_cast<Eigen::Index>(i)) << r.od_cal_err, r.cal_to_sim_err, r.iter_err, r.fp_err, r.mean_speed;
    }
    return correlation_matrix(data);
}

} // namespace odcal
