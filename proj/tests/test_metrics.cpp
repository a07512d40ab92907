#include "support.hpp"

#include <cmath>

using namespace odcal;

namespace {

VectorXd vec(std::initializer_list<double> v)
{
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out[i++] = x;
    return out;
}

} // namespace

TEST_CASE("rmse")
{
    CHECK(rmse(vec({1, 2}), vec({1, 2})) == 0);
    CHECK(rmse(vec({0, 0}), vec({3, 4})) == doctest::Approx(5 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(rmse(vec({2}), vec({5})) == 3);
    CHECK_THROWS_AS(rmse(vec({1, 2}), vec({1})), Error);
}

TEST_CASE("normalized rmse")
{
    CHECK(nrmse(vec({2, 2}), vec({2, 2})) == 0);
    CHECK_THROWS_AS(nrmse(vec({0, 0}), vec({1, 1})), Error);
    CHECK(nrmse(vec({10, 10}), vec({11, 9})) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("relative error")
{
    CHECK(rel_error(vec({3, 4}), vec({3, 4})) == 0);
    CHECK(rel_error(vec({3, 4}), vec({0, 0})) == doctest::Approx(100));
    CHECK(rel_error(vec({3, 4}), vec({3, 0})) == doctest::Approx(80));
    CHECK_THROWS_AS(rel_error(vec({0, 0}), vec({3, 0})), Error);
    CHECK(rel_error_or_zero(vec({0, 0}), vec({0, 0})) == 0);
}

TEST_CASE("metric properties")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 50);
    for (int trial = 0; trial < 100; ++trial) {
        VectorXd y(5), z(5);
        for (auto& x : y)
            x = u(rng);
        for (auto& x : z)
            x = u(rng);
        const double beta = u(rng);
        CHECK(rel_error(VectorXd(beta * y), VectorXd(beta * z)) == doctest::Approx(rel_error(y, z)).epsilon(1e-12));
        CHECK(rmse(y, z) == rmse(z, y));
    }
    // Not symmetric.
    CHECK(rel_error(vec({1, 1}), vec({2, 2})) != rel_error(vec({2, 2}), vec({1, 1})));
}

namespace {

/// Two-pass Pearson correlation of two columns.
double pearson(const VectorXd& a, const VectorXd& b)
{
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("correlation matrix")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    MatrixXd data(10, 4);
    for (Eigen::Index i = 0; i < 10; ++i) {
        data(i, 0) = n01(rng);
        data(i, 1) = data(i, 0);
        data(i, 2) = -data(i, 0);
        data(i, 3) = n01(rng);
    }
    const MatrixXd c = correlation_matrix(data);
    CHECK(c(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(c(0, 3) - pearson(data.col(0), data.col(3))) <= 1e-12);
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(c);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9);

    MatrixXd constant = data;
    constant.col(3).setConstant(2.0);
    CHECK(std::isnan(correlation_matrix(constant)(3, 0)));
    CHECK_THROWS_AS(correlation_matrix(data.topRows(2)), Error);
}

TEST_CASE("error report columns")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<ErrorRecord> recs;
    for (int i = 0; i < 10; ++i)
        recs.push_back({i, u(rng), u(rng), u(rng), u(rng), u(rng)});
    const MatrixXd c = covariance_report(recs);
    REQUIRE(c.rows() == 5);
    VectorXd a(10), b(10);
    for (int i = 0; i < 10; ++i) {
        a[i] = recs[i].iter_err;
        b[i] = recs[i].mean_speed;
    }
    CHECK(std::abs(c(2, 4) - pearson(a, b)) <= 1e-12);
}
