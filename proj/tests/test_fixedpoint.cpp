#include "support.hpp"

using namespace odcal;

TEST_CASE("clamp map")
{
    const VectorXd nu = VectorXd::Constant(3, 10.0);
    VectorXd tau(3);
    tau << 20, 5, 100;
    const VectorXd c = clamp_map(tau, nu, 5.0);
    CHECK(c[0] == 20);
    CHECK(c[1] == 10);
    CHECK(c[2] == 50);
}

TEST_CASE("single Steffensen steps")
{
    FpConfig cfg;
    cfg.d = 1e4;
    const VectorXd nu = VectorXd::Constant(1, 0.01);
    const auto v = [](double x) { return VectorXd::Constant(1, x); };
    // F(t) = (t + 1) / 2 from 0.
    CHECK(steffensen_step<double>(v(0), v(0.5), v(0.75), nu, cfg)[0] == 1.0);
    // Constant map.
    CHECK(steffensen_step<double>(v(3), v(7), v(7), nu, cfg)[0] == 7.0);
    // Identity map: zero denominator falls back to tau1.
    CHECK(steffensen_step<double>(v(4), v(4), v(4), nu, cfg)[0] == 4.0);
    CHECK_THROWS_AS(steffensen_step<double>(v(1), v(1), VectorXd::Zero(2), nu, cfg), Error);
}

TEST_CASE("affine componentwise contraction is solved in one outer iteration")
{
    VectorXd nu(3), slope(3), fixed(3);
    nu << 10, 20, 30;
    slope << 0.3, -0.5, 0.8;
    fixed << 17, 33, 80;
    auto f = [&](const VectorXd& t) -> VectorXd { return fixed + slope.cwiseProduct(t - fixed); };
    FpConfig cfg;
    cfg.iteration_number = 1;
    const auto r = run_fixed_point<double>(f, nu, nu, cfg);
    CHECK((r.tau_star - fixed).cwiseAbs().maxCoeff() <= 1e-12 * fixed.maxCoeff());
    CHECK(r.evaluations == 2);
}

TEST_CASE("a fixed start stays put")
{
    const VectorXd nu = VectorXd::Constant(4, 10.0);
    const VectorXd tau = VectorXd::Constant(4, 25.0);
    const auto r = run_fixed_point<double>([&](const VectorXd&) -> VectorXd { return tau; }, tau, nu, FpConfig{});
    CHECK(r.error_trace[0] == 0);
    CHECK(r.tau_star == tau);
}

TEST_CASE("acceleration on a slow contraction")
{
    const VectorXd nu = VectorXd::LinSpaced(6, 10, 60);
    auto f = [&](const VectorXd& t) -> VectorXd { return 0.9 * t + 0.1 * nu; };
    const VectorXd start = 4.0 * nu;
    FpConfig cfg;
    cfg.iteration_number = 100;
    cfg.tolerance = 1e-6;
    const auto r = run_fixed_point<double>(f, start, nu, cfg);
    int plain = 0;
    VectorXd t = start;
    for (;;) {
        VectorXd next = f(t);
        ++plain;
        const double e = rel_error(t, next);
        t = std::move(next);
        if (e < 1e-6)
            break;
    }
    CHECK(r.error_trace.back() < 1e-6);
    CHECK(r.evaluations < plain);
}

TEST_CASE("output stays in the clamp box and the minimum trace never rises")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    const VectorXd nu = VectorXd::Constant(8, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        VectorXd a(8), c(8);
        for (auto& x : a)
            x = u(rng);
        for (auto& x : c)
            x = 40 * std::abs(u(rng));
        auto f = [&](const VectorXd& t) -> VectorXd {
            return clamp_map(VectorXd(c + a.cwiseProduct(t).array().sin().matrix() * 30), nu, 5.0);
        };
        const auto r = run_fixed_point<double>(f, nu, nu, FpConfig{});
        CHECK((r.tau_star.array() >= nu.array()).all());
        CHECK((r.tau_star.array() <= 5 * nu.array()).all());
        CHECK(r.tau_star.allFinite());
        for (std::size_t i = 1; i < r.min_error_trace.size(); ++i)
            CHECK(r.min_error_trace[i] <= r.min_error_trace[i - 1]);
    }
}
