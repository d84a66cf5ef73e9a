#include <doctest.h>

#include <cmath>
#include <vector>

#include "impa/fitting.hpp"

using namespace impa;

TEST_CASE("levenberg_marquardt solves a linear least-squares problem exactly") {
    // y = 2.5 x - 1.25 sampled on 10 points.
    std::vector<double> xs, ys;
    for (int i = 0; i < 10; ++i) {
        xs.push_back(i);
        ys.push_back(2.5 * i - 1.25);
    }
    const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < xs.size(); ++i) r[i] = p[0] * xs[i] + p[1] - ys[i];
    };
    const LmResult res = levenberg_marquardt(fn, xs.size(), {1.0, 0.0});
    CHECK(res.converged);
    CHECK(res.params[0] == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(res.params[1] == doctest::Approx(-1.25).epsilon(1e-8));
    CHECK(res.residual_norm < 1e-8);
}

TEST_CASE("levenberg_marquardt recovers a nonlinear model") {
    // y = 3 exp(-x / 1.7) + 0.4
    std::vector<double> xs, ys;
    for (int i = 0; i < 25; ++i) {
        const double x = 0.3 * i;
        xs.push_back(x);
        ys.push_back(3.0 * std::exp(-x / 1.7) + 0.4);
    }
    const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            r[i] = p[0] * std::exp(-xs[i] / p[2]) + p[1] - ys[i];
    };
    const LmResult res = levenberg_marquardt(fn, xs.size(), {1.0, 0.0, 1.0});
    CHECK(res.converged);
    CHECK(res.params[0] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(res.params[1] == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(res.params[2] == doctest::Approx(1.7).epsilon(1e-7));
}

TEST_CASE("fd_jacobian matches an analytic jacobian") {
    std::vector<double> xs;
    for (int i = 0; i < 12; ++i) xs.push_back(0.25 * i);
    const ResidualFn fn = [&](const std::vector<double>& p, std::vector<double>& r) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            r[i] = p[0] * std::sin(p[1] * xs[i]);
    };
    const std::vector<double> p{1.3, 0.9};
    std::vector<std::vector<double>> jac;
    fd_jacobian(fn, p, xs.size(), jac);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(jac[i][0] == doctest::Approx(std::sin(p[1] * xs[i])).epsilon(1e-7));
        CHECK(jac[i][1] ==
              doctest::Approx(p[0] * xs[i] * std::cos(p[1] * xs[i])).epsilon(1e-6));
    }
}

TEST_CASE("levenberg_marquardt validates its inputs") {
    const ResidualFn fn = [](const std::vector<double>&, std::vector<double>& r) {
        r[0] = 0.0;
    };
    CHECK_THROWS_AS(levenberg_marquardt(fn, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(levenberg_marquardt(fn, 1, {1.0, 2.0}), std::invalid_argument);
}
