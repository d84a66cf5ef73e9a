#pragma once

// Small Levenberg-Marquardt engine shared by the curve-fitting operations.

#include <functional>
#include <vector>

namespace impa {

// Fills `out` (size m) with residuals model(params) - data at each sample.
using ResidualFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

// Fills `jac` (m rows, n cols, row-major) with d r_i / d p_j.
using JacobianFn =
    std::function<void(const std::vector<double>&, std::vector<std::vector<double>>&)>;

struct LmOptions {
    int max_iterations = 200;
    double step_tol = 1e-14;      // relative parameter step
    double residual_tol = 1e-15;  // relative residual decrease
    double lambda0 = 1e-3;
};

struct LmResult {
    std::vector<double> params;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimizes ||r(p)||^2 starting from p0. When no analytic Jacobian is given,
// central finite differences are used (see fd_jacobian).
LmResult levenberg_marquardt(const ResidualFn& residuals, std::size_t m,
                             std::vector<double> p0,
                             const JacobianFn& jacobian = nullptr,
                             const LmOptions& options = {});

// Central-difference Jacobian with step h_j = max(1e-6*|p_j|, 1e-9).
void fd_jacobian(const ResidualFn& residuals, const std::vector<double>& p,
                 std::size_t m, std::vector<std::vector<double>>& jac);

}  // namespace impa
