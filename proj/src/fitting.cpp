#include "impa/fitting.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace impa {

void fd_jacobian(const ResidualFn& residuals, const std::vector<double>& p,
                 std::size_t m, std::vector<std::vector<double>>& jac) {
    const std::size_t n = p.size();
    jac.assign(m, std::vector<double>(n, 0.0));
    std::vector<double> rp(m), rm(m);
    std::vector<double> q = p;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = std::max(1e-6 * std::abs(p[j]), 1e-9);
        q[j] = p[j] + h;
        residuals(q, rp);
        q[j] = p[j] - h;
        residuals(q, rm);
        q[j] = p[j];
        for (std::size_t i = 0; i < m; ++i) jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
    }
}

LmResult levenberg_marquardt(const ResidualFn& residuals, std::size_t m,
                             std::vector<double> p0, const JacobianFn& jacobian,
                             const LmOptions& options) {
    const std::size_t n = p0.size();
    if (n == 0 || m < n)
        throw std::invalid_argument("levenberg_marquardt: need m >= n >= 1");

    std::vector<double> r(m);
    residuals(p0, r);
    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
    };
    double cost = norm2(r);

    std::vector<std::vector<double>> jac;
    double lambda = options.lambda0;
    LmResult out;
    out.params = p0;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        out.iterations = iter + 1;
        if (jacobian)
            jacobian(out.params, jac);
        else
            fd_jacobian(residuals, out.params, m, jac);

        Eigen::MatrixXd J(m, n);
        Eigen::VectorXd rv(m);
        for (std::size_t i = 0; i < m; ++i) {
            rv(static_cast<Eigen::Index>(i)) = r[i];
            for (std::size_t j = 0; j < n; ++j)
                J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jac[i][j];
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * rv;

        bool stepped = false;
        for (int attempt = 0; attempt < 24; ++attempt) {
            Eigen::MatrixXd A = JtJ;
            for (std::size_t j = 0; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                A(jj, jj) += lambda * std::max(JtJ(jj, jj), 1e-30);
            }
            const Eigen::VectorXd step = A.ldlt().solve(g);
            std::vector<double> trial(n);
            double step_rel = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                trial[j] = out.params[j] - step(jj);
                step_rel = std::max(step_rel, std::abs(step(jj)) /
                                                  std::max(std::abs(out.params[j]), 1e-30));
            }
            std::vector<double> rt(m);
            residuals(trial, rt);
            const double trial_cost = norm2(rt);
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                const double improvement = (cost - trial_cost) / std::max(cost, 1e-300);
                out.params = trial;
                r = rt;
                cost = trial_cost;
                lambda = std::max(lambda * 0.25, 1e-14);
                stepped = true;
                if (step_rel < options.step_tol || improvement < options.residual_tol) {
                    out.converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped) {
            // No downhill step at any damping: stationary point.
            out.converged = true;
            break;
        }
        if (out.converged) break;
    }
    out.residual_norm = std::sqrt(cost);
    return out;
}

}  // namespace impa
