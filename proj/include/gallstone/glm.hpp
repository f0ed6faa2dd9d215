#ifndef GALLSTONE_GLM_HPP
#define GALLSTONE_GLM_HPP

#include <Eigen/Dense>
#include <cmath>

#include "gallstone/common.hpp"

namespace gallstone::glm {

inline double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow
inline double softplus(double eta) {
    if (eta > 35.0) return eta;
    if (eta < -35.0) return std::exp(eta);
    return std::log1p(std::exp(eta));
}

inline double bernoulli_nll(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    double nll = 0.0;
    for (int i = 0; i < eta.size(); ++i) nll += softplus(eta(i)) - (y(i) == 1 ? eta(i) : 0.0);
    return nll;
}

struct IrlsResult {
    Eigen::VectorXd beta;
    int n_iter = 0;
    bool converged = false;
    double grad_norm = 0.0;
};

// Newton/IRLS maximum likelihood for a Bernoulli GLM with logit link; y may be
// 0/1 or fractional responses in [0,1]. X must already contain the intercept
// column if one is wanted. Stops when the score-vector infinity norm drops
// below tol.
inline IrlsResult irls_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tol = 1e-8,
                                int max_iter = 100, double separation_limit = 1e6) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    if (y.size() != n) throw DataError("irls_logistic: dimension mismatch");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("irls_logistic: non-finite values");

    IrlsResult res;
    res.beta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd p(n), w(n), z(n);
    for (res.n_iter = 0; res.n_iter < max_iter; ++res.n_iter) {
        const Eigen::VectorXd eta = X * res.beta;
        for (int i = 0; i < n; ++i) {
            p(i) = sigmoid(eta(i));
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-10);
            z(i) = eta(i) + (y(i) - p(i)) / w(i);
        }
        const Eigen::VectorXd grad = X.transpose() * (y - p);
        res.grad_norm = grad.lpNorm<Eigen::Infinity>();
        if (res.grad_norm < tol) {
            res.converged = true;
            return res;
        }
        const Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd XtWz = X.transpose() * (w.array() * z.array()).matrix();
        res.beta = XtWX.ldlt().solve(XtWz);
        if (!res.beta.allFinite() || res.beta.lpNorm<Eigen::Infinity>() > separation_limit)
            throw NumericError("irls_logistic: coefficients diverged (possible complete separation)");
    }
    return res;
}

}  // namespace gallstone::glm

#endif
