#ifndef GALLSTONE_LASSO_HPP
#define GALLSTONE_LASSO_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/common.hpp"
#include "gallstone/dataset.hpp"
#include "gallstone/glm.hpp"

namespace gallstone::lasso {

enum class Family { gaussian, binomial };

struct LassoParams {
    double gamma = 1.0;
    int n_lambda = 100;
    double lambda_min_ratio = 1e-3;
    double tol = 1e-7;
    int max_iter = 10000;
    Family family = Family::binomial;
    bool one_se_rule = false;
    int n_threads = 1;

    void validate() const {
        if (!(gamma > 0.0)) throw ConfigError("LassoParams: gamma must be > 0");
        if (n_lambda < 2) throw ConfigError("LassoParams: n_lambda must be >= 2");
        if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0))
            throw ConfigError("LassoParams: lambda_min_ratio must be in (0,1)");
        if (!(tol > 0.0)) throw ConfigError("LassoParams: tol must be > 0");
        if (max_iter < 1) throw ConfigError("LassoParams: max_iter must be >= 1");
    }
};

// Penalty weights; an infinite entry pins that coefficient to exactly zero.
using WeightVector = std::vector<double>;

struct InitialFit {
    double intercept = 0.0;
    Eigen::VectorXd slopes;
};

// Pilot estimate the adaptive weights are built from: OLS for the gaussian
// family (ridge-stabilized if X'X is singular), IRLS maximum likelihood for
// binomial.
inline InitialFit initial_estimate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Family family) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (n <= 1) throw DataError("initial_estimate: need n > 1");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("initial_estimate: non-finite input");

    InitialFit fit;
    if (family == Family::gaussian) {
        const Eigen::RowVectorXd xm = X.colwise().mean();
        const double ym = y.mean();
        const Eigen::MatrixXd Xc = X.rowwise() - xm;
        const Eigen::VectorXd yc = y.array() - ym;
        Eigen::MatrixXd G = Xc.transpose() * Xc;
        const Eigen::VectorXd b = Xc.transpose() * yc;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
        Eigen::VectorXd beta;
        bool ok = ldlt.info() == Eigen::Success;
        if (ok) {
            beta = ldlt.solve(b);
            ok = (G * beta - b).norm() <= 1e-8 * (1.0 + b.norm());
        }
        if (!ok) {
            const double ridge = 1e-6 * G.trace() / p;
            G.diagonal().array() += ridge;
            beta = G.ldlt().solve(b);
        }
        fit.slopes = beta;
        fit.intercept = ym - xm * beta;
    } else {
        if (y.minCoeff() == y.maxCoeff()) {
            // constant outcome: slopes zero, intercept the base-rate logit
            const double rate = y(0);
            if (!(rate > 0.0 && rate < 1.0))
                throw DataError("initial_estimate: constant binomial outcome has no finite intercept");
            fit.slopes = Eigen::VectorXd::Zero(p);
            fit.intercept = std::log(rate / (1.0 - rate));
            return fit;
        }
        Eigen::MatrixXd design(n, p + 1);
        design.col(0).setOnes();
        design.rightCols(p) = X;
        const auto res = glm::irls_logistic(design, y, 1e-8);
        fit.intercept = res.beta(0);
        fit.slopes = res.beta.tail(p);
    }
    return fit;
}

// omega_j = 1 / |beta_j|^gamma; coefficients below 1e-10 are hard-excluded.
inline WeightVector adaptive_weights(const Eigen::VectorXd& beta_init, double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("adaptive_weights: gamma must be > 0");
    WeightVector w(beta_init.size());
    for (int j = 0; j < beta_init.size(); ++j) {
        const double a = std::abs(beta_init(j));
        w[j] = (a < 1e-10) ? kInfWeight : 1.0 / std::pow(a, gamma);
    }
    return w;
}

struct LassoFit {
    double intercept = 0.0;
    Eigen::VectorXd coef;
    double lambda = 0.0;
    double objective_value = 0.0;
    int n_iter = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // one entry per sweep / outer step
};

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

namespace detail {

// Boundary features can come out of the solver with ~1e-12 coefficients when
// lambda sits exactly at their activation point; zero them when the exact KKT
// zero-coefficient condition holds so the selected set is well defined.
inline void snap_boundary_zeros(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad_base, double lambda,
                                const WeightVector& w, Eigen::VectorXd& beta) {
    const double scale = 1e-9 * std::max(1.0, beta.lpNorm<Eigen::Infinity>());
    for (int j = 0; j < beta.size(); ++j) {
        if (beta(j) == 0.0 || std::abs(beta(j)) > scale || !std::isfinite(w[j])) continue;
        if (std::abs(X.col(j).dot(grad_base)) <= lambda * w[j] * (1.0 + 1e-9)) beta(j) = 0.0;
    }
}

inline double penalty_value(const Eigen::VectorXd& beta, const WeightVector& w, double lambda) {
    double s = 0.0;
    for (int j = 0; j < beta.size(); ++j)
        if (std::isfinite(w[j]) && beta(j) != 0.0) s += w[j] * std::abs(beta(j));
    return lambda * s;
}

// One full cycle of weighted-least-squares coordinate updates. obs_w are the
// observation weights (all ones for gaussian); r is the working residual,
// kept consistent with (b0, beta). Returns the largest coefficient change.
inline double cd_sweep(const Eigen::MatrixXd& X, const Eigen::VectorXd& obs_w, Eigen::VectorXd& r, double& b0,
                       Eigen::VectorXd& beta, double lambda, const WeightVector& w,
                       const Eigen::VectorXd& wcolsq, double sum_w) {
    double max_delta = 0.0;
    const double db0 = obs_w.dot(r) / sum_w;
    b0 += db0;
    r.array() -= db0;
    max_delta = std::abs(db0);
    for (int j = 0; j < beta.size(); ++j) {
        if (!std::isfinite(w[j]) || wcolsq(j) <= 0.0) continue;  // pinned to zero
        const double z = X.col(j).dot((obs_w.array() * r.array()).matrix()) + wcolsq(j) * beta(j);
        const double bj = soft_threshold(z, lambda * w[j]) / wcolsq(j);
        const double delta = bj - beta(j);
        if (delta != 0.0) {
            r -= delta * X.col(j);
            beta(j) = bj;
            max_delta = std::max(max_delta, std::abs(delta));
        }
    }
    return max_delta;
}

}  // namespace detail

// Cyclic coordinate descent for 0.5*||y - b0 - X beta||^2 + lambda*sum w_j|beta_j|
// (gaussian) or the Bernoulli negative log-likelihood plus the same penalty
// (binomial, via iteratively reweighted quadratic majorization). The intercept
// is unpenalized. Optional warm start via `start`.
inline LassoFit coordinate_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                   const WeightVector& weights, const LassoParams& params,
                                   const LassoFit* start = nullptr) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (static_cast<int>(weights.size()) != p) throw ConfigError("coordinate_descent: weight length mismatch");
    if (!(lambda >= 0.0)) throw ConfigError("coordinate_descent: lambda must be >= 0");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("coordinate_descent: non-finite input");

    LassoFit fit;
    fit.lambda = lambda;
    fit.coef = Eigen::VectorXd::Zero(p);
    if (start) {
        fit.coef = start->coef;
        fit.intercept = start->intercept;
        for (int j = 0; j < p; ++j)
            if (!std::isfinite(weights[j])) fit.coef(j) = 0.0;
    }

    if (params.family == Family::gaussian) {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
        Eigen::VectorXd colsq(p);
        for (int j = 0; j < p; ++j) colsq(j) = X.col(j).squaredNorm();
        Eigen::VectorXd r = y - Eigen::VectorXd::Constant(n, fit.intercept) - X * fit.coef;
        for (fit.n_iter = 0; fit.n_iter < params.max_iter; ++fit.n_iter) {
            const double max_delta =
                detail::cd_sweep(X, ones, r, fit.intercept, fit.coef, lambda, weights, colsq, n);
            fit.objective_trace.push_back(0.5 * r.squaredNorm() +
                                          detail::penalty_value(fit.coef, weights, lambda));
            if (max_delta < params.tol) {
                fit.converged = true;
                ++fit.n_iter;
                break;
            }
        }
        detail::snap_boundary_zeros(X, -r, lambda, weights, fit.coef);
        fit.objective_value = fit.objective_trace.empty() ? 0.0 : fit.objective_trace.back();
        return fit;
    }

    // binomial: outer majorization, inner weighted coordinate descent, with a
    // step-halving guard so the penalized deviance never increases
    auto objective = [&](double b0, const Eigen::VectorXd& beta) {
        const Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, b0) + X * beta;
        double nll = 0.0;
        for (int i = 0; i < n; ++i) nll += glm::softplus(eta(i)) - y(i) * eta(i);
        return nll + detail::penalty_value(beta, weights, lambda);
    };

    double current_obj = objective(fit.intercept, fit.coef);
    fit.objective_trace.push_back(current_obj);
    const int max_outer = std::max(1, std::min(params.max_iter, 200));
    for (int outer = 0; outer < max_outer; ++outer) {
        const Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, fit.intercept) + X * fit.coef;
        Eigen::VectorXd obs_w(n), z(n);
        for (int i = 0; i < n; ++i) {
            const double pi = glm::sigmoid(eta(i));
            obs_w(i) = std::max(pi * (1.0 - pi), 1e-8);
            z(i) = eta(i) + (y(i) - pi) / obs_w(i);
        }
        Eigen::VectorXd wcolsq(p);
        for (int j = 0; j < p; ++j) wcolsq(j) = (obs_w.array() * X.col(j).array().square()).sum();
        const double sum_w = obs_w.sum();

        double b0 = fit.intercept;
        Eigen::VectorXd beta = fit.coef;
        Eigen::VectorXd r = z - Eigen::VectorXd::Constant(n, b0) - X * beta;
        double max_delta = 0.0;
        for (int sweep = 0; sweep < 1000; ++sweep) {
            max_delta = detail::cd_sweep(X, obs_w, r, b0, beta, lambda, weights, wcolsq, sum_w);
            ++fit.n_iter;
            if (max_delta < params.tol || fit.n_iter >= params.max_iter) break;
        }

        double t = 1.0;
        double cand_obj = objective(b0, beta);
        while (cand_obj > current_obj && t > 1e-10) {
            t *= 0.5;
            b0 = fit.intercept + t * (b0 - fit.intercept);
            beta = fit.coef + t * (beta - fit.coef);
            cand_obj = objective(b0, beta);
        }
        const double outer_delta =
            std::max(std::abs(b0 - fit.intercept), (beta - fit.coef).lpNorm<Eigen::Infinity>());
        fit.intercept = b0;
        fit.coef = beta;
        current_obj = cand_obj;
        fit.objective_trace.push_back(current_obj);
        if (outer_delta < params.tol) {
            fit.converged = true;
            break;
        }
        if (fit.n_iter >= params.max_iter) break;
    }
    {
        const Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, fit.intercept) + X * fit.coef;
        Eigen::VectorXd grad_base(n);
        for (int i = 0; i < n; ++i) grad_base(i) = glm::sigmoid(eta(i)) - y(i);
        detail::snap_boundary_zeros(X, grad_base, lambda, weights, fit.coef);
    }
    fit.objective_value = current_obj;
    return fit;
}

// Smallest lambda at which every slope is zero (intercept-only model).
inline double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const WeightVector& weights,
                         Family family) {
    const int p = static_cast<int>(X.cols());
    double base;
    if (family == Family::gaussian) {
        base = y.mean();
    } else {
        base = clamp_prob(y.mean());
    }
    const Eigen::VectorXd r = y.array() - base;
    double lmax = 0.0;
    for (int j = 0; j < p; ++j) {
        if (!std::isfinite(weights[j])) continue;
        lmax = std::max(lmax, std::abs(X.col(j).dot(r)) / weights[j]);
    }
    return (lmax > 0.0) ? lmax : 1.0;
}

inline Eigen::VectorXd make_lambda_grid(double lmax, int n_lambda, double min_ratio) {
    Eigen::VectorXd grid(n_lambda);
    const double log_max = std::log(lmax);
    const double log_min = std::log(lmax * min_ratio);
    for (int i = 0; i < n_lambda; ++i)
        grid(i) = std::exp(log_max + (log_min - log_max) * i / (n_lambda - 1));
    return grid;
}

// Warm-started fits along a descending lambda grid.
inline std::vector<LassoFit> fit_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& grid, const WeightVector& weights,
                                      const LassoParams& params) {
    std::vector<LassoFit> fits;
    fits.reserve(grid.size());
    const LassoFit* prev = nullptr;
    for (int i = 0; i < grid.size(); ++i) {
        fits.push_back(coordinate_descent(X, y, grid(i), weights, params, prev));
        prev = &fits.back();
    }
    return fits;
}

struct CvResult {
    Eigen::VectorXd lambda_grid;
    Eigen::VectorXd mean_cv_error;
    Eigen::VectorXd se_cv_error;
    double lambda_opt = 0.0;
    std::vector<int> selected_indices;
    LassoFit fit_at_opt;
    InitialFit initial;
    WeightVector weights;
};

namespace detail {

inline double heldout_error(const Eigen::MatrixXd& Xte, const Eigen::VectorXd& yte, const LassoFit& fit,
                            Family family) {
    const Eigen::VectorXd eta = Eigen::VectorXd::Constant(Xte.rows(), fit.intercept) + Xte * fit.coef;
    if (family == Family::gaussian) return (yte - eta).squaredNorm() / static_cast<double>(Xte.rows());
    double dev = 0.0;
    for (int i = 0; i < eta.size(); ++i) {
        const double pi = clamp_prob(glm::sigmoid(eta(i)));
        dev += -2.0 * (yte(i) * std::log(pi) + (1.0 - yte(i)) * std::log(1.0 - pi));
    }
    return dev / static_cast<double>(Xte.rows());
}

}  // namespace detail

// Cross-validated lambda selection with weights from a full-data pilot fit.
// Error is mean held-out deviance (binomial) or MSE (gaussian); lambda_opt
// minimizes the CV curve (or applies the one-SE rule when enabled), and the
// final model is the all-data refit at lambda_opt.
inline CvResult cv_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const data::FoldAssignment& folds,
                          const LassoParams& params) {
    params.validate();
    const int n = static_cast<int>(X.rows());
    if (static_cast<int>(folds.fold_index.size()) != n)
        throw ConfigError("cv_select: folds built on different n");

    CvResult cv;
    cv.initial = initial_estimate(X, y, params.family);
    cv.weights = adaptive_weights(cv.initial.slopes, params.gamma);
    const double lmax = lambda_max(X, y, cv.weights, params.family);
    cv.lambda_grid = make_lambda_grid(lmax, params.n_lambda, params.lambda_min_ratio);

    const int k = folds.k;
    Eigen::MatrixXd fold_err(k, params.n_lambda);
    parallel_for(static_cast<std::size_t>(k), params.n_threads, [&](std::size_t f) {
        std::vector<int> tr, te;
        for (int i = 0; i < n; ++i) (folds.fold_index[i] == static_cast<int>(f) ? te : tr).push_back(i);
        Eigen::MatrixXd Xtr(tr.size(), X.cols()), Xte(te.size(), X.cols());
        Eigen::VectorXd ytr(tr.size()), yte(te.size());
        for (std::size_t i = 0; i < tr.size(); ++i) {
            Xtr.row(i) = X.row(tr[i]);
            ytr(i) = y(tr[i]);
        }
        for (std::size_t i = 0; i < te.size(); ++i) {
            Xte.row(i) = X.row(te[i]);
            yte(i) = y(te[i]);
        }

        if (params.family == Family::binomial && (ytr.minCoeff() == ytr.maxCoeff())) {
            // single-class training fold: intercept-only model with clipped rate
            LassoFit flat;
            flat.coef = Eigen::VectorXd::Zero(X.cols());
            const double rate = clamp_prob(ytr.mean());
            flat.intercept = std::log(rate / (1.0 - rate));
            for (int l = 0; l < params.n_lambda; ++l)
                fold_err(f, l) = detail::heldout_error(Xte, yte, flat, params.family);
            return;
        }
        const auto path = fit_path(Xtr, ytr, cv.lambda_grid, cv.weights, params);
        for (int l = 0; l < params.n_lambda; ++l)
            fold_err(f, l) = detail::heldout_error(Xte, yte, path[l], params.family);
    });

    cv.mean_cv_error = fold_err.colwise().mean();
    cv.se_cv_error.resize(params.n_lambda);
    for (int l = 0; l < params.n_lambda; ++l) {
        const double m = cv.mean_cv_error(l);
        double ss = 0.0;
        for (int f = 0; f < k; ++f) ss += (fold_err(f, l) - m) * (fold_err(f, l) - m);
        cv.se_cv_error(l) = std::sqrt(ss / (k - 1)) / std::sqrt(static_cast<double>(k));
    }

    int opt = 0;
    for (int l = 1; l < params.n_lambda; ++l)
        if (cv.mean_cv_error(l) < cv.mean_cv_error(opt)) opt = l;
    if (params.one_se_rule) {
        const double limit = cv.mean_cv_error(opt) + cv.se_cv_error(opt);
        for (int l = 0; l < params.n_lambda; ++l)
            if (cv.mean_cv_error(l) <= limit) {
                opt = l;  // grid is descending, first hit is the largest lambda
                break;
            }
    }
    cv.lambda_opt = cv.lambda_grid(opt);

    const auto full_path = fit_path(X, y, cv.lambda_grid.head(opt + 1), cv.weights, params);
    cv.fit_at_opt = full_path.back();
    for (int j = 0; j < cv.fit_at_opt.coef.size(); ++j)
        if (cv.fit_at_opt.coef(j) != 0.0) cv.selected_indices.push_back(j);
    return cv;
}

inline CvResult cv_select(const data::FeatureTable& table, const data::FoldAssignment& folds,
                          const LassoParams& params) {
    return cv_select(table.values, table.outcome.cast<double>(), folds, params);
}

// Max KKT stationarity violation at the fitted point; 0 means exact.
inline double kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LassoFit& fit,
                           const WeightVector& weights, Family family) {
    const int n = static_cast<int>(X.rows());
    Eigen::VectorXd grad_base(n);
    const Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, fit.intercept) + X * fit.coef;
    if (family == Family::gaussian) {
        grad_base = eta - y;  // d/d_eta of 0.5*sum((y-eta)^2)
    } else {
        for (int i = 0; i < n; ++i) grad_base(i) = glm::sigmoid(eta(i)) - y(i);
    }
    double worst = std::abs(grad_base.sum());  // intercept stationarity
    for (int j = 0; j < X.cols(); ++j) {
        if (!std::isfinite(weights[j])) continue;
        const double g = X.col(j).dot(grad_base);
        if (fit.coef(j) != 0.0)
            worst = std::max(worst, std::abs(g + fit.lambda * weights[j] * (fit.coef(j) > 0 ? 1.0 : -1.0)));
        else
            worst = std::max(worst, std::max(0.0, std::abs(g) - fit.lambda * weights[j]));
    }
    return worst;
}

inline nlohmann::json selection_report_json(const CvResult& cv, const std::vector<std::string>& names) {
    nlohmann::json j;
    j["lambda_grid"] = std::vector<double>(cv.lambda_grid.begin(), cv.lambda_grid.end());
    j["mean_cv_error"] = std::vector<double>(cv.mean_cv_error.begin(), cv.mean_cv_error.end());
    j["se_cv_error"] = std::vector<double>(cv.se_cv_error.begin(), cv.se_cv_error.end());
    j["lambda_opt"] = cv.lambda_opt;
    nlohmann::json sel = nlohmann::json::array();
    nlohmann::json coefs = nlohmann::json::object();
    for (int idx : cv.selected_indices) {
        sel.push_back(names[idx]);
        coefs[names[idx]] = cv.fit_at_opt.coef(idx);
    }
    j["selected_features"] = sel;
    j["coefficients"] = coefs;
    j["intercept"] = cv.fit_at_opt.intercept;
    j["converged"] = cv.fit_at_opt.converged;
    return j;
}

}  // namespace gallstone::lasso

#endif
