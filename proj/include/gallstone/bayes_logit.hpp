#ifndef GALLSTONE_BAYES_LOGIT_HPP
#define GALLSTONE_BAYES_LOGIT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/common.hpp"
#include "gallstone/dataset.hpp"
#include "gallstone/glm.hpp"
#include "gallstone/mcmc_diagnostics.hpp"
#include "gallstone/ode.hpp"

namespace gallstone::bayes {

inline const std::vector<std::string>& default_main_effects() {
    static const std::vector<std::string> v = {"CRP", "VitD", "ECF", "BM", "Hyper",
                                               "VFA", "HGB", "DM",  "CAD"};
    return v;
}

// Column names feeding the four interaction features, overridable when the
// dataset uses different labels.
struct InteractionColumns {
    std::string ecf = "ECF", vitd = "VitD", crp = "CRP", hgb = "HGB", hyper = "Hyper", bm = "BM", dm = "DM";
};

struct FinalDesign {
    Eigen::MatrixXd X;  // n x (1 + mains + 4), leading intercept column
    std::vector<std::string> names;
    int n_main = 0;
    bool has_interactions = false;
};

// Assembles intercept + main effects + the four interaction covariates, in
// the fixed reporting order.
inline FinalDesign build_design(const data::FeatureTable& table,
                                const std::vector<std::string>& main_effects = default_main_effects(),
                                bool with_interactions = true,
                                const InteractionColumns& cols = InteractionColumns{}) {
    const int n = table.n();
    FinalDesign d;
    d.n_main = static_cast<int>(main_effects.size());
    d.has_interactions = with_interactions;
    const int dim = 1 + d.n_main + (with_interactions ? 4 : 0);
    d.X.resize(n, dim);
    d.X.col(0).setOnes();
    d.names.push_back("Intercept");
    for (int j = 0; j < d.n_main; ++j) {
        d.X.col(1 + j) = table.values.col(table.column_index(main_effects[j]));
        d.names.push_back(main_effects[j]);
    }
    if (with_interactions) {
        const int c_ecf = table.column_index(cols.ecf), c_vitd = table.column_index(cols.vitd),
                  c_crp = table.column_index(cols.crp), c_hgb = table.column_index(cols.hgb),
                  c_hyper = table.column_index(cols.hyper), c_bm = table.column_index(cols.bm),
                  c_dm = table.column_index(cols.dm);
        for (int i = 0; i < n; ++i) {
            ode::InteractionInputs in;
            in.ecf = table.values(i, c_ecf);
            in.vitd = table.values(i, c_vitd);
            in.crp = table.values(i, c_crp);
            in.hgb = table.values(i, c_hgb);
            in.hyper = table.values(i, c_hyper);
            in.bm = table.values(i, c_bm);
            in.dm = table.values(i, c_dm);
            const auto f = ode::interaction_features(in);
            d.X(i, 1 + d.n_main + 0) = f.f1;
            d.X(i, 1 + d.n_main + 1) = f.f2;
            d.X(i, 1 + d.n_main + 2) = f.f3;
            d.X(i, 1 + d.n_main + 3) = f.f4;
        }
        d.names.push_back("ECFxVitD");
        d.names.push_back("CRPxHGB");
        d.names.push_back("VitDxHyper");
        d.names.push_back("BMxDM");
    }
    return d;
}

struct PriorSpec {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;

    // intercept N(0,10), every other coefficient N(0,5)
    static PriorSpec weakly_informative(int dim) {
        PriorSpec p;
        p.mean = Eigen::VectorXd::Zero(dim);
        p.sd = Eigen::VectorXd::Constant(dim, 5.0);
        if (dim > 0) p.sd(0) = 10.0;
        return p;
    }
};

// Bernoulli log-likelihood with logit link plus independent normal log-priors,
// with its analytic gradient.
inline std::pair<double, Eigen::VectorXd> log_posterior(const Eigen::VectorXd& beta, const Eigen::MatrixXd& X,
                                                        const Eigen::VectorXi& y, const PriorSpec& prior) {
    if (beta.size() != X.cols() || X.rows() != y.size() || prior.sd.size() != beta.size())
        throw ConfigError("log_posterior: dimension mismatch");
    if (!beta.allFinite()) throw NumericError("log_posterior: non-finite beta");

    const Eigen::VectorXd eta = X * beta;
    double value = 0.0;
    Eigen::VectorXd resid(y.size());
    for (int i = 0; i < y.size(); ++i) {
        const double yi = (y(i) == 1) ? 1.0 : 0.0;
        value += yi * eta(i) - glm::softplus(eta(i));
        resid(i) = yi - glm::sigmoid(eta(i));
    }
    Eigen::VectorXd grad = X.transpose() * resid;
    for (int j = 0; j < beta.size(); ++j) {
        const double z = (beta(j) - prior.mean(j)) / prior.sd(j);
        value += -0.5 * z * z - std::log(prior.sd(j)) - 0.5 * std::log(2.0 * M_PI);
        grad(j) -= z / prior.sd(j);
    }
    return {value, std::move(grad)};
}

struct McmcSettings {
    int n_chains = 4;
    int n_iter = 4000;  // total per chain, including warmup
    int n_warmup = 1000;
    std::uint64_t seed = 1;
    int n_threads = 1;
    double target_accept = 0.8;
    int leapfrog_min = 8;
    int leapfrog_max = 24;
    double init_spread = 0.5;     // sd of the random chain initializations
    bool check_rank = true;    // reject collinear designs up front
    bool random_walk = false;  // debugging fallback sampler

    void validate() const {
        if (n_chains < 1) throw ConfigError("McmcSettings: n_chains must be >= 1");
        if (n_warmup >= n_iter) throw ConfigError("McmcSettings: warmup must be < n_iter");
        if (leapfrog_min < 1 || leapfrog_max < leapfrog_min)
            throw ConfigError("McmcSettings: bad leapfrog bounds");
    }
};

namespace mcmc_detail {

struct Scaling {
    Eigen::VectorXd center;  // 0 for intercept / binary columns
    Eigen::VectorXd scale;   // 1 for intercept / binary columns
};

// Standardize non-binary, non-intercept columns for sampler geometry.
inline Scaling design_scaling(const Eigen::MatrixXd& X) {
    const int d = static_cast<int>(X.cols());
    Scaling s;
    s.center = Eigen::VectorXd::Zero(d);
    s.scale = Eigen::VectorXd::Ones(d);
    for (int j = 1; j < d; ++j) {
        bool binary = true;
        for (int i = 0; i < X.rows() && binary; ++i)
            if (X(i, j) != 0.0 && X(i, j) != 1.0) binary = false;
        if (binary) continue;
        const double m = X.col(j).mean();
        const double sd = std::sqrt((X.col(j).array() - m).square().sum() / std::max(1, (int)X.rows() - 1));
        if (sd > 0.0) {
            s.center(j) = m;
            s.scale(j) = sd;
        }
    }
    return s;
}

// Maps a coefficient vector on the standardized scale back to input units.
inline Eigen::VectorXd to_raw_units(const Eigen::VectorXd& beta_std, const Scaling& s) {
    Eigen::VectorXd raw = beta_std;
    double shift = 0.0;
    for (int j = 1; j < beta_std.size(); ++j) {
        raw(j) = beta_std(j) / s.scale(j);
        shift += beta_std(j) * s.center(j) / s.scale(j);
    }
    raw(0) = beta_std(0) - shift;
    return raw;
}

struct ChainResult {
    Eigen::MatrixXd draws;  // post-warmup, standardized scale
    double accept_rate = 0.0;
    bool low_acceptance = false;
};

struct DualAveraging {
    double mu = 0.0, log_eps = 0.0, log_eps_bar = 0.0, h_bar = 0.0;
    double gamma = 0.05, t0 = 10.0, kappa = 0.75;
    int count = 0;

    void reset(double eps) {
        mu = std::log(10.0 * eps);
        log_eps = std::log(eps);
        log_eps_bar = std::log(eps);
        h_bar = 0.0;
        count = 0;
    }
    double update(double accept_prob, double target) {
        ++count;
        const double frac = 1.0 / (count + t0);
        h_bar = (1.0 - frac) * h_bar + frac * (target - accept_prob);
        log_eps = mu - std::sqrt(static_cast<double>(count)) / gamma * h_bar;
        const double w = std::pow(static_cast<double>(count), -kappa);
        log_eps_bar = w * log_eps + (1.0 - w) * log_eps_bar;
        return std::exp(log_eps);
    }
};

template <typename LogPost>
ChainResult run_hmc_chain(const LogPost& logpost, int dim, const McmcSettings& settings, int chain_id,
                          const Eigen::VectorXd& init) {
    Rng rng(derive_seed(settings.seed, "bayes_chain", static_cast<std::uint64_t>(chain_id)));
    const int n_keep = settings.n_iter - settings.n_warmup;
    ChainResult res;
    res.draws.resize(n_keep, dim);

    Eigen::VectorXd theta = init;
    auto [value, grad] = logpost(theta);
    if (!std::isfinite(value)) throw NumericError("run_chains: non-finite log posterior at init");

    Eigen::VectorXd inv_mass = Eigen::VectorXd::Ones(dim);  // posterior variance estimates

    // heuristic initial step size: double/halve until the one-step acceptance
    // probability crosses 1/2
    double eps = 0.1;
    {
        Eigen::VectorXd p(dim);
        for (int j = 0; j < dim; ++j) p(j) = rng.normal() / std::sqrt(inv_mass(j));
        auto one_step = [&](double e) {
            Eigen::VectorXd th = theta, pp = p, g = grad;
            double v = value;
            pp += 0.5 * e * g;
            th += e * (inv_mass.array() * pp.array()).matrix();
            auto [v2, g2] = logpost(th);
            v = v2;
            pp += 0.5 * e * g2;
            if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
            const double k0 = 0.5 * (p.array().square() * inv_mass.array()).sum();
            const double k1 = 0.5 * (pp.array().square() * inv_mass.array()).sum();
            return (v - k1) - (value - k0);
        };
        double dh = one_step(eps);
        const double dir = (dh > std::log(0.5)) ? 1.0 : -1.0;
        for (int it = 0; it < 50; ++it) {
            if (dir > 0 && dh <= std::log(0.5)) break;
            if (dir < 0 && dh >= std::log(0.5)) break;
            eps *= (dir > 0) ? 2.0 : 0.5;
            if (eps > 1e3 || eps < 1e-8) break;
            dh = one_step(eps);
        }
    }
    DualAveraging da;
    da.reset(eps);

    const int mass_window_start = settings.n_warmup / 4;
    const int mass_window_end = settings.n_warmup / 2;
    std::vector<Eigen::VectorXd> window;
    window.reserve(std::max(0, mass_window_end - mass_window_start));

    int accepted_post = 0;
    for (int iter = 0; iter < settings.n_iter; ++iter) {
        const int L = rng.uniform_int(settings.leapfrog_min, settings.leapfrog_max);
        Eigen::VectorXd p(dim);
        for (int j = 0; j < dim; ++j) p(j) = rng.normal() / std::sqrt(inv_mass(j));
        const double kin0 = 0.5 * (p.array().square() * inv_mass.array()).sum();

        Eigen::VectorXd th = theta, g = grad;
        double v = value;
        bool diverged = false;
        p += 0.5 * eps * g;
        for (int l = 0; l < L; ++l) {
            th += eps * (inv_mass.array() * p.array()).matrix();
            auto [v2, g2] = logpost(th);
            v = v2;
            g = g2;
            if (!std::isfinite(v)) {
                diverged = true;
                break;
            }
            p += ((l + 1 < L) ? eps : 0.5 * eps) * g;
        }
        double accept_prob = 0.0;
        if (!diverged) {
            const double kin1 = 0.5 * (p.array().square() * inv_mass.array()).sum();
            const double dh = (v - kin1) - (value - kin0);
            accept_prob = std::min(1.0, std::exp(std::min(dh, 0.0)));
            if (std::log(rng.u01() + 1e-300) < dh) {
                theta = th;
                value = v;
                grad = g;
                if (iter >= settings.n_warmup) ++accepted_post;
            }
        }

        if (iter < settings.n_warmup) {
            eps = da.update(accept_prob, settings.target_accept);
            if (iter >= mass_window_start && iter < mass_window_end) window.push_back(theta);
            if (iter + 1 == mass_window_end && window.size() >= 10) {
                for (int j = 0; j < dim; ++j) {
                    std::vector<double> vals;
                    vals.reserve(window.size());
                    for (const auto& w : window) vals.push_back(w(j));
                    inv_mass(j) = std::max(sample_var(vals), 1e-8);
                }
                da.reset(std::exp(da.log_eps_bar));
            }
            if (iter + 1 == settings.n_warmup) eps = std::exp(da.log_eps_bar);
        } else {
            res.draws.row(iter - settings.n_warmup) = theta.transpose();
        }
    }
    res.accept_rate = static_cast<double>(accepted_post) / std::max(1, settings.n_iter - settings.n_warmup);
    res.low_acceptance = res.accept_rate < 0.1;
    return res;
}

// Adaptive random-walk Metropolis; kept as a debugging reference sampler.
template <typename LogPost>
ChainResult run_rw_chain(const LogPost& logpost, int dim, const McmcSettings& settings, int chain_id,
                         const Eigen::VectorXd& init) {
    Rng rng(derive_seed(settings.seed, "bayes_chain", static_cast<std::uint64_t>(chain_id)));
    const int n_keep = settings.n_iter - settings.n_warmup;
    ChainResult res;
    res.draws.resize(n_keep, dim);
    Eigen::VectorXd theta = init;
    double value = logpost(theta).first;
    double scale = 2.38 / std::sqrt(static_cast<double>(dim));
    int accepted_post = 0;
    for (int iter = 0; iter < settings.n_iter; ++iter) {
        Eigen::VectorXd prop = theta;
        for (int j = 0; j < dim; ++j) prop(j) += scale * rng.normal();
        const double pv = logpost(prop).first;
        const bool accept = std::isfinite(pv) && std::log(rng.u01() + 1e-300) < pv - value;
        if (accept) {
            theta = prop;
            value = pv;
            if (iter >= settings.n_warmup) ++accepted_post;
        }
        if (iter < settings.n_warmup) scale *= accept ? 1.01 : 0.995;  // crude 0.23-ish targeting
        if (iter >= settings.n_warmup) res.draws.row(iter - settings.n_warmup) = theta.transpose();
    }
    res.accept_rate = static_cast<double>(accepted_post) / std::max(1, n_keep);
    res.low_acceptance = res.accept_rate < 0.05;
    return res;
}

}  // namespace mcmc_detail

// Gradient-based MCMC for the Bayesian logistic model. Chains adapt step size
// and a diagonal preconditioner during warmup only; draws are returned in
// input units. Optional per-chain initial points (columns of chain_inits)
// override the default jittered start.
inline PosteriorDraws run_chains(const FinalDesign& design, const Eigen::VectorXi& y, const PriorSpec& prior,
                                 const McmcSettings& settings,
                                 const Eigen::MatrixXd* chain_inits = nullptr) {
    settings.validate();
    const int d = static_cast<int>(design.X.cols());
    if (prior.sd.size() != d) throw ConfigError("run_chains: prior dimension mismatch");

    const auto scaling = mcmc_detail::design_scaling(design.X);
    Eigen::MatrixXd Xs = design.X;
    for (int j = 1; j < d; ++j)
        if (scaling.scale(j) != 1.0 || scaling.center(j) != 0.0)
            Xs.col(j) = (design.X.col(j).array() - scaling.center(j)) / scaling.scale(j);

    if (settings.check_rank) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
        qr.setThreshold(1e-8);
        if (qr.rank() < d) {
            std::string msg = "run_chains: rank-deficient design; collinear columns:";
            const auto perm = qr.colsPermutation().indices();
            for (int j = qr.rank(); j < d; ++j) msg += ' ' + design.names[perm(j)];
            throw DataError(msg);
        }
    }

    auto logpost = [&](const Eigen::VectorXd& beta) { return log_posterior(beta, Xs, y, prior); };

    std::vector<mcmc_detail::ChainResult> results(settings.n_chains);
    parallel_for(static_cast<std::size_t>(settings.n_chains), settings.n_threads, [&](std::size_t c) {
        Eigen::VectorXd init(d);
        if (chain_inits) {
            init = chain_inits->col(static_cast<int>(c));
        } else {
            Rng init_rng(derive_seed(settings.seed, "bayes_init", c));
            for (int j = 0; j < d; ++j) init(j) = settings.init_spread * init_rng.normal();
        }
        results[c] = settings.random_walk
                         ? mcmc_detail::run_rw_chain(logpost, d, settings, static_cast<int>(c), init)
                         : mcmc_detail::run_hmc_chain(logpost, d, settings, static_cast<int>(c), init);
    });

    PosteriorDraws draws;
    draws.names = design.names;
    draws.iters_per_chain = settings.n_iter;
    draws.warmup = settings.n_warmup;
    draws.seed = settings.seed;
    for (int c = 0; c < settings.n_chains; ++c) {
        Eigen::MatrixXd raw(results[c].draws.rows(), d);
        for (int i = 0; i < raw.rows(); ++i)
            raw.row(i) = mcmc_detail::to_raw_units(results[c].draws.row(i).transpose(), scaling).transpose();
        draws.chains.push_back(std::move(raw));
        draws.accept_rate.push_back(results[c].accept_rate);
        if (results[c].low_acceptance)
            draws.warnings.push_back("chain " + std::to_string(c) + ": acceptance below 10% (" +
                                     fmt_double(results[c].accept_rate) + "), divergent behavior likely");
    }
    return draws;
}

// ------------------------------------------------------- prediction surfaces

enum class SurfacePair { CrpHgb, VitdHyper };

struct SurfaceResult {
    std::string x_name, y_name;
    std::vector<double> xs, ys;
    Eigen::MatrixXd prob;  // ys.size() rows x xs.size() cols
};

// Posterior-mean predicted probability over a grid of the interaction pair,
// all other covariates held at a fixed profile (continuous at sample means,
// binaries at 0), interaction features recomputed at every grid point.
inline SurfaceResult interaction_surface(const PosteriorDraws& draws, const data::FeatureTable& table,
                                         SurfacePair pair, int grid_points = 41,
                                         const std::vector<std::string>& main_effects = default_main_effects(),
                                         const InteractionColumns& cols = InteractionColumns{}) {
    SurfaceResult surf;
    const bool crp_hgb = (pair == SurfacePair::CrpHgb);
    surf.x_name = crp_hgb ? cols.crp : cols.vitd;
    surf.y_name = crp_hgb ? cols.hgb : cols.hyper;

    // fixed profile table with a single row
    data::FeatureTable profile;
    profile.column_names = table.column_names;
    profile.column_kinds = table.column_kinds;
    profile.outcome = Eigen::VectorXi::Zero(1);
    profile.values.resize(1, table.p());
    for (int j = 0; j < table.p(); ++j)
        profile.values(0, j) =
            (table.column_kinds[j] == data::ColumnKind::binary) ? 0.0 : table.values.col(j).mean();

    auto axis_values = [&](const std::string& name) {
        const int j = table.column_index(name);
        if (table.column_kinds[j] == data::ColumnKind::binary) return std::vector<double>{0.0, 1.0};
        const double lo = table.values.col(j).minCoeff();
        const double hi = table.values.col(j).maxCoeff();
        std::vector<double> v(grid_points);
        for (int i = 0; i < grid_points; ++i)
            v[i] = lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1);
        return v;
    };
    surf.xs = axis_values(surf.x_name);
    surf.ys = axis_values(surf.y_name);

    // pool draws once
    const int total = static_cast<int>(draws.chains.size()) * draws.draws_per_chain();
    Eigen::MatrixXd D(total, draws.dim());
    int at = 0;
    for (const auto& c : draws.chains) {
        D.middleRows(at, c.rows()) = c;
        at += static_cast<int>(c.rows());
    }

    const int cx = table.column_index(surf.x_name);
    const int cy = table.column_index(surf.y_name);
    surf.prob.resize(static_cast<int>(surf.ys.size()), static_cast<int>(surf.xs.size()));
    data::FeatureTable point = profile;
    for (std::size_t iy = 0; iy < surf.ys.size(); ++iy) {
        for (std::size_t ix = 0; ix < surf.xs.size(); ++ix) {
            point.values(0, cx) = surf.xs[ix];
            point.values(0, cy) = surf.ys[iy];
            const FinalDesign pd = build_design(point, main_effects, true, cols);
            const Eigen::VectorXd eta = D * pd.X.row(0).transpose();
            double s = 0.0;
            for (int i = 0; i < eta.size(); ++i) s += glm::sigmoid(eta(i));
            surf.prob(static_cast<int>(iy), static_cast<int>(ix)) = s / total;
        }
    }
    return surf;
}

inline std::string surface_csv(const SurfaceResult& surf) {
    std::string out = surf.x_name + ',' + surf.y_name + ",probability\n";
    for (std::size_t iy = 0; iy < surf.ys.size(); ++iy)
        for (std::size_t ix = 0; ix < surf.xs.size(); ++ix)
            out += fmt_double(surf.xs[ix]) + ',' + fmt_double(surf.ys[iy]) + ',' +
                   fmt_double(surf.prob(static_cast<int>(iy), static_cast<int>(ix))) + '\n';
    return out;
}

inline std::string draws_csv(const PosteriorDraws& draws) {
    std::string out = "chain,iter";
    for (const auto& n : draws.names) out += ',' + n;
    out += '\n';
    for (std::size_t c = 0; c < draws.chains.size(); ++c)
        for (int i = 0; i < draws.chains[c].rows(); ++i) {
            out += std::to_string(c) + ',' + std::to_string(i);
            for (int j = 0; j < draws.chains[c].cols(); ++j) out += ',' + fmt_double(draws.chains[c](i, j));
            out += '\n';
        }
    return out;
}

}  // namespace gallstone::bayes

#endif
