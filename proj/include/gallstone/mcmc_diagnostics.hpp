#ifndef GALLSTONE_MCMC_DIAGNOSTICS_HPP
#define GALLSTONE_MCMC_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/common.hpp"

namespace gallstone::bayes {

// Post-warmup coefficient draws, one matrix (draws x dim) per chain, already
// on the reporting (raw-unit) scale.
struct PosteriorDraws {
    std::vector<Eigen::MatrixXd> chains;
    std::vector<std::string> names;
    int iters_per_chain = 0;  // total iterations including warmup
    int warmup = 0;
    std::uint64_t seed = 0;
    std::vector<double> accept_rate;  // per chain, post-warmup
    std::vector<std::string> warnings;

    int dim() const { return chains.empty() ? 0 : static_cast<int>(chains[0].cols()); }
    int draws_per_chain() const { return chains.empty() ? 0 : static_cast<int>(chains[0].rows()); }

    Eigen::VectorXd pooled(int param) const {
        Eigen::VectorXd out(static_cast<int>(chains.size()) * draws_per_chain());
        int at = 0;
        for (const auto& c : chains)
            for (int i = 0; i < c.rows(); ++i) out(at++) = c(i, param);
        return out;
    }
};

namespace diag_detail {

using Sequences = std::vector<std::vector<double>>;

// Each chain is halved; the middle draw of an odd-length chain is dropped.
inline Sequences split_sequences(const PosteriorDraws& draws, int param) {
    Sequences seqs;
    for (const auto& c : draws.chains) {
        const int n = static_cast<int>(c.rows());
        const int half = n / 2;
        std::vector<double> a(half), b(half);
        for (int i = 0; i < half; ++i) {
            a[i] = c(i, param);
            b[i] = c(n - half + i, param);
        }
        seqs.push_back(std::move(a));
        seqs.push_back(std::move(b));
    }
    return seqs;
}

struct Moments {
    double within = 0.0;    // W: mean of per-sequence sample variances
    double between_n = 0.0; // B/n: sample variance of sequence means
    double var_plus = 0.0;  // (n-1)/n * W + B/n
    int n_len = 0;
};

inline Moments sequence_moments(const Sequences& seqs) {
    Moments m;
    m.n_len = static_cast<int>(seqs[0].size());
    std::vector<double> means, vars;
    for (const auto& s : seqs) {
        means.push_back(mean_of(s));
        vars.push_back(sample_var(s));
    }
    m.within = mean_of(vars);
    m.between_n = sample_var(means);
    m.var_plus = (m.n_len - 1.0) / m.n_len * m.within + m.between_n;
    return m;
}

inline double rhat_from(const Sequences& seqs) {
    const Moments m = sequence_moments(seqs);
    if (m.within <= 0.0) return (m.between_n <= 0.0) ? 1.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(m.var_plus / m.within);
}

// Biased (1/n) autocovariance at lag t.
inline double autocov(const std::vector<double>& x, double mean, int t) {
    const int n = static_cast<int>(x.size());
    double s = 0.0;
    for (int i = 0; i + t < n; ++i) s += (x[i] - mean) * (x[i + t] - mean);
    return s / n;
}

// Effective sample size with Geyer's initial monotone positive sequence
// truncation, combined across sequences. Returns 1.0 (minimal sentinel) for
// degenerate zero-variance input.
inline double ess_from(const Sequences& seqs, std::vector<std::string>* warnings = nullptr) {
    const Moments m = sequence_moments(seqs);
    const int n_len = m.n_len;
    const int n_seq = static_cast<int>(seqs.size());
    if (m.var_plus <= 0.0) {
        if (warnings) warnings->push_back("ess: zero-variance draws, reporting minimal sentinel");
        return 1.0;
    }
    std::vector<double> means(n_seq);
    for (int j = 0; j < n_seq; ++j) means[j] = mean_of(seqs[j]);

    auto rho_at = [&](int t) {
        double ac = 0.0;
        for (int j = 0; j < n_seq; ++j) ac += autocov(seqs[j], means[j], t);
        ac /= n_seq;
        return 1.0 - (m.within - ac) / m.var_plus;
    };

    // pairs (rho_0 + rho_1), (rho_2 + rho_3), ... kept while positive and
    // forced monotone non-increasing
    double tau_sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    double rho_even = 1.0;
    for (int t = 1; t + 1 < n_len; t += 2) {
        const double pair_raw = rho_even + rho_at(t);
        if (pair_raw <= 0.0) break;
        const double pair = std::min(pair_raw, prev_pair);
        prev_pair = pair;
        tau_sum += pair;
        rho_even = rho_at(t + 1);
    }
    const double total = static_cast<double>(n_seq) * n_len;
    const double tau = std::max(2.0 * tau_sum - 1.0, 1e-3);
    return std::min(total / tau, total * std::log10(std::max(total, 10.0)));
}

// Fractional-rank normal transform across all sequences jointly.
inline Sequences rank_normalize(const Sequences& seqs) {
    struct Item {
        double v;
        int seq;
        int pos;
    };
    std::vector<Item> items;
    for (int j = 0; j < static_cast<int>(seqs.size()); ++j)
        for (int i = 0; i < static_cast<int>(seqs[j].size()); ++i) items.push_back({seqs[j][i], j, i});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.v < b.v; });
    const double S = static_cast<double>(items.size());
    Sequences out(seqs.size());
    for (std::size_t j = 0; j < seqs.size(); ++j) out[j].resize(seqs[j].size());
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        while (j + 1 < items.size() && items[j + 1].v == items[i].v) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        const double z = normal_quantile((midrank - 0.375) / (S + 0.25));
        for (std::size_t t = i; t <= j; ++t) out[items[t].seq][items[t].pos] = z;
        i = j + 1;
    }
    return out;
}

}  // namespace diag_detail

inline void check_draws(const PosteriorDraws& draws) {
    if (draws.chains.size() < 2) throw ConfigError("diagnostics need >= 2 chains");
    for (const auto& c : draws.chains)
        if (c.rows() < 10) throw ConfigError("diagnostics need >= 10 draws per chain");
}

// Split-chain potential scale reduction factor per parameter.
inline Eigen::VectorXd rhat(const PosteriorDraws& draws) {
    check_draws(draws);
    Eigen::VectorXd out(draws.dim());
    for (int param = 0; param < draws.dim(); ++param)
        out(param) = diag_detail::rhat_from(diag_detail::split_sequences(draws, param));
    return out;
}

// Bulk ESS on rank-normalized split chains.
inline Eigen::VectorXd ess_bulk(PosteriorDraws const& draws, std::vector<std::string>* warnings = nullptr) {
    check_draws(draws);
    Eigen::VectorXd out(draws.dim());
    for (int param = 0; param < draws.dim(); ++param) {
        auto seqs = diag_detail::split_sequences(draws, param);
        out(param) = diag_detail::ess_from(diag_detail::rank_normalize(seqs), warnings);
    }
    return out;
}

// Tail ESS: minimum ESS of the 5% and 95% quantile exceedance indicators.
inline Eigen::VectorXd ess_tail(const PosteriorDraws& draws, std::vector<std::string>* warnings = nullptr) {
    check_draws(draws);
    Eigen::VectorXd out(draws.dim());
    for (int param = 0; param < draws.dim(); ++param) {
        const auto seqs = diag_detail::split_sequences(draws, param);
        std::vector<double> all;
        for (const auto& s : seqs) all.insert(all.end(), s.begin(), s.end());
        const double q05 = quantile(all, 0.05);
        const double q95 = quantile(all, 0.95);
        double worst = std::numeric_limits<double>::infinity();
        for (double q : {q05, q95}) {
            diag_detail::Sequences ind(seqs.size());
            for (std::size_t j = 0; j < seqs.size(); ++j) {
                ind[j].resize(seqs[j].size());
                for (std::size_t i = 0; i < seqs[j].size(); ++i) ind[j][i] = (seqs[j][i] <= q) ? 1.0 : 0.0;
            }
            worst = std::min(worst, diag_detail::ess_from(ind, warnings));
        }
        out(param) = worst;
    }
    return out;
}

struct CoefficientSummary {
    std::vector<std::string> names;
    Eigen::VectorXd estimate;   // posterior mean
    Eigen::VectorXd est_error;  // posterior sd
    Eigen::VectorXd ci_lower;   // 2.5%
    Eigen::VectorXd ci_upper;   // 97.5%
    Eigen::VectorXd rhat;
    Eigen::VectorXd ess_bulk;
    Eigen::VectorXd ess_tail;
    std::vector<std::string> warnings;
};

inline CoefficientSummary summarize(const PosteriorDraws& draws) {
    check_draws(draws);
    CoefficientSummary s;
    const int d = draws.dim();
    s.names = draws.names;
    if (s.names.empty())
        for (int j = 0; j < d; ++j) s.names.push_back("beta" + std::to_string(j));
    s.estimate.resize(d);
    s.est_error.resize(d);
    s.ci_lower.resize(d);
    s.ci_upper.resize(d);
    for (int param = 0; param < d; ++param) {
        const Eigen::VectorXd v = draws.pooled(param);
        std::vector<double> vals(v.begin(), v.end());
        s.estimate(param) = mean_of(vals);
        s.est_error(param) = sample_sd(vals);
        s.ci_lower(param) = quantile(vals, 0.025);
        s.ci_upper(param) = quantile(vals, 0.975);
    }
    s.rhat = rhat(draws);
    s.ess_bulk = bayes::ess_bulk(draws, &s.warnings);
    s.ess_tail = bayes::ess_tail(draws, &s.warnings);
    return s;
}

inline std::string summary_csv(const CoefficientSummary& s) {
    std::string out = "Parameter,Estimate,Est.Error,CI Lower,CI Upper,Rhat,ESS Bulk,ESS Tail\n";
    for (int j = 0; j < s.estimate.size(); ++j) {
        out += s.names[j] + ',' + fmt_double(s.estimate(j)) + ',' + fmt_double(s.est_error(j)) + ',' +
               fmt_double(s.ci_lower(j)) + ',' + fmt_double(s.ci_upper(j)) + ',' + fmt_double(s.rhat(j)) + ',' +
               fmt_double(s.ess_bulk(j)) + ',' + fmt_double(s.ess_tail(j)) + '\n';
    }
    return out;
}

inline nlohmann::json summary_json(const CoefficientSummary& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (int j = 0; j < s.estimate.size(); ++j) {
        rows.push_back({{"parameter", s.names[j]},
                        {"estimate", s.estimate(j)},
                        {"est_error", s.est_error(j)},
                        {"ci_lower", s.ci_lower(j)},
                        {"ci_upper", s.ci_upper(j)},
                        {"rhat", s.rhat(j)},
                        {"ess_bulk", s.ess_bulk(j)},
                        {"ess_tail", s.ess_tail(j)}});
    }
    nlohmann::json j{{"parameters", rows}};
    if (!s.warnings.empty()) j["warnings"] = s.warnings;
    return j;
}

}  // namespace gallstone::bayes

#endif
