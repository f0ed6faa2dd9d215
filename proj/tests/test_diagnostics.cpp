#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gallstone/mcmc_diagnostics.hpp"

using namespace gallstone;
using namespace gallstone::bayes;

namespace {

PosteriorDraws chains_from(const std::vector<std::vector<double>>& data) {
    PosteriorDraws d;
    for (const auto& c : data) {
        Eigen::MatrixXd m(static_cast<int>(c.size()), 1);
        for (std::size_t i = 0; i < c.size(); ++i) m(static_cast<int>(i), 0) = c[i];
        d.chains.push_back(std::move(m));
    }
    d.names = {"theta"};
    return d;
}

// split-chain R-hat computed directly from its definition, as an oracle
double rhat_direct(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> seqs;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        seqs.emplace_back(c.begin(), c.begin() + half);
        seqs.emplace_back(c.end() - half, c.end());
    }
    const double n = static_cast<double>(seqs[0].size());
    std::vector<double> means, vars;
    for (const auto& s : seqs) {
        means.push_back(mean_of(s));
        vars.push_back(sample_var(s));
    }
    const double W = mean_of(vars);
    const double B_over_n = sample_var(means);
    return std::sqrt(((n - 1.0) / n * W + B_over_n) / W);
}

}  // namespace

TEST_CASE("rhat is near one for identically distributed chains") {
    Rng rng(1);
    std::vector<std::vector<double>> data(4, std::vector<double>(1000));
    for (auto& c : data)
        for (auto& v : c) v = rng.normal();
    const auto d = chains_from(data);
    const double r = rhat(d)(0);
    REQUIRE(r >= 0.99);
    REQUIRE(r <= 1.01);
    REQUIRE(r == Catch::Approx(rhat_direct(data)).epsilon(1e-12));
}

TEST_CASE("rhat flags a displaced chain") {
    Rng rng(2);
    std::vector<std::vector<double>> data(4, std::vector<double>(500));
    for (int c = 0; c < 4; ++c)
        for (auto& v : data[c]) v = ((c == 3) ? 5.0 : 0.0) + rng.normal();
    const auto d = chains_from(data);
    const double r = rhat(d)(0);
    REQUIRE(r > 1.5);
    REQUIRE(r == Catch::Approx(rhat_direct(data)).epsilon(1e-12));
}

TEST_CASE("rhat input validation") {
    std::vector<std::vector<double>> one_chain(1, std::vector<double>(100, 0.0));
    REQUIRE_THROWS_AS(rhat(chains_from(one_chain)), ConfigError);
    std::vector<std::vector<double>> tiny(4, std::vector<double>(5, 0.0));
    REQUIRE_THROWS_AS(rhat(chains_from(tiny)), ConfigError);
}

TEST_CASE("bulk ESS of iid draws is near the nominal draw count") {
    Rng rng(3);
    std::vector<std::vector<double>> data(4, std::vector<double>(1000));
    for (auto& c : data)
        for (auto& v : c) v = rng.normal();
    const double ess = ess_bulk(chains_from(data))(0);
    REQUIRE(ess >= 3200.0);
    REQUIRE(ess <= 4800.0);
}

TEST_CASE("constant chains report the minimal ESS sentinel with a warning") {
    std::vector<std::vector<double>> data(4, std::vector<double>(200, 3.25));
    std::vector<std::string> warnings;
    const double ess = ess_bulk(chains_from(data), &warnings)(0);
    REQUIRE(ess == 1.0);
    REQUIRE_FALSE(warnings.empty());
}

TEST_CASE("AR(1) chains match the analytic effective sample size") {
    const double rho = 0.9;
    Rng rng(4);
    std::vector<std::vector<double>> data(4, std::vector<double>(2000));
    for (auto& c : data) {
        double x = rng.normal();
        for (auto& v : c) {
            x = rho * x + std::sqrt(1.0 - rho * rho) * rng.normal();
            v = x;
        }
    }
    const double total = 4.0 * 2000.0;
    const double expect = total * (1.0 - rho) / (1.0 + rho);
    const double ess = ess_bulk(chains_from(data))(0);
    REQUIRE(ess >= expect / 1.5);
    REQUIRE(ess <= expect * 1.5);
}

TEST_CASE("tail ESS behaves like bulk ESS for iid draws") {
    Rng rng(5);
    std::vector<std::vector<double>> data(4, std::vector<double>(1000));
    for (auto& c : data)
        for (auto& v : c) v = rng.normal();
    const double tail = ess_tail(chains_from(data))(0);
    REQUIRE(tail > 1000.0);
}

TEST_CASE("summarize: degenerate point mass") {
    std::vector<std::vector<double>> data(4, std::vector<double>(50, 2.5));
    const auto s = summarize(chains_from(data));
    REQUIRE(s.estimate(0) == 2.5);
    REQUIRE(s.est_error(0) == 0.0);
    REQUIRE(s.ci_lower(0) == 2.5);
    REQUIRE(s.ci_upper(0) == 2.5);
    REQUIRE(s.rhat(0) == 1.0);
    REQUIRE_FALSE(s.warnings.empty());
}

TEST_CASE("summarize: standard normal draws") {
    Rng rng(6);
    std::vector<std::vector<double>> data(4, std::vector<double>(1000));
    for (auto& c : data)
        for (auto& v : c) v = rng.normal();
    const auto s = summarize(chains_from(data));
    REQUIRE(std::abs(s.estimate(0)) < 0.1);
    REQUIRE(s.est_error(0) > 0.9);
    REQUIRE(s.est_error(0) < 1.1);
    REQUIRE(s.ci_lower(0) == Catch::Approx(-1.96).margin(0.15));
    REQUIRE(s.ci_upper(0) == Catch::Approx(1.96).margin(0.15));
    REQUIRE(s.ci_lower(0) <= s.ci_upper(0));

    const std::string csv = summary_csv(s);
    REQUIRE(csv.find("Parameter,Estimate,Est.Error,CI Lower,CI Upper,Rhat,ESS Bulk,ESS Tail") == 0);
    REQUIRE(csv.find("theta") != std::string::npos);
}
