#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "gallstone/baselines.hpp"
#include "gallstone/metrics.hpp"
#include "gallstone/synthetic.hpp"

using namespace gallstone;
using namespace gallstone::eval;

TEST_CASE("intercept-only MLE is the base-rate logit") {
    const int n = 10;
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
    Eigen::VectorXi y = Eigen::VectorXi::Zero(n);
    y(0) = y(1) = y(2) = 1;  // rate 0.3
    const auto beta = fit_logistic_mle(X, y);
    REQUIRE(beta(0) == Catch::Approx(std::log(0.3 / 0.7)).margin(1e-7));
}

TEST_CASE("MLE satisfies the optimality condition") {
    Rng rng(3);
    const int n = 200, p = 4;
    Eigen::MatrixXd X(n, p + 1);
    X.col(0).setOnes();
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j <= p; ++j) X(i, j) = rng.normal();
        const double eta = 0.3 + 0.8 * X(i, 1) - 0.5 * X(i, 2);
        y(i) = (rng.u01() < glm::sigmoid(eta)) ? 1 : 0;
    }
    const auto beta = fit_logistic_mle(X, y);
    // independent gradient check
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p + 1);
    for (int i = 0; i < n; ++i) {
        const double pi = glm::sigmoid(X.row(i) * beta);
        grad += (static_cast<double>(y(i)) - pi) * X.row(i).transpose();
    }
    REQUIRE(grad.lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("separation is reported explicitly") {
    const int n = 20;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i < 10) ? -1.0 - 0.1 * i : 1.0 + 0.1 * (i - 10);
        X(i, 0) = 1.0;
        X(i, 1) = x;
        y(i) = (x > 0.0) ? 1 : 0;
    }
    REQUIRE_THROWS_AS(fit_logistic_mle(X, y), NumericError);
}

TEST_CASE("rank-deficient designs are rejected") {
    Eigen::MatrixXd X(10, 3);
    X.col(0).setOnes();
    for (int i = 0; i < 10; ++i) X(i, 1) = i;
    X.col(2) = 2.0 * X.col(1);
    Eigen::VectorXi y(10);
    for (int i = 0; i < 10; ++i) y(i) = i % 2;
    REQUIRE_THROWS_AS(fit_logistic_mle(X, y), DataError);
}

TEST_CASE("logistic predictions with zero coefficients are one half") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 3);
    const Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
    const auto probs = logistic_predict_proba(beta, X);
    for (int i = 0; i < probs.size(); ++i) REQUIRE(probs(i) == 0.5);
}

TEST_CASE("a single unrestricted tree memorizes separable data") {
    Rng rng(9);
    const int n = 40;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        const double x = (i < 20) ? -(0.2 + rng.u01()) : (0.2 + rng.u01());
        X(i, 0) = x;
        X(i, 1) = rng.normal();
        X(i, 2) = rng.normal();
        y(i) = (x > 0.0) ? 1 : 0;
    }
    RfParams params;
    params.n_trees = 1;
    params.mtry = 3;  // no feature subsampling
    params.min_node_size = 1;
    params.seed = 4;
    const auto model = fit_random_forest(X, y, params);
    const auto probs = rf_predict_proba(model, X);
    int correct = 0;
    for (int i = 0; i < n; ++i) correct += ((probs(i) >= 0.5 ? 1 : 0) == y(i));
    REQUIRE(correct == n);
}

TEST_CASE("random forest learns the XOR interaction") {
    const auto train = data::make_xor(500, 8, 21);
    const auto test = data::make_xor(400, 8, 22);
    RfParams params;
    params.n_trees = 200;
    params.seed = 7;
    const auto model = fit_random_forest(train.X, train.y, params);
    const auto probs = rf_predict_proba(model, test.X);
    REQUIRE(auc_rank(probs, test.y) >= 0.8);
}

TEST_CASE("out-of-bag accuracy tracks held-out accuracy") {
    Rng rng(13);
    const int n = 1000, p = 5;
    auto gen = [&](int rows) {
        Eigen::MatrixXd X(rows, p);
        Eigen::VectorXi y(rows);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
            const double eta = 1.2 * X(i, 0) - 0.9 * X(i, 1) + 0.6 * X(i, 2) * X(i, 3);
            y(i) = (rng.u01() < glm::sigmoid(eta)) ? 1 : 0;
        }
        return std::make_pair(X, y);
    };
    const auto [Xtr, ytr] = gen(n);
    const auto [Xte, yte] = gen(600);
    RfParams params;
    params.n_trees = 300;
    params.seed = 14;
    const auto model = fit_random_forest(Xtr, ytr, params);

    int oob_correct = 0, oob_total = 0;
    for (int i = 0; i < n; ++i) {
        if (model.oob_votes(i) == 0) continue;
        ++oob_total;
        oob_correct += ((model.oob_prob(i) >= 0.5 ? 1 : 0) == ytr(i));
    }
    const double oob_acc = static_cast<double>(oob_correct) / oob_total;
    const auto test_probs = rf_predict_proba(model, Xte);
    int test_correct = 0;
    for (int i = 0; i < yte.size(); ++i) test_correct += ((test_probs(i) >= 0.5 ? 1 : 0) == yte(i));
    const double test_acc = static_cast<double>(test_correct) / yte.size();
    REQUIRE(std::abs(oob_acc - test_acc) <= 0.05);
}

TEST_CASE("forest votes are invariant to tree order and unanimous for clones") {
    const auto d = data::make_xor(200, 2, 31);
    RfParams params;
    params.n_trees = 25;
    params.seed = 3;
    auto model = fit_random_forest(d.X, d.y, params);
    const auto before = rf_predict_proba(model, d.X.topRows(50));
    std::reverse(model.trees.begin(), model.trees.end());
    const auto after = rf_predict_proba(model, d.X.topRows(50));
    REQUIRE(before == after);

    RfModel clones = model;
    clones.trees.assign(10, model.trees[0]);
    const auto probs = rf_predict_proba(clones, d.X.topRows(50));
    for (int i = 0; i < probs.size(); ++i) REQUIRE((probs(i) == 0.0 || probs(i) == 1.0));
}

TEST_CASE("forest fitting is deterministic given the seed, any thread count") {
    const auto d = data::make_xor(300, 4, 41);
    RfParams params;
    params.n_trees = 60;
    params.seed = 8;
    params.n_threads = 1;
    const auto m1 = fit_random_forest(d.X, d.y, params);
    params.n_threads = 4;
    const auto m2 = fit_random_forest(d.X, d.y, params);
    REQUIRE(m1.oob_prob.size() == m2.oob_prob.size());
    const auto p1 = rf_predict_proba(m1, d.X);
    const auto p2 = rf_predict_proba(m2, d.X);
    REQUIRE(p1 == p2);
}

TEST_CASE("single-class outcomes are rejected") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 2);
    Eigen::VectorXi y = Eigen::VectorXi::Ones(10);
    REQUIRE_THROWS_AS(fit_random_forest(X, y, RfParams{}), DataError);
}
