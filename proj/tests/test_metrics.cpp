#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gallstone/common.hpp"
#include "gallstone/metrics.hpp"

using namespace gallstone;
using namespace gallstone::eval;

namespace {

// brute-force concordance oracle, ties counted half
double auc_pairwise(const Eigen::VectorXd& scores, const Eigen::VectorXi& y) {
    double num = 0.0;
    int n1 = 0, n0 = 0;
    for (int i = 0; i < y.size(); ++i) {
        if (y(i) != 1) continue;
        ++n1;
        for (int j = 0; j < y.size(); ++j) {
            if (y(j) != 0) continue;
            if (scores(i) > scores(j))
                num += 1.0;
            else if (scores(i) == scores(j))
                num += 0.5;
        }
    }
    for (int j = 0; j < y.size(); ++j) n0 += (y(j) == 0);
    return num / (static_cast<double>(n1) * n0);
}

}  // namespace

TEST_CASE("perfect classifier scores 1.0 everywhere") {
    Eigen::VectorXd s(6);
    s << 0.9, 0.8, 0.7, 0.2, 0.1, 0.05;
    Eigen::VectorXi y(6);
    y << 1, 1, 1, 0, 0, 0;
    const auto m = compute_metrics("perfect", s, y);
    REQUIRE(m.precision == 1.0);
    REQUIRE(m.recall == 1.0);
    REQUIRE(m.f1 == 1.0);
    REQUIRE(m.auc == 1.0);
    REQUIRE(m.accuracy == 1.0);
}

TEST_CASE("published performance rows are internally consistent") {
    // F1 must be the harmonic mean of precision and recall
    struct Row {
        double precision, recall, f1;
    };
    const Row rows[] = {{0.8256, 0.8820, 0.8529},   // BART
                        {0.7797, 0.8571, 0.8166},   // logistic regression
                        {0.7840, 0.7950, 0.7895}};  // random forest
    for (const auto& r : rows) {
        const double harmonic = 2.0 * r.precision * r.recall / (r.precision + r.recall);
        REQUIRE(std::abs(harmonic - r.f1) <= 5e-4);
    }
}

TEST_CASE("rank AUC equals the pairwise oracle exactly") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 50 + rep * 10;
        Eigen::VectorXd s(n);
        Eigen::VectorXi y(n);
        for (int i = 0; i < n; ++i) {
            // quantized scores force plenty of ties
            s(i) = std::round(rng.u01() * 10.0) / 10.0;
            y(i) = (rng.u01() < 0.4) ? 1 : 0;
        }
        bool has0 = false, has1 = false;
        for (int i = 0; i < n; ++i) (y(i) == 1 ? has1 : has0) = true;
        if (!has0 || !has1) continue;
        REQUIRE(auc_rank(s, y) == auc_pairwise(s, y));
    }
}

TEST_CASE("AUC is invariant under strictly monotone transforms") {
    Rng rng(23);
    const int n = 200;
    Eigen::VectorXd s(n), s2(n);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        s(i) = rng.u01();
        s2(i) = 1.0 / (1.0 + std::exp(-(3.0 * s(i) - 1.0)));
        y(i) = (rng.u01() < 0.5) ? 1 : 0;
    }
    REQUIRE(auc_rank(s, y) == auc_rank(s2, y));
}

TEST_CASE("undefined precision is reported as a sentinel") {
    Eigen::VectorXd s(4);
    s << 0.1, 0.2, 0.3, 0.4;  // nothing reaches the threshold
    Eigen::VectorXi y(4);
    y << 1, 0, 1, 0;
    const auto m = compute_metrics("timid", s, y, 0.5);
    REQUIRE_FALSE(m.precision_defined);
    REQUIRE(std::isnan(m.precision));
    REQUIRE(m.f1 == 0.0);
    REQUIRE(m.recall == 0.0);
}

TEST_CASE("F1 is the harmonic mean whenever defined") {
    Rng rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        const int n = 80;
        Eigen::VectorXd s(n);
        Eigen::VectorXi y(n);
        for (int i = 0; i < n; ++i) {
            s(i) = rng.u01();
            y(i) = (rng.u01() < 0.5) ? 1 : 0;
        }
        const auto m = compute_metrics("r", s, y);
        if (m.precision_defined && m.precision + m.recall > 0.0)
            REQUIRE(m.f1 ==
                    Catch::Approx(2.0 * m.precision * m.recall / (m.precision + m.recall)).epsilon(1e-12));
    }
}

TEST_CASE("model comparison emission") {
    Eigen::VectorXd s(4);
    s << 0.9, 0.4, 0.8, 0.1;
    Eigen::VectorXi y(4);
    y << 1, 0, 1, 0;
    const auto a = compute_metrics("A", s, y);
    const auto b = compute_metrics("B", s, y);
    SECTION("identical score vectors give identical rows") {
        REQUIRE(a.precision == b.precision);
        REQUIRE(a.auc == b.auc);
        REQUIRE(a.f1 == b.f1);
        const std::string csv = metrics_csv({a, b}, "test");
        const auto first = csv.find('\n');
        const auto row1 = csv.substr(first + 1, csv.find('\n', first + 1) - first - 1);
        const auto row2 = csv.substr(csv.find('\n', first + 1) + 1);
        REQUIRE(row1.substr(1) == row2.substr(1, row2.size() - 2));  // same after the model name
    }
    SECTION("single model table") {
        const auto j = metrics_json({a}, "proto");
        REQUIRE(j.at("models").size() == 1);
        REQUIRE(j.at("accuracy_series").size() == 1);
    }
}
