#ifndef GALLSTONE_SYNTHETIC_HPP
#define GALLSTONE_SYNTHETIC_HPP

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "gallstone/common.hpp"
#include "gallstone/dataset.hpp"
#include "gallstone/glm.hpp"

namespace gallstone::data {

// ------------------------------------------------------- small test datasets

struct XorData {
    Eigen::MatrixXd X;
    Eigen::VectorXi y;
};

// y = 1 iff (x1 > 0) xor (x2 > 0), plus noise features.
inline XorData make_xor(int n, int n_noise, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "xor"));
    XorData d;
    d.X.resize(n, 2 + n_noise);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x1 = 2.0 * rng.u01() - 1.0;
        const double x2 = 2.0 * rng.u01() - 1.0;
        d.X(i, 0) = x1;
        d.X(i, 1) = x2;
        for (int j = 0; j < n_noise; ++j) d.X(i, 2 + j) = rng.normal();
        d.y(i) = ((x1 > 0.0) != (x2 > 0.0)) ? 1 : 0;
    }
    return d;
}

struct SparseRegression {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<int> support;
};

// Gaussian response with three strong coefficients among p noise features.
inline SparseRegression make_sparse_regression(int n, int p, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "sparse"));
    SparseRegression d;
    d.X.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
    d.support = {2, 7, 14};
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta(2) = 1.5;
    beta(7) = -2.0;
    beta(14) = 1.0;
    d.y = d.X * beta;
    for (int i = 0; i < n; ++i) d.y(i) += rng.normal();
    return d;
}

struct BinaryData {
    Eigen::MatrixXd X;
    Eigen::VectorXi y;
};

// Outcome independent of every feature.
inline BinaryData make_null_binary(int n, int p, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "null"));
    BinaryData d;
    d.X.resize(n, p);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
        d.y(i) = (rng.u01() < 0.5) ? 1 : 0;
    }
    return d;
}

struct LogitProblem {
    Eigen::MatrixXd design;  // leading intercept column
    Eigen::VectorXi y;
    Eigen::VectorXd beta_true;
    std::vector<std::string> names;
};

// Well-scaled logistic problem with known coefficients, for sampler health
// checks and coverage tests.
inline LogitProblem make_logit_problem(int n, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "logit"));
    LogitProblem d;
    const int dim = 14;
    d.design.resize(n, dim);
    d.design.col(0).setOnes();
    for (int i = 0; i < n; ++i)
        for (int j = 1; j < dim; ++j) d.design(i, j) = rng.normal();
    d.beta_true.resize(dim);
    const double vals[dim] = {0.3, 1.2, -0.8, 0.5, -1.5, 0.0, 0.9, -0.4, 1.0, -1.1, 0.2, 0.7, -0.6, 1.4};
    for (int j = 0; j < dim; ++j) d.beta_true(j) = vals[j];
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const double eta = d.design.row(i) * d.beta_true;
        d.y(i) = (rng.u01() < glm::sigmoid(eta)) ? 1 : 0;
    }
    d.names.push_back("Intercept");
    for (int j = 1; j < dim; ++j) d.names.push_back("x" + std::to_string(j));
    return d;
}

// ------------------------------------------------------ gallstone surrogate

// Deterministic stand-in for the clinical dataset: 319 subjects, 38 named
// features with realistic scales and correlation structure, outcome planted
// so the pipeline's published qualitative findings hold (directions, strong
// CRP/HGB and VitD/Hyper interplay, mild nonlinearity). Class counts are
// forced to 158/161.
inline FeatureTable make_gallstone_surrogate(std::uint64_t seed = 20250801) {
    const int n = 319;
    Rng rng(derive_seed(seed, "surrogate"));

    const std::vector<std::string> names = {
        "Age",        "Gender",    "Height",     "Weight",         "BMI",        "Comorbidity", "CAD",
        "Hypothyroidism", "Hyper", "DM",         "Obesity",        "TBW",        "ECW",         "ICW",
        "ECF",        "TBFR",      "LM",         "Protein",        "VFR",        "BM",          "MM",
        "TFC",        "VFA",       "VMA",        "HFA",            "Glucose",    "TC",          "LDL",
        "HDL",        "Triglyceride", "AST",     "ALT",            "ALP",        "Creatinine",  "GFR",
        "CRP",        "HGB",       "VitD"};
    const int p = static_cast<int>(names.size());

    FeatureTable t;
    t.column_names = names;
    t.values.resize(n, p);
    t.outcome.resize(n);

    auto col = [&](const char* name) {
        for (int j = 0; j < p; ++j)
            if (names[j] == name) return j;
        throw DataError("surrogate: bad column");
    };

    std::vector<double> eta(n);
    for (int i = 0; i < n; ++i) {
        // latent person factors
        const double adiposity = rng.normal();
        const double frame = rng.normal();
        const double inflam = rng.normal();
        const double metab = 0.6 * adiposity + 0.8 * rng.normal();
        const double sun = rng.normal();
        const double age_z = rng.normal();

        auto bern = [&](double prob) { return (rng.u01() < prob) ? 1.0 : 0.0; };

        const double age = 45.0 + 12.0 * age_z;
        const double height = 168.0 + 9.0 * (0.8 * frame + 0.6 * rng.normal());
        const double weight = 78.0 + 14.0 * (0.65 * adiposity + 0.55 * frame + 0.5 * rng.normal());
        const double bmi = 27.0 + 4.5 * (0.8 * adiposity + 0.6 * rng.normal());
        const double cad = bern(glm::sigmoid(-2.2 + 0.4 * metab + 0.3 * age_z));
        const double hyper = bern(glm::sigmoid(-0.9 + 0.6 * metab));
        const double dm = bern(glm::sigmoid(-1.6 + 0.7 * adiposity + 0.3 * metab));

        const double ecf = 16.0 + 3.0 * (0.35 * frame + 0.2 * adiposity + 0.9 * rng.normal());
        const double tbfr = 32.0 + 7.0 * (0.85 * adiposity + 0.5 * rng.normal());
        const double bm = 2.8 + 0.45 * (0.5 * frame - 0.15 * adiposity + 0.85 * rng.normal());
        const double vfa = 110.0 + 35.0 * (0.8 * adiposity + 0.55 * rng.normal());
        const double crp = std::exp(0.9 + 0.65 * inflam + 0.3 * adiposity + 0.25 * rng.normal());
        const double hgb = 14.0 + 2.8 * (0.3 * frame - 0.15 * inflam + 0.93 * rng.normal());
        const double vitd = std::max(3.0, 22.0 + 10.0 * (0.6 * sun + 0.8 * rng.normal()));

        t.values(i, col("Age")) = std::round(age);
        t.values(i, col("Gender")) = bern(0.5);
        t.values(i, col("Height")) = std::round(height * 10.0) / 10.0;
        t.values(i, col("Weight")) = std::round(weight * 10.0) / 10.0;
        t.values(i, col("BMI")) = std::round(bmi * 100.0) / 100.0;
        t.values(i, col("Comorbidity")) = bern(glm::sigmoid(-1.0 + 0.5 * adiposity));
        t.values(i, col("CAD")) = cad;
        t.values(i, col("Hypothyroidism")) = bern(0.12);
        t.values(i, col("Hyper")) = hyper;
        t.values(i, col("DM")) = dm;
        t.values(i, col("Obesity")) = bern(glm::sigmoid(-0.8 + 1.2 * adiposity));
        t.values(i, col("TBW")) = 36.0 + 6.0 * (0.5 * frame - 0.25 * adiposity + 0.7 * rng.normal());
        t.values(i, col("ECW")) = 15.0 + 2.5 * (0.45 * frame + 0.65 * rng.normal());
        t.values(i, col("ICW")) = 21.0 + 3.5 * (0.5 * frame + 0.65 * rng.normal());
        t.values(i, col("ECF")) = std::round(ecf * 100.0) / 100.0;
        t.values(i, col("TBFR")) = std::round(tbfr * 100.0) / 100.0;
        t.values(i, col("LM")) = 52.0 + 8.0 * (0.55 * frame - 0.25 * adiposity + 0.6 * rng.normal());
        t.values(i, col("Protein")) = 10.5 + 1.4 * (0.5 * frame + 0.7 * rng.normal());
        t.values(i, col("VFR")) = std::max(1.0, std::round(9.0 + 3.5 * (0.8 * adiposity + 0.5 * rng.normal())));
        t.values(i, col("BM")) = std::round(bm * 100.0) / 100.0;
        t.values(i, col("MM")) = 50.0 + 7.5 * (0.55 * frame - 0.2 * adiposity + 0.65 * rng.normal());
        t.values(i, col("TFC")) = std::max(4.0, 24.0 + 8.0 * (0.85 * adiposity + 0.45 * rng.normal()));
        t.values(i, col("VFA")) = std::round(std::max(20.0, vfa) * 10.0) / 10.0;
        t.values(i, col("VMA")) = 38.0 + 7.0 * (0.5 * frame + 0.7 * rng.normal());
        t.values(i, col("HFA")) = std::max(0.0, std::round(1.0 + 0.5 * adiposity + 0.9 * rng.normal()));
        t.values(i, col("Glucose")) = 102.0 + 22.0 * (0.55 * adiposity + 0.3 * metab + 0.6 * rng.normal());
        t.values(i, col("TC")) = 195.0 + 35.0 * (0.3 * metab + 0.9 * rng.normal());
        t.values(i, col("LDL")) = 120.0 + 30.0 * (0.35 * metab + 0.85 * rng.normal());
        t.values(i, col("HDL")) = std::max(20.0, 50.0 + 11.0 * (-0.45 * adiposity + 0.8 * rng.normal()));
        t.values(i, col("Triglyceride")) =
            std::max(30.0, 150.0 + 70.0 * (0.4 * metab + 0.8 * rng.normal()));
        t.values(i, col("AST")) = std::max(8.0, 24.0 + 9.0 * (0.3 * adiposity + 0.9 * rng.normal()));
        t.values(i, col("ALT")) = std::max(6.0, 26.0 + 12.0 * (0.45 * adiposity + 0.85 * rng.normal()));
        t.values(i, col("ALP")) = std::max(25.0, 75.0 + 20.0 * (0.3 * metab + 0.9 * rng.normal()));
        t.values(i, col("Creatinine")) =
            std::round(std::max(0.4, 0.85 + 0.16 * (0.2 * frame + 0.95 * rng.normal())) * 100.0) / 100.0;
        t.values(i, col("GFR")) = 95.0 + 14.0 * (-0.3 * age_z + 0.9 * rng.normal());
        t.values(i, col("CRP")) = std::round(std::min(crp, 60.0) * 100.0) / 100.0;
        t.values(i, col("HGB")) = std::round(hgb * 10.0) / 10.0;
        t.values(i, col("VitD")) = std::round(vitd * 10.0) / 10.0;
    }

    // planted outcome model on raw-unit columns (main effects, the four
    // interaction covariates, extra weak screening signals, and nonlinear
    // bumps a linear model cannot absorb)
    auto v = [&](int i, const char* name) { return t.values(i, col(name)); };
    std::vector<double> eta_raw(n);
    for (int i = 0; i < n; ++i) {
        const double crp = v(i, "CRP"), vitd = v(i, "VitD"), ecf = v(i, "ECF"), bm = v(i, "BM"),
                     hyper = v(i, "Hyper"), vfa = v(i, "VFA"), hgb = v(i, "HGB"), dm = v(i, "DM"),
                     cad = v(i, "CAD");
        const double f1 = ecf * std::log1p(vitd);
        const double f2 = crp / (1.0 + hgb);
        const double f3 = -2.0 * vitd * hyper;
        const double f4 = bm * bm * dm;
        double e = 0.0;
        e += 1.1 * crp + 1.1 * std::log1p(crp);  // saturating inflammation effect
        e += -0.17 * vitd;
        e += -0.60 * ecf;
        e += -2.2 * bm;
        e += 0.35 * hyper;
        e += 0.028 * vfa;
        e += -0.55 * hgb;
        e += 1.00 * dm;
        e += -1.50 * cad;
        e += 0.005 * f1;
        e += -13.0 * f2;
        e += -0.075 * f3;
        e += 0.06 * f4;
        // weak signals on other LASSO-era features
        e += 0.015 * v(i, "TBFR");
        e += -0.018 * v(i, "HDL");
        e += 0.020 * v(i, "AST");
        e += 0.010 * v(i, "ALP");
        e += -0.012 * v(i, "GFR");
        // nonlinear structure for the tree learners
        if (v(i, "VFA") > 140.0) e += 1.6;
        if (v(i, "VitD") < 14.0 && v(i, "TBFR") > 36.0) e += 1.5;
        if (ecf < 14.5 && bm < 2.6) e += 1.1;
        if (v(i, "GFR") < 78.0) e += 1.0;
        eta_raw[i] = e;
    }
    const double eta_mean = mean_of(eta_raw);
    for (int i = 0; i < n; ++i) eta[i] = eta_raw[i] - eta_mean;

    for (int i = 0; i < n; ++i) t.outcome(i) = (rng.u01() < glm::sigmoid(eta[i])) ? 1 : 0;

    // force the 158/161 split by flipping the most marginal rows
    const int target_pos = 158;
    auto flip_margin = [&](int want) {
        while (true) {
            int pos = 0;
            for (int i = 0; i < n; ++i) pos += t.outcome(i);
            if (pos == want) break;
            int best = -1;
            double best_p = 0.0;
            for (int i = 0; i < n; ++i) {
                const double pr = glm::sigmoid(eta[i]);
                if (pos > want && t.outcome(i) == 1 && (best < 0 || pr < best_p)) {
                    best = i;
                    best_p = pr;
                }
                if (pos < want && t.outcome(i) == 0 && (best < 0 || pr > best_p)) {
                    best = i;
                    best_p = pr;
                }
            }
            t.outcome(best) = 1 - t.outcome(best);
        }
    };
    flip_margin(target_pos);

    t.column_kinds.resize(p, ColumnKind::continuous);
    for (int j = 0; j < p; ++j) {
        bool all01 = true;
        for (int i = 0; i < n && all01; ++i)
            if (t.values(i, j) != 0.0 && t.values(i, j) != 1.0) all01 = false;
        t.column_kinds[j] = all01 ? ColumnKind::binary : ColumnKind::continuous;
    }
    return t;
}

inline void write_csv(const FeatureTable& table, const std::string& path,
                      const std::string& outcome_name = "outcome") {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& name : table.column_names) out << name << ',';
    out << outcome_name << '\n';
    for (int i = 0; i < table.n(); ++i) {
        for (int j = 0; j < table.p(); ++j) out << fmt_double(table.values(i, j)) << ',';
        out << table.outcome(i) << '\n';
    }
}

}  // namespace gallstone::data

#endif
