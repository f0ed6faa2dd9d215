#ifndef GALLSTONE_METRICS_HPP
#define GALLSTONE_METRICS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/common.hpp"

namespace gallstone::eval {

struct ConfusionCounts {
    int tp = 0, fp = 0, tn = 0, fn = 0;
    int total() const { return tp + fp + tn + fn; }
};

inline ConfusionCounts confusion(const Eigen::VectorXd& scores, const Eigen::VectorXi& y, double threshold) {
    ConfusionCounts c;
    for (int i = 0; i < scores.size(); ++i) {
        const bool pred = scores(i) >= threshold;
        if (y(i) == 1)
            (pred ? c.tp : c.fn)++;
        else
            (pred ? c.fp : c.tn)++;
    }
    return c;
}

// Mann-Whitney AUC via midranks; ties count half. Equals the all-pairs
// concordance count exactly.
inline double auc_rank(const Eigen::VectorXd& scores, const Eigen::VectorXi& y) {
    const int n = static_cast<int>(scores.size());
    int n1 = 0;
    for (int i = 0; i < n; ++i) n1 += (y(i) == 1);
    const int n0 = n - n1;
    if (n1 == 0 || n0 == 0) return std::numeric_limits<double>::quiet_NaN();

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) < scores(b); });

    double rank_sum_pos = 0.0;
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && scores(order[j + 1]) == scores(order[i])) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (int t = i; t <= j; ++t)
            if (y(order[t]) == 1) rank_sum_pos += midrank;
        i = j + 1;
    }
    return (rank_sum_pos - 0.5 * static_cast<double>(n1) * (n1 + 1)) /
           (static_cast<double>(n1) * static_cast<double>(n0));
}

struct MetricsEntry {
    std::string model;
    double precision = 0.0;
    double recall = 0.0;
    double auc = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double threshold = 0.5;
    bool precision_defined = true;  // false when no positive predictions were made
};

inline MetricsEntry compute_metrics(const std::string& model, const Eigen::VectorXd& scores,
                                    const Eigen::VectorXi& y, double threshold = 0.5) {
    if (scores.size() != y.size()) throw DataError("compute_metrics: score/label length mismatch");
    for (int i = 0; i < scores.size(); ++i)
        if (!(scores(i) >= 0.0 && scores(i) <= 1.0))
            throw DataError("compute_metrics: score outside [0,1]");

    const ConfusionCounts c = confusion(scores, y, threshold);
    MetricsEntry m;
    m.model = model;
    m.threshold = threshold;
    m.auc = auc_rank(scores, y);
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    m.recall = (c.tp + c.fn > 0) ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    if (c.tp + c.fp == 0) {
        m.precision = std::numeric_limits<double>::quiet_NaN();
        m.precision_defined = false;
        m.f1 = 0.0;
    } else {
        m.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
        m.f1 = (m.precision + m.recall > 0.0) ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    }
    return m;
}

// ----------------------------------------------------------------- reporting

inline std::string metrics_csv(const std::vector<MetricsEntry>& entries, const std::string& protocol = "") {
    std::string out = "Model,Precision,Recall,AUC,F1,Accuracy,Threshold,Protocol\n";
    for (const auto& e : entries) {
        out += e.model + ',' + fmt_double(e.precision) + ',' + fmt_double(e.recall) + ',' + fmt_double(e.auc) +
               ',' + fmt_double(e.f1) + ',' + fmt_double(e.accuracy) + ',' + fmt_double(e.threshold) + ',' +
               protocol + '\n';
    }
    return out;
}

inline nlohmann::json metrics_json(const std::vector<MetricsEntry>& entries, const std::string& protocol = "") {
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json accuracy_series = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json r{{"model", e.model},       {"recall", e.recall}, {"auc", e.auc},
                         {"f1", e.f1},             {"accuracy", e.accuracy}, {"threshold", e.threshold}};
        if (e.precision_defined)
            r["precision"] = e.precision;
        else
            r["precision"] = nullptr;
        rows.push_back(std::move(r));
        accuracy_series.push_back({{"model", e.model}, {"accuracy", e.accuracy}});
    }
    return {{"protocol", protocol}, {"models", rows}, {"accuracy_series", accuracy_series}};
}

}  // namespace gallstone::eval

#endif
