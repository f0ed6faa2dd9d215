#ifndef GALLSTONE_BASELINES_HPP
#define GALLSTONE_BASELINES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gallstone/common.hpp"
#include "gallstone/glm.hpp"

namespace gallstone::eval {

// ------------------------------------------------------ logistic (MLE) model

// Fits by IRLS to score norm < tol. Throws NumericError on separation,
// DataError on rank deficiency.
inline Eigen::VectorXd fit_logistic_mle(const Eigen::MatrixXd& design, const Eigen::VectorXi& y,
                                        double tol = 1e-8) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) {
        std::string msg = "fit_logistic_mle: rank-deficient design; dependent column indices:";
        const auto perm = qr.colsPermutation().indices();
        for (int j = qr.rank(); j < design.cols(); ++j) msg += ' ' + std::to_string(perm(j));
        throw DataError(msg);
    }
    auto res = glm::irls_logistic(design, y.cast<double>(), tol);
    if (!res.converged)
        throw NumericError("fit_logistic_mle: IRLS did not converge (grad norm " + fmt_double(res.grad_norm) +
                           ")");
    // separation certificate: no fitted probability in the interior means the
    // likelihood has no finite maximizer
    const Eigen::VectorXd eta = design * res.beta;
    double interior = 0.0;
    for (int i = 0; i < eta.size(); ++i) {
        const double p = glm::sigmoid(eta(i));
        interior = std::max(interior, std::min(p, 1.0 - p));
    }
    if (interior < 1e-6)
        throw NumericError("fit_logistic_mle: complete separation (all fitted probabilities at 0 or 1)");
    return res.beta;
}

inline Eigen::VectorXd logistic_predict_proba(const Eigen::VectorXd& beta, const Eigen::MatrixXd& design) {
    if (design.cols() != beta.size()) throw DataError("logistic_predict_proba: column mismatch");
    Eigen::VectorXd out(design.rows());
    const Eigen::VectorXd eta = design * beta;
    for (int i = 0; i < out.size(); ++i) out(i) = glm::sigmoid(eta(i));
    return out;
}

// ------------------------------------------------------------- random forest

struct RfParams {
    int n_trees = 500;
    int mtry = 0;  // 0 means floor(sqrt(p))
    int min_node_size = 1;
    std::uint64_t seed = 1;
    int n_threads = 1;
};

struct RfNode {
    int feature = -1;
    double threshold = 0.0;  // x <= threshold goes left
    int left = -1, right = -1;
    int pred_class = 0;
    bool is_leaf() const { return left < 0; }
};

struct RfTree {
    std::vector<RfNode> nodes;

    int predict_class(const Eigen::RowVectorXd& row) const {
        int u = 0;
        while (!nodes[u].is_leaf())
            u = (row(nodes[u].feature) <= nodes[u].threshold) ? nodes[u].left : nodes[u].right;
        return nodes[u].pred_class;
    }
};

struct RfModel {
    std::vector<RfTree> trees;
    RfParams params;
    int p = 0;
    Eigen::VectorXd oob_prob;   // NaN for rows never out of bag
    Eigen::VectorXi oob_votes;  // number of trees voting on each row
};

namespace rf_detail {

struct Builder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXi& y;
    int mtry;
    int min_node_size;
    Rng& rng;
    RfTree& tree;

    int grow(std::vector<int>& rows) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        int pos = 0;
        for (int r : rows) pos += (y(r) == 1);
        const int n_node = static_cast<int>(rows.size());
        tree.nodes[id].pred_class = (2 * pos >= n_node) ? 1 : 0;
        if (pos == 0 || pos == n_node || n_node < 2 * min_node_size) return id;

        // sample mtry candidate features without replacement
        const int p = static_cast<int>(X.cols());
        std::vector<int> feats(p);
        std::iota(feats.begin(), feats.end(), 0);
        for (int t = 0; t < mtry; ++t) {
            const int j = rng.uniform_int(t, p - 1);
            std::swap(feats[t], feats[j]);
        }

        double best_gain = 0.0;
        int best_feat = -1;
        double best_thresh = 0.0;
        const double parent_gini = gini(pos, n_node);
        std::vector<int> order(rows);
        for (int t = 0; t < mtry; ++t) {
            const int f = feats[t];
            std::sort(order.begin(), order.end(), [&](int a, int b) { return X(a, f) < X(b, f); });
            int left_pos = 0;
            for (int i = 0; i + 1 < n_node; ++i) {
                left_pos += (y(order[i]) == 1);
                if (X(order[i], f) == X(order[i + 1], f)) continue;
                const int nl = i + 1, nr = n_node - nl;
                if (nl < min_node_size || nr < min_node_size) continue;
                const double gain = parent_gini - (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) /
                                                      static_cast<double>(n_node);
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feat = f;
                    best_thresh = 0.5 * (X(order[i], f) + X(order[i + 1], f));
                }
            }
        }
        if (best_feat < 0) return id;

        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (X(r, best_feat) <= best_thresh ? left_rows : right_rows).push_back(r);
        if (left_rows.empty() || right_rows.empty()) return id;

        tree.nodes[id].feature = best_feat;
        tree.nodes[id].threshold = best_thresh;
        const int l = grow(left_rows);
        tree.nodes[id].left = l;
        const int r = grow(right_rows);
        tree.nodes[id].right = r;
        return id;
    }

    static double gini(int pos, int n) {
        const double q = static_cast<double>(pos) / n;
        return 2.0 * q * (1.0 - q);
    }
};

}  // namespace rf_detail

inline RfModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, RfParams params) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (n < 2) throw DataError("fit_random_forest: need at least 2 rows");
    {
        int pos = 0;
        for (int i = 0; i < n; ++i) pos += (y(i) == 1);
        if (pos == 0 || pos == n) throw DataError("fit_random_forest: single-class outcome");
    }
    if (params.mtry <= 0) params.mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(p))));
    params.mtry = std::min(params.mtry, p);

    RfModel model;
    model.params = params;
    model.p = p;
    model.trees.resize(params.n_trees);
    std::vector<std::vector<char>> in_bag(params.n_trees, std::vector<char>(n, 0));

    parallel_for(params.n_trees, params.n_threads, [&](std::size_t t) {
        Rng rng(derive_seed(params.seed, "rf_tree", t));
        std::vector<int> rows(n);
        for (int i = 0; i < n; ++i) {
            const int r = rng.uniform_int(0, n - 1);
            rows[i] = r;
            in_bag[t][r] = 1;
        }
        rf_detail::Builder builder{X, y, params.mtry, params.min_node_size, rng, model.trees[t]};
        builder.grow(rows);
    });

    // out-of-bag vote fractions, accumulated in fixed tree order
    model.oob_prob = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    model.oob_votes = Eigen::VectorXi::Zero(n);
    Eigen::VectorXd vote_sum = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < params.n_trees; ++t)
        for (int i = 0; i < n; ++i)
            if (!in_bag[t][i]) {
                vote_sum(i) += model.trees[t].predict_class(X.row(i));
                model.oob_votes(i)++;
            }
    for (int i = 0; i < n; ++i)
        if (model.oob_votes(i) > 0) model.oob_prob(i) = vote_sum(i) / model.oob_votes(i);
    return model;
}

// Fraction of trees voting class 1.
inline Eigen::VectorXd rf_predict_proba(const RfModel& model, const Eigen::MatrixXd& Xnew) {
    if (Xnew.cols() != model.p) throw DataError("rf_predict_proba: column mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(Xnew.rows());
    for (const auto& tree : model.trees)
        for (int i = 0; i < Xnew.rows(); ++i) out(i) += tree.predict_class(Xnew.row(i));
    return out / static_cast<double>(model.trees.size());
}

}  // namespace gallstone::eval

#endif
