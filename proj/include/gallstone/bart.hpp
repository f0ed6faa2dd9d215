#ifndef GALLSTONE_BART_HPP
#define GALLSTONE_BART_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/common.hpp"

namespace gallstone::bart {

struct TreeNode {
    int feature = -1;
    double value = 0.0;  // x <= value goes left
    int left = -1, right = -1;
    double mu = 0.0;
    int depth = 0;
    bool is_leaf() const { return left < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    double predict(const Eigen::RowVectorXd& row) const {
        int u = 0;
        while (!nodes[u].is_leaf()) u = (row(nodes[u].feature) <= nodes[u].value) ? nodes[u].left : nodes[u].right;
        return nodes[u].mu;
    }
    int max_depth() const {
        int d = 0;
        for (const auto& n : nodes) d = std::max(d, n.depth);
        return d;
    }
};

struct Forest {
    std::vector<DecisionTree> trees;

    double predict_sum(const Eigen::RowVectorXd& row) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict(row);
        return s;
    }
};

struct BartHyper {
    int m = 20;
    int n_iter = 1000;
    int n_burn = 250;
    double tree_prior_alpha = 0.95;  // split prob at depth d: alpha*(1+d)^-beta
    double tree_prior_beta = 2.0;
    double k_scale = 2.0;  // leaf prior sd = 3/(k_scale*sqrt(m))
    std::uint64_t seed = 1;
    double p_grow = 0.28, p_prune = 0.28, p_change = 0.44;
    bool check_invariants = false;  // latent truncation / MH-ratio assertions

    double sigma_mu() const { return 3.0 / (k_scale * std::sqrt(static_cast<double>(m))); }
    void validate() const {
        if (m < 1) throw ConfigError("BartHyper: m must be >= 1");
        if (n_burn >= n_iter) throw ConfigError("BartHyper: n_burn must be < n_iter");
        if (!(tree_prior_alpha > 0.0 && tree_prior_alpha < 1.0))
            throw ConfigError("BartHyper: tree_prior_alpha must be in (0,1)");
        if (tree_prior_beta < 0.0) throw ConfigError("BartHyper: tree_prior_beta must be >= 0");
        if (!(k_scale > 0.0)) throw ConfigError("BartHyper: k_scale must be > 0");
    }
};

// K retained posterior samples with per-sample split bookkeeping: c_r counts
// splitting rules per feature, c_rq counts parent-child split pairs per
// feature pair (either order; symmetric by construction).
struct BartPosterior {
    std::vector<Forest> forests;
    std::vector<Eigen::VectorXd> split_counts;  // K vectors of length p
    std::vector<Eigen::MatrixXd> pair_counts;   // K symmetric p x p matrices
    BartHyper hyper;
    int p = 0;

    int K() const { return static_cast<int>(forests.size()); }
};

namespace sampler_detail {

struct SNode {
    int feature = -1;
    double value = 0.0;
    int left = -1, right = -1, parent = -1;
    int depth = 0;
    double mu = 0.0;
    std::vector<int> rows;
    bool is_leaf() const { return left < 0; }
};

struct STree {
    std::vector<SNode> nodes;
    std::vector<int> free_slots;

    int alloc() {
        if (!free_slots.empty()) {
            const int id = free_slots.back();
            free_slots.pop_back();
            nodes[id] = SNode{};
            return id;
        }
        nodes.emplace_back();
        return static_cast<int>(nodes.size()) - 1;
    }
    void release(int id) { free_slots.push_back(id); }

    template <typename Fn>
    void walk(Fn&& fn) const {  // preorder from the root
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            fn(u);
            if (!nodes[u].is_leaf()) {
                stack.push_back(nodes[u].right);
                stack.push_back(nodes[u].left);
            }
        }
    }

    std::vector<int> leaves() const {
        std::vector<int> out;
        walk([&](int u) {
            if (nodes[u].is_leaf()) out.push_back(u);
        });
        return out;
    }
    // internal nodes whose children are both leaves; grow's inverse acts here
    std::vector<int> prunable() const {
        std::vector<int> out;
        walk([&](int u) {
            if (!nodes[u].is_leaf() && nodes[nodes[u].left].is_leaf() && nodes[nodes[u].right].is_leaf())
                out.push_back(u);
        });
        return out;
    }
};

class Sampler {
public:
    Sampler(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const BartHyper& hyper)
        : X_(X), y_(y), hyper_(hyper), rng_(derive_seed(hyper.seed, "bart")), n_(static_cast<int>(X.rows())),
          p_(static_cast<int>(X.cols())), sigma_mu2_(hyper.sigma_mu() * hyper.sigma_mu()) {
        if (p_ < 1) throw DataError("run_sampler: empty feature set");
        bool has0 = false, has1 = false;
        for (int i = 0; i < n_; ++i) (y(i) == 1 ? has1 : has0) = true;
        if (!has0 || !has1) throw DataError("run_sampler: single-class outcome");

        trees_.resize(hyper.m);
        tree_pred_.assign(hyper.m, Eigen::VectorXd::Zero(n_));
        for (auto& t : trees_) {
            t.alloc();  // root leaf
            t.nodes[0].rows.resize(n_);
            for (int i = 0; i < n_; ++i) t.nodes[0].rows[i] = i;
        }
        fit_ = Eigen::VectorXd::Zero(n_);
        z_.resize(n_);
        for (int i = 0; i < n_; ++i) z_(i) = (y_(i) == 1) ? 0.674 : -0.674;
    }

    BartPosterior run() {
        BartPosterior post;
        post.hyper = hyper_;
        post.p = p_;
        const int K = hyper_.n_iter - hyper_.n_burn;
        post.forests.reserve(K);
        post.split_counts.reserve(K);
        post.pair_counts.reserve(K);
        for (int iter = 0; iter < hyper_.n_iter; ++iter) {
            draw_latent();
            for (int j = 0; j < hyper_.m; ++j) update_tree(j);
            if (iter >= hyper_.n_burn) retain(post);
        }
        return post;
    }

private:
    double p_split(int depth) const {
        return hyper_.tree_prior_alpha * std::pow(1.0 + depth, -hyper_.tree_prior_beta);
    }

    // log marginal likelihood terms of a leaf (sigma = 1, mu ~ N(0, sigma_mu^2));
    // the parts constant across a fixed row partition are dropped
    double leaf_loglik(int n_rows, double resid_sum) const {
        const double denom = 1.0 + n_rows * sigma_mu2_;
        return -0.5 * std::log(denom) + 0.5 * sigma_mu2_ * resid_sum * resid_sum / denom;
    }

    void draw_latent() {
        for (int i = 0; i < n_; ++i) {
            z_(i) = truncated_normal_latent(fit_(i), y_(i) == 1, rng_);
            if (hyper_.check_invariants && ((y_(i) == 1 && z_(i) <= 0.0) || (y_(i) == 0 && z_(i) >= 0.0)))
                throw NumericError("bart: latent draw violates truncation");
        }
    }

    // distinct observed values of feature f among rows, excluding the maximum
    std::vector<double> cut_candidates(const std::vector<int>& rows, int f) const {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (int r : rows) vals.push_back(X_(r, f));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        if (!vals.empty()) vals.pop_back();
        return vals;
    }

    void update_tree(int j) {
        STree& tree = trees_[j];
        // residual this tree must explain
        Eigen::VectorXd r = z_ - fit_ + tree_pred_[j];

        const double u = rng_.u01();
        if (u < hyper_.p_grow) {
            propose_grow(tree, r);
        } else if (u < hyper_.p_grow + hyper_.p_prune) {
            propose_prune(tree, r);
        } else {
            propose_change(tree, r);
        }
        draw_leaf_values(tree, r);

        // refresh cached predictions and the overall fit
        fit_ -= tree_pred_[j];
        tree.walk([&](int u2) {
            const SNode& node = tree.nodes[u2];
            if (node.is_leaf())
                for (int row : node.rows) tree_pred_[j](row) = node.mu;
        });
        fit_ += tree_pred_[j];
    }

    void propose_grow(STree& tree, const Eigen::VectorXd& r) {
        const auto leaves = tree.leaves();
        const int leaf = leaves[rng_.uniform_int(0, static_cast<int>(leaves.size()) - 1)];
        const SNode& node = tree.nodes[leaf];
        if (node.rows.size() < 2) return;
        const int f = rng_.uniform_int(0, p_ - 1);
        const auto cuts = cut_candidates(node.rows, f);
        if (cuts.empty()) return;  // no split can produce two non-empty children
        const double v = cuts[rng_.uniform_int(0, static_cast<int>(cuts.size()) - 1)];

        std::vector<int> left_rows, right_rows;
        double sum_l = 0.0, sum_r = 0.0;
        for (int row : node.rows) {
            if (X_(row, f) <= v) {
                left_rows.push_back(row);
                sum_l += r(row);
            } else {
                right_rows.push_back(row);
                sum_r += r(row);
            }
        }

        const int d = node.depth;
        const double log_lik = leaf_loglik(static_cast<int>(left_rows.size()), sum_l) +
                               leaf_loglik(static_cast<int>(right_rows.size()), sum_r) -
                               leaf_loglik(static_cast<int>(node.rows.size()), sum_l + sum_r);
        const double log_prior = std::log(p_split(d)) + 2.0 * std::log(1.0 - p_split(d + 1)) -
                                 std::log(1.0 - p_split(d));
        // prunable count after the grow: the grown leaf becomes singly internal,
        // and its parent (if it was singly internal) stops being so
        int prunable_after = 1;
        for (int q : tree.prunable())
            if (q != node.parent) ++prunable_after;
        const double log_prop = std::log(hyper_.p_prune) - std::log(hyper_.p_grow) +
                                std::log(static_cast<double>(leaves.size())) -
                                std::log(static_cast<double>(prunable_after));
        const double log_alpha = log_lik + log_prior + log_prop;
        if (hyper_.check_invariants && std::isnan(log_alpha))
            throw NumericError("bart: non-finite grow acceptance ratio");

        if (std::log(rng_.u01() + 1e-300) < log_alpha) {
            const int l = tree.alloc();
            const int rgt = tree.alloc();
            SNode& nd = tree.nodes[leaf];
            nd.feature = f;
            nd.value = v;
            nd.left = l;
            nd.right = rgt;
            tree.nodes[l].parent = leaf;
            tree.nodes[l].depth = nd.depth + 1;
            tree.nodes[l].rows = std::move(left_rows);
            tree.nodes[rgt].parent = leaf;
            tree.nodes[rgt].depth = nd.depth + 1;
            tree.nodes[rgt].rows = std::move(right_rows);
        }
    }

    void propose_prune(STree& tree, const Eigen::VectorXd& r) {
        const auto prunable = tree.prunable();
        if (prunable.empty()) return;
        const int u = prunable[rng_.uniform_int(0, static_cast<int>(prunable.size()) - 1)];
        SNode& node = tree.nodes[u];
        double sum_l = 0.0, sum_r = 0.0;
        for (int row : tree.nodes[node.left].rows) sum_l += r(row);
        for (int row : tree.nodes[node.right].rows) sum_r += r(row);

        const int d = node.depth;
        const double log_lik = leaf_loglik(static_cast<int>(node.rows.size()), sum_l + sum_r) -
                               leaf_loglik(static_cast<int>(tree.nodes[node.left].rows.size()), sum_l) -
                               leaf_loglik(static_cast<int>(tree.nodes[node.right].rows.size()), sum_r);
        const double log_prior = -std::log(p_split(d)) - 2.0 * std::log(1.0 - p_split(d + 1)) +
                                 std::log(1.0 - p_split(d));
        const int leaves_after = static_cast<int>(tree.leaves().size()) - 1;
        const double log_prop = std::log(hyper_.p_grow) - std::log(hyper_.p_prune) +
                                std::log(static_cast<double>(prunable.size())) -
                                std::log(static_cast<double>(leaves_after));
        const double log_alpha = log_lik + log_prior + log_prop;
        if (hyper_.check_invariants && std::isnan(log_alpha))
            throw NumericError("bart: non-finite prune acceptance ratio");

        if (std::log(rng_.u01() + 1e-300) < log_alpha) {
            tree.release(node.left);
            tree.release(node.right);
            node.left = node.right = -1;
            node.feature = -1;
        }
    }

    void propose_change(STree& tree, const Eigen::VectorXd& r) {
        const auto targets = tree.prunable();  // rule changes act on singly-internal nodes
        if (targets.empty()) return;
        const int u = targets[rng_.uniform_int(0, static_cast<int>(targets.size()) - 1)];
        SNode& node = tree.nodes[u];
        const int f = rng_.uniform_int(0, p_ - 1);
        const auto cuts = cut_candidates(node.rows, f);
        if (cuts.empty()) return;
        const double v = cuts[rng_.uniform_int(0, static_cast<int>(cuts.size()) - 1)];

        std::vector<int> left_rows, right_rows;
        double new_sum_l = 0.0, new_sum_r = 0.0;
        for (int row : node.rows) {
            if (X_(row, f) <= v) {
                left_rows.push_back(row);
                new_sum_l += r(row);
            } else {
                right_rows.push_back(row);
                new_sum_r += r(row);
            }
        }
        if (left_rows.empty() || right_rows.empty()) return;

        double old_sum_l = 0.0, old_sum_r = 0.0;
        for (int row : tree.nodes[node.left].rows) old_sum_l += r(row);
        for (int row : tree.nodes[node.right].rows) old_sum_r += r(row);

        // uniform rule prior and proposal cancel; only the likelihood moves
        const double log_alpha = leaf_loglik(static_cast<int>(left_rows.size()), new_sum_l) +
                                 leaf_loglik(static_cast<int>(right_rows.size()), new_sum_r) -
                                 leaf_loglik(static_cast<int>(tree.nodes[node.left].rows.size()), old_sum_l) -
                                 leaf_loglik(static_cast<int>(tree.nodes[node.right].rows.size()), old_sum_r);
        if (hyper_.check_invariants && std::isnan(log_alpha))
            throw NumericError("bart: non-finite change acceptance ratio");

        if (std::log(rng_.u01() + 1e-300) < log_alpha) {
            node.feature = f;
            node.value = v;
            tree.nodes[node.left].rows = std::move(left_rows);
            tree.nodes[node.right].rows = std::move(right_rows);
        }
    }

    void draw_leaf_values(STree& tree, const Eigen::VectorXd& r) {
        tree.walk([&](int u) {
            SNode& node = tree.nodes[u];
            if (!node.is_leaf()) return;
            double sum = 0.0;
            for (int row : node.rows) sum += r(row);
            const double n_rows = static_cast<double>(node.rows.size());
            const double var = sigma_mu2_ / (1.0 + n_rows * sigma_mu2_);
            const double mean = var * sum;
            node.mu = mean + std::sqrt(var) * rng_.normal();
        });
    }

    void retain(BartPosterior& post) {
        Forest forest;
        forest.trees.reserve(hyper_.m);
        Eigen::VectorXd c_r = Eigen::VectorXd::Zero(p_);
        Eigen::MatrixXd c_rq = Eigen::MatrixXd::Zero(p_, p_);
        for (const auto& tree : trees_) {
            DecisionTree out;
            out.nodes.reserve(tree.nodes.size());
            // compact copy: map live slots to dense indices
            std::vector<int> dense(tree.nodes.size(), -1);
            tree.walk([&](int u) {
                dense[u] = static_cast<int>(out.nodes.size());
                out.nodes.emplace_back();
            });
            tree.walk([&](int u) {
                const SNode& s = tree.nodes[u];
                TreeNode& t = out.nodes[dense[u]];
                t.depth = s.depth;
                t.mu = s.mu;
                if (!s.is_leaf()) {
                    t.feature = s.feature;
                    t.value = s.value;
                    t.left = dense[s.left];
                    t.right = dense[s.right];
                    c_r(s.feature) += 1.0;
                    for (int child : {s.left, s.right})
                        if (!tree.nodes[child].is_leaf()) {
                            const int fq = tree.nodes[child].feature;
                            if (fq == s.feature) {
                                c_rq(s.feature, s.feature) += 1.0;
                            } else {
                                c_rq(s.feature, fq) += 1.0;
                                c_rq(fq, s.feature) += 1.0;
                            }
                        }
                }
            });
            forest.trees.push_back(std::move(out));
        }
        post.forests.push_back(std::move(forest));
        post.split_counts.push_back(std::move(c_r));
        post.pair_counts.push_back(std::move(c_rq));
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXi& y_;
    BartHyper hyper_;
    Rng rng_;
    int n_, p_;
    double sigma_mu2_;
    std::vector<STree> trees_;
    std::vector<Eigen::VectorXd> tree_pred_;
    Eigen::VectorXd fit_;
    Eigen::VectorXd z_;
};

}  // namespace sampler_detail

// Probit-augmented Gibbs sampler over the sum-of-trees model for a binary
// outcome: latent z ~ truncated normal given the current fit, then grow/prune/
// change Metropolis-Hastings per tree with conjugate leaf-value draws.
inline BartPosterior run_sampler(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const BartHyper& hyper) {
    hyper.validate();
    if (X.rows() != y.size()) throw DataError("run_sampler: X/y length mismatch");
    sampler_detail::Sampler sampler(X, y, hyper);
    return sampler.run();
}

// Posterior mean of Phi(sum-of-trees) per row.
inline Eigen::VectorXd predict_prob(const BartPosterior& post, const Eigen::MatrixXd& Xnew) {
    if (Xnew.cols() != post.p) throw DataError("predict_prob: column mismatch");
    if (post.K() == 0) throw DataError("predict_prob: empty posterior");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(Xnew.rows());
    for (const auto& forest : post.forests)
        for (int i = 0; i < Xnew.rows(); ++i) out(i) += normal_cdf(forest.predict_sum(Xnew.row(i)));
    return out / static_cast<double>(post.K());
}

inline double mean_tree_depth(const BartPosterior& post) {
    double s = 0.0;
    int count = 0;
    for (const auto& forest : post.forests)
        for (const auto& tree : forest.trees) {
            s += tree.max_depth();
            ++count;
        }
    return (count > 0) ? s / count : 0.0;
}

// ------------------------------------------------------------------- scores

inline constexpr double kCvNotEstimable = std::numeric_limits<double>::quiet_NaN();

struct ScoreSummary {
    Eigen::VectorXd vimp, vimp_q25, vimp_q75, vimp_cv;
    Eigen::MatrixXd vint, vint_q25, vint_q75, vint_cv;
};

namespace score_detail {

struct Stats {
    double mean = 0.0, q25 = 0.0, q75 = 0.0, cv = kCvNotEstimable;
};

inline Stats stats_over_samples(const std::vector<double>& per_sample) {
    Stats s;
    s.mean = mean_of(per_sample);
    s.q25 = quantile(per_sample, 0.25);
    s.q75 = quantile(per_sample, 0.75);
    if (s.mean >= 1e-6) s.cv = sample_sd(per_sample) / s.mean;
    return s;
}

}  // namespace score_detail

// Vimp: per-sample proportion of splitting rules using each feature, averaged
// over the posterior; samples without any split contribute zero.
inline ScoreSummary inclusion_proportions(const BartPosterior& post) {
    const int K = post.K();
    const int p = post.p;
    if (K == 0) throw DataError("inclusion_proportions: empty posterior");
    ScoreSummary s;
    s.vimp.resize(p);
    s.vimp_q25.resize(p);
    s.vimp_q75.resize(p);
    s.vimp_cv.resize(p);
    std::vector<double> per_sample(K);
    for (int r = 0; r < p; ++r) {
        for (int k = 0; k < K; ++k) {
            const double tot = post.split_counts[k].sum();
            per_sample[k] = (tot > 0.0) ? post.split_counts[k](r) / tot : 0.0;
        }
        const auto st = score_detail::stats_over_samples(per_sample);
        s.vimp(r) = st.mean;
        s.vimp_q25(r) = st.q25;
        s.vimp_q75(r) = st.q75;
        s.vimp_cv(r) = st.cv;
    }
    return s;
}

// Vint: per-sample proportion of successive (parent-child) split pairs using
// each feature pair, in either order.
inline ScoreSummary interaction_scores(const BartPosterior& post) {
    const int K = post.K();
    const int p = post.p;
    if (K == 0) throw DataError("interaction_scores: empty posterior");
    ScoreSummary s;
    s.vint.resize(p, p);
    s.vint_q25.resize(p, p);
    s.vint_q75.resize(p, p);
    s.vint_cv.resize(p, p);
    std::vector<double> per_sample(K);
    for (int r = 0; r < p; ++r)
        for (int q = r; q < p; ++q) {
            for (int k = 0; k < K; ++k) {
                const double tot = post.pair_counts[k].sum();
                per_sample[k] = (tot > 0.0) ? post.pair_counts[k](r, q) / tot : 0.0;
            }
            const auto st = score_detail::stats_over_samples(per_sample);
            s.vint(r, q) = s.vint(q, r) = st.mean;
            s.vint_q25(r, q) = s.vint_q25(q, r) = st.q25;
            s.vint_q75(r, q) = s.vint_q75(q, r) = st.q75;
            s.vint_cv(r, q) = s.vint_cv(q, r) = st.cv;
        }
    return s;
}

inline ScoreSummary compute_scores(const BartPosterior& post) {
    ScoreSummary s = inclusion_proportions(post);
    const ScoreSummary i = interaction_scores(post);
    s.vint = i.vint;
    s.vint_q25 = i.vint_q25;
    s.vint_q75 = i.vint_q75;
    s.vint_cv = i.vint_cv;
    return s;
}

// --------------------------------------------------------------- emission

namespace score_detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) {
            if (std::isnan(m(i, j)))
                row.push_back(nullptr);
            else
                row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace score_detail

// Heatmap layout: variable importance on the diagonal, interactions off it,
// with companion CV and quantile-band matrices for uncertainty-aware display.
inline nlohmann::json heatmap_json(const ScoreSummary& s, const std::vector<std::string>& names) {
    const int p = static_cast<int>(s.vimp.size());
    Eigen::MatrixXd matrix = s.vint, cv = s.vint_cv, q25 = s.vint_q25, q75 = s.vint_q75;
    for (int r = 0; r < p; ++r) {
        matrix(r, r) = s.vimp(r);
        cv(r, r) = s.vimp_cv(r);
        q25(r, r) = s.vimp_q25(r);
        q75(r, r) = s.vimp_q75(r);
    }
    nlohmann::json j;
    j["feature_names"] = names;
    j["matrix"] = score_detail::matrix_json(matrix);
    j["cv"] = score_detail::matrix_json(cv);
    j["q25"] = score_detail::matrix_json(q25);
    j["q75"] = score_detail::matrix_json(q75);
    return j;
}

inline void heatmap_export(const ScoreSummary& s, const std::vector<std::string>& names,
                           const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << heatmap_json(s, names).dump(2) << '\n';
}

inline nlohmann::json scores_json(const ScoreSummary& s, const std::vector<std::string>& names) {
    nlohmann::json vimp = nlohmann::json::array();
    for (int r = 0; r < s.vimp.size(); ++r) {
        nlohmann::json row{{"feature", names[r]}, {"vimp", s.vimp(r)},
                           {"q25", s.vimp_q25(r)}, {"q75", s.vimp_q75(r)}};
        if (std::isnan(s.vimp_cv(r)))
            row["cv"] = nullptr;
        else
            row["cv"] = s.vimp_cv(r);
        vimp.push_back(std::move(row));
    }
    nlohmann::json j;
    j["vimp"] = std::move(vimp);
    j["vint"] = score_detail::matrix_json(s.vint);
    j["vint_cv"] = score_detail::matrix_json(s.vint_cv);
    j["vint_q25"] = score_detail::matrix_json(s.vint_q25);
    j["vint_q75"] = score_detail::matrix_json(s.vint_q75);
    j["feature_names"] = names;
    return j;
}

inline std::string split_counts_csv(const BartPosterior& post, const std::vector<std::string>& names) {
    std::string out = "sample";
    for (const auto& n : names) out += ',' + n;
    out += '\n';
    for (int k = 0; k < post.K(); ++k) {
        out += std::to_string(k);
        for (int r = 0; r < post.p; ++r) out += ',' + fmt_double(post.split_counts[k](r));
        out += '\n';
    }
    return out;
}

}  // namespace gallstone::bart

#endif
