#ifndef GALLSTONE_PIPELINE_HPP
#define GALLSTONE_PIPELINE_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gallstone/bart.hpp"
#include "gallstone/baselines.hpp"
#include "gallstone/bayes_logit.hpp"
#include "gallstone/common.hpp"
#include "gallstone/dataset.hpp"
#include "gallstone/lasso.hpp"
#include "gallstone/metrics.hpp"
#include "gallstone/ode.hpp"
#include "gallstone/synthetic.hpp"

namespace gallstone::pipeline {

inline constexpr const char* kVersion = "0.1.0";
// data_path sentinel that generates the bundled synthetic dataset in memory
inline constexpr const char* kSyntheticPath = "synthetic:gallstone";

struct PipelineConfig {
    std::string data_path = kSyntheticPath;
    std::string outcome_column = "outcome";
    std::uint64_t seed = 20250801;
    std::string out_dir = "out";
    int threads = 1;

    int cv_folds = 10;
    lasso::LassoParams lasso_params;

    bart::BartHyper bart_hyper;
    double vimp_cutoff = -1.0;  // negative means "uniform 1/p"
    bool dump_split_counts = false;

    bayes::McmcSettings mcmc;
    std::vector<std::string> final_main_effects = bayes::default_main_effects();
    bayes::InteractionColumns interaction_columns;
    bool dump_draws = false;
    int surface_grid = 41;

    eval::RfParams rf_params;
    double test_fraction = 0.2;
    double threshold = 0.5;

    ode::SimulationConfig sim;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["data_path"] = data_path;
        j["outcome_column"] = outcome_column;
        j["seed"] = seed;
        j["out_dir"] = out_dir;
        j["threads"] = threads;
        j["lasso"] = {{"gamma", lasso_params.gamma},
                      {"n_lambda", lasso_params.n_lambda},
                      {"lambda_min_ratio", lasso_params.lambda_min_ratio},
                      {"tol", lasso_params.tol},
                      {"max_iter", lasso_params.max_iter},
                      {"family", lasso_params.family == lasso::Family::binomial ? "binomial" : "gaussian"},
                      {"one_se_rule", lasso_params.one_se_rule},
                      {"cv_folds", cv_folds}};
        j["bart"] = {{"m", bart_hyper.m},
                     {"n_iter", bart_hyper.n_iter},
                     {"n_burn", bart_hyper.n_burn},
                     {"tree_prior_alpha", bart_hyper.tree_prior_alpha},
                     {"tree_prior_beta", bart_hyper.tree_prior_beta},
                     {"k_scale", bart_hyper.k_scale},
                     {"p_grow", bart_hyper.p_grow},
                     {"p_prune", bart_hyper.p_prune},
                     {"p_change", bart_hyper.p_change},
                     {"vimp_cutoff", vimp_cutoff},
                     {"dump_split_counts", dump_split_counts}};
        j["bayes"] = {{"n_chains", mcmc.n_chains},
                      {"n_iter", mcmc.n_iter},
                      {"n_warmup", mcmc.n_warmup},
                      {"target_accept", mcmc.target_accept},
                      {"random_walk", mcmc.random_walk},
                      {"main_effects", final_main_effects},
                      {"dump_draws", dump_draws},
                      {"surface_grid", surface_grid},
                      {"interaction_columns",
                       {{"ecf", interaction_columns.ecf},
                        {"vitd", interaction_columns.vitd},
                        {"crp", interaction_columns.crp},
                        {"hgb", interaction_columns.hgb},
                        {"hyper", interaction_columns.hyper},
                        {"bm", interaction_columns.bm},
                        {"dm", interaction_columns.dm}}}};
        j["evaluate"] = {{"rf_trees", rf_params.n_trees},
                         {"rf_mtry", rf_params.mtry},
                         {"rf_min_node_size", rf_params.min_node_size},
                         {"test_fraction", test_fraction},
                         {"threshold", threshold}};
        auto range_json = [](const ode::SimulationRange& r) {
            return nlohmann::json{{"y0", r.y0}, {"x0", r.x0}, {"x1", r.x1}, {"step", r.step}};
        };
        j["simulate"] = {{"ecf_vitd", range_json(sim.ecf_vitd)},
                         {"crp_hgb", range_json(sim.crp_hgb)},
                         {"hyper_vitd", range_json(sim.hyper_vitd)},
                         {"dm_bm", range_json(sim.dm_bm)}};
        return j;
    }

    static PipelineConfig from_json(const nlohmann::json& j) {
        PipelineConfig c;
        auto get = [](const nlohmann::json& obj, const char* key, auto& target) {
            if (obj.contains(key)) target = obj.at(key).template get<std::decay_t<decltype(target)>>();
        };
        get(j, "data_path", c.data_path);
        get(j, "outcome_column", c.outcome_column);
        get(j, "seed", c.seed);
        get(j, "out_dir", c.out_dir);
        get(j, "threads", c.threads);
        if (j.contains("lasso")) {
            const auto& l = j.at("lasso");
            get(l, "gamma", c.lasso_params.gamma);
            get(l, "n_lambda", c.lasso_params.n_lambda);
            get(l, "lambda_min_ratio", c.lasso_params.lambda_min_ratio);
            get(l, "tol", c.lasso_params.tol);
            get(l, "max_iter", c.lasso_params.max_iter);
            get(l, "one_se_rule", c.lasso_params.one_se_rule);
            get(l, "cv_folds", c.cv_folds);
            if (l.contains("family")) {
                const std::string fam = l.at("family").get<std::string>();
                if (fam == "binomial")
                    c.lasso_params.family = lasso::Family::binomial;
                else if (fam == "gaussian")
                    c.lasso_params.family = lasso::Family::gaussian;
                else
                    throw ConfigError("config: unknown lasso family '" + fam + "'");
            }
        }
        if (j.contains("bart")) {
            const auto& b = j.at("bart");
            get(b, "m", c.bart_hyper.m);
            get(b, "n_iter", c.bart_hyper.n_iter);
            get(b, "n_burn", c.bart_hyper.n_burn);
            get(b, "tree_prior_alpha", c.bart_hyper.tree_prior_alpha);
            get(b, "tree_prior_beta", c.bart_hyper.tree_prior_beta);
            get(b, "k_scale", c.bart_hyper.k_scale);
            get(b, "p_grow", c.bart_hyper.p_grow);
            get(b, "p_prune", c.bart_hyper.p_prune);
            get(b, "p_change", c.bart_hyper.p_change);
            get(b, "vimp_cutoff", c.vimp_cutoff);
            get(b, "dump_split_counts", c.dump_split_counts);
        }
        if (j.contains("bayes")) {
            const auto& b = j.at("bayes");
            get(b, "n_chains", c.mcmc.n_chains);
            get(b, "n_iter", c.mcmc.n_iter);
            get(b, "n_warmup", c.mcmc.n_warmup);
            get(b, "target_accept", c.mcmc.target_accept);
            get(b, "random_walk", c.mcmc.random_walk);
            get(b, "main_effects", c.final_main_effects);
            get(b, "dump_draws", c.dump_draws);
            get(b, "surface_grid", c.surface_grid);
            if (b.contains("interaction_columns")) {
                const auto& ic = b.at("interaction_columns");
                get(ic, "ecf", c.interaction_columns.ecf);
                get(ic, "vitd", c.interaction_columns.vitd);
                get(ic, "crp", c.interaction_columns.crp);
                get(ic, "hgb", c.interaction_columns.hgb);
                get(ic, "hyper", c.interaction_columns.hyper);
                get(ic, "bm", c.interaction_columns.bm);
                get(ic, "dm", c.interaction_columns.dm);
            }
        }
        if (j.contains("evaluate")) {
            const auto& e = j.at("evaluate");
            get(e, "rf_trees", c.rf_params.n_trees);
            get(e, "rf_mtry", c.rf_params.mtry);
            get(e, "rf_min_node_size", c.rf_params.min_node_size);
            get(e, "test_fraction", c.test_fraction);
            get(e, "threshold", c.threshold);
        }
        if (j.contains("simulate")) {
            auto fill = [&](const char* key, ode::SimulationRange& r) {
                if (!j.at("simulate").contains(key)) return;
                const auto& s = j.at("simulate").at(key);
                get(s, "y0", r.y0);
                get(s, "x0", r.x0);
                get(s, "x1", r.x1);
                get(s, "step", r.step);
            };
            fill("ecf_vitd", c.sim.ecf_vitd);
            fill("crp_hgb", c.sim.crp_hgb);
            fill("hyper_vitd", c.sim.hyper_vitd);
            fill("dm_bm", c.sim.dm_bm);
        }
        return c;
    }

    static PipelineConfig load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        return from_json(j);
    }
};

// -------------------------------------------------------------- stage helpers

namespace stage_detail {

namespace fs = std::filesystem;

inline void ensure_out_dir(const PipelineConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + config.out_dir + ": " + ec.message());
}

inline std::string artifact_path(const PipelineConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

inline void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const std::string& path, const std::string& producer_hint) {
    std::ifstream in(path);
    if (!in)
        throw DataError("missing upstream artifact " + path + "; run `" + producer_hint + "` first");
    nlohmann::json j;
    in >> j;
    return j;
}

struct LoadedData {
    data::FeatureTable table;
    data::IngestReport report;
    std::string digest;
};

inline LoadedData load_input(const PipelineConfig& config) {
    LoadedData out;
    if (config.data_path == kSyntheticPath) {
        out.table = data::make_gallstone_surrogate();
        out.report.n = out.table.n();
        out.report.p = out.table.p();
        for (int i = 0; i < out.table.n(); ++i)
            (out.table.outcome(i) == 1 ? out.report.outcome_positive : out.report.outcome_negative)++;
        std::string canon;
        for (int i = 0; i < out.table.n(); ++i)
            for (int j = 0; j < out.table.p(); ++j) canon += fmt_double(out.table.values(i, j)) + ",";
        out.digest = fnv1a_hex(canon);
        return out;
    }
    data::CsvSchema schema;
    schema.outcome_column = config.outcome_column;
    auto [table, report] = data::load_csv(config.data_path, schema);
    out.table = std::move(table);
    out.report = report;
    std::ifstream in(config.data_path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.digest = fnv1a_hex(ss.str());
    return out;
}

}  // namespace stage_detail

// ------------------------------------------------------------------- stages

struct StageRecord {
    std::string name;
    std::vector<std::string> artifacts;
    double seconds = 0.0;
};

// Stage 1: ingest + adaptive-LASSO screening. Writes the ingestion report and
// the selection report (lambda grid, CV curve, selected features).
inline StageRecord stage_select(const PipelineConfig& config) {
    stage_detail::ensure_out_dir(config);
    StageRecord rec{"select", {}, 0.0};
    auto loaded = stage_detail::load_input(config);
    const std::string ingest_path = stage_detail::artifact_path(config, "ingest_report.json");
    stage_detail::write_json(ingest_path, loaded.report.to_json());
    rec.artifacts.push_back(ingest_path);

    auto [std_table, std_params] = data::standardize(loaded.table);
    std::vector<int> strat(loaded.table.outcome.begin(), loaded.table.outcome.end());
    const auto folds = data::make_folds(std_table.n(), config.cv_folds, derive_seed(config.seed, "cv_folds"),
                                        config.lasso_params.family == lasso::Family::binomial ? &strat : nullptr);
    lasso::LassoParams params = config.lasso_params;
    params.n_threads = config.threads;
    const auto cv = lasso::cv_select(std_table, folds, params);

    nlohmann::json report = lasso::selection_report_json(cv, std_table.column_names);
    report["n"] = std_table.n();
    report["cv_folds"] = config.cv_folds;
    const std::string sel_path = stage_detail::artifact_path(config, "selection_report.json");
    stage_detail::write_json(sel_path, report);
    rec.artifacts.push_back(sel_path);
    return rec;
}

// Stage 2: BART importance and interaction scores on the selected features.
inline StageRecord stage_bart_scores(const PipelineConfig& config) {
    stage_detail::ensure_out_dir(config);
    StageRecord rec{"bart-scores", {}, 0.0};
    auto loaded = stage_detail::load_input(config);
    const auto selection = stage_detail::read_json(
        stage_detail::artifact_path(config, "selection_report.json"), "gallstone select");
    std::vector<std::string> selected = selection.at("selected_features").get<std::vector<std::string>>();
    if (selected.empty()) throw DataError("bart-scores: selection report lists no features");

    std::vector<int> cols;
    for (const auto& name : selected) cols.push_back(loaded.table.column_index(name));
    const data::FeatureTable sub = data::select_columns(loaded.table, cols);

    bart::BartHyper hyper = config.bart_hyper;
    hyper.seed = derive_seed(config.seed, "bart");
    const auto posterior = bart::run_sampler(sub.values, sub.outcome, hyper);
    const auto scores = bart::compute_scores(posterior);

    const double cutoff = (config.vimp_cutoff >= 0.0) ? config.vimp_cutoff : 1.0 / sub.p();
    std::vector<int> order(sub.p());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores.vimp(a) != scores.vimp(b)) return scores.vimp(a) > scores.vimp(b);
        return a < b;
    });
    nlohmann::json ranked = nlohmann::json::array();
    nlohmann::json important = nlohmann::json::array();
    for (int idx : order) {
        ranked.push_back({{"feature", sub.column_names[idx]}, {"vimp", scores.vimp(idx)}});
        if (scores.vimp(idx) > cutoff) important.push_back(sub.column_names[idx]);
    }

    nlohmann::json out = bart::scores_json(scores, sub.column_names);
    out["ranked_vimp"] = std::move(ranked);
    out["important_features"] = std::move(important);
    out["vimp_cutoff"] = cutoff;
    out["mean_tree_depth"] = bart::mean_tree_depth(posterior);
    out["retained_samples"] = posterior.K();
    const std::string scores_path = stage_detail::artifact_path(config, "bart_scores.json");
    stage_detail::write_json(scores_path, out);
    rec.artifacts.push_back(scores_path);

    const std::string heatmap_path = stage_detail::artifact_path(config, "heatmap.json");
    bart::heatmap_export(scores, sub.column_names, heatmap_path);
    rec.artifacts.push_back(heatmap_path);

    if (config.dump_split_counts) {
        const std::string counts_path = stage_detail::artifact_path(config, "split_counts.csv");
        stage_detail::write_text(counts_path, bart::split_counts_csv(posterior, sub.column_names));
        rec.artifacts.push_back(counts_path);
    }
    return rec;
}

// Stage 3: integrate the four interaction ODEs for plotting.
inline StageRecord stage_simulate_odes(const PipelineConfig& config) {
    stage_detail::ensure_out_dir(config);
    StageRecord rec{"simulate-odes", {}, 0.0};
    const auto trajs = ode::simulate_trajectories(config.sim);
    for (std::size_t i = 0; i < ode::kAllOdes.size(); ++i) {
        const std::string path = stage_detail::artifact_path(
            config, std::string("trajectory_") + ode::ode_name(ode::kAllOdes[i]) + ".csv");
        ode::write_trajectory_csv(trajs[i], path);
        rec.artifacts.push_back(path);
    }
    const std::string json_path = stage_detail::artifact_path(config, "trajectories.json");
    stage_detail::write_json(json_path, ode::trajectories_to_json(trajs));
    rec.artifacts.push_back(json_path);
    return rec;
}

// Stage 4: Bayesian logistic regression over the nine main effects plus the
// four ODE-informed interaction covariates.
inline StageRecord stage_fit_bayes(const PipelineConfig& config) {
    stage_detail::ensure_out_dir(config);
    StageRecord rec{"fit-bayes", {}, 0.0};
    auto loaded = stage_detail::load_input(config);
    const auto design =
        bayes::build_design(loaded.table, config.final_main_effects, true, config.interaction_columns);
    const auto prior = bayes::PriorSpec::weakly_informative(static_cast<int>(design.X.cols()));
    bayes::McmcSettings settings = config.mcmc;
    settings.seed = derive_seed(config.seed, "bayes");
    settings.n_threads = config.threads;
    const auto draws = bayes::run_chains(design, loaded.table.outcome, prior, settings);
    const auto summary = bayes::summarize(draws);

    const std::string csv_path = stage_detail::artifact_path(config, "posterior_summary.csv");
    stage_detail::write_text(csv_path, bayes::summary_csv(summary));
    rec.artifacts.push_back(csv_path);
    nlohmann::json sj = bayes::summary_json(summary);
    sj["accept_rate"] = draws.accept_rate;
    const std::string json_path = stage_detail::artifact_path(config, "posterior_summary.json");
    stage_detail::write_json(json_path, sj);
    rec.artifacts.push_back(json_path);

    if (config.dump_draws) {
        const std::string draws_path = stage_detail::artifact_path(config, "draws.csv");
        stage_detail::write_text(draws_path, bayes::draws_csv(draws));
        rec.artifacts.push_back(draws_path);
    }

    for (auto pair : {bayes::SurfacePair::CrpHgb, bayes::SurfacePair::VitdHyper}) {
        const auto surf = bayes::interaction_surface(draws, loaded.table, pair, config.surface_grid,
                                                     config.final_main_effects, config.interaction_columns);
        const std::string path = stage_detail::artifact_path(
            config, pair == bayes::SurfacePair::CrpHgb ? "surface_crp_hgb.csv" : "surface_vitd_hyper.csv");
        stage_detail::write_text(path, bayes::surface_csv(surf));
        rec.artifacts.push_back(path);
    }
    return rec;
}

// Stage 5: baseline comparison (BART vs logistic MLE vs random forest) on a
// stratified held-out split.
inline StageRecord stage_evaluate(const PipelineConfig& config) {
    stage_detail::ensure_out_dir(config);
    StageRecord rec{"evaluate", {}, 0.0};
    auto loaded = stage_detail::load_input(config);
    const auto selection = stage_detail::read_json(
        stage_detail::artifact_path(config, "selection_report.json"), "gallstone select");
    const std::vector<std::string> selected =
        selection.at("selected_features").get<std::vector<std::string>>();
    if (selected.empty()) throw DataError("evaluate: selection report lists no features");

    const auto [train, test] =
        data::train_test_split(loaded.table, config.test_fraction, derive_seed(config.seed, "eval_split"), true);

    std::vector<int> cols_train;
    for (const auto& name : selected) cols_train.push_back(train.column_index(name));
    const data::FeatureTable train_sel = data::select_columns(train, cols_train);
    const data::FeatureTable test_sel = data::select_columns(test, cols_train);

    std::vector<eval::MetricsEntry> entries;

    bart::BartHyper hyper = config.bart_hyper;
    hyper.seed = derive_seed(config.seed, "eval_bart");
    const auto bart_post = bart::run_sampler(train_sel.values, train_sel.outcome, hyper);
    const Eigen::VectorXd bart_scores = bart::predict_prob(bart_post, test_sel.values);
    entries.push_back(eval::compute_metrics("BART", bart_scores, test_sel.outcome, config.threshold));

    const auto train_design =
        bayes::build_design(train, config.final_main_effects, true, config.interaction_columns);
    const auto test_design =
        bayes::build_design(test, config.final_main_effects, true, config.interaction_columns);
    const Eigen::VectorXd beta = eval::fit_logistic_mle(train_design.X, train.outcome);
    const Eigen::VectorXd lr_scores = eval::logistic_predict_proba(beta, test_design.X);
    entries.push_back(eval::compute_metrics("Logistic Regression", lr_scores, test.outcome, config.threshold));

    eval::RfParams rf = config.rf_params;
    rf.seed = derive_seed(config.seed, "eval_rf");
    rf.n_threads = config.threads;
    const auto forest = eval::fit_random_forest(train_sel.values, train_sel.outcome, rf);
    const Eigen::VectorXd rf_scores = eval::rf_predict_proba(forest, test_sel.values);
    entries.push_back(eval::compute_metrics("Random Forest", rf_scores, test_sel.outcome, config.threshold));

    const std::string protocol = "stratified holdout test_fraction=" + fmt_double(config.test_fraction) +
                                 " threshold=" + fmt_double(config.threshold) +
                                 " seed=" + std::to_string(config.seed);
    const std::string csv_path = stage_detail::artifact_path(config, "metrics.csv");
    stage_detail::write_text(csv_path, eval::metrics_csv(entries, protocol));
    rec.artifacts.push_back(csv_path);
    const std::string json_path = stage_detail::artifact_path(config, "metrics.json");
    stage_detail::write_json(json_path, eval::metrics_json(entries, protocol));
    rec.artifacts.push_back(json_path);
    return rec;
}

// ------------------------------------------------------------- full pipeline

inline nlohmann::json run_pipeline(const PipelineConfig& config) {
    stage_detail::ensure_out_dir(config);
    // validate the input (existence, outcome column) before any computation
    auto loaded = stage_detail::load_input(config);

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = config.seed;
    manifest["threads"] = config.threads;
    manifest["input"] = {{"path", config.data_path},
                         {"digest", loaded.digest},
                         {"n", loaded.report.n},
                         {"p", loaded.report.p}};
    manifest["config"] = config.to_json();
    nlohmann::json stages = nlohmann::json::array();

    using StageFn = StageRecord (*)(const PipelineConfig&);
    const std::pair<const char*, StageFn> plan[] = {{"select", &stage_select},
                                                    {"bart-scores", &stage_bart_scores},
                                                    {"simulate-odes", &stage_simulate_odes},
                                                    {"fit-bayes", &stage_fit_bayes},
                                                    {"evaluate", &stage_evaluate}};
    for (const auto& [name, fn] : plan) {
        const auto t0 = std::chrono::steady_clock::now();
        StageRecord rec;
        try {
            rec = fn(config);
        } catch (const ConfigError& e) {
            throw ConfigError("stage " + std::string(name) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("stage " + std::string(name) + ": " + e.what());
        } catch (const NumericError& e) {
            throw NumericError("stage " + std::string(name) + ": " + e.what());
        }
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        stages.push_back({{"name", rec.name}, {"artifacts", rec.artifacts}, {"seconds", rec.seconds}});
    }
    manifest["stages"] = std::move(stages);
    stage_detail::write_json(stage_detail::artifact_path(config, "manifest.json"), manifest);
    return manifest;
}

}  // namespace gallstone::pipeline

#endif
