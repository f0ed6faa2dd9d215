#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gallstone/pipeline.hpp"
#include "gallstone/synthetic.hpp"

namespace {

using gallstone::pipeline::PipelineConfig;

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int threads = 0;
};

PipelineConfig effective_config(const GlobalOpts& opts) {
    PipelineConfig config =
        opts.config_path.empty() ? PipelineConfig{} : PipelineConfig::load_file(opts.config_path);
    if (opts.seed_set) config.seed = opts.seed;
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    if (opts.threads > 0) config.threads = opts.threads;
    return config;
}

void print_stage(const gallstone::pipeline::StageRecord& rec) {
    std::cout << "stage " << rec.name << " wrote:\n";
    for (const auto& a : rec.artifacts) std::cout << "  " << a << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid gallstone-risk pipeline: adaptive LASSO screening, BART scores, "
                 "ODE-informed interactions, Bayesian logistic regression, baselines"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "JSON configuration file");
    app.add_option("--seed", opts.seed, "override the configured seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    app.add_option("--out", opts.out_dir, "override the output directory");
    app.add_option("--threads", opts.threads, "worker threads for parallel stages");

    auto* run = app.add_subcommand("run", "execute the full pipeline");
    auto* select = app.add_subcommand("select", "ingest data and run adaptive-LASSO selection");
    auto* bart_scores = app.add_subcommand("bart-scores", "BART importance/interaction scores");
    auto* simulate = app.add_subcommand("simulate-odes", "integrate the interaction ODEs");
    auto* fit_bayes = app.add_subcommand("fit-bayes", "fit the Bayesian logistic model");
    auto* evaluate = app.add_subcommand("evaluate", "baseline comparison metrics");
    auto* print_config = app.add_subcommand("print-config", "dump the effective configuration");

    auto* synth = app.add_subcommand("synth-data", "write the bundled synthetic dataset as CSV");
    std::string synth_path = "gallstone_synthetic.csv";
    std::uint64_t synth_seed = 20250801;
    synth->add_option("--path", synth_path, "output CSV path");
    synth->add_option("--data-seed", synth_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        const PipelineConfig config = effective_config(opts);
        if (run->parsed()) {
            const auto manifest = gallstone::pipeline::run_pipeline(config);
            std::cout << "pipeline complete; manifest at " << config.out_dir << "/manifest.json\n";
            for (const auto& stage : manifest.at("stages"))
                std::cout << "  " << stage.at("name").get<std::string>() << ": "
                          << stage.at("artifacts").size() << " artifacts\n";
        } else if (select->parsed()) {
            print_stage(gallstone::pipeline::stage_select(config));
        } else if (bart_scores->parsed()) {
            print_stage(gallstone::pipeline::stage_bart_scores(config));
        } else if (simulate->parsed()) {
            print_stage(gallstone::pipeline::stage_simulate_odes(config));
        } else if (fit_bayes->parsed()) {
            print_stage(gallstone::pipeline::stage_fit_bayes(config));
        } else if (evaluate->parsed()) {
            print_stage(gallstone::pipeline::stage_evaluate(config));
        } else if (print_config->parsed()) {
            std::cout << config.to_json().dump(2) << '\n';
        } else if (synth->parsed()) {
            const auto table = gallstone::data::make_gallstone_surrogate(synth_seed);
            gallstone::data::write_csv(table, synth_path);
            std::cout << "wrote " << synth_path << " (" << table.n() << " rows, " << table.p()
                      << " features)\n";
        }
    } catch (const gallstone::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const gallstone::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const gallstone::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
