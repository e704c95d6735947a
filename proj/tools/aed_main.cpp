// Command-line front end. Every subcommand reads files and writes files, so
// any stage can be rerun from its predecessor's outputs.

#include "aed/common.hpp"
#include "aed/pipeline.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string log;
    std::string profiles;
    std::string features;
    std::string split;
    std::string model;
    std::string hyperparams;
    std::string target = "task_agnostic";
    std::optional<std::uint64_t> seed;
    std::optional<int> n_tasks;
    std::optional<int> n_iter;
    std::optional<std::size_t> max_rows;
    std::optional<double> coverage;
    std::vector<std::string> applications;
    bool skip_shap = false;
    bool skip_audit = false;
};

aed::ExperimentConfig base_config(const Options& o) {
    aed::ExperimentConfig c = o.config.empty() ? aed::ExperimentConfig{} : aed::load_experiment_config(o.config);
    if (o.skip_shap) {
        c.skip_shap = true;
    }
    if (o.skip_audit) {
        c.skip_audit = true;
    }
    if (!o.applications.empty()) {
        c.applications.clear();
        for (const std::string& a : o.applications) {
            try {
                c.applications.push_back(aed::parse_application(a));
            } catch (const aed::DataError& ex) {
                throw aed::UsageError(ex.what());
            }
        }
    }
    return c;
}

void add_config(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
}

void add_target(CLI::App* cmd, Options& o) {
    cmd->add_option("--target", o.target, "application name or task_agnostic")->capture_default_str();
}

void add_data(CLI::App* cmd, Options& o) {
    cmd->add_option("--features", o.features, "feature matrix CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--split", o.split, "split JSON")->required()->check(CLI::ExistingFile);
    add_target(cmd, o);
}

int run(int argc, char** argv) {
    CLI::App app{"Annotation error detection: synthetic data, features, boosted trees, SHAP and audit simulation"};
    app.require_subcommand(1);
    Options o;

    auto* generate = app.add_subcommand("generate", "write a synthetic annotation log and annotator profiles");
    add_config(generate, o);
    generate->add_option("--out", o.out, "output directory")->required();
    generate->add_option("--seed", o.seed, "generator seed");
    generate->add_option("--n-tasks", o.n_tasks, "number of tasks");

    auto* featurize = app.add_subcommand("featurize", "build the feature matrix and the train/validation/test split");
    add_config(featurize, o);
    featurize->add_option("--log", o.log, "annotation log (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
    featurize->add_option("--profiles", o.profiles, "annotator profiles (.jsonl)")->required()->check(CLI::ExistingFile);
    featurize->add_option("--out", o.out, "output directory")->required();
    featurize->add_option("--applications", o.applications, "applications to keep");

    auto* preprocess = app.add_subcommand("preprocess", "fit the preprocessor and write the design matrix");
    add_data(preprocess, o);
    preprocess->add_option("--out", o.out, "output directory")->required();

    auto* tune = app.add_subcommand("tune", "random hyperparameter search on inner-train and validation rows");
    add_config(tune, o);
    add_data(tune, o);
    tune->add_option("--n-iter", o.n_iter, "sampled configurations");
    tune->add_option("--seed", o.seed, "search seed");
    tune->add_option("--out", o.out, "output directory")->required();

    auto* train = app.add_subcommand("train", "refit the chosen hyperparameters on train and validation rows");
    add_data(train, o);
    train->add_option("--hyperparams", o.hyperparams, "search.json or a hyperparameter object")
        ->required()
        ->check(CLI::ExistingFile);
    train->add_option("--out", o.out, "model JSON path")->required();

    auto* evaluate = app.add_subcommand("evaluate", "score a model on the test rows");
    add_data(evaluate, o);
    evaluate->add_option("--model", o.model, "model JSON")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--out", o.out, "report JSON path")->required();

    auto* explain = app.add_subcommand("explain", "TreeSHAP values and feature importance on test rows");
    add_config(explain, o);
    add_data(explain, o);
    explain->add_option("--model", o.model, "model JSON")->required()->check(CLI::ExistingFile);
    explain->add_option("--max-rows", o.max_rows, "rows to explain, sampled with --seed");
    explain->add_option("--seed", o.seed, "row sampling seed");
    explain->add_option("--out", o.out, "output directory")->required();
    explain->add_flag("--skip-shap", o.skip_shap, "disable this stage");

    auto* audit = app.add_subcommand("audit-sim", "audit curves and efficiency gain on test rows");
    add_config(audit, o);
    add_data(audit, o);
    audit->add_option("--model", o.model, "model JSON")->required()->check(CLI::ExistingFile);
    audit->add_option("--target-coverage", o.coverage, "error coverage for the efficiency gain");
    audit->add_option("--out", o.out, "output directory")->required();
    audit->add_flag("--skip-audit", o.skip_audit, "disable this stage");

    auto* experiment = app.add_subcommand("experiment", "run every stage into one output directory");
    add_config(experiment, o);
    experiment->add_option("--out", o.out, "output directory (overrides the config)");
    experiment->add_option("--n-iter", o.n_iter, "sampled configurations per model");
    experiment->add_flag("--skip-shap", o.skip_shap, "skip the explain stage");
    experiment->add_flag("--skip-audit", o.skip_audit, "skip the audit stage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex);
        return code == 0 ? 0 : 1;
    }

    const auto started = std::chrono::steady_clock::now();
    aed::ExperimentConfig config = base_config(o);
    const aed::ModelTarget target = aed::parse_model_target(o.target);

    if (generate->parsed()) {
        if (o.seed) {
            config.generator.seed = *o.seed;
        }
        if (o.n_tasks) {
            config.generator.n_tasks = *o.n_tasks;
        }
        aed::stage_generate(config.generator, o.out);
    } else if (featurize->parsed()) {
        const fs::path dir = o.out;
        aed::stage_featurize(o.log, o.profiles, config.windows, config.applications, dir / "features.csv");
        aed::stage_split(o.log, config.applications, config.test_fraction, config.validation_fraction,
                         config.split_seed, dir / "split.json");
    } else if (preprocess->parsed()) {
        aed::stage_preprocess(o.features, o.split, target, o.out);
    } else if (tune->parsed()) {
        aed::stage_tune(o.features, o.split, target, config.search_space, o.n_iter.value_or(config.n_iter),
                        o.seed.value_or(config.search_seed), o.out);
    } else if (train->parsed()) {
        aed::stage_train(o.features, o.split, target, aed::read_hyperparams(o.hyperparams), o.out);
    } else if (evaluate->parsed()) {
        aed::stage_evaluate(o.model, o.features, o.split, target, o.out);
    } else if (explain->parsed()) {
        if (config.skip_shap) {
            throw aed::UsageError("explain: stage disabled (skip-shap is set)");
        }
        aed::stage_explain(o.model, o.features, o.split, target, o.max_rows.value_or(config.shap_max_rows),
                           o.seed.value_or(config.shap_seed), o.out);
    } else if (audit->parsed()) {
        if (config.skip_audit) {
            throw aed::UsageError("audit-sim: stage disabled (skip-audit is set)");
        }
        aed::stage_audit(o.model, o.features, o.split, target, o.coverage.value_or(config.target_coverage),
                         config.lift_ks, o.out);
    } else if (experiment->parsed()) {
        if (!o.out.empty()) {
            config.output_dir = o.out;
        }
        if (o.n_iter) {
            config.n_iter = *o.n_iter;
        }
        aed::run_experiment(config);
        std::cout << "results in " << config.output_dir.string() << '\n';
    }

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    std::cerr << "done in " << elapsed.count() << " s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const aed::UsageError& ex) {
        std::cerr << "usage error: " << ex.what() << '\n';
        return 1;
    } catch (const aed::DataError& ex) {
        std::cerr << "data error: " << ex.what() << '\n';
        return 2;
    } catch (const aed::InvariantError& ex) {
        std::cerr << "internal error: " << ex.what() << '\n';
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << '\n';
        return 3;
    }
}
