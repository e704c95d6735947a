#pragma once

#include "aed/annotation_log.hpp"
#include "aed/audit_sim.hpp"
#include "aed/explain.hpp"
#include "aed/featurize.hpp"
#include "aed/model_selection.hpp"
#include "aed/synthgen.hpp"

#include "json.hpp"

#include <filesystem>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

namespace aed {

struct ExperimentConfig {
    std::filesystem::path output_dir = "experiment_out";
    // An existing log and profile file; when absent a synthetic log is
    // generated from `generator`.
    std::optional<std::filesystem::path> log_path;
    std::optional<std::filesystem::path> profiles_path;
    GenConfig generator;
    WindowConfig windows;
    double test_fraction = 0.30;
    double validation_fraction = 0.30;
    std::uint64_t split_seed = 17;
    std::uint64_t search_seed = 29;
    // Ten draws per model keep the default run to a few minutes on one core.
    int n_iter = 10;
    SearchSpace search_space;
    std::vector<Application> applications{std::begin(kAllApplications), std::end(kAllApplications)};
    bool skip_shap = false;
    bool skip_audit = false;
    // Test rows explained per model; above any default test set size.
    std::size_t shap_max_rows = 20000;
    std::uint64_t shap_seed = 43;
    double target_coverage = 0.8;
    std::vector<std::size_t> lift_ks{50, 100, 500};
};

nlohmann::ordered_json to_json(const ExperimentConfig& config);
// Unknown keys are a UsageError; absent keys keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string config_hash(const ExperimentConfig& config);

// Which rows a model is trained and tested on: one application, or all of
// them for the task-agnostic model.
struct ModelTarget {
    std::optional<Application> application;

    std::string name() const;
    FeatureMatrix select(const FeatureMatrix& matrix) const;
};

ModelTarget parse_model_target(std::string_view text);  // application name or "task_agnostic"

// Paths of the files a synthetic generation run writes into a directory.
struct GeneratedFiles {
    std::filesystem::path log;
    std::filesystem::path profiles;
    std::filesystem::path hidden_probabilities;
    std::filesystem::path info;
};

GeneratedFiles generated_files(const std::filesystem::path& dir);

// Each stage reads its inputs from files and writes its outputs to files.
GeneratedFiles stage_generate(const GenConfig& config, const std::filesystem::path& dir);
// Features use the whole log as history; only rows of the listed
// applications are written.
void stage_featurize(const std::filesystem::path& log, const std::filesystem::path& profiles,
                     const WindowConfig& windows, const std::vector<Application>& applications,
                     const std::filesystem::path& features_csv);
// Splits the events of the listed applications.
void stage_split(const std::filesystem::path& log, const std::vector<Application>& applications,
                 double test_fraction, double validation_fraction, std::uint64_t seed,
                 const std::filesystem::path& split_json);
// Fits the preprocessor on the non-test rows and writes it with the transformed
// design matrix of every row.
void stage_preprocess(const std::filesystem::path& features_csv, const std::filesystem::path& split_json,
                      const ModelTarget& target, const std::filesystem::path& dir);
SearchResult stage_tune(const std::filesystem::path& features_csv, const std::filesystem::path& split_json,
                        const ModelTarget& target, const SearchSpace& space, int n_iter, std::uint64_t seed,
                        const std::filesystem::path& dir);
void stage_train(const std::filesystem::path& features_csv, const std::filesystem::path& split_json,
                 const ModelTarget& target, const Hyperparams& hp, const std::filesystem::path& model_json);
EvalReport stage_evaluate(const std::filesystem::path& model_json, const std::filesystem::path& features_csv,
                          const std::filesystem::path& split_json, const ModelTarget& target,
                          const std::filesystem::path& report_json);
ImportanceVector stage_explain(const std::filesystem::path& model_json, const std::filesystem::path& features_csv,
                               const std::filesystem::path& split_json, const ModelTarget& target,
                               std::size_t max_rows, std::uint64_t seed, const std::filesystem::path& dir);
AuditSummary stage_audit(const std::filesystem::path& model_json, const std::filesystem::path& features_csv,
                         const std::filesystem::path& split_json, const ModelTarget& target, double target_coverage,
                         const std::vector<std::size_t>& lift_ks, const std::filesystem::path& dir);

// Hyperparameters from a search result file or a bare hyperparameter object.
Hyperparams read_hyperparams(const std::filesystem::path& path);

// Test rows of `target`, in matrix order.
FeatureMatrix test_rows(const FeatureMatrix& matrix, const DatasetSplit& split, const ModelTarget& target);

// Runs every stage into config.output_dir. On failure the manifest is marked
// incomplete and the error is rethrown prefixed with the stage name.
nlohmann::ordered_json run_experiment(const ExperimentConfig& config);

}  // namespace aed
