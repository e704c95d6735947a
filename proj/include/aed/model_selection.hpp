#pragma once

#include "aed/annotation_log.hpp"
#include "aed/featurize.hpp"
#include "aed/gbdt.hpp"
#include "aed/metrics.hpp"
#include "aed/preprocess.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace aed {

struct SearchSpace {
    std::vector<int> n_estimators{10, 50, 100, 150, 200, 500, 1000};
    std::vector<int> max_depth{3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> min_child_weight{1, 2, 3, 4, 5, 6};
    std::vector<double> gamma{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> subsample{0.6, 0.8, 1.0};
    std::vector<double> colsample_bytree{0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> learning_rate{0.01, 0.05, 0.1, 0.2, 0.3};

    void validate() const;
    bool contains(const Hyperparams& hp) const;
    bool operator==(const SearchSpace&) const = default;
};

nlohmann::ordered_json to_json(const SearchSpace& space);
// Keys absent from `j` keep their defaults.
SearchSpace search_space_from_json(const nlohmann::json& j);

// The only data a search sees: inner-train and validation rows. Test rows
// never enter this type.
struct TuningPartition {
    FeatureMatrix inner_train;
    FeatureMatrix validation;
};

// Inner-train = split.train_ids, validation = split.validation_ids.
TuningPartition tuning_partition(const FeatureMatrix& matrix, const DatasetSplit& split);

// Seeded uniform 70/30 split of `train` into inner-train and validation.
TuningPartition tuning_partition(const FeatureMatrix& train, std::uint64_t seed);

struct SearchTrial {
    std::size_t index = 0;
    Hyperparams hyperparams;
    double validation_auc = 0.0;
};

struct SearchResult {
    Hyperparams best;
    std::size_t best_index = 0;
    std::vector<SearchTrial> history;
};

// Samples n_iter configurations uniformly with replacement from the grid,
// fits each on inner-train (preprocessor fitted there too) and scores AUC on
// validation. Returns the highest-AUC configuration, earliest on ties.
SearchResult random_search(const TuningPartition& partition, const SearchSpace& space, int n_iter,
                           std::uint64_t seed);

// Splits `train` 70/30 with `seed`; if validation holds a single class the
// split is redrawn once with the next seed, then DataError.
SearchResult random_search(const FeatureMatrix& train, const SearchSpace& space, int n_iter, std::uint64_t seed);

// Preprocessor plus ensemble; scores raw feature matrices.
struct Model {
    PreprocessorState preprocessor;
    Ensemble ensemble;

    std::vector<double> predict_proba(const FeatureMatrix& matrix) const;
};

Model fit_model(const FeatureMatrix& train, const Hyperparams& hp);
// Refits on inner-train ∪ validation.
Model fit_final(const TuningPartition& partition, const Hyperparams& best);

EvalReport evaluate(const Model& model, const FeatureMatrix& test);

nlohmann::ordered_json to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(const SearchResult& result);
void write_history_csv(std::ostream& out, const SearchResult& result);

// Rows are training sources, columns test sets; both follow the order of the
// names given.
struct AucMatrix {
    std::vector<std::string> row_names;
    std::vector<std::string> col_names;
    std::vector<std::vector<double>> auc;
};

AucMatrix cross_application_matrix(const std::vector<const Model*>& models, const std::vector<std::string>& model_names,
                                   const std::vector<const FeatureMatrix*>& tests,
                                   const std::vector<std::string>& test_names);

void write_matrix_csv(std::ostream& out, const AucMatrix& m);

}  // namespace aed
