#include "aed/model_selection.hpp"

#include "aed/common.hpp"
#include "aed/csv.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

namespace aed {

using nlohmann::ordered_json;

namespace {

template <typename T>
void check_list(const std::vector<T>& values, const char* name) {
    if (values.empty()) {
        throw UsageError(std::string("search space: '") + name + "' has no candidates");
    }
}

template <typename T>
bool member(const std::vector<T>& values, T v) {
    return std::find(values.begin(), values.end(), v) != values.end();
}

template <typename T>
const T& pick(const std::vector<T>& values, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> dist(0, values.size() - 1);
    return values[dist(rng)];
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool has_both_classes(const std::vector<int>& y) {
    const bool pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool neg = std::find(y.begin(), y.end(), 0) != y.end();
    return pos && neg;
}

TuningPartition split_70_30(const FeatureMatrix& train, std::uint64_t seed) {
    const std::size_t n = train.rows();
    const auto n_val = static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::uint8_t> is_val(n, 0);
    for (std::size_t i = 0; i < n_val; ++i) {
        is_val[order[i]] = 1;
    }
    std::vector<std::size_t> inner;
    std::vector<std::size_t> val;
    for (std::size_t i = 0; i < n; ++i) {
        (is_val[i] != 0 ? val : inner).push_back(i);
    }
    return {train.select_rows(inner), train.select_rows(val)};
}

}  // namespace

void SearchSpace::validate() const {
    check_list(n_estimators, "n_estimators");
    check_list(max_depth, "max_depth");
    check_list(min_child_weight, "min_child_weight");
    check_list(gamma, "gamma");
    check_list(subsample, "subsample");
    check_list(colsample_bytree, "colsample_bytree");
    check_list(learning_rate, "learning_rate");
    // Every grid point must be a valid configuration.
    Hyperparams hp;
    for (int v : n_estimators) { hp.n_estimators = v; hp.validate(); }
    for (int v : max_depth) { hp.max_depth = v; hp.validate(); }
    for (double v : min_child_weight) { hp.min_child_weight = v; hp.validate(); }
    for (double v : gamma) { hp.gamma = v; hp.validate(); }
    for (double v : subsample) { hp.subsample = v; hp.validate(); }
    for (double v : colsample_bytree) { hp.colsample_bytree = v; hp.validate(); }
    for (double v : learning_rate) { hp.learning_rate = v; hp.validate(); }
}

bool SearchSpace::contains(const Hyperparams& hp) const {
    return member(n_estimators, hp.n_estimators) && member(max_depth, hp.max_depth) &&
           member(min_child_weight, hp.min_child_weight) && member(gamma, hp.gamma) &&
           member(subsample, hp.subsample) && member(colsample_bytree, hp.colsample_bytree) &&
           member(learning_rate, hp.learning_rate);
}

ordered_json to_json(const SearchSpace& s) {
    ordered_json j;
    j["n_estimators"] = s.n_estimators;
    j["max_depth"] = s.max_depth;
    j["min_child_weight"] = s.min_child_weight;
    j["gamma"] = s.gamma;
    j["subsample"] = s.subsample;
    j["colsample_bytree"] = s.colsample_bytree;
    j["learning_rate"] = s.learning_rate;
    return j;
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
    SearchSpace s;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n_estimators") {
                s.n_estimators = value.get<std::vector<int>>();
            } else if (key == "max_depth") {
                s.max_depth = value.get<std::vector<int>>();
            } else if (key == "min_child_weight") {
                s.min_child_weight = value.get<std::vector<double>>();
            } else if (key == "gamma") {
                s.gamma = value.get<std::vector<double>>();
            } else if (key == "subsample") {
                s.subsample = value.get<std::vector<double>>();
            } else if (key == "colsample_bytree") {
                s.colsample_bytree = value.get<std::vector<double>>();
            } else if (key == "learning_rate") {
                s.learning_rate = value.get<std::vector<double>>();
            } else {
                throw UsageError("search space: unknown key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& ex) {
        throw UsageError(std::string("search space: ") + ex.what());
    }
    s.validate();
    return s;
}

TuningPartition tuning_partition(const FeatureMatrix& matrix, const DatasetSplit& split) {
    return {matrix.select_ids(split.train_ids), matrix.select_ids(split.validation_ids)};
}

TuningPartition tuning_partition(const FeatureMatrix& train, std::uint64_t seed) {
    return split_70_30(train, seed);
}

SearchResult random_search(const TuningPartition& partition, const SearchSpace& space, int n_iter,
                           std::uint64_t seed) {
    if (n_iter < 1) {
        throw UsageError("random_search: n_iter must be at least 1");
    }
    space.validate();
    if (partition.inner_train.rows() == 0) {
        throw DataError("random_search: empty inner-train set");
    }
    if (!has_both_classes(partition.validation.target)) {
        throw DataError("random_search: validation set holds a single class");
    }

    const PreprocessorState pre = fit_preprocessor(partition.inner_train);
    const DesignMatrix x_train = transform(pre, partition.inner_train);
    const DesignMatrix x_val = transform(pre, partition.validation);
    const BinnedMatrix binned(x_train.x);

    std::mt19937_64 rng(seed);
    SearchResult result;
    for (int i = 0; i < n_iter; ++i) {
        SearchTrial trial;
        trial.index = static_cast<std::size_t>(i);
        Hyperparams& hp = trial.hyperparams;
        hp.n_estimators = pick(space.n_estimators, rng);
        hp.max_depth = pick(space.max_depth, rng);
        hp.min_child_weight = pick(space.min_child_weight, rng);
        hp.gamma = pick(space.gamma, rng);
        hp.subsample = pick(space.subsample, rng);
        hp.colsample_bytree = pick(space.colsample_bytree, rng);
        hp.learning_rate = pick(space.learning_rate, rng);
        hp.seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i)));

        const Ensemble model = train(binned, x_train.x, partition.inner_train.target, hp);
        trial.validation_auc = auc(predict_proba(model, x_val.x), partition.validation.target);
        if (i == 0 || trial.validation_auc > result.history[result.best_index].validation_auc) {
            result.best_index = trial.index;
        }
        result.history.push_back(trial);
    }
    result.best = result.history[result.best_index].hyperparams;
    return result;
}

SearchResult random_search(const FeatureMatrix& train, const SearchSpace& space, int n_iter, std::uint64_t seed) {
    TuningPartition partition = split_70_30(train, seed);
    if (!has_both_classes(partition.validation.target)) {
        partition = split_70_30(train, seed + 1);
        if (!has_both_classes(partition.validation.target)) {
            throw DataError("random_search: validation split holds a single class after resampling");
        }
    }
    return random_search(partition, space, n_iter, seed);
}

std::vector<double> Model::predict_proba(const FeatureMatrix& matrix) const {
    return aed::predict_proba(ensemble, transform(preprocessor, matrix).x);
}

Model fit_model(const FeatureMatrix& train_matrix, const Hyperparams& hp) {
    Model m;
    m.preprocessor = fit_preprocessor(train_matrix);
    const DesignMatrix x = transform(m.preprocessor, train_matrix);
    m.ensemble = train(x.x, train_matrix.target, hp);
    m.ensemble.feature_names = x.column_names;
    return m;
}

Model fit_final(const TuningPartition& partition, const Hyperparams& best) {
    FeatureMatrix all = partition.inner_train;
    const FeatureMatrix& val = partition.validation;
    if (!(all.schema == val.schema)) {
        throw DataError("fit_final: inner-train and validation schemas differ");
    }
    all.task_ids.insert(all.task_ids.end(), val.task_ids.begin(), val.task_ids.end());
    all.target.insert(all.target.end(), val.target.begin(), val.target.end());
    for (std::size_t c = 0; c < all.columns.size(); ++c) {
        auto& dst = all.columns[c];
        const auto& src = val.columns[c];
        dst.numeric.insert(dst.numeric.end(), src.numeric.begin(), src.numeric.end());
        dst.categorical.insert(dst.categorical.end(), src.categorical.begin(), src.categorical.end());
    }
    return fit_model(all, best);
}

EvalReport evaluate(const Model& model, const FeatureMatrix& test) {
    return classification_report(model.predict_proba(test), test.target);
}

ordered_json to_json(const Model& model) {
    ordered_json j;
    j["preprocessor"] = to_json(model.preprocessor);
    j["ensemble"] = to_json(model.ensemble);
    return j;
}

Model model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("preprocessor") || !j.contains("ensemble")) {
        throw DataError("model file needs 'preprocessor' and 'ensemble'");
    }
    Model m;
    m.preprocessor = preprocessor_from_json(j.at("preprocessor"));
    m.ensemble = ensemble_from_json(j.at("ensemble"));
    if (m.preprocessor.column_names().size() != m.ensemble.n_features) {
        throw DataError("model: preprocessor produces " + std::to_string(m.preprocessor.column_names().size()) +
                        " columns, ensemble expects " + std::to_string(m.ensemble.n_features));
    }
    return m;
}

void save_model(const std::filesystem::path& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write model to " + path.string());
    }
    out << to_json(model).dump() << '\n';
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read model " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw DataError("model " + path.string() + ": " + ex.what());
    }
    return model_from_json(j);
}

ordered_json to_json(const EvalReport& r) {
    ordered_json j;
    j["auc"] = r.auc;
    j["accuracy"] = r.accuracy;
    j["macro_precision"] = r.macro_precision;
    j["macro_recall"] = r.macro_recall;
    j["threshold"] = r.threshold;
    j["n_test"] = r.n_test;
    j["error_class"] = {{"precision", r.positive.precision}, {"recall", r.positive.recall}};
    j["correct_class"] = {{"precision", r.negative.precision}, {"recall", r.negative.recall}};
    j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
    return j;
}

ordered_json to_json(const SearchResult& result) {
    ordered_json j;
    j["best_index"] = result.best_index;
    j["best"] = to_json(result.best);
    j["best_validation_auc"] = result.history.at(result.best_index).validation_auc;
    ordered_json hist = ordered_json::array();
    for (const SearchTrial& t : result.history) {
        hist.push_back({{"index", t.index}, {"hyperparams", to_json(t.hyperparams)}, {"validation_auc", t.validation_auc}});
    }
    j["history"] = hist;
    return j;
}

void write_history_csv(std::ostream& out, const SearchResult& result) {
    csv::write_row(out, {"index", "n_estimators", "max_depth", "min_child_weight", "gamma", "subsample",
                         "colsample_bytree", "learning_rate", "seed", "validation_auc"});
    for (const SearchTrial& t : result.history) {
        const Hyperparams& hp = t.hyperparams;
        csv::write_row(out, {std::to_string(t.index), std::to_string(hp.n_estimators), std::to_string(hp.max_depth),
                             format_double(hp.min_child_weight), format_double(hp.gamma), format_double(hp.subsample),
                             format_double(hp.colsample_bytree), format_double(hp.learning_rate),
                             std::to_string(hp.seed), format_double(t.validation_auc)});
    }
}

AucMatrix cross_application_matrix(const std::vector<const Model*>& models, const std::vector<std::string>& model_names,
                                   const std::vector<const FeatureMatrix*>& tests,
                                   const std::vector<std::string>& test_names) {
    if (models.size() != model_names.size() || tests.size() != test_names.size()) {
        throw UsageError("cross_application_matrix: names not aligned with models or test sets");
    }
    if (models.empty() || tests.empty()) {
        throw DataError("cross_application_matrix: missing model or test set");
    }
    AucMatrix m;
    m.row_names = model_names;
    m.col_names = test_names;
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i] == nullptr) {
            throw DataError("cross_application_matrix: missing model '" + model_names[i] + "'");
        }
        auto& row = m.auc.emplace_back();
        for (std::size_t k = 0; k < tests.size(); ++k) {
            if (tests[k] == nullptr) {
                throw DataError("cross_application_matrix: missing test set '" + test_names[k] + "'");
            }
            row.push_back(auc(models[i]->predict_proba(*tests[k]), tests[k]->target));
        }
    }
    return m;
}

void write_matrix_csv(std::ostream& out, const AucMatrix& m) {
    csv::Row header{"trained_on"};
    header.insert(header.end(), m.col_names.begin(), m.col_names.end());
    csv::write_row(out, header);
    for (std::size_t i = 0; i < m.row_names.size(); ++i) {
        csv::Row row{m.row_names[i]};
        for (double v : m.auc[i]) {
            row.push_back(format_double(v));
        }
        csv::write_row(out, row);
    }
}

}  // namespace aed
