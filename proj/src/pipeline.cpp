#include "aed/pipeline.hpp"

#include "aed/common.hpp"
#include "aed/csv.hpp"
#include "aed/metrics.hpp"
#include "aed/preprocess.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <type_traits>
#include <unordered_map>
#include <random>
#include <sstream>
#include <unordered_set>

namespace aed {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DataError("cannot create directory " + dir.string());
    }
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        ensure_dir(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(path.string() + ": " + ex.what());
    }
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool included(const std::vector<Application>& apps, Application app) {
    return std::find(apps.begin(), apps.end(), app) != apps.end();
}

struct Inputs {
    FeatureMatrix matrix;
    DatasetSplit split;
};

Inputs load_inputs(const fs::path& features_csv, const fs::path& split_json) {
    return {read_feature_matrix(features_csv, schema_path_for(features_csv)), read_split(split_json)};
}

// Inner-train and validation rows of the target. Test ids are never read.
TuningPartition target_partition(const FeatureMatrix& matrix, const DatasetSplit& split, const ModelTarget& target) {
    TuningPartition all = tuning_partition(matrix, split);
    return {target.select(all.inner_train), target.select(all.validation)};
}

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t max_rows, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n > max_rows) {
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(max_rows);
        std::sort(idx.begin(), idx.end());
    }
    return idx;
}

// Stage bookkeeping for the experiment manifest.
class StageLog {
public:
    template <typename F>
    auto run(const std::string& name, F&& body) {
        stages_.push_back({{"name", name}, {"status", "running"}});
        try {
            if constexpr (std::is_void_v<decltype(body())>) {
                body();
                stages_.back()["status"] = "done";
            } else {
                auto result = body();
                stages_.back()["status"] = "done";
                return result;
            }
        } catch (const std::exception& ex) {
            stages_.back()["status"] = "failed";
            failed_ = name;
            rethrow(name, ex);
        }
    }

    const ordered_json& stages() const { return stages_; }
    const std::string& failed() const { return failed_; }

private:
    [[noreturn]] static void rethrow(const std::string& name, const std::exception& ex) {
        const std::string msg = "stage '" + name + "': " + ex.what();
        if (dynamic_cast<const UsageError*>(&ex) != nullptr) {
            throw UsageError(msg);
        }
        if (dynamic_cast<const DataError*>(&ex) != nullptr) {
            throw DataError(msg);
        }
        throw InvariantError(msg);
    }

    ordered_json stages_ = ordered_json::array();
    std::string failed_;
};

ordered_json artifact_list(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
            files.push_back(fs::relative(entry.path(), root));
        }
    }
    std::sort(files.begin(), files.end());
    ordered_json list = ordered_json::array();
    for (const fs::path& f : files) {
        list.push_back({{"path", f.generic_string()}, {"fnv1a64", hex64(fnv1a64(read_bytes(root / f)))}});
    }
    return list;
}

std::string fixed4(double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(4);
    s << v;
    return s.str();
}

}  // namespace

ordered_json to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["output_dir"] = c.output_dir.generic_string();
    if (c.log_path) {
        j["log"] = c.log_path->generic_string();
    }
    if (c.profiles_path) {
        j["profiles"] = c.profiles_path->generic_string();
    }
    j["generator"] = to_json(c.generator);
    j["windows"] = {{"days", c.windows.days}, {"tasks", c.windows.tasks}};
    j["test_fraction"] = c.test_fraction;
    j["validation_fraction"] = c.validation_fraction;
    j["split_seed"] = c.split_seed;
    j["search_seed"] = c.search_seed;
    j["n_iter"] = c.n_iter;
    j["search_space"] = to_json(c.search_space);
    ordered_json apps = ordered_json::array();
    for (Application a : c.applications) {
        apps.push_back(std::string(to_string(a)));
    }
    j["applications"] = apps;
    j["skip_shap"] = c.skip_shap;
    j["skip_audit"] = c.skip_audit;
    j["shap_max_rows"] = c.shap_max_rows;
    j["shap_seed"] = c.shap_seed;
    j["target_coverage"] = c.target_coverage;
    j["lift_k"] = c.lift_ks;
    return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw UsageError("experiment config must be a JSON object");
    }
    ExperimentConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "output_dir") {
                c.output_dir = v.get<std::string>();
            } else if (key == "log") {
                c.log_path = v.get<std::string>();
            } else if (key == "profiles") {
                c.profiles_path = v.get<std::string>();
            } else if (key == "generator") {
                c.generator = gen_config_from_json(v);
            } else if (key == "windows") {
                c.windows.days = v.value("days", c.windows.days);
                c.windows.tasks = v.value("tasks", c.windows.tasks);
            } else if (key == "test_fraction") {
                c.test_fraction = v.get<double>();
            } else if (key == "validation_fraction") {
                c.validation_fraction = v.get<double>();
            } else if (key == "split_seed") {
                c.split_seed = v.get<std::uint64_t>();
            } else if (key == "search_seed") {
                c.search_seed = v.get<std::uint64_t>();
            } else if (key == "n_iter") {
                c.n_iter = v.get<int>();
            } else if (key == "search_space") {
                c.search_space = search_space_from_json(v);
            } else if (key == "applications") {
                c.applications.clear();
                for (const auto& a : v) {
                    c.applications.push_back(parse_application(a.get<std::string>()));
                }
            } else if (key == "skip_shap") {
                c.skip_shap = v.get<bool>();
            } else if (key == "skip_audit") {
                c.skip_audit = v.get<bool>();
            } else if (key == "shap_max_rows") {
                c.shap_max_rows = v.get<std::size_t>();
            } else if (key == "shap_seed") {
                c.shap_seed = v.get<std::uint64_t>();
            } else if (key == "target_coverage") {
                c.target_coverage = v.get<double>();
            } else if (key == "lift_k") {
                c.lift_ks = v.get<std::vector<std::size_t>>();
            } else {
                throw UsageError("experiment config: unknown key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& ex) {
        throw UsageError(std::string("experiment config: ") + ex.what());
    } catch (const DataError& ex) {
        throw UsageError(std::string("experiment config: ") + ex.what());
    }
    if (c.n_iter < 1) {
        throw UsageError("experiment config: n_iter must be at least 1");
    }
    if (c.applications.empty()) {
        throw UsageError("experiment config: no applications selected");
    }
    if (c.log_path.has_value() != c.profiles_path.has_value()) {
        throw UsageError("experiment config: 'log' and 'profiles' must be given together");
    }
    if (!(c.target_coverage > 0.0 && c.target_coverage <= 1.0)) {
        throw UsageError("experiment config: target_coverage must be in (0, 1]");
    }
    return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read config " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw UsageError("config " + path.string() + ": " + ex.what());
    }
    return experiment_config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
    ordered_json j = to_json(config);
    j.erase("output_dir");  // where results go does not change them
    return hex64(fnv1a64(j.dump()));
}

std::string ModelTarget::name() const {
    return application ? std::string(to_string(*application)) : "task_agnostic";
}

FeatureMatrix ModelTarget::select(const FeatureMatrix& matrix) const {
    return application ? matrix.select_application(*application) : matrix;
}

ModelTarget parse_model_target(std::string_view text) {
    if (text == "task_agnostic") {
        return {};
    }
    try {
        return {parse_application(text)};
    } catch (const DataError&) {
        throw UsageError("unknown model target '" + std::string(text) +
                         "', expected an application name or task_agnostic");
    }
}

GeneratedFiles generated_files(const fs::path& dir) {
    return {dir / "log.jsonl", dir / "profiles.jsonl", dir / "hidden_probabilities.jsonl", dir / "generation.json"};
}

GeneratedFiles stage_generate(const GenConfig& config, const fs::path& dir) {
    ensure_dir(dir);
    const GeneratedFiles files = generated_files(dir);
    const Population pop = generate_population(config);
    const GeneratedLog gen = generate_log(pop, config);
    write_log(files.log, gen.events);
    write_profiles(files.profiles, pop.annotators);
    write_hidden_probabilities(files.hidden_probabilities, gen.events, gen.true_error_probability);

    std::size_t errors = 0;
    std::size_t major = 0;
    for (const auto& e : gen.events) {
        const ErrorVerdict v = derive_verdict(e);
        errors += v.is_error ? 1 : 0;
        major += v.is_major_error ? 1 : 0;
    }
    ordered_json info;
    info["config"] = to_json(config);
    info["seed"] = config.seed;
    info["n_events"] = gen.events.size();
    info["n_errors"] = errors;
    info["n_major_errors"] = major;
    info["calibrated_intercept"] = gen.intercept;
    if (!gen.events.empty()) {
        info["error_rate"] = static_cast<double>(errors) / static_cast<double>(gen.events.size());
        if (errors > 0 && errors < gen.events.size()) {
            info["oracle_auc"] = oracle_auc(gen.events, gen.true_error_probability);
        }
    }
    write_json(files.info, info);
    return files;
}

void stage_featurize(const fs::path& log, const fs::path& profiles, const WindowConfig& windows,
                     const std::vector<Application>& applications, const fs::path& features_csv) {
    const std::vector<AnnotationEvent> events = read_log(log);
    const std::vector<AnnotatorProfile> people = read_profiles(profiles);
    FeatureMatrix matrix = build_feature_matrix(events, people, windows);
    if (applications.size() != std::size(kAllApplications)) {
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (included(applications, events[i].application)) {
                keep.push_back(i);
            }
        }
        matrix = matrix.select_rows(keep);
    }
    if (features_csv.has_parent_path()) {
        ensure_dir(features_csv.parent_path());
    }
    write_feature_matrix(features_csv, schema_path_for(features_csv), matrix);
}

void stage_split(const fs::path& log, const std::vector<Application>& applications, double test_fraction,
                 double validation_fraction, std::uint64_t seed, const fs::path& split_json) {
    std::vector<AnnotationEvent> events = read_log(log);
    std::erase_if(events, [&](const AnnotationEvent& e) { return !included(applications, e.application); });
    const DatasetSplit split = split_log(events, test_fraction, validation_fraction, seed);
    if (split_json.has_parent_path()) {
        ensure_dir(split_json.parent_path());
    }
    write_split(split_json, split);
}

FeatureMatrix test_rows(const FeatureMatrix& matrix, const DatasetSplit& split, const ModelTarget& target) {
    return target.select(matrix.select_ids(split.test_ids));
}

void stage_preprocess(const fs::path& features_csv, const fs::path& split_json, const ModelTarget& target,
                      const fs::path& dir) {
    const Inputs in = load_inputs(features_csv, split_json);
    // Fit on train ∪ validation, the rows the final model is trained on.
    std::vector<std::string> ids = in.split.train_ids;
    ids.insert(ids.end(), in.split.validation_ids.begin(), in.split.validation_ids.end());
    const FeatureMatrix non_test = target.select(in.matrix.select_ids(ids));
    const PreprocessorState state = fit_preprocessor(non_test);
    ensure_dir(dir);
    write_json(dir / "preprocessor.json", to_json(state));

    const FeatureMatrix rows = target.select(in.matrix);
    const DesignMatrix design = transform(state, rows);
    std::ofstream out = open_out(dir / "design_matrix.csv");
    csv::Row header{"task_id"};
    header.insert(header.end(), design.column_names.begin(), design.column_names.end());
    header.push_back("is_error");
    csv::write_row(out, header);
    csv::Row row;
    for (std::size_t r = 0; r < design.x.rows; ++r) {
        row.assign(1, rows.task_ids[r]);
        for (double v : design.x.row(r)) {
            row.push_back(format_double(v));
        }
        row.push_back(std::to_string(rows.target[r]));
        csv::write_row(out, row);
    }
}

SearchResult stage_tune(const fs::path& features_csv, const fs::path& split_json, const ModelTarget& target,
                        const SearchSpace& space, int n_iter, std::uint64_t seed, const fs::path& dir) {
    const Inputs in = load_inputs(features_csv, split_json);
    const SearchResult result = random_search(target_partition(in.matrix, in.split, target), space, n_iter, seed);
    ensure_dir(dir);
    ordered_json j = to_json(result);
    j["target"] = target.name();
    j["search_seed"] = seed;
    j["split_seed"] = in.split.seed;
    write_json(dir / "search.json", j);
    std::ofstream out = open_out(dir / "search_history.csv");
    write_history_csv(out, result);
    return result;
}

Hyperparams read_hyperparams(const fs::path& path) {
    const nlohmann::json j = read_json(path);
    try {
        return hyperparams_from_json(j.contains("best") ? j.at("best") : j);
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(path.string() + ": " + ex.what());
    }
}

void stage_train(const fs::path& features_csv, const fs::path& split_json, const ModelTarget& target,
                 const Hyperparams& hp, const fs::path& model_json) {
    const Inputs in = load_inputs(features_csv, split_json);
    const Model model = fit_final(target_partition(in.matrix, in.split, target), hp);
    if (model_json.has_parent_path()) {
        ensure_dir(model_json.parent_path());
    }
    save_model(model_json, model);
}

EvalReport stage_evaluate(const fs::path& model_json, const fs::path& features_csv, const fs::path& split_json,
                          const ModelTarget& target, const fs::path& report_json) {
    const Model model = load_model(model_json);
    const Inputs in = load_inputs(features_csv, split_json);
    const EvalReport report = evaluate(model, test_rows(in.matrix, in.split, target));
    ordered_json j = to_json(report);
    j["target"] = target.name();
    write_json(report_json, j);
    return report;
}

ImportanceVector stage_explain(const fs::path& model_json, const fs::path& features_csv, const fs::path& split_json,
                               const ModelTarget& target, std::size_t max_rows, std::uint64_t seed,
                               const fs::path& dir) {
    if (max_rows == 0) {
        throw UsageError("explain: max_rows must be positive");
    }
    const Model model = load_model(model_json);
    const Inputs in = load_inputs(features_csv, split_json);
    const FeatureMatrix test = test_rows(in.matrix, in.split, target);
    const FeatureMatrix rows = test.select_rows(sample_rows(test.rows(), max_rows, seed));
    const DesignMatrix design = transform(model.preprocessor, rows);
    ShapMatrix shap = shap_values(model.ensemble, design.x);
    shap.feature_names = design.column_names;

    // Local accuracy is part of the contract; a violation is a bug.
    const std::vector<double> margin = predict_margin(model.ensemble, design.x);
    for (std::size_t r = 0; r < design.x.rows; ++r) {
        double total = shap.base_value;
        for (double v : shap.values.row(r)) {
            total += v;
        }
        if (!(std::fabs(total - margin[r]) < 1e-6)) {
            throw InvariantError("explain: SHAP values do not sum to the margin for task " + rows.task_ids[r]);
        }
    }

    const ImportanceVector imp = importance(shap, design.column_sources);
    ensure_dir(dir);
    {
        std::ofstream out = open_out(dir / "shap_values.csv");
        write_shap_csv(out, shap, rows.task_ids);
    }
    {
        std::ofstream out = open_out(dir / "importance.csv");
        write_importance_csv(out, imp);
    }
    {
        std::ofstream out = open_out(dir / "importance.svg");
        write_importance_svg(out, imp, "Cumulative mean |SHAP|, " + target.name());
    }
    return imp;
}

AuditSummary stage_audit(const fs::path& model_json, const fs::path& features_csv, const fs::path& split_json,
                         const ModelTarget& target, double target_coverage, const std::vector<std::size_t>& lift_ks,
                         const fs::path& dir) {
    const Model model = load_model(model_json);
    const Inputs in = load_inputs(features_csv, split_json);
    const FeatureMatrix test = test_rows(in.matrix, in.split, target);
    const std::vector<double> scores = model.predict_proba(test);
    const AuditRanking ranking = rank_for_audit(scores, test.task_ids, test.target);
    const AuditSummary summary = summarize_audit(target.name(), compute_curves(ranking), target_coverage, lift_ks);
    ensure_dir(dir);
    {
        std::ofstream out = open_out(dir / "curves.csv");
        write_curves_csv(out, summary.curves);
    }
    write_json(dir / "summary.json", to_json(summary));
    {
        std::ofstream flip = open_out(dir / "flip_rate.svg");
        write_flip_rate_svg(flip, {summary});
        std::ofstream cov = open_out(dir / "coverage.svg");
        write_coverage_svg(cov, {summary});
    }
    return summary;
}

ordered_json run_experiment(const ExperimentConfig& config) {
    const fs::path root = config.output_dir;
    ensure_dir(root);
    StageLog log;
    ordered_json report;
    const std::string hash = config_hash(config);
    const ordered_json seeds = {{"generator", config.generator.seed}, {"split", config.split_seed},
                                {"search", config.search_seed}, {"shap", config.shap_seed}};

    auto write_manifest = [&](bool complete) {
        ordered_json m;
        m["config_hash"] = hash;
        m["seeds"] = seeds;
        m["complete"] = complete;
        if (!complete) {
            m["failed_stage"] = log.failed();
        }
        m["stages"] = log.stages();
        m["artifacts"] = artifact_list(root);
        write_json(root / "manifest.json", m);
    };

    try {
        // Without output_dir, so a rerun elsewhere writes identical bytes.
        ordered_json resolved = to_json(config);
        resolved.erase("output_dir");
        write_json(root / "config.json", resolved);

        fs::path log_path;
        fs::path profiles_path;
        std::optional<fs::path> hidden_path;
        if (config.log_path) {
            log_path = *config.log_path;
            profiles_path = *config.profiles_path;
        } else {
            const GeneratedFiles files = log.run("generate", [&] { return stage_generate(config.generator, root / "data"); });
            log_path = files.log;
            profiles_path = files.profiles;
            hidden_path = files.hidden_probabilities;
            report["generation"] = read_json(files.info);
        }

        const fs::path features = root / "features" / "features.csv";
        const fs::path split = root / "data" / "split.json";
        log.run("featurize", [&] {
            stage_featurize(log_path, profiles_path, config.windows, config.applications, features);
            stage_split(log_path, config.applications, config.test_fraction, config.validation_fraction,
                        config.split_seed, split);
        });

        std::vector<ModelTarget> targets;
        for (Application a : config.applications) {
            targets.push_back({a});
        }
        targets.push_back({});

        std::vector<fs::path> model_paths;
        ordered_json models = ordered_json::object();
        for (const ModelTarget& t : targets) {
            const fs::path dir = root / "models" / t.name();
            const SearchResult search = log.run("tune:" + t.name(), [&] {
                return stage_tune(features, split, t, config.search_space, config.n_iter, config.search_seed, dir);
            });
            log.run("train:" + t.name(), [&] { stage_train(features, split, t, search.best, dir / "model.json"); });
            const EvalReport eval = log.run("evaluate:" + t.name(), [&] {
                return stage_evaluate(dir / "model.json", features, split, t, dir / "eval_report.json");
            });
            model_paths.push_back(dir / "model.json");
            ordered_json entry;
            entry["best_hyperparams"] = to_json(search.best);
            entry["best_validation_auc"] = search.history[search.best_index].validation_auc;
            entry["test"] = to_json(eval);
            models[t.name()] = entry;
        }
        report["models"] = models;

        // Oracle AUC on each test set, from the generator's hidden probabilities.
        const FeatureMatrix matrix = read_feature_matrix(features, schema_path_for(features));
        const DatasetSplit ds = read_split(split);
        if (hidden_path) {
            const std::vector<AnnotationEvent> events = read_log(log_path);
            const std::vector<double> hidden = read_hidden_probabilities(*hidden_path, events);
            std::unordered_map<std::string, double> prob_of;
            for (std::size_t i = 0; i < events.size(); ++i) {
                prob_of.emplace(events[i].task_id, hidden[i]);
            }
            ordered_json oracle = ordered_json::object();
            for (const ModelTarget& t : targets) {
                const FeatureMatrix test = test_rows(matrix, ds, t);
                std::vector<double> p;
                for (const std::string& id : test.task_ids) {
                    p.push_back(prob_of.at(id));
                }
                oracle[t.name()] = auc(p, test.target);
            }
            report["oracle_test_auc"] = oracle;
        }

        log.run("generalize", [&] {
            std::vector<Model> loaded;
            for (const fs::path& p : model_paths) {
                loaded.push_back(load_model(p));
            }
            std::vector<FeatureMatrix> tests;
            std::vector<std::string> names;
            for (const ModelTarget& t : targets) {
                tests.push_back(test_rows(matrix, ds, t));
                names.push_back(t.name());
            }
            std::vector<const Model*> mp;
            std::vector<const FeatureMatrix*> tp;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                mp.push_back(&loaded[i]);
                tp.push_back(&tests[i]);
            }
            const AucMatrix m = cross_application_matrix(mp, names, tp, names);
            std::ofstream out = open_out(root / "generalization" / "auc_matrix.csv");
            write_matrix_csv(out, m);
            report["auc_matrix"] = {{"rows", m.row_names}, {"columns", m.col_names}, {"auc", m.auc}};
        });

        if (!config.skip_shap) {
            std::vector<ImportanceVector> imps;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const ModelTarget& t = targets[i];
                imps.push_back(log.run("explain:" + t.name(), [&] {
                    return stage_explain(model_paths[i], features, split, t, config.shap_max_rows, config.shap_seed,
                                         root / "explain" / t.name());
                }));
            }
            log.run("importance_correlation", [&] {
                AucMatrix corr;
                for (const ModelTarget& t : targets) {
                    corr.row_names.push_back(t.name());
                }
                corr.col_names = corr.row_names;
                for (std::size_t i = 0; i < imps.size(); ++i) {
                    auto& row = corr.auc.emplace_back();
                    for (std::size_t k = 0; k < imps.size(); ++k) {
                        row.push_back(importance_correlation(imps[i], imps[k]));
                    }
                }
                std::ofstream out = open_out(root / "generalization" / "importance_correlation.csv");
                write_matrix_csv(out, corr);
                report["importance_correlation"] = {{"rows", corr.row_names}, {"correlation", corr.auc}};
            });
        }

        if (!config.skip_audit) {
            std::vector<AuditSummary> audits;
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const ModelTarget& t = targets[i];
                audits.push_back(log.run("audit:" + t.name(), [&] {
                    return stage_audit(model_paths[i], features, split, t, config.target_coverage, config.lift_ks,
                                       root / "audit" / t.name());
                }));
            }
            ordered_json a = ordered_json::object();
            for (const AuditSummary& s : audits) {
                a[s.name] = to_json(s);
            }
            report["audit"] = a;
            std::ofstream flip = open_out(root / "audit" / "flip_rate.svg");
            write_flip_rate_svg(flip, audits);
            std::ofstream cov = open_out(root / "audit" / "coverage.svg");
            write_coverage_svg(cov, audits);
        }

        report["config_hash"] = hash;
        report["seeds"] = seeds;
        write_json(root / "report.json", report);

        // Human-readable digest of report.json.
        std::ofstream txt = open_out(root / "summary.txt");
        txt << "config " << hash << "\n\n";
        if (report.contains("generation")) {
            const auto& g = report["generation"];
            txt << "events " << g["n_events"].get<std::size_t>() << ", error rate "
                << fixed4(g.value("error_rate", 0.0)) << ", oracle AUC " << fixed4(g.value("oracle_auc", 0.0))
                << "\n\n";
        }
        txt << "model                 test AUC  accuracy  macro P  macro R";
        if (report.contains("oracle_test_auc")) {
            txt << "  oracle AUC";
        }
        txt << '\n';
        for (const ModelTarget& t : targets) {
            const auto& m = report["models"][t.name()]["test"];
            std::string name = t.name();
            name.resize(22, ' ');
            txt << name << fixed4(m["auc"].get<double>()) << "    " << fixed4(m["accuracy"].get<double>()) << "    "
                << fixed4(m["macro_precision"].get<double>()) << "   " << fixed4(m["macro_recall"].get<double>());
            if (report.contains("oracle_test_auc")) {
                txt << "   " << fixed4(report["oracle_test_auc"][t.name()].get<double>());
            }
            txt << '\n';
        }
        if (report.contains("audit")) {
            txt << "\naudit at " << config.target_coverage << " coverage\n";
            for (const auto& [name, s] : report["audit"].items()) {
                txt << "  " << name << ": k_model " << s["k_model"].get<std::size_t>() << ", k_random "
                    << s["k_random"].get<std::size_t>() << ", gain " << fixed4(s["efficiency_gain"].get<double>());
                for (const auto& [k, lift] : s["early_lift"].items()) {
                    txt << ", lift@" << k << ' ' << fixed4(lift.get<double>());
                }
                txt << '\n';
            }
        }
        txt.close();
        write_manifest(true);
    } catch (const std::exception&) {
        write_manifest(false);
        throw;
    }
    return report;
}

}  // namespace aed
