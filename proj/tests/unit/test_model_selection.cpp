#include "doctest.h"

#include "aed/model_selection.hpp"

#include "test_util.hpp"

#include <set>
#include <sstream>

using namespace aed;

namespace {

struct Fixture {
    FeatureMatrix matrix;
    DatasetSplit split;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        const GenConfig c = oracle::small_log_config(1500, 61);
        const Population pop = generate_population(c);
        const GeneratedLog log = generate_log(pop, c);
        Fixture out;
        out.matrix = build_feature_matrix(log.events, pop.annotators);
        out.split = split_log(log.events, 0.3, 0.3, 5);
        return out;
    }();
    return f;
}

SearchSpace small_space() {
    SearchSpace s;
    s.n_estimators = {5, 20};
    s.max_depth = {2, 3};
    s.learning_rate = {0.1, 0.3};
    return s;
}

}  // namespace

TEST_CASE("search space grid and JSON") {
    const SearchSpace def;
    CHECK(def.n_estimators.size() * def.max_depth.size() * def.min_child_weight.size() * def.gamma.size() *
              def.subsample.size() * def.colsample_bytree.size() * def.learning_rate.size() ==
          7u * 8 * 6 * 6 * 3 * 5 * 5);
    Hyperparams hp;
    hp.n_estimators = 100;
    hp.max_depth = 6;
    hp.learning_rate = 0.3;
    CHECK(def.contains(hp));
    hp.max_depth = 11;
    CHECK_FALSE(def.contains(hp));

    CHECK(search_space_from_json(nlohmann::json::parse(to_json(def).dump())) == def);
    const SearchSpace partial = search_space_from_json(nlohmann::json::parse(R"({"max_depth": [2]})"));
    CHECK(partial.max_depth == std::vector<int>{2});
    CHECK(partial.n_estimators == def.n_estimators);
    CHECK_THROWS_AS(search_space_from_json(nlohmann::json::parse(R"({"depth": [2]})")), UsageError);
    CHECK_THROWS_AS(search_space_from_json(nlohmann::json::parse(R"({"gamma": []})")), UsageError);
}

TEST_CASE("random search samples the grid and is deterministic") {
    const TuningPartition p = tuning_partition(fixture().matrix, fixture().split);
    CHECK(p.inner_train.rows() == fixture().split.train_ids.size());
    CHECK(p.validation.rows() == fixture().split.validation_ids.size());
    const SearchSpace space = small_space();
    const SearchResult a = random_search(p, space, 6, 11);
    REQUIRE(a.history.size() == 6);
    double best = -1.0;
    std::size_t best_index = 0;
    for (const auto& t : a.history) {
        CHECK(space.contains(t.hyperparams));
        if (t.validation_auc > best) {
            best = t.validation_auc;
            best_index = t.index;
        }
    }
    // Strict '>' keeps the earliest maximum.
    CHECK(a.best_index == best_index);
    CHECK(a.best == a.history[best_index].hyperparams);

    const SearchResult b = random_search(p, space, 6, 11);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(a.history[i].hyperparams == b.history[i].hyperparams);
        CHECK(a.history[i].validation_auc == b.history[i].validation_auc);
    }
    CHECK_THROWS_AS(random_search(p, space, 0, 11), UsageError);

    // A single-point grid draws the same configuration every time, so every
    // trial ties and the first one wins.
    SearchSpace one = space;
    one.n_estimators = {5};
    one.max_depth = {2};
    one.learning_rate = {0.1};
    one.min_child_weight = {1};
    one.gamma = {0};
    one.subsample = {1};
    one.colsample_bytree = {1};
    const SearchResult tied = random_search(p, one, 3, 2);
    CHECK(tied.best_index == 0);
    CHECK(tied.history[1].validation_auc == tied.history[0].validation_auc);

    std::ostringstream csv;
    write_history_csv(csv, a);
    const std::string text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
}

TEST_CASE("train-only random search splits 70/30") {
    const FeatureMatrix train = fixture().matrix.select_ids(fixture().split.train_ids);
    const TuningPartition p = tuning_partition(train, 3);
    CHECK(p.inner_train.rows() + p.validation.rows() == train.rows());
    CHECK(std::abs(static_cast<double>(p.validation.rows()) - 0.3 * static_cast<double>(train.rows())) <= 1.0);
    std::set<std::string> seen(p.inner_train.task_ids.begin(), p.inner_train.task_ids.end());
    for (const auto& id : p.validation.task_ids) CHECK(seen.count(id) == 0);
    const SearchResult r = random_search(train, small_space(), 2, 3);
    CHECK(r.history.size() == 2);
}

TEST_CASE("tuning never reads test rows") {
    const Fixture& f = fixture();
    FeatureMatrix mutated = f.matrix;
    const std::set<std::string> test(f.split.test_ids.begin(), f.split.test_ids.end());
    for (std::size_t r = 0; r < mutated.rows(); ++r) {
        if (!test.count(mutated.task_ids[r])) continue;
        mutated.target[r] = 1 - mutated.target[r];
        for (auto& col : mutated.columns) {
            if (!col.numeric.empty()) col.numeric[r] = 1e6;
            if (!col.categorical.empty()) col.categorical[r] = "poison";
        }
    }
    const TuningPartition a = tuning_partition(f.matrix, f.split);
    const TuningPartition b = tuning_partition(mutated, f.split);
    const SearchResult ra = random_search(a, small_space(), 3, 4);
    const SearchResult rb = random_search(b, small_space(), 3, 4);
    for (std::size_t i = 0; i < 3; ++i) CHECK(ra.history[i].validation_auc == rb.history[i].validation_auc);
    const Model ma = fit_final(a, ra.best);
    const Model mb = fit_final(b, rb.best);
    CHECK(ma.preprocessor == mb.preprocessor);
    CHECK(ma.ensemble == mb.ensemble);
}

TEST_CASE("model save, load and evaluation") {
    const Fixture& f = fixture();
    const TuningPartition p = tuning_partition(f.matrix, f.split);
    Hyperparams hp;
    hp.n_estimators = 15;
    hp.max_depth = 3;
    const Model m = fit_final(p, hp);
    CHECK(m.preprocessor.fitted_rows == p.inner_train.rows() + p.validation.rows());

    test_util::TempDir dir;
    save_model(dir.path / "model.json", m);
    const Model back = load_model(dir.path / "model.json");
    CHECK(back.ensemble == m.ensemble);
    CHECK(back.preprocessor == m.preprocessor);

    const FeatureMatrix test = f.matrix.select_ids(f.split.test_ids);
    const EvalReport r = evaluate(back, test);
    CHECK(r.n_test == test.rows());
    CHECK(r.auc == auc(m.predict_proba(test), test.target));
    CHECK(r.auc > 0.5);
    CHECK_THROWS_AS(load_model(dir.path / "absent.json"), DataError);
}

TEST_CASE("cross-application matrix diagonal equals native evaluation") {
    const Fixture& f = fixture();
    const FeatureMatrix train = f.matrix.select_ids(f.split.train_ids);
    const FeatureMatrix test = f.matrix.select_ids(f.split.test_ids);
    std::vector<Model> models;
    std::vector<FeatureMatrix> tests;
    std::vector<std::string> names;
    Hyperparams hp;
    hp.n_estimators = 10;
    hp.max_depth = 3;
    for (Application app : {Application::MusicStreaming, Application::VideoStreaming}) {
        models.push_back(fit_model(train.select_application(app), hp));
        tests.push_back(test.select_application(app));
        names.push_back(std::string(to_string(app)));
    }
    const AucMatrix m = cross_application_matrix({&models[0], &models[1]}, names, {&tests[0], &tests[1]}, names);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(m.auc[i][i] == evaluate(models[i], tests[i]).auc);
        for (std::size_t k = 0; k < 2; ++k) CHECK(m.auc[i][k] == auc(models[i].predict_proba(tests[k]), tests[k].target));
    }
    std::ostringstream csv;
    write_matrix_csv(csv, m);
    CHECK(csv.str().rfind("trained_on,", 0) == 0);
    CHECK_THROWS_AS(cross_application_matrix({&models[0]}, names, {&tests[0]}, {names[0]}), UsageError);
}
