#include "doctest.h"

#include "aed/preprocess.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace aed;

namespace {

FeatureMatrix tiny(std::vector<double> x, std::vector<std::string> c) {
    FeatureMatrix m;
    m.schema.features = {{"x", FeatureKind::Numeric}, {"c", FeatureKind::Categorical}};
    for (std::size_t i = 0; i < x.size(); ++i) {
        m.task_ids.push_back("t" + std::to_string(i));
        m.target.push_back(static_cast<int>(i % 2));
    }
    m.columns.resize(2);
    m.columns[0].numeric = std::move(x);
    m.columns[1].categorical = std::move(c);
    return m;
}

FeatureMatrix generated_matrix(int n, std::uint64_t seed) {
    const GenConfig c = oracle::small_log_config(n, seed);
    const Population pop = generate_population(c);
    return build_feature_matrix(generate_log(pop, c).events, pop.annotators);
}

}  // namespace

TEST_CASE("numeric statistics by hand") {
    const PreprocessorState s = fit_preprocessor(tiny({1, 2, 3}, {"a", "b", "a"}));
    CHECK(s.numeric[0].mean == 2.0);
    CHECK(s.numeric[0].std == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    CHECK(s.categories[1] == std::vector<std::string>{"a", "b", kMissingCategory});
    CHECK(s.fitted_rows == 3);

    const DesignMatrix d = transform(s, tiny({1, kMissing}, {"c", ""}));
    CHECK(d.column_names == std::vector<std::string>{"x", "c=a", "c=b", std::string("c=") + kMissingCategory});
    CHECK(d.column_sources == std::vector<std::string>{"x", "c", "c", "c"});
    CHECK(d.x.at(0, 0) == doctest::Approx(-1.2247448713915890).epsilon(1e-12));
    CHECK(d.x.at(1, 0) == 0.0);
    // Unseen and missing tokens both land in the missing category.
    for (std::size_t r = 0; r < 2; ++r) {
        CHECK(d.x.at(r, 1) == 0.0);
        CHECK(d.x.at(r, 2) == 0.0);
        CHECK(d.x.at(r, 3) == 1.0);
    }
}

TEST_CASE("degenerate columns") {
    const PreprocessorState constant = fit_preprocessor(tiny({5, 5}, {"a", "a"}));
    CHECK(constant.numeric[0].mean == 5.0);
    CHECK(constant.numeric[0].std == 1.0);
    CHECK(transform(constant, tiny({5}, {"a"})).x.at(0, 0) == 0.0);

    const PreprocessorState empty_col = fit_preprocessor(tiny({kMissing, kMissing}, {"", ""}));
    CHECK(empty_col.numeric[0].mean == 0.0);
    CHECK(empty_col.numeric[0].std == 1.0);
    CHECK(empty_col.categories[1] == std::vector<std::string>{kMissingCategory});

    CHECK_THROWS_AS(fit_preprocessor(tiny({}, {})), DataError);
}

TEST_CASE("schema mismatch is rejected") {
    const PreprocessorState s = fit_preprocessor(tiny({1, 2}, {"a", "b"}));
    FeatureMatrix other = tiny({1}, {"a"});
    other.schema.features[0].name = "y";
    CHECK_THROWS_AS(transform(s, other), DataError);
}

TEST_CASE("fitted transform is standardized, finite and one-hot") {
    const FeatureMatrix m = generated_matrix(600, 41);
    const PreprocessorState s = fit_preprocessor(m);
    const DesignMatrix d = transform(s, m);
    REQUIRE(d.x.rows == m.rows());
    REQUIRE(d.x.cols == d.column_names.size());
    for (double v : d.x.values) REQUIRE(std::isfinite(v));

    for (std::size_t col = 0; col < d.x.cols; ++col) {
        const std::string& src = d.column_sources[col];
        if (m.schema.features[m.schema.index_of(src)].kind != FeatureKind::Numeric) continue;
        double mean = 0.0;
        for (std::size_t r = 0; r < d.x.rows; ++r) mean += d.x.at(r, col);
        mean /= static_cast<double>(d.x.rows);
        CHECK(std::fabs(mean) < 1e-9);
        // Imputed cells sit at zero, so unit variance holds over the observed cells only.
        const auto& raw = m.column(src).numeric;
        double ss = 0.0;
        std::size_t n = 0;
        for (std::size_t r = 0; r < d.x.rows; ++r) {
            if (!is_missing(raw[r])) {
                ss += d.x.at(r, col) * d.x.at(r, col);
                ++n;
            }
        }
        const auto& stats = s.numeric[m.schema.index_of(src)];
        if (n > 0 && stats.std != 1.0) {
            double obs_mean = 0.0;
            for (std::size_t r = 0; r < d.x.rows; ++r) obs_mean += is_missing(raw[r]) ? 0.0 : d.x.at(r, col);
            obs_mean /= static_cast<double>(n);
            CHECK(ss / static_cast<double>(n) - obs_mean * obs_mean == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    for (const auto& f : m.schema.features) {
        if (f.kind != FeatureKind::Categorical) continue;
        for (std::size_t r = 0; r < d.x.rows; ++r) {
            double sum = 0.0;
            for (std::size_t col = 0; col < d.x.cols; ++col) {
                if (d.column_sources[col] == f.name) sum += d.x.at(r, col);
            }
            REQUIRE(sum == 1.0);
        }
    }
}

TEST_CASE("transform uses fitted statistics only") {
    const FeatureMatrix m = generated_matrix(500, 42);
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (std::size_t r = 0; r < m.rows(); ++r) (r % 3 == 0 ? test_rows : train_rows).push_back(r);
    const PreprocessorState fitted = fit_preprocessor(m.select_rows(train_rows));
    FeatureMatrix test = m.select_rows(test_rows);
    const DesignMatrix batch = transform(fitted, test);

    // Each row transformed alone equals the batch result, so nothing is
    // estimated from the rows being transformed.
    for (std::size_t r = 0; r < test.rows(); r += 17) {
        const std::vector<std::size_t> one{r};
        const DesignMatrix single = transform(fitted, test.select_rows(one));
        for (std::size_t c = 0; c < batch.x.cols; ++c) REQUIRE(single.x.at(0, c) == batch.x.at(r, c));
    }

    // Scrambling other test rows leaves a row's output unchanged.
    std::mt19937_64 rng(5);
    for (auto& col : test.columns) {
        for (std::size_t r = 1; r < col.numeric.size(); ++r) col.numeric[r] = static_cast<double>(rng() % 1000) * 1e3;
        for (std::size_t r = 1; r < col.categorical.size(); ++r) col.categorical[r] = "mutated";
    }
    const DesignMatrix after = transform(fitted, test);
    for (std::size_t c = 0; c < batch.x.cols; ++c) CHECK(after.x.at(0, c) == batch.x.at(0, c));
}

TEST_CASE("preprocessor JSON round-trip") {
    const FeatureMatrix m = generated_matrix(300, 43);
    const PreprocessorState s = fit_preprocessor(m);
    const PreprocessorState back = preprocessor_from_json(nlohmann::json::parse(to_json(s).dump()));
    CHECK(back == s);
    CHECK(transform(back, m).x.values == transform(s, m).x.values);
}
