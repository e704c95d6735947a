#include "aed/preprocess.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace aed {

using nlohmann::ordered_json;

std::vector<std::string> PreprocessorState::column_names() const {
    std::vector<std::string> names;
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        const auto& spec = schema.features[f];
        if (spec.kind == FeatureKind::Numeric) {
            names.push_back(spec.name);
        } else {
            for (const std::string& token : categories[f]) {
                names.push_back(spec.name + "=" + token);
            }
        }
    }
    return names;
}

std::vector<std::string> PreprocessorState::column_sources() const {
    std::vector<std::string> sources;
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        const auto& spec = schema.features[f];
        const std::size_t width = spec.kind == FeatureKind::Numeric ? 1 : categories[f].size();
        sources.insert(sources.end(), width, spec.name);
    }
    return sources;
}

PreprocessorState fit_preprocessor(const FeatureMatrix& train) {
    if (train.rows() == 0) {
        throw DataError("cannot fit preprocessing on an empty matrix");
    }
    train.validate();
    PreprocessorState state;
    state.schema = train.schema;
    state.fitted_rows = train.rows();
    state.numeric.resize(train.schema.features.size());
    state.categories.resize(train.schema.features.size());
    for (std::size_t f = 0; f < train.schema.features.size(); ++f) {
        if (train.schema.features[f].kind == FeatureKind::Numeric) {
            const auto& values = train.columns[f].numeric;
            long double sum = 0.0L;
            std::size_t count = 0;
            for (double v : values) {
                if (!is_missing(v)) {
                    sum += v;
                    ++count;
                }
            }
            NumericStats stats;
            if (count > 0) {
                const long double mean = sum / static_cast<long double>(count);
                long double ss = 0.0L;
                for (double v : values) {
                    if (!is_missing(v)) {
                        ss += (v - mean) * (v - mean);
                    }
                }
                stats.mean = static_cast<double>(mean);
                const double sd = std::sqrt(static_cast<double>(ss / static_cast<long double>(count)));
                stats.std = sd > 0.0 ? sd : 1.0;
            }
            state.numeric[f] = stats;
        } else {
            std::set<std::string> tokens;
            for (const std::string& v : train.columns[f].categorical) {
                if (!v.empty() && v != kMissingCategory) {
                    tokens.insert(v);
                }
            }
            auto& cats = state.categories[f];
            cats.assign(tokens.begin(), tokens.end());
            cats.emplace_back(kMissingCategory);
        }
    }
    return state;
}

DesignMatrix transform(const PreprocessorState& state, const FeatureMatrix& matrix) {
    if (!(matrix.schema == state.schema)) {
        throw DataError("feature matrix schema does not match the fitted preprocessing schema");
    }
    matrix.validate();
    DesignMatrix out;
    out.column_names = state.column_names();
    out.column_sources = state.column_sources();
    out.x = DenseMatrix(matrix.rows(), out.column_names.size());

    std::size_t offset = 0;
    for (std::size_t f = 0; f < state.schema.features.size(); ++f) {
        if (state.schema.features[f].kind == FeatureKind::Numeric) {
            const NumericStats& s = state.numeric[f];
            const auto& values = matrix.columns[f].numeric;
            for (std::size_t r = 0; r < matrix.rows(); ++r) {
                const double v = is_missing(values[r]) ? s.mean : values[r];
                out.x.at(r, offset) = (v - s.mean) / s.std;
            }
            ++offset;
        } else {
            const auto& cats = state.categories[f];
            std::unordered_map<std::string_view, std::size_t> slot;
            for (std::size_t k = 0; k < cats.size(); ++k) {
                slot.emplace(cats[k], k);
            }
            const std::size_t missing_slot = cats.size() - 1;
            const auto& values = matrix.columns[f].categorical;
            for (std::size_t r = 0; r < matrix.rows(); ++r) {
                auto it = values[r].empty() ? slot.end() : slot.find(values[r]);
                const std::size_t k = it == slot.end() ? missing_slot : it->second;
                out.x.at(r, offset + k) = 1.0;
            }
            offset += cats.size();
        }
    }
    return out;
}

ordered_json to_json(const PreprocessorState& state) {
    ordered_json j;
    j["fitted_rows"] = state.fitted_rows;
    j["schema"] = schema_to_json(state.schema);
    ordered_json cols = ordered_json::array();
    for (std::size_t f = 0; f < state.schema.features.size(); ++f) {
        const auto& spec = state.schema.features[f];
        ordered_json c;
        c["name"] = spec.name;
        if (spec.kind == FeatureKind::Numeric) {
            c["mean"] = state.numeric[f].mean;
            c["std"] = state.numeric[f].std;
        } else {
            c["categories"] = state.categories[f];
        }
        cols.push_back(std::move(c));
    }
    j["columns"] = std::move(cols);
    return j;
}

PreprocessorState preprocessor_from_json(const nlohmann::json& j) {
    PreprocessorState state;
    try {
        state.fitted_rows = j.at("fitted_rows").get<std::size_t>();
        state.schema = schema_from_json(j.at("schema"));
        const auto& cols = j.at("columns");
        if (cols.size() != state.schema.features.size()) {
            throw DataError("preprocessor: column count does not match schema");
        }
        state.numeric.resize(cols.size());
        state.categories.resize(cols.size());
        for (std::size_t f = 0; f < cols.size(); ++f) {
            if (state.schema.features[f].kind == FeatureKind::Numeric) {
                state.numeric[f] = {cols[f].at("mean").get<double>(), cols[f].at("std").get<double>()};
            } else {
                cols[f].at("categories").get_to(state.categories[f]);
                const auto& cats = state.categories[f];
                if (cats.empty() || std::count(cats.begin(), cats.end(), kMissingCategory) != 1 ||
                    cats.back() != kMissingCategory) {
                    throw DataError("preprocessor: category list of '" + state.schema.features[f].name +
                                    "' must end with exactly one missing category");
                }
            }
        }
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("preprocessor: ") + ex.what());
    }
    return state;
}

}  // namespace aed
