#pragma once

#include "aed/dense.hpp"
#include "aed/featurize.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace aed {

inline constexpr const char* kMissingCategory = "__missing__";

struct NumericStats {
    double mean = 0.0;
    double std = 1.0;

    bool operator==(const NumericStats&) const = default;
};

// Statistics fitted on training rows only. Indexed by schema feature; only the
// entry matching the feature's kind is meaningful.
struct PreprocessorState {
    FeatureSchema schema;
    std::vector<NumericStats> numeric;
    std::vector<std::vector<std::string>> categories;  // sorted tokens, then kMissingCategory
    std::size_t fitted_rows = 0;

    // Design-matrix column names: numeric features keep their name, categorical
    // features expand to `<feature>=<token>`.
    std::vector<std::string> column_names() const;
    // Source feature for every design-matrix column.
    std::vector<std::string> column_sources() const;

    bool operator==(const PreprocessorState&) const = default;
};

struct DesignMatrix {
    DenseMatrix x;
    std::vector<std::string> column_names;
    std::vector<std::string> column_sources;
};

// Mean and population std over non-missing cells. A constant column records
// std 1; an all-missing column records mean 0, std 1.
PreprocessorState fit_preprocessor(const FeatureMatrix& train);

// Missing numeric -> mean, then standardize. Missing or unseen categorical ->
// missing category, then one-hot. Output is fully finite.
DesignMatrix transform(const PreprocessorState& state, const FeatureMatrix& matrix);

nlohmann::ordered_json to_json(const PreprocessorState& state);
PreprocessorState preprocessor_from_json(const nlohmann::json& j);

}  // namespace aed
