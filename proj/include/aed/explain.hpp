#pragma once

#include "aed/dense.hpp"
#include "aed/gbdt.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace aed {

// Attributions on the margin scale. For every row,
// base_value + Σ values(row, ·) equals the ensemble margin.
struct ShapMatrix {
    DenseMatrix values;
    double base_value = 0.0;
    std::vector<std::string> feature_names;
};

// Exact path-dependent TreeSHAP: Shapley values of the margin when absent
// features are integrated out with the training covers stored in each node.
// Throws DataError if a node has a non-positive or non-finite cover.
ShapMatrix shap_values(const Ensemble& ensemble, const DenseMatrix& x);

// Cover-weighted expectation of one tree's output, the per-tree term of the
// base value.
double expected_value(const Tree& tree);

// Mean |SHAP| per source feature, one-hot columns summed back to their source
// before taking the absolute value. Sorted by descending importance, ties by
// name.
struct ImportanceVector {
    std::vector<std::string> features;
    std::vector<double> values;
    std::vector<double> cumulative;
};

// `column_sources[c]` names the source feature of column c.
ImportanceVector importance(const ShapMatrix& shap, const std::vector<std::string>& column_sources);

// Pearson correlation over the features both vectors contain. Throws DataError
// with fewer than 3 shared features or zero variance on either side.
double importance_correlation(const ImportanceVector& a, const ImportanceVector& b);

void write_shap_csv(std::ostream& out, const ShapMatrix& shap, const std::vector<std::string>& task_ids);
void write_importance_csv(std::ostream& out, const ImportanceVector& imp);
// Ranked cumulative importance as a line chart.
void write_importance_svg(std::ostream& out, const ImportanceVector& imp, const std::string& title);

}  // namespace aed
