#pragma once

#include <cstddef>
#include <span>

namespace aed {

// Rank-based (Mann-Whitney) AUC. A tied positive/negative pair counts one half.
// Throws DataError unless both classes are present.
double auc(std::span<const double> scores, std::span<const int> labels);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
};

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

struct EvalReport {
    double auc = 0.0;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double threshold = 0.5;
    std::size_t n_test = 0;
    ClassMetrics positive;  // error class
    ClassMetrics negative;
    ConfusionCounts confusion;
};

// Predicts positive when score >= threshold. Precision of a class that is never
// predicted is 0.
EvalReport classification_report(std::span<const double> scores, std::span<const int> labels,
                                 double threshold = 0.5);

}  // namespace aed
