#include "aed/metrics.hpp"

#include "aed/common.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace aed {

namespace {

void check_binary(std::span<const double> scores, std::span<const int> labels, const char* who) {
    if (scores.size() != labels.size()) {
        throw DataError(std::string(who) + ": scores and labels differ in length");
    }
    bool has_pos = false;
    bool has_neg = false;
    for (int y : labels) {
        if (y != 0 && y != 1) {
            throw DataError(std::string(who) + ": labels must be 0 or 1");
        }
        (y == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw DataError(std::string(who) + ": both classes must be present");
    }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_binary(scores, labels, "auc");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Sum of mid-ranks of positives, doubled to stay integral.
    long double rank_sum_x2 = 0.0L;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        // 1-based ranks i+1..j share the mid-rank (i+1+j)/2.
        const auto tied_rank_x2 = static_cast<long double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum_x2 += tied_rank_x2;
                ++n_pos;
            }
        }
        i = j;
    }
    const auto n_neg = n - n_pos;
    const long double u =
        rank_sum_x2 / 2.0L - static_cast<long double>(n_pos) * static_cast<long double>(n_pos + 1) / 2.0L;
    return static_cast<double>(u / (static_cast<long double>(n_pos) * static_cast<long double>(n_neg)));
}

EvalReport classification_report(std::span<const double> scores, std::span<const int> labels, double threshold) {
    check_binary(scores, labels, "classification_report");
    EvalReport r;
    r.threshold = threshold;
    r.n_test = scores.size();
    r.auc = auc(scores, labels);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) {
            ++(predicted ? r.confusion.tp : r.confusion.fn);
        } else {
            ++(predicted ? r.confusion.fp : r.confusion.tn);
        }
    }
    const auto& c = r.confusion;
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(c.tp + c.tn, r.n_test);
    r.positive = {ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn)};
    r.negative = {ratio(c.tn, c.tn + c.fn), ratio(c.tn, c.tn + c.fp)};
    r.macro_precision = 0.5 * (r.positive.precision + r.negative.precision);
    r.macro_recall = 0.5 * (r.positive.recall + r.negative.recall);
    return r;
}

}  // namespace aed
