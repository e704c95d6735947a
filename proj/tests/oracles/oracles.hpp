#pragma once

// Slow, obviously-correct reference implementations. Tests compare the
// library against these and never against its own output.

#include "aed/annotation_log.hpp"
#include "aed/featurize.hpp"
#include "aed/gbdt.hpp"
#include "aed/synthgen.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

// Full-table Levenshtein recurrence.
inline std::size_t edit_distance(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
        }
    }
    return d[a.size()][b.size()];
}

// Counts every positive/negative pair: 2 for a win, 1 for a tie, over 2PN.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    std::uint64_t twice = 0;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        (y[i] == 1 ? pos : neg) += 1;
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            twice += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
        }
    }
    return static_cast<double>(twice) / static_cast<double>(2 * pos * neg);
}

// --- rolling features by re-scanning the whole log for every event ---------

inline double rate_or_missing(std::int64_t hits, std::int64_t count) {
    return count == 0 ? aed::kMissing : static_cast<double>(hits) / static_cast<double>(count);
}

inline double error_rate(const std::vector<aed::AnnotationEvent>& log, const aed::AnnotationEvent& at, int days,
                         bool all_annotators, bool major) {
    const std::int64_t from = at.timestamp - days * aed::kSecondsPerDay;
    std::int64_t count = 0;
    std::int64_t hits = 0;
    for (const auto& e : log) {
        const bool who = all_annotators ? e.application == at.application : e.annotator_id == at.annotator_id;
        if (who && e.timestamp >= from && e.timestamp < at.timestamp) {
            ++count;
            const aed::ErrorVerdict v = aed::derive_verdict(e);
            hits += (major ? v.is_major_error : v.is_error) ? 1 : 0;
        }
    }
    return rate_or_missing(hits, count);
}

inline std::int64_t volume(const std::vector<aed::AnnotationEvent>& log, const aed::AnnotationEvent& at, int days) {
    const std::int64_t from = at.timestamp - days * aed::kSecondsPerDay;
    return std::count_if(log.begin(), log.end(), [&](const aed::AnnotationEvent& e) {
        return e.annotator_id == at.annotator_id && e.timestamp >= from && e.timestamp < at.timestamp;
    });
}

// Share of correct labels among the annotator's last k earlier tasks that
// share the category value. "Last" orders by time, then log position.
inline double category_rate(const std::vector<aed::AnnotationEvent>& log, const aed::AnnotationEvent& at,
                            bool media, int k) {
    std::vector<std::size_t> earlier;
    for (std::size_t j = 0; j < log.size(); ++j) {
        const auto& e = log[j];
        const bool same = media ? e.output_media_type == at.output_media_type
                                : e.input_query_type == at.input_query_type;
        if (e.annotator_id == at.annotator_id && same && e.timestamp < at.timestamp) {
            earlier.push_back(j);
        }
    }
    std::stable_sort(earlier.begin(), earlier.end(),
                     [&](std::size_t a, std::size_t b) { return log[a].timestamp < log[b].timestamp; });
    const std::size_t take = std::min<std::size_t>(earlier.size(), static_cast<std::size_t>(k));
    std::int64_t correct = 0;
    for (std::size_t i = earlier.size() - take; i < earlier.size(); ++i) {
        correct += aed::derive_verdict(log[earlier[i]]).is_error ? 0 : 1;
    }
    return rate_or_missing(correct, static_cast<std::int64_t>(take));
}

// --- trees ------------------------------------------------------------------

// Value of one tree when only the features in `mask` are known; unknown
// splits average their children weighted by cover.
inline double conditional_value(const aed::Tree& tree, int node, const std::vector<double>& x, std::uint32_t mask) {
    const aed::TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) {
        return n.leaf_value;
    }
    if ((mask >> n.feature) & 1U) {
        return conditional_value(tree, x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right, x,
                                 mask);
    }
    const double cl = tree.nodes[static_cast<std::size_t>(n.left)].cover;
    const double cr = tree.nodes[static_cast<std::size_t>(n.right)].cover;
    return (cl * conditional_value(tree, n.left, x, mask) + cr * conditional_value(tree, n.right, x, mask)) /
           (cl + cr);
}

// Shapley values of the ensemble margin by enumerating all 2^M coalitions.
inline std::vector<double> brute_force_shap(const aed::Ensemble& ens, const std::vector<double>& x) {
    const std::size_t m = x.size();
    const std::uint32_t full = 1U << m;
    std::vector<long double> v(full, 0.0L);
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        long double total = ens.base_margin;
        for (const auto& t : ens.trees) total += conditional_value(t, 0, x, mask);
        v[mask] = total;
    }
    std::vector<long double> fact(m + 1, 1.0L);
    for (std::size_t i = 1; i <= m; ++i) fact[i] = fact[i - 1] * static_cast<long double>(i);
    std::vector<double> phi(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        long double sum = 0.0L;
        for (std::uint32_t mask = 0; mask < full; ++mask) {
            if ((mask >> i) & 1U) continue;
            const auto s = static_cast<std::size_t>(__builtin_popcount(mask));
            sum += fact[s] * fact[m - s - 1] / fact[m] * (v[mask | (1U << i)] - v[mask]);
        }
        phi[i] = static_cast<double>(sum);
    }
    return phi;
}

// Best split gain over every feature and every gap between distinct values.
struct BestSplit {
    double gain = -1.0;
    int feature = -1;
    double threshold = 0.0;
};

inline BestSplit best_split(const aed::DenseMatrix& x, const std::vector<std::size_t>& rows,
                            const std::vector<std::size_t>& features, const std::vector<double>& g,
                            const std::vector<double>& h, const aed::Hyperparams& hp) {
    BestSplit best;
    for (std::size_t f : features) {
        std::vector<double> values;
        for (std::size_t r : rows) values.push_back(x.at(r, f));
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 1; k < values.size(); ++k) {
            double gl = 0, hl = 0, gr = 0, hr = 0;
            for (std::size_t r : rows) {
                (x.at(r, f) < values[k] ? gl : gr) += g[r];
                (x.at(r, f) < values[k] ? hl : hr) += h[r];
            }
            if (hl < hp.min_child_weight || hr < hp.min_child_weight) continue;
            const double gain = aed::split_gain(gl, hl, gr, hr, hp.l2_lambda, hp.gamma);
            if (gain > best.gain) best = {gain, static_cast<int>(f), values[k]};
        }
    }
    return best;
}

// A small synthetic log with plenty of window overlap.
inline aed::GenConfig small_log_config(int n_tasks, std::uint64_t seed) {
    aed::GenConfig c;
    c.n_tasks = n_tasks;
    c.n_annotators = 12;
    c.n_days = 40;
    c.seed = seed;
    return c;
}

}  // namespace oracle
