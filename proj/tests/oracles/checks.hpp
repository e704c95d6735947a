#pragma once

// Randomized fixtures and oracle sweeps shared by the unit and acceptance
// suites. Each sweep reports counts and worst errors; callers decide pass or
// fail.

#include "oracles.hpp"

#include "aed/common.hpp"
#include "aed/dense.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline bool same(double a, double b) { return (aed::is_missing(a) && aed::is_missing(b)) || a == b; }

// Small alphabet so pairs share structure; two multi-byte code points.
inline std::string random_string(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> alphabet = {"a", "b", "c", "d", "é", "ß"};
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    for (std::size_t i = len(rng); i > 0; --i) s += alphabet[pick(rng)];
    return s;
}

struct ScoredLabels {
    std::vector<double> scores;
    std::vector<int> labels;
};

// Both classes present; even `t` gives coarse scores with many ties.
inline ScoredLabels random_scored_labels(std::mt19937_64& rng, int t) {
    std::uniform_int_distribution<int> n_dist(2, 60);
    const auto n = static_cast<std::size_t>(n_dist(rng));
    std::uniform_int_distribution<int> score(0, t % 2 == 0 ? 5 : 1000);
    ScoredLabels out{std::vector<double>(n), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.scores[i] = score(rng) / 10.0;
        out.labels[i] = static_cast<int>(rng() % 2);
    }
    out.labels[0] = 1;
    out.labels[1] = 0;
    return out;
}

// Every feature of every row, keyed by task id.
inline std::map<std::string, std::vector<std::string>> cells_by_id(const aed::FeatureMatrix& m) {
    std::map<std::string, std::vector<std::string>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto& row = out[m.task_ids[r]];
        for (std::size_t c = 0; c < m.columns.size(); ++c) {
            if (m.schema.features[c].kind == aed::FeatureKind::Numeric) {
                const double v = m.columns[c].numeric[r];
                row.push_back(aed::is_missing(v) ? "NA" : aed::format_double(v));
            } else {
                row.push_back(m.columns[c].categorical[r]);
            }
        }
    }
    return out;
}

struct RescanReport {
    std::size_t checked = 0;
    std::size_t non_missing = 0;
    std::size_t mismatches = 0;
    std::string first_mismatch;
};

// Compares every rolling, volume and tenure cell of `m` against a re-scan of
// the whole log. Row r of `m` must be log[r].
inline RescanReport rescan_features(const aed::FeatureMatrix& m, const std::vector<aed::AnnotationEvent>& log,
                                    const std::vector<aed::AnnotatorProfile>& annotators,
                                    const aed::WindowConfig& w) {
    RescanReport rep;
    auto expect = [&](const std::string& name, std::size_t r, double want) {
        const double got = m.column(name).numeric[r];
        ++rep.checked;
        rep.non_missing += aed::is_missing(want) ? 0 : 1;
        if (!same(got, want)) {
            if (rep.mismatches++ == 0) {
                std::ostringstream s;
                s << name << " row " << r << ": " << got << " vs " << want;
                rep.first_mismatch = s.str();
            }
        }
    };
    for (std::size_t r = 0; r < log.size(); ++r) {
        const aed::AnnotationEvent& e = log[r];
        for (int d : w.days) {
            const std::string ds = std::to_string(d);
            const double self = error_rate(log, e, d, false, false);
            const double all = error_rate(log, e, d, true, false);
            expect("error_" + ds, r, self);
            expect("error_" + ds + "_all", r, all);
            expect("maj_error_" + ds, r, error_rate(log, e, d, false, true));
            expect("maj_error_" + ds + "_all", r, error_rate(log, e, d, true, true));
            expect("error_" + ds + "_diff", r, aed::is_missing(self) || aed::is_missing(all) ? aed::kMissing : self - all);
            expect("vol_last_" + ds, r, static_cast<double>(volume(log, e, d)));
        }
        for (int k : w.tasks) {
            const std::string ks = std::to_string(k);
            expect("error_rolling_output_media_type_" + ks, r, category_rate(log, e, true, k));
            expect("error_rolling_input_query_type_user_" + ks, r, category_rate(log, e, false, k));
        }
        const auto& p = *std::find_if(annotators.begin(), annotators.end(),
                                      [&](const auto& a) { return a.annotator_id == e.annotator_id; });
        expect("tenure_updated_days", r, static_cast<double>((e.timestamp - p.join_date) / aed::kSecondsPerDay));
        expect("tenure_full_days", r, static_cast<double>((e.timestamp - p.activation_date) / aed::kSecondsPerDay));
    }
    return rep;
}

// --- split audit ------------------------------------------------------------

// Rows of `sampled` that reach each node of `tree`.
inline std::vector<std::vector<std::size_t>> node_rows(const aed::Tree& tree, const aed::DenseMatrix& x,
                                                       const std::vector<std::size_t>& sampled) {
    std::vector<std::vector<std::size_t>> rows(tree.nodes.size());
    rows[0] = sampled;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const aed::TreeNode& n = tree.nodes[i];
        if (n.is_leaf()) continue;
        for (std::size_t r : rows[i]) {
            const bool left = x.at(r, static_cast<std::size_t>(n.feature)) < n.threshold;
            rows[static_cast<std::size_t>(left ? n.left : n.right)].push_back(r);
        }
    }
    return rows;
}

inline double rel_error(double got, double want) { return std::fabs(got - want) / std::max(1.0, std::fabs(want)); }

struct SplitAudit {
    std::size_t splits = 0;
    std::size_t leaves = 0;
    std::size_t depth_violations = 0;
    std::size_t empty_nodes = 0;
    std::size_t weight_violations = 0;  // child hessian below min_child_weight
    std::size_t unsampled_features = 0;
    std::size_t nonpositive_gains = 0;
    double worst_stat_error = 0.0;  // cover, gradient sum and leaf value
    double worst_gain_error = 0.0;
    double worst_argmax_shortfall = 0.0;  // best candidate gain minus chosen gain

    std::size_t violations() const {
        return depth_violations + empty_nodes + weight_violations + unsampled_features + nonpositive_gains;
    }
};

// Recomputes every node of every tree from the rows and gradients in the
// training trace.
inline SplitAudit audit_splits(const aed::Ensemble& e, const aed::DenseMatrix& x, const aed::TrainingTrace& trace,
                               const aed::Hyperparams& hp) {
    SplitAudit out;
    for (std::size_t t = 0; t < e.trees.size(); ++t) {
        const aed::Tree& tree = e.trees[t];
        out.depth_violations += tree.depth() > hp.max_depth ? 1 : 0;
        const auto& g = trace.grad[t];
        const auto& h = trace.hess[t];
        const auto& features = trace.features[t];
        const auto rows = node_rows(tree, x, trace.rows[t]);
        auto sums = [&](const std::vector<std::size_t>& rs) {
            long double sg = 0, sh = 0;
            for (std::size_t r : rs) {
                sg += g[r];
                sh += h[r];
            }
            return std::pair{static_cast<double>(sg), static_cast<double>(sh)};
        };
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const aed::TreeNode& n = tree.nodes[i];
            if (rows[i].empty()) {
                ++out.empty_nodes;
                continue;
            }
            const auto [sg, sh] = sums(rows[i]);
            out.worst_stat_error = std::max({out.worst_stat_error, rel_error(n.cover, sh), rel_error(n.sum_grad, sg)});
            if (n.is_leaf()) {
                ++out.leaves;
                const double w = aed::leaf_weight(sg, sh, hp.l2_lambda, hp.learning_rate);
                out.worst_stat_error = std::max(out.worst_stat_error, rel_error(n.leaf_value, w));
                continue;
            }
            ++out.splits;
            const auto [gl, hl] = sums(rows[static_cast<std::size_t>(n.left)]);
            const auto [gr, hr] = sums(rows[static_cast<std::size_t>(n.right)]);
            const double recomputed = aed::split_gain(gl, hl, gr, hr, hp.l2_lambda, hp.gamma);
            out.worst_gain_error = std::max(out.worst_gain_error, std::fabs(recomputed - n.gain));
            out.nonpositive_gains += recomputed > 0.0 ? 0 : 1;
            out.weight_violations += (hl < hp.min_child_weight ? 1 : 0) + (hr < hp.min_child_weight ? 1 : 0);
            out.unsampled_features +=
                std::find(features.begin(), features.end(), static_cast<std::size_t>(n.feature)) == features.end();
            const BestSplit best = best_split(x, rows[i], features, g, h, hp);
            out.worst_argmax_shortfall = std::max(out.worst_argmax_shortfall, best.gain - n.gain);
        }
    }
    return out;
}

// Hyperparameters for split-audit dataset `seed`: varied depth, weight
// floor, gamma and sampling.
inline aed::Hyperparams audit_hyperparams(std::uint64_t seed) {
    aed::Hyperparams hp;
    hp.n_estimators = 8;
    hp.max_depth = static_cast<int>(2 + seed % 4);
    hp.min_child_weight = seed % 2 == 0 ? 1.0 : 0.5;
    hp.gamma = seed % 3 == 0 ? 0.2 : 0.0;
    hp.subsample = seed % 2 == 0 ? 0.8 : 1.0;
    hp.colsample_bytree = seed % 3 == 1 ? 0.7 : 1.0;
    hp.learning_rate = 0.3;
    hp.seed = seed;
    return hp;
}

// --- random ensembles for SHAP ------------------------------------------------

// Grows a random tree below `node`; covers are filled bottom-up.
inline double grow(aed::Tree& t, std::size_t node, int depth, int max_depth, std::size_t m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit;
    if (depth == max_depth || unit(rng) < 0.2) {
        t.nodes[node].leaf_value = unit(rng) * 2.0 - 1.0;
        t.nodes[node].cover = 0.5 + unit(rng) * 10.0;
        return t.nodes[node].cover;
    }
    t.nodes[node].feature = static_cast<int>(rng() % m);
    t.nodes[node].threshold = unit(rng) * 2.0 - 1.0;
    const std::size_t left = t.nodes.size();
    t.nodes.emplace_back();
    t.nodes.emplace_back();
    t.nodes[node].left = static_cast<int>(left);
    t.nodes[node].right = static_cast<int>(left + 1);
    const double c = grow(t, left, depth + 1, max_depth, m, rng) + grow(t, left + 1, depth + 1, max_depth, m, rng);
    t.nodes[node].cover = c;
    return c;
}

inline aed::Ensemble random_ensemble(std::size_t m, std::size_t trees, int max_depth, std::mt19937_64& rng) {
    aed::Ensemble e;
    e.n_features = m;
    e.base_margin = 0.3;
    for (std::size_t i = 0; i < trees; ++i) {
        aed::Tree t;
        t.nodes.emplace_back();
        grow(t, 0, 0, max_depth, m, rng);
        e.trees.push_back(std::move(t));
    }
    return e;
}

inline aed::DenseMatrix random_rows(std::size_t rows, std::size_t m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    aed::DenseMatrix x(rows, m);
    for (double& v : x.values) v = u(rng);
    return x;
}

inline std::vector<double> row_vector(const aed::DenseMatrix& x, std::size_t r) {
    const auto row = x.row(r);
    return {row.begin(), row.end()};
}

struct ShapSweep {
    int ensembles = 0;
    double worst_phi_error = 0.0;
    double worst_base_error = 0.0;
};

// TreeSHAP against subset enumeration on random ensembles with up to 12
// features, 5 trees and depth 3.
template <class ShapFn>
ShapSweep shap_vs_brute_force(int count, std::uint64_t seed, ShapFn&& shap) {
    std::mt19937_64 rng(seed);
    ShapSweep out;
    for (int i = 0; i < count; ++i) {
        const std::size_t m = 2 + rng() % 11;
        const std::size_t trees = 1 + rng() % 5;
        const int depth = 1 + static_cast<int>(rng() % 3);
        const aed::Ensemble e = random_ensemble(m, trees, depth, rng);
        const aed::DenseMatrix x = random_rows(4, m, rng);
        const auto s = shap(e, x);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const std::vector<double> phi = brute_force_shap(e, row_vector(x, r));
            for (std::size_t f = 0; f < m; ++f) {
                out.worst_phi_error = std::max(out.worst_phi_error, std::fabs(phi[f] - s.values.at(r, f)));
            }
        }
        // The empty coalition's value is the base value.
        double base = e.base_margin;
        for (const auto& t : e.trees) base += conditional_value(t, 0, row_vector(x, 0), 0);
        out.worst_base_error = std::max(out.worst_base_error, std::fabs(s.base_value - base));
        ++out.ensembles;
    }
    return out;
}

}  // namespace oracle
