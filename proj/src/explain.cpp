#include "aed/explain.hpp"

#include "aed/common.hpp"
#include "aed/csv.hpp"
#include "aed/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace aed {

namespace {

// One feature on the current root-to-node path. `zero` is the fraction of
// cover that flows down this path when the feature is absent, `one` is 1 if
// x itself follows it. `weight` holds the running permutation weights.
struct PathElement {
    int feature = -1;
    double zero = 0.0;
    double one = 0.0;
    double weight = 0.0;
};

void extend(PathElement* path, int depth, double zero, double one, int feature) {
    path[depth] = {feature, zero, one, depth == 0 ? 1.0 : 0.0};
    for (int i = depth - 1; i >= 0; --i) {
        path[i + 1].weight += one * path[i].weight * (i + 1) / (depth + 1);
        path[i].weight = zero * path[i].weight * (depth - i) / (depth + 1);
    }
}

// Undoes the extension of element `index`.
void unwind(PathElement* path, int depth, int index) {
    const double one = path[index].one;
    const double zero = path[index].zero;
    double next = path[depth].weight;
    for (int i = depth - 1; i >= 0; --i) {
        if (one != 0.0) {
            const double tmp = path[i].weight;
            path[i].weight = next * (depth + 1) / ((i + 1) * one);
            next = tmp - path[i].weight * zero * (depth - i) / (depth + 1);
        } else {
            path[i].weight = path[i].weight * (depth + 1) / (zero * (depth - i));
        }
    }
    for (int i = index; i < depth; ++i) {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
}

// Total permutation weight the path would have with element `index` removed.
double unwound_sum(const PathElement* path, int depth, int index) {
    const double one = path[index].one;
    const double zero = path[index].zero;
    double next = path[depth].weight;
    double total = 0.0;
    for (int i = depth - 1; i >= 0; --i) {
        if (one != 0.0) {
            const double tmp = next * (depth + 1) / ((i + 1) * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (depth - i) / (depth + 1);
        } else {
            total += path[i].weight / zero / (static_cast<double>(depth - i) / (depth + 1));
        }
    }
    return total;
}

class TreeExplainer {
public:
    TreeExplainer(const Tree& tree, std::size_t max_depth)
        : tree_(tree), buffer_((max_depth + 2) * (max_depth + 3) / 2) {}

    void explain(std::span<const double> x, std::span<double> phi) {
        x_ = x;
        phi_ = phi;
        recurse(0, buffer_.data(), 0, 1.0, 1.0, -1);
    }

private:
    void recurse(int node_index, PathElement* parent_path, int depth, double zero, double one, int feature) {
        const TreeNode& node = tree_.nodes[static_cast<std::size_t>(node_index)];
        PathElement* path = parent_path + depth;
        std::copy(parent_path, parent_path + depth, path);
        extend(path, depth, zero, one, feature);

        if (node.is_leaf()) {
            for (int i = 1; i <= depth; ++i) {
                const double w = unwound_sum(path, depth, i);
                const PathElement& el = path[i];
                phi_[static_cast<std::size_t>(el.feature)] += w * (el.one - el.zero) * node.leaf_value;
            }
            return;
        }

        const TreeNode& left = tree_.nodes[static_cast<std::size_t>(node.left)];
        const TreeNode& right = tree_.nodes[static_cast<std::size_t>(node.right)];
        const bool goes_left = x_[static_cast<std::size_t>(node.feature)] < node.threshold;
        const int hot = goes_left ? node.left : node.right;
        const int cold = goes_left ? node.right : node.left;
        const double total = left.cover + right.cover;
        const double hot_zero = (goes_left ? left.cover : right.cover) / total;
        const double cold_zero = (goes_left ? right.cover : left.cover) / total;

        // A feature seen higher up the path is merged rather than repeated.
        double incoming_zero = 1.0;
        double incoming_one = 1.0;
        int index = 0;
        for (; index <= depth; ++index) {
            if (path[index].feature == node.feature) {
                break;
            }
        }
        if (index != depth + 1) {
            incoming_zero = path[index].zero;
            incoming_one = path[index].one;
            unwind(path, depth, index);
            --depth;
        }
        recurse(hot, path, depth + 1, hot_zero * incoming_zero, incoming_one, node.feature);
        recurse(cold, path, depth + 1, cold_zero * incoming_zero, 0.0, node.feature);
    }

    const Tree& tree_;
    std::vector<PathElement> buffer_;
    std::span<const double> x_;
    std::span<double> phi_;
};

void check_covers(const Ensemble& ensemble) {
    for (const Tree& tree : ensemble.trees) {
        if (tree.nodes.empty()) {
            throw DataError("shap: ensemble contains an empty tree");
        }
        for (const TreeNode& n : tree.nodes) {
            if (!std::isfinite(n.cover) || !(n.cover > 0.0)) {
                throw DataError("shap: ensemble has no usable cover statistics");
            }
        }
    }
}

double expected_from(const Tree& tree, std::size_t index) {
    const TreeNode& n = tree.nodes[index];
    if (n.is_leaf()) {
        return n.leaf_value;
    }
    const TreeNode& l = tree.nodes[static_cast<std::size_t>(n.left)];
    const TreeNode& r = tree.nodes[static_cast<std::size_t>(n.right)];
    return (l.cover * expected_from(tree, static_cast<std::size_t>(n.left)) +
            r.cover * expected_from(tree, static_cast<std::size_t>(n.right))) /
           (l.cover + r.cover);
}

}  // namespace

double expected_value(const Tree& tree) {
    if (tree.nodes.empty()) {
        throw DataError("expected_value: empty tree");
    }
    return expected_from(tree, 0);
}

ShapMatrix shap_values(const Ensemble& ensemble, const DenseMatrix& x) {
    if (x.cols != ensemble.n_features) {
        throw DataError("shap: model expects " + std::to_string(ensemble.n_features) + " features, matrix has " +
                        std::to_string(x.cols));
    }
    check_covers(ensemble);

    ShapMatrix out;
    out.values = DenseMatrix(x.rows, x.cols, 0.0);
    out.feature_names = ensemble.feature_names;
    out.base_value = ensemble.base_margin;
    for (const Tree& tree : ensemble.trees) {
        out.base_value += expected_value(tree);
    }
    for (const Tree& tree : ensemble.trees) {
        TreeExplainer explainer(tree, static_cast<std::size_t>(tree.depth()));
        for (std::size_t r = 0; r < x.rows; ++r) {
            explainer.explain(x.row(r), out.values.row(r));
        }
    }
    return out;
}

ImportanceVector importance(const ShapMatrix& shap, const std::vector<std::string>& column_sources) {
    const DenseMatrix& v = shap.values;
    if (column_sources.size() != v.cols) {
        throw DataError("importance: " + std::to_string(v.cols) + " columns but " +
                        std::to_string(column_sources.size()) + " source names");
    }
    std::vector<std::string> sources;
    std::vector<std::size_t> group(v.cols);
    for (std::size_t c = 0; c < v.cols; ++c) {
        if (column_sources[c].empty()) {
            throw DataError("importance: column " + std::to_string(c) + " has no source feature");
        }
        auto it = std::find(sources.begin(), sources.end(), column_sources[c]);
        group[c] = static_cast<std::size_t>(it - sources.begin());
        if (it == sources.end()) {
            sources.push_back(column_sources[c]);
        }
    }

    std::vector<long double> total(sources.size(), 0.0L);
    std::vector<double> row_sum(sources.size());
    for (std::size_t r = 0; r < v.rows; ++r) {
        std::fill(row_sum.begin(), row_sum.end(), 0.0);
        for (std::size_t c = 0; c < v.cols; ++c) {
            row_sum[group[c]] += v.at(r, c);
        }
        for (std::size_t s = 0; s < sources.size(); ++s) {
            total[s] += std::fabs(row_sum[s]);
        }
    }

    std::vector<std::size_t> order(sources.size());
    std::vector<double> mean(sources.size(), 0.0);
    for (std::size_t s = 0; s < sources.size(); ++s) {
        order[s] = s;
        if (v.rows > 0) {
            mean[s] = static_cast<double>(total[s] / static_cast<long double>(v.rows));
        }
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return mean[a] != mean[b] ? mean[a] > mean[b] : sources[a] < sources[b];
    });

    ImportanceVector out;
    double running = 0.0;
    for (std::size_t s : order) {
        out.features.push_back(sources[s]);
        out.values.push_back(mean[s]);
        running += mean[s];
        out.cumulative.push_back(running);
    }
    return out;
}

double importance_correlation(const ImportanceVector& a, const ImportanceVector& b) {
    std::map<std::string, double> b_values;
    for (std::size_t i = 0; i < b.features.size(); ++i) {
        b_values[b.features[i]] = b.values[i];
    }
    // Pair up in name order so the result does not depend on ranking ties.
    std::map<std::string, std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        auto it = b_values.find(a.features[i]);
        if (it != b_values.end()) {
            pairs[a.features[i]] = {a.values[i], it->second};
        }
    }
    if (pairs.size() < 3) {
        throw DataError("importance_correlation: fewer than 3 shared features");
    }
    long double sa = 0.0L;
    long double sb = 0.0L;
    for (const auto& [name, p] : pairs) {
        sa += p.first;
        sb += p.second;
    }
    const auto n = static_cast<long double>(pairs.size());
    const long double ma = sa / n;
    const long double mb = sb / n;
    long double cov = 0.0L;
    long double va = 0.0L;
    long double vb = 0.0L;
    for (const auto& [name, p] : pairs) {
        const long double da = p.first - ma;
        const long double db = p.second - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0L || vb == 0.0L) {
        throw DataError("importance_correlation: zero variance");
    }
    const double r = static_cast<double>(cov / std::sqrt(va * vb));
    return std::clamp(r, -1.0, 1.0);
}

void write_shap_csv(std::ostream& out, const ShapMatrix& shap, const std::vector<std::string>& task_ids) {
    if (task_ids.size() != shap.values.rows) {
        throw DataError("write_shap_csv: task ids not aligned with rows");
    }
    csv::Row header{"task_id"};
    header.insert(header.end(), shap.feature_names.begin(), shap.feature_names.end());
    header.push_back("base_value");
    csv::write_row(out, header);
    csv::Row row;
    for (std::size_t r = 0; r < shap.values.rows; ++r) {
        row.assign(1, task_ids[r]);
        for (double v : shap.values.row(r)) {
            row.push_back(format_double(v));
        }
        row.push_back(format_double(shap.base_value));
        csv::write_row(out, row);
    }
}

void write_importance_csv(std::ostream& out, const ImportanceVector& imp) {
    csv::write_row(out, {"rank", "feature", "mean_abs_shap", "cumulative"});
    for (std::size_t i = 0; i < imp.features.size(); ++i) {
        csv::write_row(out, {std::to_string(i + 1), imp.features[i], format_double(imp.values[i]),
                             format_double(imp.cumulative[i])});
    }
}

void write_importance_svg(std::ostream& out, const ImportanceVector& imp, const std::string& title) {
    LineSeries s;
    s.label = "cumulative";
    for (std::size_t i = 0; i < imp.cumulative.size(); ++i) {
        s.x.push_back(static_cast<double>(i + 1));
        s.y.push_back(imp.cumulative[i]);
    }
    write_line_chart(out, title, "features ranked by mean |SHAP|", "cumulative mean |SHAP|", {s});
}

}  // namespace aed
