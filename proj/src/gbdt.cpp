#include "aed/gbdt.hpp"

#include "aed/common.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace aed {

using nlohmann::ordered_json;

void Hyperparams::validate() const {
    auto fail = [](const std::string& what) { throw UsageError("hyperparameter " + what); };
    if (n_estimators < 0) fail("n_estimators must be >= 0");
    if (max_depth < 1) fail("max_depth must be >= 1");
    if (!(min_child_weight >= 0.0)) fail("min_child_weight must be >= 0");
    if (!(gamma >= 0.0)) fail("gamma must be >= 0");
    if (!(subsample > 0.0 && subsample <= 1.0)) fail("subsample must lie in (0,1]");
    if (!(colsample_bytree > 0.0 && colsample_bytree <= 1.0)) fail("colsample_bytree must lie in (0,1]");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) fail("learning_rate must lie in (0,1]");
    if (!(l2_lambda >= 0.0)) fail("l2_lambda must be >= 0");
    if (!(base_score > 0.0 && base_score < 1.0)) fail("base_score must lie in (0,1)");
}

ordered_json to_json(const Hyperparams& hp) {
    ordered_json j;
    j["n_estimators"] = hp.n_estimators;
    j["max_depth"] = hp.max_depth;
    j["min_child_weight"] = hp.min_child_weight;
    j["gamma"] = hp.gamma;
    j["subsample"] = hp.subsample;
    j["colsample_bytree"] = hp.colsample_bytree;
    j["learning_rate"] = hp.learning_rate;
    j["l2_lambda"] = hp.l2_lambda;
    j["base_score"] = hp.base_score;
    j["seed"] = hp.seed;
    return j;
}

Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    Hyperparams hp;
    try {
        hp.n_estimators = j.value("n_estimators", hp.n_estimators);
        hp.max_depth = j.value("max_depth", hp.max_depth);
        hp.min_child_weight = j.value("min_child_weight", hp.min_child_weight);
        hp.gamma = j.value("gamma", hp.gamma);
        hp.subsample = j.value("subsample", hp.subsample);
        hp.colsample_bytree = j.value("colsample_bytree", hp.colsample_bytree);
        hp.learning_rate = j.value("learning_rate", hp.learning_rate);
        hp.l2_lambda = j.value("l2_lambda", hp.l2_lambda);
        hp.base_score = j.value("base_score", hp.base_score);
        hp.seed = j.value("seed", hp.seed);
    } catch (const nlohmann::json::exception& ex) {
        throw UsageError(std::string("hyperparameters: ") + ex.what());
    }
    hp.validate();
    return hp;
}

int Tree::leaf_index(std::span<const double> x) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return node;
}

int Tree::depth() const {
    std::vector<int> depth(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) {
            depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
            depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
            deepest = std::max(deepest, depth[i] + 1);
        }
    }
    return deepest;
}

GradHess logistic_grad_hess(double p, int y) {
    return {p - static_cast<double>(y), p * (1.0 - p)};
}

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda,
                  double gamma) {
    const double g = grad_left + grad_right;
    const double h = hess_left + hess_right;
    return 0.5 * (grad_left * grad_left / (hess_left + lambda) + grad_right * grad_right / (hess_right + lambda) -
                  g * g / (h + lambda)) -
           gamma;
}

double leaf_weight(double grad, double hess, double lambda, double learning_rate) {
    const double denom = hess + lambda;
    if (denom <= 0.0) {
        return 0.0;
    }
    return learning_rate * (-grad / denom);
}

double log_loss(std::span<const double> margins, std::span<const int> y) {
    // log(1 + e^m) − y·m, evaluated stably.
    long double total = 0.0L;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        const double m = margins[i];
        const double softplus = m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
        total += softplus - static_cast<double>(y[i]) * m;
    }
    return margins.empty() ? 0.0 : static_cast<double>(total / static_cast<long double>(margins.size()));
}

BinnedMatrix::BinnedMatrix(const DenseMatrix& x)
    : rows_(x.rows), cols_(x.cols), bins_(x.rows * x.cols), distinct_(x.cols) {
    std::vector<double> column(rows_);
    for (std::size_t c = 0; c < cols_; ++c) {
        for (std::size_t r = 0; r < rows_; ++r) {
            const double v = x.at(r, c);
            if (!std::isfinite(v)) {
                throw DataError("training matrix contains a non-finite value in column " + std::to_string(c));
            }
            column[r] = v;
        }
        std::vector<double> values = column;
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t r = 0; r < rows_; ++r) {
            bins_[c * rows_ + r] =
                static_cast<std::uint32_t>(std::lower_bound(values.begin(), values.end(), column[r]) - values.begin());
        }
        distinct_[c] = std::move(values);
    }
}

namespace {

struct SplitCandidate {
    bool found = false;
    std::size_t feature = 0;
    std::uint32_t left_bin = 0;  // rows with bin <= left_bin go left
    double threshold = 0.0;
    double gain = 0.0;
};

struct GH {
    double grad;
    double hess;
};

struct Entry {
    std::uint32_t row;
    std::uint32_t bin;
};

struct Segment {
    std::size_t begin;
    std::size_t end;
};

// Grows one tree at a time over a fixed binned matrix; buffers persist across
// trees. Every feature keeps a list of its entries outside the column's most
// frequent ("default") bin, sorted by (bin, row) and stably partitioned at
// each split. A node's value-ordered rows are therefore available without
// sorting, and the default bin's statistics come from the node totals, which
// makes one-hot and mostly-imputed columns cheap.
class TreeBuilder {
public:
    TreeBuilder(const BinnedMatrix& binned, const Hyperparams& hp)
        : binned_(binned), hp_(hp), default_bin_(binned.cols(), 0), order_(binned.cols()), gh_(binned.rows()),
          in_sample_(binned.rows()), goes_left_(binned.rows()), row_leaf_(binned.rows()) {
        std::vector<std::uint32_t> counts;
        for (std::size_t f = 0; f < binned.cols(); ++f) {
            const std::size_t nb = binned.distinct(f).size();
            if (nb < 2) {
                continue;
            }
            const std::uint32_t* col = binned.column(f);
            counts.assign(nb, 0);
            for (std::size_t r = 0; r < binned.rows(); ++r) {
                ++counts[col[r]];
            }
            const auto d = static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            default_bin_[f] = d;
            auto& order = order_[f];
            for (std::uint32_t r = 0; r < binned.rows(); ++r) {
                if (col[r] != d) {
                    order.push_back({r, col[r]});
                }
            }
            std::stable_sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) { return a.bin < b.bin; });
        }
        const auto levels = static_cast<std::size_t>(hp.max_depth) + 1;
        segments_.resize(levels);
        mids_.resize(levels);
    }

    Tree build(std::span<const std::size_t> rows, std::span<const std::size_t> features,
               std::span<const double> grad, std::span<const double> hess) {
        for (std::size_t r = 0; r < gh_.size(); ++r) {
            gh_[r] = {grad[r], hess[r]};
        }
        rows_.assign(rows.begin(), rows.end());
        scratch_.resize(rows_.size());
        entry_scratch_.resize(rows_.size());
        std::fill(in_sample_.begin(), in_sample_.end(), 0);
        for (std::uint32_t r : rows_) {
            in_sample_[r] = 1;
        }
        std::fill(row_leaf_.begin(), row_leaf_.end(), -1);

        features_.clear();
        lists_.resize(features.size());
        segments_[0].clear();
        for (std::size_t f : features) {
            if (binned_.distinct(f).size() < 2) {
                continue;
            }
            auto& list = lists_[features_.size()];
            list.clear();
            for (const Entry& e : order_[f]) {
                if (in_sample_[e.row] != 0) {
                    list.push_back(e);
                }
            }
            features_.push_back(f);
            segments_[0].push_back({0, list.size()});
        }
        tree_ = Tree{};
        tree_.nodes.emplace_back();
        grow(0, 0, rows_.size(), 0);
        return std::move(tree_);
    }

    // Leaf reached by each sampled row of the last tree, -1 for the rest.
    const std::vector<int>& row_leaf() const { return row_leaf_; }

private:
    // Stable partition of one range by goes_left_; returns the left size.
    template <typename T, typename RowOf>
    std::size_t partition(std::vector<T>& list, std::vector<T>& scratch, std::size_t begin, std::size_t end,
                          RowOf row_of) {
        std::size_t n_left = 0;
        std::size_t n_right = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const T item = list[i];
            if (goes_left_[row_of(item)] != 0) {
                list[begin + n_left++] = item;
            } else {
                scratch[n_right++] = item;
            }
        }
        std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(n_right),
                  list.begin() + static_cast<std::ptrdiff_t>(begin + n_left));
        return n_left;
    }

    void make_leaf(std::size_t node, std::size_t begin, std::size_t end) {
        TreeNode& n = tree_.nodes[node];
        n.feature = -1;
        n.left = n.right = -1;
        n.leaf_value = leaf_weight(n.sum_grad, n.cover, hp_.l2_lambda, hp_.learning_rate);
        for (std::size_t i = begin; i < end; ++i) {
            row_leaf_[rows_[i]] = static_cast<int>(node);
        }
    }

    void sums(std::size_t begin, std::size_t end, double& g, double& h) const {
        g = 0.0;
        h = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            g += gh_[rows_[i]].grad;
            h += gh_[rows_[i]].hess;
        }
    }

    // segments_[depth] holds this node's range in every feature list.
    void grow(std::size_t node, std::size_t begin, std::size_t end, int depth) {
        double g = 0.0;
        double h = 0.0;
        sums(begin, end, g, h);
        tree_.nodes[node].sum_grad = g;
        tree_.nodes[node].cover = h;
        if (depth >= hp_.max_depth || end - begin < 2 || h < 2.0 * hp_.min_child_weight) {
            make_leaf(node, begin, end);
            return;
        }
        const auto level = static_cast<std::size_t>(depth);
        const SplitCandidate best = find_split(segments_[level], end - begin, g, h);
        if (!best.found) {
            make_leaf(node, begin, end);
            return;
        }

        // Rows in the split feature's default bin are not in its list.
        const std::uint8_t default_left = default_bin_[best.feature] <= best.left_bin ? 1 : 0;
        for (std::size_t i = begin; i < end; ++i) {
            goes_left_[rows_[i]] = default_left;
        }
        const std::size_t split_slot = static_cast<std::size_t>(
            std::find(features_.begin(), features_.end(), best.feature) - features_.begin());
        const Segment split_seg = segments_[level][split_slot];
        for (std::size_t i = split_seg.begin; i < split_seg.end; ++i) {
            const Entry e = lists_[split_slot][i];
            goes_left_[e.row] = e.bin <= best.left_bin ? 1 : 0;
        }
        const std::size_t mid = begin + partition(rows_, scratch_, begin, end, [](std::uint32_t r) { return r; });

        double gl = 0.0;
        double hl = 0.0;
        double gr = 0.0;
        double hr = 0.0;
        sums(begin, mid, gl, hl);
        sums(mid, end, gr, hr);
        const double gain = split_gain(gl, hl, gr, hr, hp_.l2_lambda, hp_.gamma);
        if (!(gain > 0.0) || hl < hp_.min_child_weight || hr < hp_.min_child_weight) {
            make_leaf(node, begin, end);
            return;
        }

        const auto left = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        const auto right = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        TreeNode& n = tree_.nodes[node];
        n.feature = static_cast<int>(best.feature);
        n.threshold = best.threshold;
        n.left = left;
        n.right = right;
        n.gain = gain;

        // Children at max depth never search, so their lists can stay as is.
        const bool searchable = depth + 1 < hp_.max_depth;
        auto& mids = mids_[level];
        if (searchable) {
            mids.resize(features_.size());
            for (std::size_t j = 0; j < features_.size(); ++j) {
                const Segment seg = segments_[level][j];
                mids[j] = seg.begin + partition(lists_[j], entry_scratch_, seg.begin, seg.end,
                                                [](const Entry& e) { return e.row; });
            }
            auto& child = segments_[level + 1];
            child.resize(features_.size());
            for (std::size_t j = 0; j < features_.size(); ++j) {
                child[j] = {segments_[level][j].begin, mids[j]};
            }
        }
        grow(static_cast<std::size_t>(left), begin, mid, depth + 1);
        if (searchable) {
            auto& child = segments_[level + 1];
            for (std::size_t j = 0; j < features_.size(); ++j) {
                child[j] = {mids[j], segments_[level][j].end};
            }
        }
        grow(static_cast<std::size_t>(right), mid, end, depth + 1);
    }

    // Best split state for one node. Candidates are compared on the partial
    // score GL²/(HL+λ) + GR²/(HR+λ) and the full gain is only evaluated when
    // that score improves. Strict improvement keeps the lowest feature index
    // and lowest threshold among equal gains.
    struct Search {
        double g = 0.0;
        double h = 0.0;
        double best_score = -std::numeric_limits<double>::infinity();
        SplitCandidate best;
    };

    // Offers the boundary after bin `lo` (left sums gl/hl) and before the
    // next non-empty bin `hi`.
    void offer(Search& s, std::size_t feature, double gl, double hl, std::uint32_t lo, std::uint32_t hi) const {
        const double hr = s.h - hl;
        if (hl < hp_.min_child_weight || hr < hp_.min_child_weight) {
            return;
        }
        const double gr = s.g - gl;
        const double lambda = hp_.l2_lambda;
        const double score = gl * gl / (hl + lambda) + gr * gr / (hr + lambda);
        if (!(score > s.best_score)) {
            return;
        }
        const double gain = split_gain(gl, hl, gr, hr, lambda, hp_.gamma);
        if (gain > s.best.gain) {
            const auto& values = binned_.distinct(feature);
            const double v_lo = values[lo];
            const double v_hi = values[hi];
            double threshold = v_lo + (v_hi - v_lo) * 0.5;
            if (!(threshold > v_lo)) {
                threshold = v_hi;
            }
            s.best = {true, feature, lo, threshold, gain};
            s.best_score = score;
        }
    }

    SplitCandidate find_split(const std::vector<Segment>& segments, std::size_t m, double g, double h) {
        Search s;
        s.g = g;
        s.h = h;
        s.best.gain = 0.0;
        for (std::size_t j = 0; j < features_.size(); ++j) {
            const std::size_t f = features_[j];
            const Entry* list = lists_[j].data();
            const Segment seg = segments[j];

            double list_g = 0.0;
            double list_h = 0.0;
            for (std::size_t i = seg.begin; i < seg.end; ++i) {
                list_g += gh_[list[i].row].grad;
                list_h += gh_[list[i].row].hess;
            }
            const bool has_default = seg.end - seg.begin < m;
            const std::uint32_t d = default_bin_[f];

            double gl = 0.0;
            double hl = 0.0;
            bool any = false;
            std::uint32_t prev = 0;
            auto visit = [&](std::uint32_t bin, double bin_g, double bin_h) {
                if (any && bin != prev) {
                    offer(s, f, gl, hl, prev, bin);
                }
                gl += bin_g;
                hl += bin_h;
                prev = bin;
                any = true;
            };
            std::size_t i = seg.begin;
            for (; i < seg.end && list[i].bin < d; ++i) {
                visit(list[i].bin, gh_[list[i].row].grad, gh_[list[i].row].hess);
            }
            if (has_default) {
                visit(d, g - list_g, h - list_h);
            }
            for (; i < seg.end; ++i) {
                visit(list[i].bin, gh_[list[i].row].grad, gh_[list[i].row].hess);
            }
        }
        return s.best;
    }

    const BinnedMatrix& binned_;
    const Hyperparams& hp_;
    std::vector<std::uint32_t> default_bin_;
    std::vector<std::vector<Entry>> order_;  // non-default entries of all rows by (bin, row)

    std::vector<GH> gh_;
    std::vector<std::uint8_t> in_sample_;
    std::vector<std::uint8_t> goes_left_;
    std::vector<int> row_leaf_;
    std::vector<std::size_t> features_;  // sampled and splittable, ascending
    std::vector<std::vector<Entry>> lists_;
    std::vector<std::vector<Segment>> segments_;  // per depth
    std::vector<std::vector<std::size_t>> mids_;  // per depth
    std::vector<std::uint32_t> rows_;
    std::vector<std::uint32_t> scratch_;
    std::vector<Entry> entry_scratch_;
    Tree tree_;
};

// k distinct indices from [0, n), ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (k < n) {
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(idx[i], idx[pick(rng)]);
        }
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
    }
    return idx;
}

std::size_t sample_size(std::size_t n, double fraction) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n);
}

}  // namespace

Ensemble train(const DenseMatrix& x, std::span<const int> y, const Hyperparams& hp, TrainingTrace* trace) {
    if (x.rows == 0) {
        throw DataError("cannot train on an empty matrix");
    }
    return train(BinnedMatrix(x), x, y, hp, trace);
}

Ensemble train(const BinnedMatrix& binned, const DenseMatrix& x, std::span<const int> y, const Hyperparams& hp,
               TrainingTrace* trace) {
    hp.validate();
    const std::size_t n = x.rows;
    if (n == 0) {
        throw DataError("cannot train on an empty matrix");
    }
    if (y.size() != n || binned.rows() != n || binned.cols() != x.cols) {
        throw DataError("training targets or binned matrix not aligned with rows");
    }
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("too many training rows");
    }
    for (int v : y) {
        if (v != 0 && v != 1) {
            throw DataError("training targets must be 0 or 1");
        }
    }

    Ensemble model;
    model.hyperparams = hp;
    model.n_features = x.cols;
    model.base_margin = logit(hp.base_score);
    model.trees.reserve(static_cast<std::size_t>(hp.n_estimators));

    std::vector<double> margin(n, model.base_margin);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    std::mt19937_64 rng(hp.seed);
    TreeBuilder builder(binned, hp);
    if (trace != nullptr) {
        *trace = TrainingTrace{};
        trace->loss.push_back(log_loss(margin, y));
    }

    for (int round = 0; round < hp.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const GradHess gh = logistic_grad_hess(sigmoid(margin[i]), y[i]);
            grad[i] = gh.grad;
            hess[i] = gh.hess;
        }
        const std::vector<std::size_t> rows = sample_without_replacement(n, sample_size(n, hp.subsample), rng);
        const std::vector<std::size_t> features =
            sample_without_replacement(x.cols, sample_size(x.cols, hp.colsample_bytree), rng);
        if (trace != nullptr) {
            trace->grad.push_back(grad);
            trace->hess.push_back(hess);
            trace->rows.push_back(rows);
            trace->features.push_back(features);
        }

        Tree tree = builder.build(rows, features, grad, hess);
        const std::vector<int>& leaf = builder.row_leaf();
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += leaf[i] >= 0 ? tree.nodes[static_cast<std::size_t>(leaf[i])].leaf_value : tree.predict(x.row(i));
        }
        model.trees.push_back(std::move(tree));
        if (trace != nullptr) {
            trace->loss.push_back(log_loss(margin, y));
        }
    }
    return model;
}

std::vector<double> predict_margin(const Ensemble& ensemble, const DenseMatrix& x) {
    if (x.cols != ensemble.n_features) {
        throw DataError("model expects " + std::to_string(ensemble.n_features) + " features, matrix has " +
                        std::to_string(x.cols));
    }
    std::vector<double> out(x.rows, ensemble.base_margin);
    for (const Tree& tree : ensemble.trees) {
        for (std::size_t i = 0; i < x.rows; ++i) {
            out[i] += tree.predict(x.row(i));
        }
    }
    return out;
}

std::vector<double> predict_proba(const Ensemble& ensemble, const DenseMatrix& x) {
    std::vector<double> out = predict_margin(ensemble, x);
    for (double& v : out) {
        v = sigmoid(v);
    }
    return out;
}

ordered_json to_json(const Ensemble& ensemble) {
    ordered_json j;
    j["base_margin"] = ensemble.base_margin;
    j["n_features"] = ensemble.n_features;
    j["feature_names"] = ensemble.feature_names;
    j["hyperparams"] = to_json(ensemble.hyperparams);
    ordered_json trees = ordered_json::array();
    for (const Tree& tree : ensemble.trees) {
        ordered_json nodes = ordered_json::array();
        for (const TreeNode& n : tree.nodes) {
            ordered_json node;
            if (n.is_leaf()) {
                node["leaf"] = n.leaf_value;
            } else {
                node["feature"] = n.feature;
                node["threshold"] = n.threshold;
                node["left"] = n.left;
                node["right"] = n.right;
                node["gain"] = n.gain;
            }
            node["cover"] = n.cover;
            node["sum_grad"] = n.sum_grad;
            nodes.push_back(std::move(node));
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(trees);
    return j;
}

Ensemble ensemble_from_json(const nlohmann::json& j) {
    Ensemble e;
    try {
        e.base_margin = j.at("base_margin").get<double>();
        e.n_features = j.at("n_features").get<std::size_t>();
        e.feature_names = j.value("feature_names", std::vector<std::string>{});
        e.hyperparams = hyperparams_from_json(j.at("hyperparams"));
        for (const auto& jt : j.at("trees")) {
            Tree tree;
            for (const auto& jn : jt.at("nodes")) {
                TreeNode n;
                if (jn.contains("leaf")) {
                    n.leaf_value = jn.at("leaf").get<double>();
                } else {
                    n.feature = jn.at("feature").get<int>();
                    n.threshold = jn.at("threshold").get<double>();
                    n.left = jn.at("left").get<int>();
                    n.right = jn.at("right").get<int>();
                    n.gain = jn.value("gain", 0.0);
                }
                n.cover = jn.value("cover", 0.0);
                n.sum_grad = jn.value("sum_grad", 0.0);
                tree.nodes.push_back(n);
            }
            const auto count = static_cast<int>(tree.nodes.size());
            if (count == 0) {
                throw DataError("model: tree without nodes");
            }
            // Children follow their parent, which also rules out cycles.
            for (int i = 0; i < count; ++i) {
                const TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
                if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left == n.right || n.left >= count || n.right >= count ||
                                     static_cast<std::size_t>(n.feature) >= e.n_features)) {
                    throw DataError("model: malformed tree node");
                }
            }
            e.trees.push_back(std::move(tree));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("model: ") + ex.what());
    }
    return e;
}

}  // namespace aed
