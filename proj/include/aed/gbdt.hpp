#pragma once

#include "aed/dense.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aed {

struct Hyperparams {
    int n_estimators = 100;
    int max_depth = 6;
    double min_child_weight = 1.0;  // minimum hessian sum per child
    double gamma = 0.0;             // split penalty
    double subsample = 1.0;
    double colsample_bytree = 1.0;
    double learning_rate = 0.3;
    double l2_lambda = 1.0;
    double base_score = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const Hyperparams&) const = default;
};

nlohmann::ordered_json to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const nlohmann::json& j);

// Split when `feature >= 0`, leaf otherwise. Rows with x[feature] < threshold
// go left. `cover` and `sum_grad` are the training hessian and gradient sums
// that reached the node; `gain` is the split gain recomputed from the children.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;
    double cover = 0.0;
    double sum_grad = 0.0;
    double gain = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int leaf_index(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return nodes[static_cast<std::size_t>(leaf_index(x))].leaf_value; }
    int depth() const;
    bool operator==(const Tree&) const = default;
};

// margin(x) = base_margin + Σ_tree leaf value; the learning rate is already
// folded into leaf values.
struct Ensemble {
    std::vector<Tree> trees;
    double base_margin = 0.0;
    Hyperparams hyperparams;
    std::size_t n_features = 0;
    std::vector<std::string> feature_names;

    bool operator==(const Ensemble&) const = default;
};

struct GradHess {
    double grad = 0.0;
    double hess = 0.0;
};

// Logistic loss derivatives with respect to the margin: g = p − y, h = p(1 − p).
GradHess logistic_grad_hess(double p, int y);

double split_gain(double grad_left, double hess_left, double grad_right, double hess_right, double lambda,
                  double gamma);

double leaf_weight(double grad, double hess, double lambda, double learning_rate);

double log_loss(std::span<const double> margins, std::span<const int> y);

// Per-column sorted distinct values plus each row's position among them.
// Splitting between consecutive distinct values of a node is exact greedy.
class BinnedMatrix {
public:
    explicit BinnedMatrix(const DenseMatrix& x);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::uint32_t bin(std::size_t row, std::size_t col) const { return bins_[col * rows_ + row]; }
    const std::uint32_t* column(std::size_t col) const { return bins_.data() + col * rows_; }
    const std::vector<double>& distinct(std::size_t col) const { return distinct_[col]; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::uint32_t> bins_;  // column-major
    std::vector<std::vector<double>> distinct_;
};

// Optional record of what each boosting round saw, for verification.
struct TrainingTrace {
    std::vector<std::vector<double>> grad;             // per round, all rows
    std::vector<std::vector<double>> hess;             // per round, all rows
    std::vector<std::vector<std::size_t>> rows;        // sampled rows per round
    std::vector<std::vector<std::size_t>> features;    // sampled features per round
    std::vector<double> loss;                          // training log-loss after base score and each round
};

Ensemble train(const DenseMatrix& x, std::span<const int> y, const Hyperparams& hp,
               TrainingTrace* trace = nullptr);
Ensemble train(const BinnedMatrix& binned, const DenseMatrix& x, std::span<const int> y, const Hyperparams& hp,
               TrainingTrace* trace = nullptr);

std::vector<double> predict_margin(const Ensemble& ensemble, const DenseMatrix& x);
std::vector<double> predict_proba(const Ensemble& ensemble, const DenseMatrix& x);

nlohmann::ordered_json to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& j);

}  // namespace aed
