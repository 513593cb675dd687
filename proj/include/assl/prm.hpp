#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "assl/data.hpp"
#include "assl/matrix.hpp"
#include "assl/nn.hpp"

// Phase I: the plain rating model trained on labeled rows only, and the
// pseudo-labels it assigns to the unlabeled pool.
namespace assl::prm {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::size_t num_features = 0;
    std::size_t max_depth = 0;
    std::size_t min_leaf_count = 1;

    // Rows with x[feature] <= threshold go left.
    double predict(std::span<const double> x) const;
    std::size_t depth() const;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct SplitCandidate {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;  // SSE(parent) - SSE(left) - SSE(right)
    std::size_t left_count = 0;
};

// Per-feature row orderings, computed once and shared across every node and
// every boosting round fitted on the same matrix.
class SortedColumns {
public:
    explicit SortedColumns(const Matrix& x);
    std::span<const std::uint32_t> order(std::size_t feature) const { return orders_[feature]; }
    std::size_t num_features() const noexcept { return orders_.size(); }

private:
    std::vector<std::vector<std::uint32_t>> orders_;
};

// Best exact split over the rows whose node_of[row] == node. Equal gains keep
// the lowest feature index, then the lowest threshold.
namespace serial {
SplitCandidate best_split(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                          std::span<const int> node_of, int node, std::size_t min_leaf_count);
}
namespace omp {
SplitCandidate best_split(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                          std::span<const int> node_of, int node, std::size_t min_leaf_count);
}

RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, std::size_t max_depth,
                                   std::size_t min_leaf_count);
RegressionTree fit_regression_tree(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                                   std::size_t max_depth, std::size_t min_leaf_count);

struct GbdtConfig {
    std::size_t rounds = 100;
    std::size_t max_depth = 3;
    double shrinkage = 0.1;
    std::size_t min_leaf_count = 5;
};

struct GbdtModel {
    std::size_t num_classes = 0;
    std::size_t num_features = 0;
    double shrinkage = 0.1;
    std::vector<double> base_score;                  // per class, log prior
    std::vector<std::vector<RegressionTree>> trees;  // [round][class]

    std::vector<double> raw_scores(std::span<const double> x) const;
};

struct LogRegConfig {
    std::size_t epochs = 1000;
    double learning_rate = 0.1;
    double l2 = 1e-5;
};

// Multinomial softmax regression; a single identity dense layer (m x F).
struct LogRegModel {
    nn::DenseLayer layer;
};

enum class PrmVariant { logistic_regression, gbdt };
std::string_view to_string(PrmVariant v);
PrmVariant prm_variant_from_string(std::string_view name);

struct PrmConfig {
    PrmVariant variant = PrmVariant::gbdt;
    GbdtConfig gbdt;
    LogRegConfig logreg;
    // Pseudo-labels below this confidence are dropped; 0 keeps all rows.
    double min_confidence = 0.0;
    std::uint64_t seed = 0;
};

class PlainModel {
public:
    PlainModel() = default;
    explicit PlainModel(GbdtModel model) : payload_(std::move(model)) {}
    explicit PlainModel(LogRegModel model) : payload_(std::move(model)) {}

    PrmVariant variant() const noexcept;
    std::size_t num_classes() const;
    std::size_t num_features() const;

    std::vector<double> predict_proba(std::span<const double> x) const;
    Matrix predict_proba(const Matrix& x) const;

    const GbdtModel* gbdt() const noexcept { return std::get_if<GbdtModel>(&payload_); }
    const LogRegModel* logreg() const noexcept { return std::get_if<LogRegModel>(&payload_); }

private:
    std::variant<LogRegModel, GbdtModel> payload_;
};

struct GbdtTrainResult {
    PlainModel model;
    std::vector<double> log_loss;  // mean training log-loss after round t; entry 0 is the prior-only model
};

GbdtTrainResult train_gbdt_traced(const data::Dataset& labeled, const PrmConfig& cfg,
                                  data::AuditLog* audit = nullptr);
PlainModel train_gbdt(const data::Dataset& labeled, const PrmConfig& cfg, data::AuditLog* audit = nullptr);

// Mean cross-entropy + l2 * ||params||^2 and its gradient.
struct LogRegLoss {
    double value = 0.0;
    nn::MlpParams grads;
};
LogRegLoss logreg_loss(const nn::DenseLayer& layer, const Matrix& x, std::span<const int> labels, double l2);

PlainModel train_logreg(const data::Dataset& labeled, const PrmConfig& cfg, data::AuditLog* audit = nullptr);

PlainModel train_prm(const data::Dataset& labeled, const PrmConfig& cfg, data::AuditLog* audit = nullptr);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

struct PseudoLabeledDataset {
    Matrix rows;
    std::vector<int> labels;
    std::vector<double> confidences;

    std::size_t size() const noexcept { return labels.size(); }
};

PseudoLabeledDataset pseudo_label(const PlainModel& model, const data::Dataset& unlabeled, double min_confidence = 0.0);

}  // namespace assl::prm
