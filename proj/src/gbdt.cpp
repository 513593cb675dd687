#include <algorithm>
#include <cmath>

#include "assl/error.hpp"
#include "assl/prm.hpp"

namespace assl::prm {

namespace {

double mean_log_loss(const Matrix& scores, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        const auto row = scores.row(r);
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double s : row) z += std::exp(s - mx);
        // -log softmax(y) = log sum exp - s_y
        total += mx + std::log(z) - row[static_cast<std::size_t>(labels[r])];
    }
    return total / static_cast<double>(scores.rows());
}

}  // namespace

std::vector<double> GbdtModel::raw_scores(std::span<const double> x) const {
    if (x.size() != num_features) {
        throw ShapeError("gbdt expects " + std::to_string(num_features) + " features, got " + std::to_string(x.size()));
    }
    std::vector<double> scores = base_score;
    for (const auto& round : trees) {
        for (std::size_t k = 0; k < num_classes; ++k) scores[k] += shrinkage * round[k].predict(x);
    }
    return scores;
}

GbdtTrainResult train_gbdt_traced(const data::Dataset& labeled, const PrmConfig& cfg, data::AuditLog* audit) {
    const auto& labels = labeled.require_labels();
    if (labeled.size() == 0) throw DataError("train_gbdt: empty dataset");
    labeled.validate();
    const GbdtConfig& g = cfg.gbdt;
    if (!(g.shrinkage > 0.0 && g.shrinkage <= 1.0)) throw ConfigError("train_gbdt: shrinkage must lie in (0, 1]");
    if (g.min_leaf_count < 1) throw ConfigError("train_gbdt: min_leaf_count must be >= 1");
    const std::size_t m = labeled.schema.num_classes();
    if (m < 2) throw ConfigError("train_gbdt: need at least 2 classes");
    if (audit) audit->record("train_gbdt", labeled.role, true);

    const Matrix& x = labeled.rows;
    const std::size_t n = x.rows();

    GbdtModel model;
    model.num_classes = m;
    model.num_features = x.cols();
    model.shrinkage = g.shrinkage;
    std::vector<double> counts(m, 0.0);
    for (int y : labels) counts[static_cast<std::size_t>(y)] += 1.0;
    for (std::size_t k = 0; k < m; ++k) {
        // absent classes get half a pseudo-count so the prior stays finite
        model.base_score.push_back(std::log(std::max(counts[k], 0.5) / static_cast<double>(n)));
    }

    Matrix scores(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < m; ++k) scores(r, k) = model.base_score[k];
    }

    GbdtTrainResult result;
    result.log_loss.push_back(mean_log_loss(scores, labels));

    const SortedColumns sorted(x);
    std::vector<double> residual(n);
    for (std::size_t t = 0; t < g.rounds; ++t) {
        const Matrix probs = nn::softmax_rows(scores);
        std::vector<RegressionTree> round;
        round.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t r = 0; r < n; ++r) {
                residual[r] = (labels[r] == static_cast<int>(k) ? 1.0 : 0.0) - probs(r, k);
            }
            round.push_back(fit_regression_tree(x, sorted, residual, g.max_depth, g.min_leaf_count));
        }
        for (std::size_t r = 0; r < n; ++r) {
            const auto row = x.row(r);
            for (std::size_t k = 0; k < m; ++k) scores(r, k) += g.shrinkage * round[k].predict(row);
        }
        model.trees.push_back(std::move(round));

        const double loss = mean_log_loss(scores, labels);
        if (!std::isfinite(loss)) throw DivergenceError("gbdt_log_loss", "gbdt training log-loss is not finite");
        const double prev = result.log_loss.back();
        if (loss > prev + 1e-12 * std::abs(prev)) {
            throw DivergenceError("gbdt_log_loss", "gbdt training log-loss increased at round " + std::to_string(t + 1));
        }
        result.log_loss.push_back(loss);
    }
    result.model = PlainModel(std::move(model));
    return result;
}

PlainModel train_gbdt(const data::Dataset& labeled, const PrmConfig& cfg, data::AuditLog* audit) {
    return train_gbdt_traced(labeled, cfg, audit).model;
}

}  // namespace assl::prm
