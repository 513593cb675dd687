#include <algorithm>

#include "assl/error.hpp"
#include "assl/prm.hpp"

namespace assl::prm {

std::string_view to_string(PrmVariant v) {
    return v == PrmVariant::gbdt ? "gbdt" : "logistic_regression";
}

PrmVariant prm_variant_from_string(std::string_view name) {
    if (name == "gbdt") return PrmVariant::gbdt;
    if (name == "logistic_regression" || name == "logreg") return PrmVariant::logistic_regression;
    throw ConfigError("unknown PRM variant '" + std::string(name) + "'");
}

PrmVariant PlainModel::variant() const noexcept {
    return std::holds_alternative<GbdtModel>(payload_) ? PrmVariant::gbdt : PrmVariant::logistic_regression;
}

std::size_t PlainModel::num_classes() const {
    if (const auto* g = gbdt()) return g->num_classes;
    return logreg()->layer.out_dim();
}

std::size_t PlainModel::num_features() const {
    if (const auto* g = gbdt()) return g->num_features;
    return logreg()->layer.in_dim();
}

std::vector<double> PlainModel::predict_proba(std::span<const double> x) const {
    if (x.size() != num_features()) {
        throw ShapeError("predict_proba: model expects " + std::to_string(num_features()) + " features, got " +
                         std::to_string(x.size()));
    }
    if (const auto* g = gbdt()) return nn::softmax(g->raw_scores(x));
    const auto& layer = logreg()->layer;
    std::vector<double> logits(layer.out_dim());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        double acc = 0.0;
        const auto w = layer.weights.row(k);
        for (std::size_t c = 0; c < x.size(); ++c) acc += x[c] * w[c];
        logits[k] = acc + layer.bias[k];
    }
    return nn::softmax(logits);
}

Matrix PlainModel::predict_proba(const Matrix& x) const {
    if (x.rows() > 0 && x.cols() != num_features()) {
        throw ShapeError("predict_proba: model expects " + std::to_string(num_features()) + " features, got " +
                         std::to_string(x.cols()));
    }
    Matrix out(x.rows(), num_classes());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(x.rows()); ++r) {
        const auto p = predict_proba(x.row(static_cast<std::size_t>(r)));
        std::copy(p.begin(), p.end(), out.row(static_cast<std::size_t>(r)).begin());
    }
    return out;
}

PlainModel train_prm(const data::Dataset& labeled, const PrmConfig& cfg, data::AuditLog* audit) {
    return cfg.variant == PrmVariant::gbdt ? train_gbdt(labeled, cfg, audit) : train_logreg(labeled, cfg, audit);
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

PseudoLabeledDataset pseudo_label(const PlainModel& model, const data::Dataset& unlabeled, double min_confidence) {
    PseudoLabeledDataset out;
    out.rows = Matrix(0, model.num_features());
    if (unlabeled.size() == 0) return out;
    const Matrix probs = model.predict_proba(unlabeled.rows);
    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const auto p = probs.row(r);
        const std::size_t k = argmax(p);
        if (p[k] < min_confidence) continue;
        kept.push_back(r);
        out.labels.push_back(static_cast<int>(k));
        out.confidences.push_back(p[k]);
    }
    out.rows = unlabeled.rows.select_rows(kept);
    return out;
}

}  // namespace assl::prm
