#include <algorithm>
#include <cmath>

#include "assl/error.hpp"
#include "assl/prm.hpp"

namespace assl::prm {

LogRegLoss logreg_loss(const nn::DenseLayer& layer, const Matrix& x, std::span<const int> labels, double l2) {
    if (labels.size() != x.rows()) throw ShapeError("logreg_loss: label count differs from row count");
    const nn::MlpParams net{{layer}};
    const auto fwd = nn::mlp_forward(net, x);
    const Matrix probs = nn::softmax_rows(fwd.output);
    const std::size_t n = x.rows();
    const double inv_n = 1.0 / static_cast<double>(n);

    double ce = 0.0;
    Matrix dlogits = probs;
    for (std::size_t r = 0; r < n; ++r) {
        const auto y = static_cast<std::size_t>(labels[r]);
        if (y >= probs.cols()) throw DataError("logreg_loss: label out of range");
        ce -= std::log(std::max(probs(r, y), 1e-12));
        dlogits(r, y) -= 1.0;
    }
    for (double& v : dlogits.values()) v *= inv_n;

    auto back = nn::mlp_backward(net, fwd.cache, dlogits);
    auto penalty = nn::l2_penalty(net, l2);
    nn::add_into(back.grads, penalty.grads);
    return {ce * inv_n + penalty.value, std::move(back.grads)};
}

PlainModel train_logreg(const data::Dataset& labeled, const PrmConfig& cfg, data::AuditLog* audit) {
    const auto& labels = labeled.require_labels();
    if (labeled.size() == 0) throw DataError("train_logreg: empty dataset");
    labeled.validate();
    if (audit) audit->record("train_logreg", labeled.role, true);

    const std::size_t m = labeled.schema.num_classes();
    const std::size_t f = labeled.rows.cols();
    // Convex objective: zero start is deterministic and needs no RNG.
    nn::MlpParams net{{nn::DenseLayer{Matrix(m, f), std::vector<double>(m, 0.0), nn::Activation::identity}}};
    auto adam = nn::AdamState::for_params(net, nn::AdamConfig{cfg.logreg.learning_rate});
    for (std::size_t epoch = 0; epoch < cfg.logreg.epochs; ++epoch) {
        const auto loss = logreg_loss(net.layers[0], labeled.rows, labels, cfg.logreg.l2);
        if (!std::isfinite(loss.value)) throw DivergenceError("logreg_loss", "logistic regression loss is not finite");
        nn::adam_step(net, loss.grads, adam);
    }
    return PlainModel(LogRegModel{std::move(net.layers[0])});
}

}  // namespace assl::prm
