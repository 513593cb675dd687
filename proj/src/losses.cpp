#include <algorithm>
#include <cmath>

#include "assl/error.hpp"
#include "assl/trainer.hpp"

namespace assl::trainer {

namespace {

// The floor only bites where the log would diverge, so an exact one-hot
// prediction still scores exactly zero.
double safe_log(double p) { return std::log(std::max(p, kProbClamp)); }

void check_labels(const Matrix& probs, std::span<const int> labels) {
    if (labels.size() != probs.rows()) {
        throw ShapeError("loss: " + std::to_string(labels.size()) + " labels for " + std::to_string(probs.rows()) +
                         " rows");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
            throw DataError("loss: label " + std::to_string(y) + " out of range for " + std::to_string(probs.cols()) +
                            " classes");
        }
    }
}

double bce_data_term(const Matrix& probs, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const auto p = probs.row(r);
        double row = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            row += static_cast<int>(i) == labels[r] ? safe_log(p[i]) : safe_log(1.0 - p[i]);
        }
        total -= row;
    }
    return total / static_cast<double>(probs.rows());
}

double categorical_data_term(const Matrix& probs, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t r = 0; r < probs.rows(); ++r) total -= safe_log(probs(r, static_cast<std::size_t>(labels[r])));
    return total / static_cast<double>(probs.rows());
}

}  // namespace

std::string_view to_string(ClassLoss l) {
    return l == ClassLoss::per_class_bce ? "per_class_bce" : "categorical";
}

ClassLoss class_loss_from_string(std::string_view name) {
    if (name == "per_class_bce" || name == "bce") return ClassLoss::per_class_bce;
    if (name == "categorical") return ClassLoss::categorical;
    throw ConfigError("unknown class_loss '" + std::string(name) + "'");
}

double loss_bce_l2(const Matrix& probs, std::span<const int> labels, double lambda, const nn::MlpParams& params) {
    check_labels(probs, labels);
    if (probs.rows() == 0) throw DataError("loss_bce_l2: empty batch");
    return bce_data_term(probs, labels) + nn::l2_penalty(params, lambda).value;
}

double loss_categorical_l2(const Matrix& probs, std::span<const int> labels, double lambda,
                           const nn::MlpParams& params) {
    check_labels(probs, labels);
    if (probs.rows() == 0) throw DataError("loss_categorical_l2: empty batch");
    return categorical_data_term(probs, labels) + nn::l2_penalty(params, lambda).value;
}

double loss_adversarial(std::span<const double> d_labeled, std::span<const double> d_unlabeled, double lambda_adv,
                        const nn::MlpParams& disc_params) {
    if (d_labeled.empty() || d_unlabeled.empty()) throw DataError("loss_adversarial: empty side of the batch");
    double lab = 0.0;
    for (double d : d_labeled) lab += safe_log(d);
    double unl = 0.0;
    for (double d : d_unlabeled) unl += safe_log(1.0 - d);
    return lab / static_cast<double>(d_labeled.size()) + unl / static_cast<double>(d_unlabeled.size()) +
           nn::l2_penalty(disc_params, lambda_adv).value;
}

ClassLossGrad class_loss_grad(const Matrix& probs, std::span<const int> labels, ClassLoss kind) {
    check_labels(probs, labels);
    if (probs.rows() == 0) throw DataError("class loss: empty batch");
    const double inv_n = 1.0 / static_cast<double>(probs.rows());
    ClassLossGrad out;
    if (kind == ClassLoss::categorical) {
        out.value = categorical_data_term(probs, labels);
        out.dlogits = Matrix(probs.rows(), probs.cols());
        for (std::size_t r = 0; r < probs.rows(); ++r) {
            const auto y = static_cast<std::size_t>(labels[r]);
            if (!(probs(r, y) > kProbClamp)) continue;  // floored log is flat
            for (std::size_t i = 0; i < probs.cols(); ++i) {
                out.dlogits(r, i) = (probs(r, i) - (i == y ? 1.0 : 0.0)) * inv_n;
            }
        }
        return out;
    }
    out.value = bce_data_term(probs, labels);
    Matrix grad_probs(probs.rows(), probs.cols());
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        for (std::size_t i = 0; i < probs.cols(); ++i) {
            const double p = probs(r, i);
            double g = 0.0;
            if (static_cast<int>(i) == labels[r]) {
                if (p > kProbClamp) g = -1.0 / p;
            } else if (1.0 - p > kProbClamp) {
                g = 1.0 / (1.0 - p);
            }
            grad_probs(r, i) = g * inv_n;
        }
    }
    out.dlogits = nn::softmax_backward(probs, grad_probs);
    return out;
}

}  // namespace assl::trainer
