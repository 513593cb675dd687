#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "assl/data.hpp"
#include "assl/matrix.hpp"
#include "assl/nn.hpp"
#include "assl/prm.hpp"

// Phase II: shared encoder, supervised and semi-supervised heads, and a
// labeled-vs-pseudo-labeled discriminator trained by alternating updates.
namespace assl::trainer {

enum class InferenceHead { supervised, semi, averaged };
std::string_view to_string(InferenceHead h);
InferenceHead inference_head_from_string(std::string_view name);

enum class ClassLoss { per_class_bce, categorical };
std::string_view to_string(ClassLoss l);
ClassLoss class_loss_from_string(std::string_view name);

struct AsslConfig {
    std::size_t embedding_dim = 32;
    std::size_t encoder_hidden = 64;
    std::size_t head_hidden = 64;
    std::size_t disc_hidden = 64;

    double lambda_l = 1e-4;
    double lambda_u = 1e-4;
    double lambda_adv = 1e-4;
    double encoder_decay = 0.0;
    double alpha = 0.1;  // weight of the adversarial term in the generator loss

    std::size_t epochs = 20;
    std::size_t batch_size = 128;  // labeled + pseudo rows per step, split evenly
    double learning_rate = 1e-3;
    double disc_learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t disc_steps = 1;  // discriminator updates per batch pair
    std::size_t gen_steps = 1;   // generator updates per batch pair

    std::uint64_t seed = 0;
    InferenceHead inference_head = InferenceHead::supervised;
    ClassLoss class_loss = ClassLoss::per_class_bce;

    // Supervised-only mode: pseudo rows never enter a batch, no discriminator.
    bool suppress_pseudo = false;
    // Skip discriminator updates entirely (the network still exists).
    bool use_discriminator = true;

    void validate() const;
    std::size_t half_batch() const noexcept { return batch_size / 2; }
};

struct AsslModel {
    nn::MlpParams encoder;          // F -> d
    nn::MlpParams supervised_head;  // d -> m logits
    nn::MlpParams semi_head;        // d -> m logits
    nn::MlpParams discriminator;    // d -> 1, sigmoid

    std::size_t input_dim() const { return encoder.in_dim(); }
    std::size_t embedding_dim() const { return encoder.out_dim(); }
    std::size_t num_classes() const { return supervised_head.out_dim(); }
    // Throws ShapeError when the four networks do not share d.
    void validate() const;

    friend bool operator==(const AsslModel&, const AsslModel&) = default;
};

// Seeded initialization, one RNG stream per network.
AsslModel init_model(std::size_t input_dim, std::size_t num_classes, const AsslConfig& cfg);

Matrix encode(const nn::MlpParams& encoder, const Matrix& batch);
Matrix classify(const nn::MlpParams& head, const Matrix& embeddings);

inline constexpr double kProbClamp = 1e-12;

// Mean over rows of -sum_i [y_i log p_i + (1 - y_i) log(1 - p_i)], plus lambda * ||params||^2.
double loss_bce_l2(const Matrix& probs, std::span<const int> labels, double lambda, const nn::MlpParams& params);
// Mean categorical cross-entropy plus lambda * ||params||^2.
double loss_categorical_l2(const Matrix& probs, std::span<const int> labels, double lambda,
                           const nn::MlpParams& params);

// mean log D(e_l) + mean log(1 - D(e_u)) + lambda_adv * ||params||^2
double loss_adversarial(std::span<const double> d_labeled, std::span<const double> d_unlabeled, double lambda_adv,
                        const nn::MlpParams& disc_params);

struct ClassLossGrad {
    double value = 0.0;  // data term only, no penalty
    Matrix dlogits;
};
// Data term of the classification loss and its gradient w.r.t. the head logits.
ClassLossGrad class_loss_grad(const Matrix& probs, std::span<const int> labels, ClassLoss kind);

struct Batch {
    Matrix rows;
    std::vector<int> labels;
};

struct GeneratorEval {
    double l_l = 0.0;    // supervised loss incl. lambda_l penalty
    double l_u = 0.0;    // semi-supervised loss incl. lambda_u penalty
    double l_adv = 0.0;  // adversarial value incl. lambda_adv penalty
    double encoder_penalty = 0.0;
    double total = 0.0;  // l_l + l_u + alpha * l_adv + encoder_penalty
    nn::MlpParams encoder_grad;
    nn::MlpParams supervised_grad;
    nn::MlpParams semi_grad;
};

// Generator objective with the discriminator frozen. With cfg.suppress_pseudo
// the pseudo batch is ignored and only the supervised path contributes.
GeneratorEval generator_loss(const AsslModel& model, const Batch& labeled, const Batch& pseudo,
                             const AsslConfig& cfg);

struct DiscriminatorEval {
    double l_adv = 0.0;     // adversarial value incl. lambda_adv penalty
    double objective = 0.0; // -(log terms) + lambda_adv * ||disc||^2, what the discriminator descends
    double accuracy = 0.0;  // fraction of rows on the correct side of 0.5, before the update
    nn::MlpParams disc_grad;
};

// Discriminator objective with the encoder frozen.
DiscriminatorEval discriminator_loss(const AsslModel& model, const Matrix& labeled_rows, const Matrix& pseudo_rows,
                                     const AsslConfig& cfg);

struct OptimizerState {
    nn::AdamState encoder;
    nn::AdamState supervised;
    nn::AdamState semi;
    nn::AdamState discriminator;

    static OptimizerState for_model(const AsslModel& model, const AsslConfig& cfg);
};

// One Adam step on the discriminator. Returns its pre-update batch accuracy.
double discriminator_step(AsslModel& model, OptimizerState& opt, const Matrix& labeled_rows,
                          const Matrix& pseudo_rows, const AsslConfig& cfg);
// One Adam step on encoder and both heads. Returns the pre-update losses.
GeneratorEval generator_step(AsslModel& model, OptimizerState& opt, const Batch& labeled, const Batch& pseudo,
                             const AsslConfig& cfg);

struct EpochRecord {
    std::size_t epoch = 0;
    double l_l = 0.0;
    double l_u = 0.0;
    double l_adv = 0.0;
    double disc_accuracy = 0.0;
    double val_macro_f1 = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    AsslModel model;  // snapshot with the best validation macro-F1
    TrainHistory history;
    std::size_t best_epoch = 0;
};

// Called after every generator step with the running step count (1-based).
using StepObserver = std::function<void(std::size_t step, const AsslModel& model)>;

TrainResult train(const data::Dataset& labeled, const prm::PseudoLabeledDataset& pseudo,
                  const data::Dataset& validation, const AsslConfig& cfg, const StepObserver& observer = {},
                  data::AuditLog* audit = nullptr);

struct Prediction {
    std::size_t label = 0;
    std::vector<double> probabilities;
};

Prediction predict_rating(const AsslModel& model, std::span<const double> x, InferenceHead head);
Matrix predict_proba(const AsslModel& model, const Matrix& x, InferenceHead head);
std::vector<int> predict_labels(const AsslModel& model, const Matrix& x, InferenceHead head);

}  // namespace assl::trainer
