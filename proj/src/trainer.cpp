#include "assl/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "assl/error.hpp"
#include "assl/metrics.hpp"
#include "assl/rng.hpp"

namespace assl::trainer {

std::string_view to_string(InferenceHead h) {
    switch (h) {
        case InferenceHead::supervised: return "supervised";
        case InferenceHead::semi: return "semi";
        case InferenceHead::averaged: return "averaged";
    }
    return "supervised";
}

InferenceHead inference_head_from_string(std::string_view name) {
    if (name == "supervised") return InferenceHead::supervised;
    if (name == "semi") return InferenceHead::semi;
    if (name == "averaged") return InferenceHead::averaged;
    throw ConfigError("unknown inference_head '" + std::string(name) + "'");
}

void AsslConfig::validate() const {
    if (embedding_dim < 1) throw ConfigError("assl: embedding_dim must be >= 1");
    if (batch_size < 2) throw ConfigError("assl: batch_size must be >= 2");
    if (epochs < 1) throw ConfigError("assl: epochs must be >= 1");
    for (double w : {lambda_l, lambda_u, lambda_adv, encoder_decay, alpha, learning_rate, disc_learning_rate}) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("assl: weights and learning rates must be finite and >= 0");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("assl: Adam betas must lie in (0, 1)");
    if (!(adam_epsilon > 0.0)) throw ConfigError("assl: adam_epsilon must be > 0");
    if (disc_steps < 1 || gen_steps < 1) throw ConfigError("assl: disc_steps and gen_steps must be >= 1");
}

void AsslModel::validate() const {
    for (const auto* net : {&encoder, &supervised_head, &semi_head, &discriminator}) net->validate();
    const std::size_t d = encoder.out_dim();
    if (supervised_head.in_dim() != d || semi_head.in_dim() != d || discriminator.in_dim() != d) {
        throw ShapeError("assl model: heads and discriminator must take the encoder's " + std::to_string(d) +
                         "-dim embedding");
    }
    if (supervised_head.out_dim() != semi_head.out_dim()) throw ShapeError("assl model: heads disagree on class count");
    if (discriminator.out_dim() != 1 || discriminator.layers.back().activation != nn::Activation::sigmoid) {
        throw ShapeError("assl model: discriminator must end in a single sigmoid unit");
    }
}

namespace {

std::vector<nn::LayerSpec> two_layer(std::size_t in, std::size_t hidden, std::size_t out, nn::Activation last) {
    if (hidden == 0) return {{in, out, last}};
    return {{in, hidden, nn::Activation::relu}, {hidden, out, last}};
}

}  // namespace

AsslModel init_model(std::size_t input_dim, std::size_t num_classes, const AsslConfig& cfg) {
    const std::size_t d = cfg.embedding_dim;
    auto make = [&](std::string_view stream, const std::vector<nn::LayerSpec>& specs) {
        Rng rng = make_stream(cfg.seed, stream);
        return nn::make_mlp(specs, rng);
    };
    AsslModel model{
        make("init.encoder", two_layer(input_dim, cfg.encoder_hidden, d, nn::Activation::identity)),
        make("init.supervised_head", two_layer(d, cfg.head_hidden, num_classes, nn::Activation::identity)),
        make("init.semi_head", two_layer(d, cfg.head_hidden, num_classes, nn::Activation::identity)),
        make("init.discriminator", two_layer(d, cfg.disc_hidden, 1, nn::Activation::sigmoid)),
    };
    model.validate();
    return model;
}

Matrix encode(const nn::MlpParams& encoder, const Matrix& batch) {
    return nn::mlp_predict(encoder, batch);
}

Matrix classify(const nn::MlpParams& head, const Matrix& embeddings) {
    return nn::softmax_rows(nn::mlp_predict(head, embeddings));
}

namespace {

std::span<const double> column(const Matrix& m) { return m.values(); }  // n x 1

// dL/dD for the labeled side of the log terms, scaled by `scale`.
Matrix labeled_side_grad(const Matrix& d, double scale) {
    Matrix g(d.rows(), 1);
    const double inv = 1.0 / static_cast<double>(d.rows());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        const double v = d(r, 0);
        g(r, 0) = v > kProbClamp ? scale * inv / v : 0.0;
    }
    return g;
}

Matrix unlabeled_side_grad(const Matrix& d, double scale) {
    Matrix g(d.rows(), 1);
    const double inv = 1.0 / static_cast<double>(d.rows());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        const double q = 1.0 - d(r, 0);
        g(r, 0) = q > kProbClamp ? -scale * inv / q : 0.0;
    }
    return g;
}

void add_matrix(Matrix& into, const Matrix& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into.values()[i] += from.values()[i];
}

void check_batch(const Batch& b, const char* which) {
    if (b.rows.rows() == 0) throw DataError(std::string("empty ") + which + " batch");
    if (b.labels.size() != b.rows.rows()) throw ShapeError(std::string(which) + " batch: label count differs from rows");
}

}  // namespace

GeneratorEval generator_loss(const AsslModel& model, const Batch& labeled, const Batch& pseudo, const AsslConfig& cfg) {
    check_batch(labeled, "labeled");
    GeneratorEval ev;

    const auto enc_l = nn::mlp_forward(model.encoder, labeled.rows);
    const auto sup = nn::mlp_forward(model.supervised_head, enc_l.cache.post.back());
    const auto cl = class_loss_grad(nn::softmax_rows(sup.output), labeled.labels, cfg.class_loss);
    auto back_sup = nn::mlp_backward(model.supervised_head, sup.cache, cl.dlogits);
    const auto pen_l = nn::l2_penalty(model.supervised_head, cfg.lambda_l);
    nn::add_into(back_sup.grads, pen_l.grads);
    ev.supervised_grad = std::move(back_sup.grads);
    ev.l_l = cl.value + pen_l.value;
    Matrix de_l = std::move(back_sup.input_grad);

    if (cfg.suppress_pseudo) {
        ev.semi_grad = nn::zeros_like(model.semi_head);
        ev.encoder_grad = nn::mlp_backward(model.encoder, enc_l.cache, de_l).grads;
    } else {
        check_batch(pseudo, "pseudo-labeled");
        const auto enc_u = nn::mlp_forward(model.encoder, pseudo.rows);
        const auto semi = nn::mlp_forward(model.semi_head, enc_u.cache.post.back());
        const auto cu = class_loss_grad(nn::softmax_rows(semi.output), pseudo.labels, cfg.class_loss);
        auto back_semi = nn::mlp_backward(model.semi_head, semi.cache, cu.dlogits);
        const auto pen_u = nn::l2_penalty(model.semi_head, cfg.lambda_u);
        nn::add_into(back_semi.grads, pen_u.grads);
        ev.semi_grad = std::move(back_semi.grads);
        ev.l_u = cu.value + pen_u.value;
        Matrix de_u = std::move(back_semi.input_grad);

        if (cfg.use_discriminator) {
            const auto dis_l = nn::mlp_forward(model.discriminator, enc_l.cache.post.back());
            const auto dis_u = nn::mlp_forward(model.discriminator, enc_u.cache.post.back());
            ev.l_adv = loss_adversarial(column(dis_l.output), column(dis_u.output), cfg.lambda_adv, model.discriminator);
            if (cfg.alpha != 0.0) {
                // Discriminator frozen: only the input gradients are used.
                const auto bl = nn::mlp_backward(model.discriminator, dis_l.cache, labeled_side_grad(dis_l.output, cfg.alpha));
                const auto bu = nn::mlp_backward(model.discriminator, dis_u.cache, unlabeled_side_grad(dis_u.output, cfg.alpha));
                add_matrix(de_l, bl.input_grad);
                add_matrix(de_u, bu.input_grad);
            }
        }
        ev.encoder_grad = nn::mlp_backward(model.encoder, enc_l.cache, de_l).grads;
        nn::add_into(ev.encoder_grad, nn::mlp_backward(model.encoder, enc_u.cache, de_u).grads);
    }

    if (cfg.encoder_decay > 0.0) {
        const auto pen_e = nn::l2_penalty(model.encoder, cfg.encoder_decay);
        nn::add_into(ev.encoder_grad, pen_e.grads);
        ev.encoder_penalty = pen_e.value;
    }
    ev.total = ev.l_l + ev.l_u + cfg.alpha * ev.l_adv + ev.encoder_penalty;
    return ev;
}

DiscriminatorEval discriminator_loss(const AsslModel& model, const Matrix& labeled_rows, const Matrix& pseudo_rows,
                                     const AsslConfig& cfg) {
    if (labeled_rows.rows() == 0 || pseudo_rows.rows() == 0) {
        throw DataError("discriminator_loss: empty side of the batch");
    }
    const Matrix e_l = encode(model.encoder, labeled_rows);
    const Matrix e_u = encode(model.encoder, pseudo_rows);
    const auto dis_l = nn::mlp_forward(model.discriminator, e_l);
    const auto dis_u = nn::mlp_forward(model.discriminator, e_u);

    DiscriminatorEval ev;
    const auto pen = nn::l2_penalty(model.discriminator, cfg.lambda_adv);
    const double log_terms = loss_adversarial(column(dis_l.output), column(dis_u.output), 0.0, model.discriminator);
    ev.l_adv = log_terms + pen.value;
    ev.objective = -log_terms + pen.value;

    std::size_t correct = 0;
    for (double d : column(dis_l.output)) correct += d > 0.5 ? 1 : 0;
    for (double d : column(dis_u.output)) correct += d < 0.5 ? 1 : 0;
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(labeled_rows.rows() + pseudo_rows.rows());

    // descend -(log terms): flip the sign of the ascent gradients
    ev.disc_grad = nn::mlp_backward(model.discriminator, dis_l.cache, labeled_side_grad(dis_l.output, -1.0)).grads;
    nn::add_into(ev.disc_grad,
                 nn::mlp_backward(model.discriminator, dis_u.cache, unlabeled_side_grad(dis_u.output, -1.0)).grads);
    nn::add_into(ev.disc_grad, pen.grads);
    return ev;
}

OptimizerState OptimizerState::for_model(const AsslModel& model, const AsslConfig& cfg) {
    const nn::AdamConfig main{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon};
    const nn::AdamConfig disc{cfg.disc_learning_rate, cfg.beta1, cfg.beta2, cfg.adam_epsilon};
    return {nn::AdamState::for_params(model.encoder, main), nn::AdamState::for_params(model.supervised_head, main),
            nn::AdamState::for_params(model.semi_head, main), nn::AdamState::for_params(model.discriminator, disc)};
}

double discriminator_step(AsslModel& model, OptimizerState& opt, const Matrix& labeled_rows, const Matrix& pseudo_rows,
                          const AsslConfig& cfg) {
    const auto ev = discriminator_loss(model, labeled_rows, pseudo_rows, cfg);
    if (!std::isfinite(ev.objective)) throw DivergenceError("L_adv", "discriminator loss L_adv is not finite");
    nn::adam_step(model.discriminator, ev.disc_grad, opt.discriminator);
    return ev.accuracy;
}

GeneratorEval generator_step(AsslModel& model, OptimizerState& opt, const Batch& labeled, const Batch& pseudo,
                             const AsslConfig& cfg) {
    auto ev = generator_loss(model, labeled, pseudo, cfg);
    if (!std::isfinite(ev.l_l)) throw DivergenceError("L_L", "supervised loss L_L is not finite");
    if (!std::isfinite(ev.l_u)) throw DivergenceError("L_U", "semi-supervised loss L_U is not finite");
    if (!std::isfinite(ev.l_adv)) throw DivergenceError("L_adv", "adversarial loss L_adv is not finite");
    nn::adam_step(model.encoder, ev.encoder_grad, opt.encoder);
    nn::adam_step(model.supervised_head, ev.supervised_grad, opt.supervised);
    if (!cfg.suppress_pseudo) nn::adam_step(model.semi_head, ev.semi_grad, opt.semi);
    return ev;
}

Matrix predict_proba(const AsslModel& model, const Matrix& x, InferenceHead head) {
    if (x.rows() > 0 && x.cols() != model.input_dim()) {
        throw ShapeError("predict: model expects " + std::to_string(model.input_dim()) + " features, got " +
                         std::to_string(x.cols()));
    }
    if (x.rows() == 0) return Matrix(0, model.num_classes());
    const Matrix e = encode(model.encoder, x);
    switch (head) {
        case InferenceHead::supervised: return classify(model.supervised_head, e);
        case InferenceHead::semi: return classify(model.semi_head, e);
        case InferenceHead::averaged: {
            Matrix p = classify(model.supervised_head, e);
            const Matrix q = classify(model.semi_head, e);
            for (std::size_t i = 0; i < p.size(); ++i) p.values()[i] = 0.5 * (p.values()[i] + q.values()[i]);
            return p;
        }
    }
    return classify(model.supervised_head, e);
}

std::vector<int> predict_labels(const AsslModel& model, const Matrix& x, InferenceHead head) {
    const Matrix p = predict_proba(model, x, head);
    std::vector<int> out(p.rows());
    for (std::size_t r = 0; r < p.rows(); ++r) out[r] = static_cast<int>(prm::argmax(p.row(r)));
    return out;
}

Prediction predict_rating(const AsslModel& model, std::span<const double> x, InferenceHead head) {
    if (x.size() != model.input_dim()) {
        throw ShapeError("predict_rating: model expects " + std::to_string(model.input_dim()) + " features, got " +
                         std::to_string(x.size()));
    }
    const Matrix p = predict_proba(model, Matrix(1, x.size(), std::vector<double>(x.begin(), x.end())), head);
    Prediction out;
    out.probabilities.assign(p.values().begin(), p.values().end());
    out.label = prm::argmax(out.probabilities);
    return out;
}

TrainResult train(const data::Dataset& labeled, const prm::PseudoLabeledDataset& pseudo,
                  const data::Dataset& validation, const AsslConfig& cfg, const StepObserver& observer,
                  data::AuditLog* audit) {
    cfg.validate();
    const auto& labels = labeled.require_labels();
    if (labeled.size() == 0) throw DataError("assl train: empty labeled set");
    const bool use_pseudo = !cfg.suppress_pseudo;
    if (use_pseudo && pseudo.size() == 0) throw DataError("assl train: empty pseudo-labeled set");
    if (use_pseudo && pseudo.rows.cols() != labeled.rows.cols()) {
        throw ShapeError("assl train: pseudo-labeled rows have " + std::to_string(pseudo.rows.cols()) +
                         " features, labeled rows have " + std::to_string(labeled.rows.cols()));
    }
    const auto& val_labels = validation.require_labels();
    if (audit) {
        audit->record("assl_train", labeled.role, true);
        audit->record("assl_model_selection", validation.role, true);
    }

    const std::size_t m = labeled.schema.num_classes();
    TrainResult result;
    AsslModel model = init_model(labeled.rows.cols(), m, cfg);
    OptimizerState opt = OptimizerState::for_model(model, cfg);
    result.model = model;

    const std::size_t half = cfg.half_batch();
    nn::IndexCycler lab_cycler(labeled.size(), make_stream(cfg.seed, "batch.labeled"));
    std::optional<nn::IndexCycler> pseudo_cycler;
    if (use_pseudo) pseudo_cycler.emplace(pseudo.size(), make_stream(cfg.seed, "batch.pseudo"));
    const std::size_t pool = std::max(labeled.size(), use_pseudo ? pseudo.size() : std::size_t{0});
    const std::size_t steps_per_epoch = (pool + half - 1) / half;
    const bool run_disc = use_pseudo && cfg.use_discriminator;

    double best_f1 = -1.0;
    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        std::size_t disc_updates = 0, gen_updates = 0;
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            const auto li = lab_cycler.next(half);
            Batch lab{labeled.rows.select_rows(li), {}};
            lab.labels.reserve(li.size());
            for (std::size_t i : li) lab.labels.push_back(labels[i]);
            Batch ps;
            if (use_pseudo) {
                const auto pi = pseudo_cycler->next(half);
                ps.rows = pseudo.rows.select_rows(pi);
                ps.labels.reserve(pi.size());
                for (std::size_t i : pi) ps.labels.push_back(pseudo.labels[i]);
            }
            if (run_disc) {
                for (std::size_t k = 0; k < cfg.disc_steps; ++k) {
                    rec.disc_accuracy += discriminator_step(model, opt, lab.rows, ps.rows, cfg);
                    ++disc_updates;
                }
            }
            for (std::size_t k = 0; k < cfg.gen_steps; ++k) {
                const auto ev = generator_step(model, opt, lab, ps, cfg);
                rec.l_l += ev.l_l;
                rec.l_u += ev.l_u;
                rec.l_adv += ev.l_adv;
                ++gen_updates;
            }
            ++step;
            if (observer) observer(step, model);
        }
        rec.l_l /= static_cast<double>(gen_updates);
        rec.l_u /= static_cast<double>(gen_updates);
        rec.l_adv /= static_cast<double>(gen_updates);
        if (disc_updates > 0) rec.disc_accuracy /= static_cast<double>(disc_updates);

        if (validation.size() > 0) {
            const auto pred = predict_labels(model, validation.rows, cfg.inference_head);
            rec.val_macro_f1 = eval::evaluate(val_labels, pred, m).macro_f1;
        }
        result.history.epochs.push_back(rec);
        // empty validation: keep the latest epoch
        if (validation.size() == 0 || rec.val_macro_f1 > best_f1) {
            best_f1 = rec.val_macro_f1;
            result.model = model;
            result.best_epoch = epoch;
        }
    }
    return result;
}

}  // namespace assl::trainer
