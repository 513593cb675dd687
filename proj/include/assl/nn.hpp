#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "assl/matrix.hpp"
#include "assl/rng.hpp"

namespace assl::nn {

enum class Activation { relu, sigmoid, identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct DenseLayer {
    Matrix weights;  // out_dim x in_dim
    std::vector<double> bias;
    Activation activation = Activation::identity;

    std::size_t in_dim() const noexcept { return weights.cols(); }
    std::size_t out_dim() const noexcept { return weights.rows(); }

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct MlpParams {
    std::vector<DenseLayer> layers;

    std::size_t in_dim() const;
    std::size_t out_dim() const;
    std::size_t parameter_count() const;
    // Throws ShapeError if consecutive layers do not chain.
    void validate() const;

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Same layer shapes as `like`, every entry zero.
MlpParams zeros_like(const MlpParams& like);

struct LayerSpec {
    std::size_t in_dim;
    std::size_t out_dim;
    Activation activation;
};

// He-uniform for relu layers, Xavier-uniform otherwise; biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
MlpParams make_mlp(std::span<const LayerSpec> specs, Rng& rng);

// act(x W^T + b)
Matrix dense_forward(const DenseLayer& layer, const Matrix& x);
Matrix activate(Activation kind, const Matrix& z);
double sigmoid(double z);

std::vector<double> softmax(std::span<const double> logits);
Matrix softmax_rows(const Matrix& logits);
// Given row-wise softmax outputs p and dL/dp, returns dL/dlogits.
Matrix softmax_backward(const Matrix& probs, const Matrix& grad_probs);

struct ForwardCache {
    std::vector<Matrix> inputs;  // input to each layer
    std::vector<Matrix> pre;     // x W^T + b
    std::vector<Matrix> post;    // activation(pre)
};

struct ForwardResult {
    Matrix output;
    ForwardCache cache;
};

ForwardResult mlp_forward(const MlpParams& mlp, const Matrix& x);
// Forward pass without keeping intermediates.
Matrix mlp_predict(const MlpParams& mlp, const Matrix& x);

struct BackwardResult {
    MlpParams grads;  // same shapes as the network; activations copied through
    Matrix input_grad;
};

BackwardResult mlp_backward(const MlpParams& mlp, const ForwardCache& cache, const Matrix& upstream_grad);

// Elementwise accumulate: into += from. Shapes must match.
void add_into(MlpParams& into, const MlpParams& from);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    MlpParams first_moment;
    MlpParams second_moment;
    std::uint64_t step_count = 0;
    AdamConfig config;

    static AdamState for_params(const MlpParams& params, AdamConfig config);
};

// One bias-corrected Adam update of `params` in place.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

struct PenaltyResult {
    double value = 0.0;
    MlpParams grads;
};

// lambda * sum of squares over all weights and biases.
PenaltyResult l2_penalty(const MlpParams& params, double lambda);

// Flat parameter views, layer by layer: weights row-major, then bias.
std::vector<double> flatten(const MlpParams& params);
void unflatten_into(MlpParams& params, std::span<const double> flat);

using LossWithGrad = std::function<std::pair<double, std::vector<double>>(std::span<const double>)>;

// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-12),
// numeric gradients by central differences with step `epsilon`.
double grad_check(const LossWithGrad& loss_fn, std::span<const double> params, double epsilon = 1e-5);

// Cycles through a permutation of [0, n), reshuffling after each full pass.
class IndexCycler {
public:
    IndexCycler(std::size_t n, Rng rng);

    std::vector<std::size_t> next(std::size_t count);
    std::size_t size() const noexcept { return order_.size(); }

private:
    void reshuffle();

    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    Rng rng_;
};

}  // namespace assl::nn
