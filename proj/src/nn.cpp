#include "assl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "assl/error.hpp"
#include "assl/kernels.hpp"

namespace assl::nn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "identity") return Activation::identity;
    throw DataError("unknown activation '" + std::string(name) + "'");
}

std::size_t MlpParams::in_dim() const {
    if (layers.empty()) throw ShapeError("empty MLP has no input dimension");
    return layers.front().in_dim();
}

std::size_t MlpParams::out_dim() const {
    if (layers.empty()) throw ShapeError("empty MLP has no output dimension");
    return layers.back().out_dim();
}

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

void MlpParams::validate() const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.bias.size() != l.out_dim()) {
            throw ShapeError("layer " + std::to_string(i) + ": bias length " + std::to_string(l.bias.size()) +
                             " != out_dim " + std::to_string(l.out_dim()));
        }
        if (i + 1 < layers.size() && l.out_dim() != layers[i + 1].in_dim()) {
            throw ShapeError("layer " + std::to_string(i) + " out_dim " + std::to_string(l.out_dim()) +
                             " != layer " + std::to_string(i + 1) + " in_dim " +
                             std::to_string(layers[i + 1].in_dim()));
        }
    }
}

MlpParams zeros_like(const MlpParams& like) {
    MlpParams out;
    out.layers.reserve(like.layers.size());
    for (const auto& l : like.layers) {
        out.layers.push_back({Matrix(l.out_dim(), l.in_dim()), std::vector<double>(l.out_dim(), 0.0), l.activation});
    }
    return out;
}

MlpParams make_mlp(std::span<const LayerSpec> specs, Rng& rng) {
    MlpParams mlp;
    for (const auto& s : specs) {
        const double fan_in = static_cast<double>(s.in_dim);
        const double fan_out = static_cast<double>(s.out_dim);
        const double limit = s.activation == Activation::relu ? std::sqrt(6.0 / fan_in)
                                                              : std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        DenseLayer layer{Matrix(s.out_dim, s.in_dim), std::vector<double>(s.out_dim, 0.0), s.activation};
        for (double& w : layer.weights.values()) w = dist(rng);
        // Nonzero biases keep units off the relu kink when a whole input row is zero.
        std::uniform_real_distribution<double> bias_dist(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
        for (double& b : layer.bias) b = bias_dist(rng);
        mlp.layers.push_back(std::move(layer));
    }
    mlp.validate();
    return mlp;
}

double sigmoid(double z) {
    // Branches keep exp() from overflowing for large |z|.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Matrix activate(Activation kind, const Matrix& z) {
    Matrix out = z;
    switch (kind) {
        case Activation::relu:
            for (double& v : out.values()) v = v < 0.0 ? 0.0 : v;  // NaN passes through
            break;
        case Activation::sigmoid:
            for (double& v : out.values()) v = sigmoid(v);
            break;
        case Activation::identity:
            break;
    }
    return out;
}

namespace {

Matrix affine(const DenseLayer& layer, const Matrix& x) {
    if (x.cols() != layer.in_dim()) {
        throw ShapeError("dense_forward: input has " + std::to_string(x.cols()) + " columns but layer expects in_dim " +
                         std::to_string(layer.in_dim()));
    }
    Matrix z = kernels::matmul_nt(x, layer.weights);
    for (std::size_t r = 0; r < z.rows(); ++r) {
        auto row = z.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
    }
    return z;
}

}  // namespace

Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
    return activate(layer.activation, affine(layer, x));
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto p = softmax(logits.row(r));
        std::copy(p.begin(), p.end(), out.row(r).begin());
    }
    return out;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& grad_probs) {
    if (probs.rows() != grad_probs.rows() || probs.cols() != grad_probs.cols()) {
        throw ShapeError("softmax_backward: " + probs.shape_string() + " vs " + grad_probs.shape_string());
    }
    Matrix out(probs.rows(), probs.cols());
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const auto p = probs.row(r);
        const auto g = grad_probs.row(r);
        double dot = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) dot += g[i] * p[i];
        auto o = out.row(r);
        for (std::size_t i = 0; i < p.size(); ++i) o[i] = p[i] * (g[i] - dot);
    }
    return out;
}

ForwardResult mlp_forward(const MlpParams& mlp, const Matrix& x) {
    if (mlp.layers.empty()) throw ShapeError("mlp_forward: network has no layers");
    if (x.cols() != mlp.in_dim()) {
        throw ShapeError("mlp_forward: input has " + std::to_string(x.cols()) + " columns but network expects " +
                         std::to_string(mlp.in_dim()));
    }
    ForwardResult result;
    auto& cache = result.cache;
    cache.inputs.reserve(mlp.layers.size());
    cache.pre.reserve(mlp.layers.size());
    cache.post.reserve(mlp.layers.size());
    const Matrix* current = &x;
    for (const auto& layer : mlp.layers) {
        cache.inputs.push_back(*current);
        cache.pre.push_back(affine(layer, *current));
        cache.post.push_back(activate(layer.activation, cache.pre.back()));
        current = &cache.post.back();
    }
    result.output = cache.post.back();
    return result;
}

Matrix mlp_predict(const MlpParams& mlp, const Matrix& x) {
    if (mlp.layers.empty()) throw ShapeError("mlp_predict: network has no layers");
    Matrix current = x;
    for (const auto& layer : mlp.layers) current = dense_forward(layer, current);
    return current;
}

BackwardResult mlp_backward(const MlpParams& mlp, const ForwardCache& cache, const Matrix& upstream_grad) {
    const std::size_t n_layers = mlp.layers.size();
    if (cache.inputs.size() != n_layers || cache.pre.size() != n_layers || cache.post.size() != n_layers) {
        throw ShapeError("mlp_backward: cache holds " + std::to_string(cache.inputs.size()) + " layers, network has " +
                         std::to_string(n_layers));
    }
    const Matrix& out = cache.post.back();
    if (upstream_grad.rows() != out.rows() || upstream_grad.cols() != out.cols()) {
        throw ShapeError("mlp_backward: upstream gradient " + upstream_grad.shape_string() + " vs output " +
                         out.shape_string());
    }

    BackwardResult result;
    result.grads.layers.resize(n_layers);
    Matrix grad = upstream_grad;
    for (std::size_t li = n_layers; li-- > 0;) {
        const auto& layer = mlp.layers[li];
        const Matrix& pre = cache.pre[li];
        const Matrix& post = cache.post[li];
        if (pre.cols() != layer.out_dim() || cache.inputs[li].cols() != layer.in_dim()) {
            throw ShapeError("mlp_backward: cache does not match layer " + std::to_string(li));
        }
        // grad becomes dL/dpre
        switch (layer.activation) {
            case Activation::relu:
                for (std::size_t i = 0; i < grad.size(); ++i) {
                    if (!(pre.values()[i] > 0.0)) grad.values()[i] = 0.0;
                }
                break;
            case Activation::sigmoid:
                for (std::size_t i = 0; i < grad.size(); ++i) {
                    const double s = post.values()[i];
                    grad.values()[i] *= s * (1.0 - s);
                }
                break;
            case Activation::identity:
                break;
        }
        auto& g = result.grads.layers[li];
        g.activation = layer.activation;
        g.weights = kernels::matmul_tn(grad, cache.inputs[li]);
        g.bias.assign(layer.out_dim(), 0.0);
        for (std::size_t r = 0; r < grad.rows(); ++r) {
            const auto row = grad.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) g.bias[c] += row[c];
        }
        grad = kernels::matmul_nn(grad, layer.weights);
    }
    result.input_grad = std::move(grad);
    return result;
}

void add_into(MlpParams& into, const MlpParams& from) {
    if (into.layers.size() != from.layers.size()) throw ShapeError("add_into: layer count mismatch");
    for (std::size_t li = 0; li < into.layers.size(); ++li) {
        auto& a = into.layers[li];
        const auto& b = from.layers[li];
        if (a.weights.size() != b.weights.size() || a.bias.size() != b.bias.size()) {
            throw ShapeError("add_into: shape mismatch at layer " + std::to_string(li));
        }
        for (std::size_t i = 0; i < a.weights.size(); ++i) a.weights.values()[i] += b.weights.values()[i];
        for (std::size_t i = 0; i < a.bias.size(); ++i) a.bias[i] += b.bias[i];
    }
}

AdamState AdamState::for_params(const MlpParams& params, AdamConfig config) {
    if (!(config.beta1 > 0.0 && config.beta1 < 1.0 && config.beta2 > 0.0 && config.beta2 < 1.0)) {
        throw ConfigError("Adam betas must lie in (0, 1)");
    }
    return AdamState{zeros_like(params), zeros_like(params), 0, config};
}

namespace {

void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v,
                 const AdamConfig& cfg, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
    const std::size_t n = params.layers.size();
    if (grads.layers.size() != n || state.first_moment.layers.size() != n || state.second_moment.layers.size() != n) {
        throw ShapeError("adam_step: parameter/gradient/state layer counts differ");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.config.beta1, t);
    const double bc2 = 1.0 - std::pow(state.config.beta2, t);
    for (std::size_t li = 0; li < n; ++li) {
        auto& p = params.layers[li];
        const auto& g = grads.layers[li];
        auto& m = state.first_moment.layers[li];
        auto& v = state.second_moment.layers[li];
        if (g.weights.size() != p.weights.size() || g.bias.size() != p.bias.size() ||
            m.weights.size() != p.weights.size() || v.weights.size() != p.weights.size()) {
            throw ShapeError("adam_step: shape mismatch at layer " + std::to_string(li));
        }
        adam_update(p.weights.values(), g.weights.values(), m.weights.values(), v.weights.values(), state.config, bc1,
                    bc2);
        adam_update(p.bias, g.bias, m.bias, v.bias, state.config, bc1, bc2);
    }
}

PenaltyResult l2_penalty(const MlpParams& params, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("l2_penalty: lambda must be >= 0");
    PenaltyResult out{0.0, zeros_like(params)};
    double sum = 0.0;
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        const auto& l = params.layers[li];
        auto& g = out.grads.layers[li];
        for (std::size_t i = 0; i < l.weights.size(); ++i) {
            const double w = l.weights.values()[i];
            sum += w * w;
            g.weights.values()[i] = 2.0 * lambda * w;
        }
        for (std::size_t i = 0; i < l.bias.size(); ++i) {
            sum += l.bias[i] * l.bias[i];
            g.bias[i] = 2.0 * lambda * l.bias[i];
        }
    }
    out.value = lambda * sum;
    return out;
}

std::vector<double> flatten(const MlpParams& params) {
    std::vector<double> flat;
    flat.reserve(params.parameter_count());
    for (const auto& l : params.layers) {
        flat.insert(flat.end(), l.weights.values().begin(), l.weights.values().end());
        flat.insert(flat.end(), l.bias.begin(), l.bias.end());
    }
    return flat;
}

void unflatten_into(MlpParams& params, std::span<const double> flat) {
    if (flat.size() != params.parameter_count()) {
        throw ShapeError("unflatten_into: " + std::to_string(flat.size()) + " values for " +
                         std::to_string(params.parameter_count()) + " parameters");
    }
    std::size_t pos = 0;
    for (auto& l : params.layers) {
        for (double& w : l.weights.values()) w = flat[pos++];
        for (double& b : l.bias) b = flat[pos++];
    }
}

double grad_check(const LossWithGrad& loss_fn, std::span<const double> params, double epsilon) {
    const auto [value, analytic] = loss_fn(params);
    (void)value;
    if (analytic.size() != params.size()) throw ShapeError("grad_check: gradient length differs from parameter count");
    std::vector<double> probe(params.begin(), params.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + epsilon;
        const double plus = loss_fn(probe).first;
        probe[i] = orig - epsilon;
        const double minus = loss_fn(probe).first;
        probe[i] = orig;
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

IndexCycler::IndexCycler(std::size_t n, Rng rng) : order_(n), rng_(std::move(rng)) {
    if (n == 0) throw std::invalid_argument("IndexCycler: empty pool");
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    reshuffle();
}

void IndexCycler::reshuffle() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
}

std::vector<std::size_t> IndexCycler::next(std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count) {
        if (cursor_ == order_.size()) reshuffle();
        out.push_back(order_[cursor_++]);
    }
    return out;
}

}  // namespace assl::nn
