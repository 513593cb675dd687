#include <algorithm>
#include <cmath>
#include <numeric>

#include "assl/data.hpp"
#include "assl/error.hpp"
#include "assl/rng.hpp"

namespace assl::data {

void SynthConfig::validate() const {
    if (num_features < 1) throw ConfigError("synthetic: num_features must be >= 1");
    if (num_classes < 2) throw ConfigError("synthetic: num_classes must be >= 2");
    if (num_rows < 1) throw ConfigError("synthetic: num_rows must be >= 1");
    if (!(labeled_fraction >= 0.0 && labeled_fraction <= 1.0)) throw ConfigError("synthetic: labeled_fraction must lie in [0, 1]");
    if (!(label_noise_rate >= 0.0 && label_noise_rate <= 1.0)) throw ConfigError("synthetic: label_noise_rate must lie in [0, 1]");
    if (!(separation >= 0.0) || !std::isfinite(separation)) throw ConfigError("synthetic: separation must be finite and >= 0");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("synthetic: noise_std must be finite and >= 0");
}

SyntheticData generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t f = cfg.num_features, m = cfg.num_classes, n = cfg.num_rows;

    Rng mean_rng = make_stream(cfg.seed, "synth.class_means");
    Rng noise_rng = make_stream(cfg.seed, "synth.noise");
    Rng order_rng = make_stream(cfg.seed, "synth.order");
    Rng flip_rng = make_stream(cfg.seed, "synth.label_noise");
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix means(m, f);
    for (std::size_t k = 0; k < m; ++k) {
        auto row = means.row(k);
        double norm = 0.0;
        for (double& v : row) {
            v = gauss(mean_rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : row) v = norm > 0.0 ? cfg.separation * v / norm : 0.0;
    }

    Matrix x(n, f);
    std::vector<int> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i % m;
        truth[i] = static_cast<int>(k);
        for (std::size_t c = 0; c < f; ++c) x(i, c) = means(k, c) + cfg.noise_std * gauss(noise_rng);
    }

    std::vector<int> observed = truth;
    if (cfg.label_noise_rate > 0.0) {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> other(1, m - 1);
        for (auto& y : observed) {
            if (coin(flip_rng) < cfg.label_noise_rate) {
                y = static_cast<int>((static_cast<std::size_t>(y) + other(flip_rng)) % m);
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), order_rng);
    const auto n_labeled = static_cast<std::size_t>(std::llround(cfg.labeled_fraction * static_cast<double>(n)));

    const DatasetSchema schema = DatasetSchema::generic(f, m);
    std::vector<std::size_t> lab_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_labeled));
    std::vector<std::size_t> unl_idx(order.begin() + static_cast<std::ptrdiff_t>(n_labeled), order.end());

    SyntheticData out;
    out.labeled = Dataset{schema, x.select_rows(lab_idx), std::vector<int>{}, Role::pool};
    for (std::size_t i : lab_idx) out.labeled.labels->push_back(observed[i]);
    out.unlabeled = Dataset{schema, x.select_rows(unl_idx), std::nullopt, Role::unlabeled};
    for (std::size_t i : unl_idx) out.hidden_truth.push_back(observed[i]);
    return out;
}

}  // namespace assl::data
