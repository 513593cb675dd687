#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "assl/error.hpp"
#include "assl/prm.hpp"

namespace assl::prm {

double RegressionTree::predict(std::span<const double> x) const {
    if (x.size() != num_features) {
        throw ShapeError("tree expects " + std::to_string(num_features) + " features, got " + std::to_string(x.size()));
    }
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
}

std::size_t RegressionTree::depth() const {
    std::function<std::size_t(std::size_t)> walk = [&](std::size_t i) -> std::size_t {
        const auto& n = nodes[i];
        if (n.is_leaf()) return 0;
        return 1 + std::max(walk(static_cast<std::size_t>(n.left)), walk(static_cast<std::size_t>(n.right)));
    };
    return nodes.empty() ? 0 : walk(0);
}

SortedColumns::SortedColumns(const Matrix& x) : orders_(x.cols()) {
    const std::size_t n = x.rows();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(x.cols()); ++f) {
        auto& order = orders_[static_cast<std::size_t>(f)];
        order.resize(n);
        std::iota(order.begin(), order.end(), 0U);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return x(a, static_cast<std::size_t>(f)) < x(b, static_cast<std::size_t>(f));
        });
    }
}

namespace {

struct NodeStats {
    std::size_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
};

NodeStats node_stats(std::span<const double> targets, std::span<const int> node_of, int node) {
    NodeStats s;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (node_of[i] != node) continue;
        ++s.count;
        s.sum += targets[i];
        s.sum_sq += targets[i] * targets[i];
    }
    return s;
}

SplitCandidate scan_feature(const Matrix& x, std::span<const std::uint32_t> order, std::size_t feature,
                            std::span<const double> targets, std::span<const int> node_of, int node,
                            const NodeStats& total, std::size_t min_leaf_count) {
    SplitCandidate best;
    const double parent_term = total.sum * total.sum / static_cast<double>(total.count);
    std::size_t left_n = 0;
    double left_sum = 0.0;
    bool have_prev = false;
    double prev_value = 0.0;
    for (const std::uint32_t row : order) {
        if (node_of[row] != node) continue;
        const double v = x(row, feature);
        if (have_prev && v > prev_value) {
            const std::size_t right_n = total.count - left_n;
            if (left_n >= min_leaf_count && right_n >= min_leaf_count) {
                const double right_sum = total.sum - left_sum;
                const double gain = left_sum * left_sum / static_cast<double>(left_n) +
                                    right_sum * right_sum / static_cast<double>(right_n) - parent_term;
                if (!best.valid || gain > best.gain) {
                    double threshold = prev_value + (v - prev_value) / 2.0;
                    if (!(threshold < v)) threshold = prev_value;
                    best = {true, feature, threshold, gain, left_n};
                }
            }
        }
        ++left_n;
        left_sum += targets[row];
        prev_value = v;
        have_prev = true;
    }
    return best;
}

bool better(const SplitCandidate& cand, const SplitCandidate& incumbent) {
    return cand.valid && (!incumbent.valid || cand.gain > incumbent.gain);
}

void check_inputs(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                  std::span<const int> node_of) {
    if (targets.size() != x.rows() || node_of.size() != x.rows() || sorted.num_features() != x.cols()) {
        throw ShapeError("best_split: inconsistent input sizes");
    }
}

}  // namespace

namespace serial {

SplitCandidate best_split(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                          std::span<const int> node_of, int node, std::size_t min_leaf_count) {
    check_inputs(x, sorted, targets, node_of);
    const NodeStats total = node_stats(targets, node_of, node);
    SplitCandidate best;
    if (total.count == 0) return best;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        const auto cand = scan_feature(x, sorted.order(f), f, targets, node_of, node, total, min_leaf_count);
        if (better(cand, best)) best = cand;
    }
    return best;
}

}  // namespace serial

namespace omp {

SplitCandidate best_split(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                          std::span<const int> node_of, int node, std::size_t min_leaf_count) {
    check_inputs(x, sorted, targets, node_of);
    const NodeStats total = node_stats(targets, node_of, node);
    SplitCandidate best;
    if (total.count == 0) return best;
    std::vector<SplitCandidate> per_feature(x.cols());
    const auto nf = static_cast<std::ptrdiff_t>(x.cols());
#pragma omp parallel for schedule(static) if (x.rows() * x.cols() > 4096)
    for (std::ptrdiff_t f = 0; f < nf; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        per_feature[fi] = scan_feature(x, sorted.order(fi), fi, targets, node_of, node, total, min_leaf_count);
    }
    // fixed-order reduction: lowest feature index wins equal gains
    for (const auto& cand : per_feature) {
        if (better(cand, best)) best = cand;
    }
    return best;
}

}  // namespace omp

RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, std::size_t max_depth,
                                   std::size_t min_leaf_count) {
    return fit_regression_tree(x, SortedColumns(x), targets, max_depth, min_leaf_count);
}

RegressionTree fit_regression_tree(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                                   std::size_t max_depth, std::size_t min_leaf_count) {
    if (x.rows() == 0) throw DataError("fit_regression_tree: empty input");
    if (targets.size() != x.rows()) {
        throw ShapeError("fit_regression_tree: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(x.rows()) + " rows");
    }
    if (min_leaf_count < 1) throw std::invalid_argument("fit_regression_tree: min_leaf_count must be >= 1");

    RegressionTree tree;
    tree.num_features = x.cols();
    tree.max_depth = max_depth;
    tree.min_leaf_count = min_leaf_count;
    tree.nodes.push_back({});
    std::vector<int> node_of(x.rows(), 0);

    // (node index, depth) work stack; children are appended so indices stay stable
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [node, depth] = stack.back();
        stack.pop_back();
        const NodeStats stats = node_stats(targets, node_of, node);
        tree.nodes[static_cast<std::size_t>(node)].value =
            stats.count > 0 ? stats.sum / static_cast<double>(stats.count) : 0.0;
        if (depth >= max_depth || stats.count < 2 * min_leaf_count) continue;

        const SplitCandidate split = omp::best_split(x, sorted, targets, node_of, node, min_leaf_count);
        // rounding leaves spurious gains around 1e-30 on constant targets
        if (!split.valid || !(split.gain > 1e-12 * stats.sum_sq)) continue;

        const int left = static_cast<int>(tree.nodes.size());
        const int right = left + 1;
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        auto& parent = tree.nodes[static_cast<std::size_t>(node)];
        parent.feature = static_cast<int>(split.feature);
        parent.threshold = split.threshold;
        parent.left = left;
        parent.right = right;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            if (node_of[r] != node) continue;
            node_of[r] = x(r, split.feature) <= split.threshold ? left : right;
        }
        stack.push_back({right, depth + 1});
        stack.push_back({left, depth + 1});
    }
    return tree;
}

}  // namespace assl::prm
