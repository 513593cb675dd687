#include <algorithm>
#include <cmath>
#include <numeric>

#include "assl/data.hpp"
#include "assl/error.hpp"
#include "assl/rng.hpp"

namespace assl::data {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::pool: return "pool";
        case Role::train: return "train";
        case Role::validation: return "validation";
        case Role::test: return "test";
        case Role::unlabeled: return "unlabeled";
    }
    return "pool";
}

const std::vector<int>& Dataset::require_labels() const {
    if (!labels) throw DataError("dataset (" + std::string(to_string(role)) + ") has no labels");
    return *labels;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out{schema, rows.select_rows(indices), std::nullopt, role};
    if (labels) {
        std::vector<int> picked;
        picked.reserve(indices.size());
        for (std::size_t i : indices) picked.push_back((*labels)[i]);
        out.labels = std::move(picked);
    }
    return out;
}

void Dataset::validate() const {
    if (rows.rows() > 0 && rows.cols() != schema.num_features()) {
        throw DataError("dataset has " + std::to_string(rows.cols()) + " columns, schema has " +
                        std::to_string(schema.num_features()));
    }
    if (labels) {
        if (labels->size() != rows.rows()) throw DataError("label count differs from row count");
        for (int y : *labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= schema.num_classes()) {
                throw DataError("label " + std::to_string(y) + " out of range for " +
                                std::to_string(schema.num_classes()) + " classes");
            }
        }
    }
}

Normalizer fit_normalizer(const Dataset& train_labeled, AuditLog* audit) {
    if (train_labeled.size() == 0) throw DataError("fit_normalizer: empty dataset");
    if (audit) audit->record("fit_normalizer", train_labeled.role, false);
    const Matrix& x = train_labeled.rows;
    const std::size_t n = x.rows(), f = x.cols();
    Normalizer norm{std::vector<double>(f, 0.0), std::vector<double>(f, 0.0), std::vector<bool>(f, false)};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < f; ++c) norm.mean[c] += x(r, c);
    }
    for (double& m : norm.mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < f; ++c) {
            const double d = x(r, c) - norm.mean[c];
            norm.stddev[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < f; ++c) {
        norm.stddev[c] = std::sqrt(norm.stddev[c] / static_cast<double>(n));
        norm.constant[c] = norm.stddev[c] < kConstantFeatureStd;
    }
    return norm;
}

Matrix Normalizer::apply(const Matrix& x) const {
    if (x.rows() > 0 && x.cols() != mean.size()) {
        throw ShapeError("normalizer fitted on " + std::to_string(mean.size()) + " features, input has " +
                         std::to_string(x.cols()));
    }
    Matrix out(x.rows(), mean.size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < mean.size(); ++c) {
            out(r, c) = constant[c] ? 0.0 : (x(r, c) - mean[c]) / stddev[c];
        }
    }
    return out;
}

Dataset Normalizer::apply(const Dataset& ds) const {
    Dataset out = ds;
    out.rows = apply(ds.rows);
    return out;
}

std::array<std::size_t, 3> allocate_counts(std::size_t count, std::array<double, 3> fractions) {
    std::array<std::size_t, 3> alloc{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double exact = fractions[i] * static_cast<double>(count);
        alloc[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        remainder[i] = exact - static_cast<double>(alloc[i]);
        assigned += alloc[i];
    }
    while (assigned < count) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < 3; ++i) {
            if (remainder[i] > remainder[best]) best = i;
        }
        alloc[best] += 1;
        remainder[best] = -1.0;
        assigned += 1;
    }
    return alloc;
}

SplitResult stratified_split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed,
                             AuditLog* audit) {
    const auto& labels = ds.require_labels();
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
    if (audit) audit->record("stratified_split", ds.role, true);

    SplitResult result;
    Rng rng = make_stream(seed, "stratified_split");
    const std::size_t m = ds.schema.num_classes();
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == static_cast<int>(k)) members.push_back(i);
        }
        if (members.empty()) continue;
        std::shuffle(members.begin(), members.end(), rng);
        auto alloc = allocate_counts(members.size(), fractions);
        std::size_t needed = 0;
        for (double f : fractions) needed += f > 0.0 ? 1 : 0;
        if (members.size() < needed) {
            result.warnings.push_back("class " + ds.schema.label_names[k] + " has " + std::to_string(members.size()) +
                                      " rows, fewer than the " + std::to_string(needed) +
                                      " non-empty splits; allocated to train first");
            alloc = {0, 0, 0};
            std::size_t left = members.size();
            for (std::size_t s = 0; s < 3 && left > 0; ++s) {
                if (fractions[s] > 0.0) {
                    alloc[s] = 1;
                    --left;
                }
            }
        }
        std::size_t pos = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t j = 0; j < alloc[s]; ++j) result.indices[s].push_back(members[pos++]);
        }
    }
    for (auto& idx : result.indices) std::sort(idx.begin(), idx.end());
    result.train = ds.subset(result.indices[0]);
    result.validation = ds.subset(result.indices[1]);
    result.test = ds.subset(result.indices[2]);
    result.train.role = Role::train;
    result.validation.role = Role::validation;
    result.test.role = Role::test;
    return result;
}

}  // namespace assl::data
