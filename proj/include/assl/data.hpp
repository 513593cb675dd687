#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "assl/matrix.hpp"

namespace assl::data {

struct DatasetSchema {
    std::vector<std::string> feature_names;
    std::vector<std::string> label_names;

    std::size_t num_features() const noexcept { return feature_names.size(); }
    std::size_t num_classes() const noexcept { return label_names.size(); }

    // 39 placeholder ratio names across six categories, nine rating grades.
    static DatasetSchema credit_default();
    // f0..f{F-1}, classes c0..c{m-1}.
    static DatasetSchema generic(std::size_t num_features, std::size_t num_classes);

    void validate() const;
    // Label string -> class index. Accepts a label name or a decimal index.
    std::optional<int> parse_label(std::string_view text) const;
    std::uint64_t hash() const;

    friend bool operator==(const DatasetSchema&, const DatasetSchema&) = default;
};

// Where a dataset sits in the pipeline; used by the leakage audit.
enum class Role { pool, train, validation, test, unlabeled };
std::string_view to_string(Role role);

struct Dataset {
    DatasetSchema schema;
    Matrix rows;
    std::optional<std::vector<int>> labels;
    Role role = Role::pool;

    std::size_t size() const noexcept { return rows.rows(); }
    bool labeled() const noexcept { return labels.has_value(); }
    // Throws DataError when unlabeled.
    const std::vector<int>& require_labels() const;
    Dataset subset(std::span<const std::size_t> indices) const;
    void validate() const;
};

// Records which datasets each pipeline stage reads labels from.
struct AuditEvent {
    std::string operation;
    Role role;
    bool read_labels;
};

class AuditLog {
public:
    void record(std::string operation, Role role, bool read_labels) {
        events_.push_back({std::move(operation), role, read_labels});
    }
    const std::vector<AuditEvent>& events() const noexcept { return events_; }

private:
    std::vector<AuditEvent> events_;
};

enum class MissingPolicy { reject, mean_impute };
MissingPolicy missing_policy_from_string(std::string_view name);

inline constexpr std::string_view kLabelColumn = "rating";

Dataset read_csv(std::istream& in, const DatasetSchema& schema, MissingPolicy policy);
Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema, MissingPolicy policy);
// Header row in schema order, then "rating" (class name) when labeled. Lossless.
void write_csv(std::ostream& out, const Dataset& ds);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;  // population convention
    std::vector<bool> constant;

    Matrix apply(const Matrix& x) const;
    Dataset apply(const Dataset& ds) const;
};

inline constexpr double kConstantFeatureStd = 1e-12;

Normalizer fit_normalizer(const Dataset& train_labeled, AuditLog* audit = nullptr);

struct SplitResult {
    Dataset train;
    Dataset validation;
    Dataset test;
    std::array<std::vector<std::size_t>, 3> indices;
    std::vector<std::string> warnings;
};

SplitResult stratified_split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed,
                             AuditLog* audit = nullptr);

// Largest-remainder allocation of `count` items to `fractions`; ties go to the earlier slot.
std::array<std::size_t, 3> allocate_counts(std::size_t count, std::array<double, 3> fractions);

struct SynthConfig {
    std::size_t num_features = 39;
    std::size_t num_classes = 9;
    std::size_t num_rows = 20000;  // classes assigned round-robin, so counts differ by at most one
    double labeled_fraction = 0.1;
    double separation = 2.0;
    double noise_std = 1.0;
    double label_noise_rate = 0.0;
    std::uint64_t seed = 7;

    void validate() const;
};

struct SyntheticData {
    Dataset labeled;
    Dataset unlabeled;
    std::vector<int> hidden_truth;  // labels of `unlabeled`, for evaluation only
};

SyntheticData generate_synthetic(const SynthConfig& cfg);

}  // namespace assl::data
