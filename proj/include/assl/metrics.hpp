#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"  // nlohmann/json

namespace assl::eval {

// counts(i, j): rows of true class i predicted as j.
struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::uint64_t> counts;

    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * num_classes + predicted]; }
    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t col_sum(std::size_t predicted) const;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;
    // Set when the denominator was zero and the metric was defined as 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    // Unweighted means over classes with support > 0.
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    // Support-weighted means.
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    // Micro precision, recall and F1 all equal accuracy for single-label data.
    double micro_f1 = 0.0;
    double accuracy = 0.0;
    std::uint64_t total = 0;
};

MetricsReport classification_report(const ConfusionMatrix& cm);

// Convenience: confusion matrix + report.
MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample (n - 1)
};

struct AggregateReport {
    std::size_t runs = 0;
    std::map<std::string, MetricSummary> metrics;
};

// Headline scalar metrics of a report, keyed by name.
std::map<std::string, double> headline_metrics(const MetricsReport& report);

AggregateReport aggregate_runs(std::span<const MetricsReport> reports);

std::string format_report(const MetricsReport& report, const std::vector<std::string>& label_names);
std::string format_aggregate(const AggregateReport& agg);

nlohmann::json to_json(const MetricsReport& report, const std::vector<std::string>& label_names);
nlohmann::json to_json(const AggregateReport& agg);

}  // namespace assl::eval
