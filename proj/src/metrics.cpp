#include "assl/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "assl/error.hpp"

namespace assl::eval {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t k = 0; k < num_classes; ++k) t += at(k, k);
    return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t t = 0;
    for (std::size_t j = 0; j < num_classes; ++j) t += at(truth, j);
    return t;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < num_classes; ++i) t += at(i, predicted);
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("confusion_matrix: " + std::to_string(y_true.size()) + " true labels vs " +
                         std::to_string(y_pred.size()) + " predictions");
    }
    ConfusionMatrix cm{num_classes, std::vector<std::uint64_t>(num_classes * num_classes, 0)};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes || static_cast<std::size_t>(p) >= num_classes) {
            throw DataError("confusion_matrix: class index out of range at position " + std::to_string(i));
        }
        cm.counts[static_cast<std::size_t>(t) * num_classes + static_cast<std::size_t>(p)] += 1;
    }
    return cm;
}

MetricsReport classification_report(const ConfusionMatrix& cm) {
    const std::uint64_t total = cm.total();
    if (total == 0) throw DataError("classification_report: empty confusion matrix");
    MetricsReport rep;
    rep.total = total;
    rep.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
    rep.micro_f1 = rep.accuracy;
    std::size_t present = 0;
    for (std::size_t k = 0; k < cm.num_classes; ++k) {
        ClassMetrics c;
        const auto tp = static_cast<double>(cm.at(k, k));
        const auto predicted = cm.col_sum(k);
        c.support = cm.row_sum(k);
        c.precision_undefined = predicted == 0;
        c.recall_undefined = c.support == 0;
        c.precision = c.precision_undefined ? 0.0 : tp / static_cast<double>(predicted);
        c.recall = c.recall_undefined ? 0.0 : tp / static_cast<double>(c.support);
        c.f1 = (c.precision > 0.0 && c.recall > 0.0) ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
        if (c.support > 0) {
            ++present;
            rep.macro_precision += c.precision;
            rep.macro_recall += c.recall;
            rep.macro_f1 += c.f1;
            const double w = static_cast<double>(c.support) / static_cast<double>(total);
            rep.weighted_precision += w * c.precision;
            rep.weighted_recall += w * c.recall;
            rep.weighted_f1 += w * c.f1;
        }
        rep.per_class.push_back(c);
    }
    rep.macro_precision /= static_cast<double>(present);
    rep.macro_recall /= static_cast<double>(present);
    rep.macro_f1 /= static_cast<double>(present);
    return rep;
}

MetricsReport evaluate(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes) {
    return classification_report(confusion_matrix(y_true, y_pred, num_classes));
}

std::map<std::string, double> headline_metrics(const MetricsReport& r) {
    return {{"accuracy", r.accuracy},
            {"macro_precision", r.macro_precision},
            {"macro_recall", r.macro_recall},
            {"macro_f1", r.macro_f1},
            {"weighted_precision", r.weighted_precision},
            {"weighted_recall", r.weighted_recall},
            {"weighted_f1", r.weighted_f1},
            {"micro_f1", r.micro_f1}};
}

AggregateReport aggregate_runs(std::span<const MetricsReport> reports) {
    if (reports.size() < 2) throw std::invalid_argument("aggregate_runs: need at least 2 reports");
    const std::size_t m = reports.front().per_class.size();
    for (const auto& r : reports) {
        if (r.per_class.size() != m) throw DataError("aggregate_runs: reports have different class counts");
    }
    AggregateReport agg;
    agg.runs = reports.size();
    const double n = static_cast<double>(reports.size());
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : reports) {
        for (const auto& [name, v] : headline_metrics(r)) values[name].push_back(v);
    }
    for (const auto& [name, vs] : values) {
        // shifted by the first value so identical runs give exactly that value and std 0
        double shift = 0.0;
        for (double v : vs) shift += v - vs.front();
        const double mean = vs.front() + shift / n;
        double ss = 0.0;
        for (double v : vs) ss += (v - mean) * (v - mean);
        agg.metrics[name] = {mean, std::sqrt(ss / (n - 1.0))};
    }
    return agg;
}

std::string format_report(const MetricsReport& report, const std::vector<std::string>& label_names) {
    std::size_t width = 12;
    for (const auto& n : label_names) width = std::max(width, n.size());
    std::string out = fmt::format("{:>{}}  {:>9}  {:>9}  {:>9}  {:>7}\n", "", width, "precision", "recall", "f1", "support");
    for (std::size_t k = 0; k < report.per_class.size(); ++k) {
        const auto& c = report.per_class[k];
        const std::string name = k < label_names.size() ? label_names[k] : std::to_string(k);
        out += fmt::format("{:>{}}  {:>9.4f}  {:>9.4f}  {:>9.4f}  {:>7}{}\n", name, width, c.precision, c.recall, c.f1,
                           c.support, c.precision_undefined ? "  (never predicted)" : "");
    }
    out += '\n';
    out += fmt::format("{:>{}}  {:>9}  {:>9}  {:>9.4f}  {:>7}\n", "accuracy", width, "", "", report.accuracy, report.total);
    out += fmt::format("{:>{}}  {:>9.4f}  {:>9.4f}  {:>9.4f}  {:>7}\n", "macro avg", width, report.macro_precision,
                       report.macro_recall, report.macro_f1, report.total);
    out += fmt::format("{:>{}}  {:>9.4f}  {:>9.4f}  {:>9.4f}  {:>7}\n", "weighted avg", width, report.weighted_precision,
                       report.weighted_recall, report.weighted_f1, report.total);
    return out;
}

std::string format_aggregate(const AggregateReport& agg) {
    std::string out = fmt::format("{:<20}  {:>10}  {:>10}   ({} runs)\n", "metric", "mean", "std", agg.runs);
    for (const auto& [name, s] : agg.metrics) out += fmt::format("{:<20}  {:>10.5f}  {:>10.5f}\n", name, s.mean, s.stddev);
    return out;
}

nlohmann::json to_json(const MetricsReport& report, const std::vector<std::string>& label_names) {
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t k = 0; k < report.per_class.size(); ++k) {
        const auto& c = report.per_class[k];
        classes.push_back({{"label", k < label_names.size() ? label_names[k] : std::to_string(k)},
                           {"precision", c.precision},
                           {"recall", c.recall},
                           {"f1", c.f1},
                           {"support", c.support},
                           {"precision_undefined", c.precision_undefined},
                           {"recall_undefined", c.recall_undefined}});
    }
    nlohmann::json j = headline_metrics(report);
    j["total"] = report.total;
    j["per_class"] = std::move(classes);
    return j;
}

nlohmann::json to_json(const AggregateReport& agg) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, s] : agg.metrics) metrics[name] = {{"mean", s.mean}, {"std", s.stddev}};
    return {{"runs", agg.runs}, {"metrics", std::move(metrics)}};
}

}  // namespace assl::eval
