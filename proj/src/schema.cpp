#include <charconv>
#include <set>

#include "assl/data.hpp"
#include "assl/error.hpp"
#include "assl/rng.hpp"

namespace assl::data {

DatasetSchema DatasetSchema::credit_default() {
    struct Category {
        const char* prefix;
        int count;
    };
    // 7 + 7 + 7 + 6 + 6 + 6 = 39 ratio columns
    constexpr Category categories[] = {{"profit", 7},    {"operation", 7}, {"growth", 7},
                                       {"repayment", 6}, {"cash_flow", 6}, {"dupont", 6}};
    DatasetSchema s;
    for (const auto& cat : categories) {
        for (int i = 1; i <= cat.count; ++i) {
            s.feature_names.push_back(std::string(cat.prefix) + "_" + (i < 10 ? "0" : "") + std::to_string(i));
        }
    }
    s.label_names = {"AAA", "AA+", "AA", "AA-", "A+", "A", "A-", "CC", "C"};
    return s;
}

DatasetSchema DatasetSchema::generic(std::size_t num_features, std::size_t num_classes) {
    if (num_features == 39 && num_classes == 9) return credit_default();
    DatasetSchema s;
    for (std::size_t i = 0; i < num_features; ++i) s.feature_names.push_back("f" + std::to_string(i));
    for (std::size_t k = 0; k < num_classes; ++k) s.label_names.push_back("c" + std::to_string(k));
    return s;
}

void DatasetSchema::validate() const {
    if (feature_names.empty()) throw DataError("schema has no features");
    if (label_names.size() < 2) throw DataError("schema needs at least 2 classes");
    std::set<std::string> seen;
    for (const auto& f : feature_names) {
        if (f == kLabelColumn) throw DataError("feature name collides with label column 'rating'");
        if (!seen.insert(f).second) throw DataError("duplicate feature name '" + f + "'");
    }
    std::set<std::string> labels(label_names.begin(), label_names.end());
    if (labels.size() != label_names.size()) throw DataError("duplicate label name in schema");
}

std::optional<int> DatasetSchema::parse_label(std::string_view text) const {
    for (std::size_t k = 0; k < label_names.size(); ++k) {
        if (label_names[k] == text) return static_cast<int>(k);
    }
    int value = -1;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && value >= 0 &&
        static_cast<std::size_t>(value) < label_names.size()) {
        return value;
    }
    return std::nullopt;
}

std::uint64_t DatasetSchema::hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& f : feature_names) h = fnv1a(f + '\x1f', h);
    h = fnv1a("\x1e", h);
    for (const auto& l : label_names) h = fnv1a(l + '\x1f', h);
    return h;
}

}  // namespace assl::data
