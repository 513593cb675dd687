#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "assl/data.hpp"
#include "assl/error.hpp"

namespace assl::data {

MissingPolicy missing_policy_from_string(std::string_view name) {
    if (name == "reject") return MissingPolicy::reject;
    if (name == "mean_impute") return MissingPolicy::mean_impute;
    throw ConfigError("unknown missing_policy '" + std::string(name) + "'");
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

// Comma-separated fields; double quotes may wrap a field, "" escapes a quote.
std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

std::optional<double> parse_number(const std::string& text) {
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = text.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Dataset read_csv(std::istream& in, const DatasetSchema& schema, MissingPolicy policy) {
    schema.validate();
    Dataset ds{schema, Matrix(0, schema.num_features()), std::nullopt, Role::pool};

    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!blank(line)) {
            have_header = true;
            break;
        }
    }
    if (!have_header) return ds;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_fields(line);
    std::map<std::string, std::size_t> feature_pos;
    for (std::size_t i = 0; i < schema.feature_names.size(); ++i) feature_pos[schema.feature_names[i]] = i;

    // column index -> schema feature index, or -1 for the label column
    std::vector<long> column_map(header.size(), -2);
    std::vector<bool> seen(schema.num_features(), false);
    bool has_label = false;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == kLabelColumn) {
            if (has_label) throw DataError("duplicate column 'rating'");
            has_label = true;
            column_map[c] = -1;
            continue;
        }
        const auto it = feature_pos.find(header[c]);
        if (it == feature_pos.end()) throw DataError("unknown column '" + header[c] + "'");
        if (seen[it->second]) throw DataError("duplicate column '" + header[c] + "'");
        seen[it->second] = true;
        column_map[c] = static_cast<long>(it->second);
    }
    for (std::size_t f = 0; f < seen.size(); ++f) {
        if (!seen[f]) throw DataError("missing column '" + schema.feature_names[f] + "'");
    }

    const std::size_t nf = schema.num_features();
    std::vector<double> values;
    std::vector<bool> missing;
    std::vector<int> labels;
    std::vector<std::size_t> bad_rows;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (blank(line)) continue;
        ++row_number;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(row_number) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        }
        const std::size_t base = values.size();
        values.resize(base + nf, 0.0);
        missing.resize(base + nf, false);
        bool row_bad = false;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (column_map[c] == -1) {
                const auto label = schema.parse_label(fields[c]);
                if (!label) {
                    throw DataError("row " + std::to_string(row_number) + ": unknown label '" + fields[c] + "'");
                }
                labels.push_back(*label);
                continue;
            }
            const auto f = static_cast<std::size_t>(column_map[c]);
            const auto v = parse_number(fields[c]);
            if (v) {
                values[base + f] = *v;
            } else {
                missing[base + f] = true;
                row_bad = true;
            }
        }
        if (row_bad) bad_rows.push_back(row_number);
    }

    if (!bad_rows.empty()) {
        if (policy == MissingPolicy::reject) {
            std::string list;
            for (std::size_t i = 0; i < bad_rows.size(); ++i) list += (i ? ", " : "") + std::to_string(bad_rows[i]);
            throw DataError("missing or non-numeric values in row(s) " + list);
        }
        for (std::size_t f = 0; f < nf; ++f) {
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t r = 0; r < row_number; ++r) {
                if (!missing[r * nf + f]) {
                    sum += values[r * nf + f];
                    ++count;
                }
            }
            if (count == 0) throw DataError("column '" + schema.feature_names[f] + "' has no numeric values to impute from");
            const double mean = sum / static_cast<double>(count);
            for (std::size_t r = 0; r < row_number; ++r) {
                if (missing[r * nf + f]) values[r * nf + f] = mean;
            }
        }
    }

    ds.rows = Matrix(row_number, nf, std::move(values));
    if (has_label) ds.labels = std::move(labels);
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema, MissingPolicy policy) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open csv file '" + path.filename().string() + "'");
    return read_csv(in, schema, policy);
}

void write_csv(std::ostream& out, const Dataset& ds) {
    const auto& names = ds.schema.feature_names;
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    if (ds.labeled()) out << ',' << kLabelColumn;
    out << '\n';
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto row = ds.rows.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt::format("{}", row[c]);
        if (ds.labeled()) out << ',' << ds.schema.label_names[static_cast<std::size_t>((*ds.labels)[r])];
        out << '\n';
    }
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write csv file '" + path.filename().string() + "'");
    write_csv(out, ds);
}

}  // namespace assl::data
