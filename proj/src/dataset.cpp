#include "cfguide/dataset.hpp"

#include "cfguide/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace cfguide {

using nlohmann::json;

// ============================================================================
// Config document
// ============================================================================

DatasetConfig DatasetConfig::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("dataset config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("dataset config must be a JSON object");

    DatasetConfig cfg;
    try {
        cfg.name = doc.value("name", std::string{});
        if (!doc.contains("outcome") || !doc["outcome"].is_string())
            throw ConfigError("dataset config must name an outcome column");
        cfg.outcome = doc["outcome"].get<std::string>();
        if (doc.contains("bins")) {
            const auto bins = doc["bins"].get<long long>();
            if (bins < 1) throw ConfigError("bins must be >= 1");
            cfg.bins = static_cast<std::size_t>(bins);
        }
        if (doc.contains("columns")) {
            for (const auto& col : doc["columns"]) {
                const auto name = col.at("name").get<std::string>();
                if (!col.contains("default_range") || col["default_range"].is_null()) continue;
                const auto& r = col["default_range"];
                if (!r.is_array() || r.size() != 2)
                    throw ConfigError("default_range of '" + name + "' must be [lo, hi]");
                Interval range{r[0].get<double>(), r[1].get<double>()};
                if (!(range.lo <= range.hi))
                    throw ConfigError("default_range of '" + name + "' has lo > hi");
                cfg.default_ranges[name] = range;
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed dataset config: ") + e.what());
    }
    return cfg;
}

std::string DatasetConfig::to_json() const {
    json cols = json::array();
    for (const auto& [name, range] : default_ranges)
        cols.push_back({{"name", name}, {"default_range", {range.lo, range.hi}}});
    json doc = {{"name", name}, {"outcome", outcome}, {"columns", cols}, {"bins", bins}};
    return doc.dump(2);
}

// ============================================================================
// Dataset
// ============================================================================

Dataset::Dataset(std::string name, std::vector<std::string> column_names, Matrix cells,
                 std::string outcome, const std::map<std::string, Interval>& default_ranges,
                 std::size_t bins)
    : name_(std::move(name)), cells_(std::move(cells)), bins_(bins) {
    if (column_names.size() != cells_.cols())
        throw ConfigError("column name count does not match table width");
    if (cells_.rows() == 0) throw EmptyDataset("dataset '" + name_ + "' has no rows");
    if (bins_ == 0) throw ConfigError("bins must be >= 1");

    std::set<std::string> seen;
    for (const auto& n : column_names) {
        if (n.empty()) throw ConfigError("column names must be non-empty");
        if (!seen.insert(n).second) throw ConfigError("duplicate column name '" + n + "'");
    }
    const auto it = std::find(column_names.begin(), column_names.end(), outcome);
    if (it == column_names.end())
        throw ConfigError("outcome column '" + outcome + "' not present");
    outcome_ = static_cast<std::size_t>(it - column_names.begin());

    for (const auto& [col, range] : default_ranges) {
        if (!seen.count(col)) throw ConfigError("config references unknown column '" + col + "'");
        if (col == outcome) throw ConfigError("the outcome column cannot carry a default_range");
    }

    columns_.reserve(column_names.size());
    std::vector<double> values;
    for (std::size_t c = 0; c < column_names.size(); ++c) {
        values = column_values(c);
        for (std::size_t r = 0; r < values.size(); ++r) {
            if (!std::isfinite(values[r]))
                throw ParseError(r + 1, column_names[c], "non-finite value in column '" +
                                                             column_names[c] + "'");
        }
        std::sort(values.begin(), values.end());

        ColumnSpec spec;
        spec.name = column_names[c];
        spec.min = values.front();
        spec.max = values.back();
        spec.role = c == outcome_ ? ColumnRole::outcome : ColumnRole::filterable;
        if (spec.role == ColumnRole::filterable) {
            if (auto r = default_ranges.find(spec.name); r != default_ranges.end()) {
                // Clamp to the observed range; an empty intersection is a config error.
                Interval range{std::max(r->second.lo, spec.min), std::min(r->second.hi, spec.max)};
                if (range.lo > range.hi)
                    throw ConfigError("default_range of '" + spec.name +
                                      "' lies outside the observed values");
                spec.default_range = range;
            } else {
                spec.default_range = Interval{sorted_quantile(values, 0.75), spec.max};
            }
        }
        columns_.push_back(std::move(spec));
    }
}

std::size_t Dataset::column_index(std::string_view name) const {
    for (std::size_t c = 0; c < columns_.size(); ++c)
        if (columns_[c].name == name) return c;
    throw KeyError(std::string(name));
}

bool Dataset::has_column(std::string_view name) const noexcept {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const ColumnSpec& c) { return c.name == name; });
}

std::vector<double> Dataset::column_values(std::size_t col) const {
    std::vector<double> out(cells_.rows());
    for (std::size_t r = 0; r < cells_.rows(); ++r) out[r] = cells_(r, col);
    return out;
}

std::vector<std::string> Dataset::filterable_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_)
        if (c.role == ColumnRole::filterable) out.push_back(c.name);
    return out;
}

DatasetConfig Dataset::config() const {
    DatasetConfig cfg;
    cfg.name = name_;
    cfg.outcome = outcome();
    cfg.bins = bins_;
    for (const auto& c : columns_)
        if (c.default_range) cfg.default_ranges[c.name] = *c.default_range;
    return cfg;
}

Dataset Dataset::subsample(std::size_t max_rows, std::uint64_t seed) const {
    if (max_rows == 0 || max_rows >= rows()) return *this;
    std::vector<std::size_t> idx(rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> picked;
    picked.reserve(max_rows);
    std::sample(idx.begin(), idx.end(), std::back_inserter(picked), max_rows, rng);

    std::vector<std::size_t> all_cols(cols());
    std::iota(all_cols.begin(), all_cols.end(), std::size_t{0});
    std::vector<std::string> names;
    for (const auto& c : columns_) names.push_back(c.name);
    return Dataset(name_, std::move(names), cells_.select(picked, all_cols), outcome(),
                   config().default_ranges, bins_);
}

// ============================================================================
// CSV
// ============================================================================

namespace {

// Splits one RFC-4180 record starting at pos; advances pos past the line end.
std::vector<std::string> read_record(std::string_view text, std::size_t& pos, std::size_t row) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    while (pos < text.size()) {
        const char ch = text[pos];
        if (quoted) {
            if (ch == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                    continue;
                }
                quoted = false;
                ++pos;
                continue;
            }
            field.push_back(ch);
            ++pos;
            continue;
        }
        if (ch == '"' && field.empty() && !field_was_quoted) {
            quoted = true;
            field_was_quoted = true;
            ++pos;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
            ++pos;
        } else if (ch == '\r' || ch == '\n') {
            if (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            break;
        } else {
            field.push_back(ch);
            ++pos;
        }
    }
    if (quoted) throw ParseError(row, "", "unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

Dataset load_csv(std::string_view text, const DatasetConfig& config) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::size_t pos = 0;
    if (trim(text).empty()) throw ParseError(0, "", "CSV has no header row");
    std::vector<std::string> header = read_record(text, pos, 0);
    for (auto& h : header) h = std::string(trim(h));
    for (auto it = header.begin(); it != header.end(); ++it)
        if (std::find(header.begin(), it, *it) != it)
            throw ParseError(0, *it, "duplicate header '" + *it + "'");
    if (std::find(header.begin(), header.end(), config.outcome) == header.end())
        throw ConfigError("outcome column '" + config.outcome + "' not in CSV header");

    std::vector<double> cells;
    std::size_t rows = 0;
    while (pos < text.size()) {
        const std::size_t row = rows + 1;
        auto fields = read_record(text, pos, row);
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
        if (fields.size() != header.size())
            throw ParseError(row, "", "row " + std::to_string(row) + " has " +
                                          std::to_string(fields.size()) + " fields, expected " +
                                          std::to_string(header.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto cell = trim(fields[c]);
            double value = 0.0;
            const char* first = cell.data();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
                !std::isfinite(value)) {
                throw ParseError(row, header[c],
                                 "row " + std::to_string(row) + ", column '" + header[c] +
                                     "': '" + std::string(cell) + "' is not a finite number");
            }
            cells.push_back(value);
        }
        ++rows;
    }
    if (rows == 0) throw EmptyDataset("CSV has a header but no data rows");

    const std::size_t width = header.size();
    return Dataset(config.name, std::move(header), Matrix(rows, width, std::move(cells)),
                   config.outcome, config.default_ranges, config.bins);
}

namespace {

void append_number(std::string& out, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string to_csv(const Dataset& d) {
    std::string out;
    for (std::size_t c = 0; c < d.cols(); ++c) {
        if (c) out.push_back(',');
        out += quote_if_needed(d.columns()[c].name);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) {
            if (c) out.push_back(',');
            append_number(out, d.at(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

// ============================================================================
// Normalization
// ============================================================================

NormalizedView::NormalizedView(const Dataset& d)
    : dataset_(&d), cells_(d.rows(), d.cols()), offset_(d.cols()), scale_(d.cols()) {
    for (std::size_t c = 0; c < d.cols(); ++c) {
        const auto& spec = d.columns()[c];
        offset_[c] = spec.min;
        scale_[c] = spec.max > spec.min ? spec.max - spec.min : 0.0;
    }
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t c = 0; c < d.cols(); ++c) {
            const double v = scale_[c] > 0.0 ? (d.at(r, c) - offset_[c]) / scale_[c] : 0.0;
            cells_(r, c) = std::clamp(v, 0.0, 1.0);
        }
    }
}

Dataset NormalizedView::to_dataset() const {
    std::vector<std::string> names;
    for (const auto& c : dataset_->columns()) names.push_back(c.name);
    return Dataset(dataset_->name(), std::move(names), cells_, dataset_->outcome(), {},
                   dataset_->bins());
}

NormalizedView normalize(const Dataset& d) { return NormalizedView(d); }

// ============================================================================
// Statistics
// ============================================================================

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile of an empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    if (bins == 0) throw DomainError("histogram needs at least one bin");
    Histogram h;
    h.edges.resize(bins + 1);
    h.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;
    for (double v : values) {
        std::size_t bin = 0;
        if (width > 0.0 && v > lo) {
            bin = static_cast<std::size_t>((v - lo) / width);
            bin = std::min(bin, bins - 1);
        }
        ++h.counts[bin];
    }
    return h;
}

ColumnStats column_stats(const Dataset& d, std::string_view var) {
    const std::size_t col = d.column_index(var);
    auto values = d.column_values(col);
    std::sort(values.begin(), values.end());
    ColumnStats s;
    s.min = values.front();
    s.max = values.back();
    s.q1 = sorted_quantile(values, 0.25);
    s.median = sorted_quantile(values, 0.5);
    s.q3 = sorted_quantile(values, 0.75);
    s.histogram = make_histogram(values, s.min, s.max, d.bins());
    return s;
}

}  // namespace cfguide
