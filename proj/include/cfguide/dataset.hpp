#pragma once

#include "cfguide/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cfguide {

// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const noexcept { return lo <= v && v <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

enum class ColumnRole { outcome, filterable };

struct ColumnSpec {
    std::string name;
    double min = 0.0;  // observed
    double max = 0.0;  // observed
    std::optional<Interval> default_range;  // absent for the outcome
    ColumnRole role = ColumnRole::filterable;

    friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

inline constexpr std::size_t kDefaultHistogramBins = 20;

// Dataset-config document: {name, outcome, columns: [{name, default_range?}], bins?}
struct DatasetConfig {
    std::string name;
    std::string outcome;
    std::map<std::string, Interval> default_ranges;
    std::size_t bins = kDefaultHistogramBins;

    static DatasetConfig from_json(std::string_view text);
    std::string to_json() const;
};

// Immutable numeric table with one designated outcome column.
class Dataset {
public:
    // Validates names, finiteness and the outcome; fills observed min/max and
    // default ranges (explicit ranges first, otherwise the upper-quartile rule).
    Dataset(std::string name, std::vector<std::string> column_names, Matrix cells,
            std::string outcome, const std::map<std::string, Interval>& default_ranges = {},
            std::size_t bins = kDefaultHistogramBins);

    const std::string& name() const noexcept { return name_; }
    std::size_t rows() const noexcept { return cells_.rows(); }
    std::size_t cols() const noexcept { return cells_.cols(); }
    const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
    const Matrix& cells() const noexcept { return cells_; }
    double at(std::size_t row, std::size_t col) const { return cells_(row, col); }
    std::size_t bins() const noexcept { return bins_; }

    const std::string& outcome() const noexcept { return columns_[outcome_].name; }
    std::size_t outcome_index() const noexcept { return outcome_; }

    // Throws KeyError for unknown names.
    std::size_t column_index(std::string_view name) const;
    bool has_column(std::string_view name) const noexcept;
    const ColumnSpec& column(std::string_view name) const { return columns_[column_index(name)]; }
    std::vector<double> column_values(std::size_t col) const;

    // Names of all filterable columns in declaration order.
    std::vector<std::string> filterable_names() const;

    // Config document reproducing this dataset's outcome, ranges and bins.
    DatasetConfig config() const;

    // Seeded row subsample without replacement, rows kept in original order.
    Dataset subsample(std::size_t max_rows, std::uint64_t seed) const;

private:
    std::string name_;
    std::vector<ColumnSpec> columns_;
    Matrix cells_;
    std::size_t outcome_ = 0;
    std::size_t bins_ = kDefaultHistogramBins;
};

// Parses RFC-4180 style CSV with a header row. Every cell must be a finite
// number; missing values are rejected.
Dataset load_csv(std::string_view text, const DatasetConfig& config);

// Shortest round-trip decimal representation of every cell.
std::string to_csv(const Dataset& d);

// Per-column min-max scaling to [0,1]. Constant columns map to 0.
class NormalizedView {
public:
    explicit NormalizedView(const Dataset& d);

    const Dataset& dataset() const noexcept { return *dataset_; }
    const Matrix& cells() const noexcept { return cells_; }
    double at(std::size_t row, std::size_t col) const { return cells_(row, col); }
    double offset(std::size_t col) const { return offset_[col]; }
    double scale(std::size_t col) const { return scale_[col]; }

    // The normalized table as a dataset of its own (same names and outcome).
    Dataset to_dataset() const;

private:
    const Dataset* dataset_;
    Matrix cells_;
    std::vector<double> offset_;
    std::vector<double> scale_;
};

NormalizedView normalize(const Dataset& d);

struct Histogram {
    std::vector<double> edges;         // bins + 1 ascending edges
    std::vector<std::size_t> counts;   // one per bin; last bin is closed on the right

    friend bool operator==(const Histogram&, const Histogram&) = default;
};

// Equal-width bins over [lo, hi]; values outside are clamped into the end bins.
Histogram make_histogram(std::span<const double> values, double lo, double hi, std::size_t bins);

struct ColumnStats {
    double min = 0.0;
    double max = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    Histogram histogram;
};

// Linear-interpolation quantile of already sorted values, p in [0,1].
double sorted_quantile(std::span<const double> sorted, double p);

ColumnStats column_stats(const Dataset& d, std::string_view var);

}  // namespace cfguide
