#pragma once

#include "cfguide/dataset.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cfguide {

using IndexSet = std::vector<std::size_t>;  // ascending row indices

struct FilterClause {
    std::string variable;
    Interval range;

    friend bool operator==(const FilterClause&, const FilterClause&) = default;
};

// Conjunction of closed ranges, at most one clause per variable, kept in the
// order the variables were added.
class FilterSet {
public:
    FilterSet() = default;
    FilterSet(std::initializer_list<FilterClause> clauses);

    // Throws InvalidFilter on a duplicate variable or lo > hi.
    void add(FilterClause clause);
    // Throws StateError when the variable has no clause.
    void set_range(const std::string& variable, Interval range);
    void remove(const std::string& variable);

    bool contains(const std::string& variable) const noexcept;
    const FilterClause* find(const std::string& variable) const noexcept;
    const std::vector<FilterClause>& clauses() const noexcept { return clauses_; }
    bool empty() const noexcept { return clauses_.empty(); }
    std::size_t size() const noexcept { return clauses_.size(); }

    // Checks every clause against the dataset: variable exists and is not the outcome.
    void validate(const Dataset& d) const;

    friend bool operator==(const FilterSet&, const FilterSet&) = default;

private:
    std::vector<FilterClause> clauses_;
};

enum class DistanceMeasure { euclidean };

struct DistanceSpace {
    std::vector<std::string> variables;
    DistanceMeasure measure = DistanceMeasure::euclidean;

    // Column indices in the dataset; throws KeyError / InvalidFilter on bad input.
    std::vector<std::size_t> resolve(const Dataset& d) const;
};

// Which columns counterfactual matching compares.
enum class MatchingSpaceMode {
    complement,      // every column except filter variables and the outcome
    all_dimensions,  // every column, outcome included
};

inline constexpr std::size_t kMinSubsetSize = 5;

struct SubsetPartition {
    IndexSet in_idx;
    IndexSet ex_idx;
    IndexSet cf_idx;
    IndexSet rem_idx;
    bool low_confidence = false;  // |IN| < min_subset_size

    std::size_t n() const noexcept { return in_idx.size(); }
};

struct CounterfactualSplit {
    IndexSet cf_idx;
    IndexSet rem_idx;
};

struct InclusionSplit {
    IndexSet in_idx;
    IndexSet ex_idx;
};

// Row r is in IN iff every clause's closed range contains its raw value.
InclusionSplit apply_filters(const Dataset& d, const FilterSet& f);

// A row vector keyed by variable name, as produced by row_vector().
using NamedRow = std::map<std::string, double, std::less<>>;

NamedRow row_vector(const NormalizedView& view, std::size_t row);

// Euclidean distance restricted to the space; KeyError when a row lacks a variable.
double point_distance(const NamedRow& a, const NamedRow& b, const DistanceSpace& space);

// Number of EX rows that become CF for the given subset sizes.
std::size_t counterfactual_size(std::size_t n_in, std::size_t n_ex, std::size_t n_total);

// CF = the k EX rows with smallest min-distance to IN over the space
// (ties: lower row index first). Distances use normalized values.
CounterfactualSplit match_counterfactuals(const NormalizedView& view, const IndexSet& in_idx,
                                          const IndexSet& ex_idx, const DistanceSpace& space);

// Matching space for a filter set under the given mode. Falls back to the
// filter variables when the complement is empty.
DistanceSpace matching_space(const Dataset& d, const FilterSet& f,
                             MatchingSpaceMode mode = MatchingSpaceMode::complement);

SubsetPartition partition(const NormalizedView& view, const FilterSet& f,
                          MatchingSpaceMode mode = MatchingSpaceMode::complement,
                          std::size_t min_subset_size = kMinSubsetSize);

}  // namespace cfguide
