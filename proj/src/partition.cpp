#include "cfguide/partition.hpp"

#include "cfguide/errors.hpp"
#include "cfguide/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfguide {

// ============================================================================
// FilterSet
// ============================================================================

FilterSet::FilterSet(std::initializer_list<FilterClause> clauses) {
    for (const auto& c : clauses) add(c);
}

void FilterSet::add(FilterClause clause) {
    if (clause.variable.empty()) throw InvalidFilter("filter clause needs a variable");
    if (!(clause.range.lo <= clause.range.hi))
        throw InvalidFilter("filter range for '" + clause.variable + "' has lo > hi");
    if (contains(clause.variable))
        throw InvalidFilter("variable '" + clause.variable + "' is already filtered");
    clauses_.push_back(std::move(clause));
}

void FilterSet::set_range(const std::string& variable, Interval range) {
    auto it = std::find_if(clauses_.begin(), clauses_.end(),
                           [&](const FilterClause& c) { return c.variable == variable; });
    if (it == clauses_.end()) throw StateError("variable '" + variable + "' is not filtered");
    if (!(range.lo <= range.hi))
        throw InvalidFilter("filter range for '" + variable + "' has lo > hi");
    it->range = range;
}

void FilterSet::remove(const std::string& variable) {
    auto it = std::find_if(clauses_.begin(), clauses_.end(),
                           [&](const FilterClause& c) { return c.variable == variable; });
    if (it == clauses_.end()) throw StateError("variable '" + variable + "' is not filtered");
    clauses_.erase(it);
}

bool FilterSet::contains(const std::string& variable) const noexcept {
    return find(variable) != nullptr;
}

const FilterClause* FilterSet::find(const std::string& variable) const noexcept {
    for (const auto& c : clauses_)
        if (c.variable == variable) return &c;
    return nullptr;
}

void FilterSet::validate(const Dataset& d) const {
    for (const auto& c : clauses_) {
        d.column_index(c.variable);
        if (c.variable == d.outcome())
            throw InvalidFilter("the outcome '" + c.variable + "' cannot be filtered");
    }
}

// ============================================================================
// Spaces and distances
// ============================================================================

std::vector<std::size_t> DistanceSpace::resolve(const Dataset& d) const {
    if (variables.empty()) throw InvalidFilter("distance space has no variables");
    std::vector<std::size_t> cols;
    cols.reserve(variables.size());
    for (const auto& v : variables) cols.push_back(d.column_index(v));
    return cols;
}

NamedRow row_vector(const NormalizedView& view, std::size_t row) {
    NamedRow out;
    const auto& cols = view.dataset().columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out.emplace(cols[c].name, view.at(row, c));
    return out;
}

double point_distance(const NamedRow& a, const NamedRow& b, const DistanceSpace& space) {
    double sq = 0.0;
    for (const auto& v : space.variables) {
        const auto ia = a.find(v);
        const auto ib = b.find(v);
        if (ia == a.end() || ib == b.end()) throw KeyError(v);
        const double diff = ia->second - ib->second;
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

DistanceSpace matching_space(const Dataset& d, const FilterSet& f, MatchingSpaceMode mode) {
    DistanceSpace space;
    for (const auto& col : d.columns()) {
        if (mode == MatchingSpaceMode::all_dimensions) {
            space.variables.push_back(col.name);
        } else if (col.role != ColumnRole::outcome && !f.contains(col.name)) {
            space.variables.push_back(col.name);
        }
    }
    if (space.variables.empty())
        for (const auto& c : f.clauses()) space.variables.push_back(c.variable);
    return space;
}

// ============================================================================
// Subsets
// ============================================================================

InclusionSplit apply_filters(const Dataset& d, const FilterSet& f) {
    if (f.empty()) throw InvalidFilter("IN is undefined without at least one filter clause");
    f.validate(d);
    std::vector<std::pair<std::size_t, Interval>> clauses;
    for (const auto& c : f.clauses()) clauses.emplace_back(d.column_index(c.variable), c.range);

    InclusionSplit out;
    for (std::size_t r = 0; r < d.rows(); ++r) {
        const bool inside = std::all_of(clauses.begin(), clauses.end(), [&](const auto& c) {
            return c.second.contains(d.at(r, c.first));
        });
        (inside ? out.in_idx : out.ex_idx).push_back(r);
    }
    return out;
}

std::size_t counterfactual_size(std::size_t n_in, std::size_t n_ex, std::size_t n_total) {
    // "More than one third" is strict: 3|IN| > N. A single EX row still forms CF.
    if (3 * n_in > n_total) return n_ex == 0 ? 0 : std::max<std::size_t>(1, n_ex / 2);
    return std::min(n_in, n_ex);
}

CounterfactualSplit match_counterfactuals(const NormalizedView& view, const IndexSet& in_idx,
                                          const IndexSet& ex_idx, const DistanceSpace& space) {
    if (in_idx.empty()) throw DegeneratePartition("IN is empty");
    if (ex_idx.empty()) throw DegeneratePartition("EX is empty");
    const auto cols = space.resolve(view.dataset());

    const Matrix ex_points = view.cells().select(ex_idx, cols);
    const Matrix in_points = view.cells().select(in_idx, cols);
    const auto dist = kernels::nearest_distances(ex_points, in_points);

    const std::size_t k = counterfactual_size(in_idx.size(), ex_idx.size(), view.dataset().rows());
    // Positions into ex_idx; ex_idx is ascending so position order is row order.
    std::vector<std::size_t> order(ex_idx.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto closer = [&](std::size_t a, std::size_t b) {
        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    };
    if (k < order.size())
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                         order.end(), closer);

    std::vector<char> chosen(ex_idx.size(), 0);
    for (std::size_t i = 0; i < k; ++i) chosen[order[i]] = 1;

    CounterfactualSplit out;
    out.cf_idx.reserve(k);
    out.rem_idx.reserve(ex_idx.size() - k);
    for (std::size_t i = 0; i < ex_idx.size(); ++i)
        (chosen[i] ? out.cf_idx : out.rem_idx).push_back(ex_idx[i]);
    return out;
}

SubsetPartition partition(const NormalizedView& view, const FilterSet& f, MatchingSpaceMode mode,
                          std::size_t min_subset_size) {
    auto split = apply_filters(view.dataset(), f);
    if (split.in_idx.empty()) throw DegeneratePartition("no row matches the filters (IN is empty)");
    if (split.ex_idx.empty())
        throw DegeneratePartition("every row matches the filters (EX is empty)");

    auto cf = match_counterfactuals(view, split.in_idx, split.ex_idx,
                                    matching_space(view.dataset(), f, mode));
    SubsetPartition p;
    p.in_idx = std::move(split.in_idx);
    p.ex_idx = std::move(split.ex_idx);
    p.cf_idx = std::move(cf.cf_idx);
    p.rem_idx = std::move(cf.rem_idx);
    p.low_confidence = p.in_idx.size() < min_subset_size;
    return p;
}

}  // namespace cfguide
