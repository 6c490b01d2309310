#pragma once

// Shared builders for the test binaries.

#include "cfguide/dataset.hpp"
#include "cfguide/guidance.hpp"
#include "cfguide/partition.hpp"
#include "cfguide/study_metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace cfguide;

// Column-major construction: one vector per column.
inline Dataset make_dataset(const std::vector<std::string>& names,
                            const std::vector<std::vector<double>>& columns,
                            const std::string& outcome,
                            const std::map<std::string, Interval>& ranges = {}) {
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    Matrix m(rows, names.size());
    for (std::size_t c = 0; c < names.size(); ++c)
        for (std::size_t r = 0; r < rows; ++r) m(r, c) = columns[c][r];
    return Dataset("fixture", names, std::move(m), outcome, ranges);
}

// Gaussian table with columns v0..v{m-2} and outcome "y".
inline Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t m) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::string> names;
    for (std::size_t c = 0; c + 1 < m; ++c) names.push_back("v" + std::to_string(c));
    names.push_back("y");
    Matrix cells(n, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) cells(r, c) = normal(rng);
    return Dataset("random", names, std::move(cells), "y");
}

// Closed range from the q-quantile of a column to its maximum.
inline Interval upper_tail(const Dataset& d, const std::string& var, double q) {
    auto v = d.column_values(d.column_index(var));
    std::sort(v.begin(), v.end());
    return {sorted_quantile(v, q), v.back()};
}

// ---------------------------------------------------------------------------
// Outcome archetypes. z is a covariate, x = z + small noise is the filter
// variable (top 10% selected), y is the outcome. Matching runs on z only, so
// the subsets can be fixed before y is drawn; y then gets a unit shift on
// the subsets listed for the case.
// ---------------------------------------------------------------------------

struct ArchetypeShift {
    double in = 0.0;
    double cf = 0.0;
    double rem = 0.0;
};

inline ArchetypeShift archetype_shift(int which) {
    switch (which) {
        case 1: return {0.0, 0.0, 0.0};   // all alike
        case 2: return {0.0, 0.0, 1.0};   // only REM differs
        case 3: return {0.0, 1.0, 0.0};   // only CF differs
        case 4: return {1.0, 0.0, 0.0};   // IN differs from both
        case 5: return {1.0, 0.0, -1.0};  // IN and REM differ in opposite directions
        default: return {};
    }
}

struct Archetype {
    Dataset data;
    FilterSet filter;
};

inline Archetype make_archetype(int which, std::uint64_t seed, std::size_t n = 1000) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(n), x(n), y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = normal(rng);
        x[i] = z[i] + 0.05 * normal(rng);
    }
    const std::vector<std::string> names{"x", "z", "y"};
    const Dataset draft = make_dataset(names, {x, z, y}, "y");
    FilterSet f{{"x", upper_tail(draft, "x", 0.9)}};
    const NormalizedView view(draft);
    const auto p = partition(view, f);

    const auto shift = archetype_shift(which);
    for (std::size_t i = 0; i < n; ++i) y[i] = 0.1 * normal(rng);
    for (auto i : p.in_idx) y[i] += shift.in;
    for (auto i : p.cf_idx) y[i] += shift.cf;
    for (auto i : p.rem_idx) y[i] += shift.rem;
    return {make_dataset(names, {x, z, y}, "y"), std::move(f)};
}

// ---------------------------------------------------------------------------
// Event logs
// ---------------------------------------------------------------------------

class LogBuilder {
public:
    LogBuilder& add(const std::string& v) { return push(EventKind::add_variable, v, Interval{0, 1}); }
    LogBuilder& range(const std::string& v) {
        return push(EventKind::change_range, v, Interval{0, 0.5});
    }
    LogBuilder& remove(const std::string& v) { return push(EventKind::remove_variable, v, {}); }

    const std::vector<InteractionEvent>& events() const { return events_; }

private:
    LogBuilder& push(EventKind kind, const std::string& v, std::optional<Interval> r) {
        InteractionEvent e;
        e.timestamp = 1000 + static_cast<std::int64_t>(events_.size()) * 10;
        e.session = "s";
        e.kind = kind;
        e.variable = v;
        e.range = r;
        events_.push_back(std::move(e));
        return *this;
    }
    std::vector<InteractionEvent> events_;
};

// add X, tweak its range, give up on it.
inline std::vector<InteractionEvent> goback_after_range_log() {
    return LogBuilder().add("X").range("X").remove("X").events();
}

// Exploration shaped like the published example tree: six first-level
// variables, two of which are layered with a second variable.
inline std::vector<InteractionEvent> exploration_tree_log() {
    LogBuilder b;
    b.add("V1").range("V1").range("V1").range("V1").range("V1").remove("V1");
    for (const char* v : {"V2", "V3", "V4"}) b.add(v).range(v).range(v).remove(v);
    b.add("V5").add("W1").range("W1").range("V5").range("V5").remove("W1").remove("V5");
    b.add("V6").add("W2").range("W2").range("V6").range("V6").remove("W2").remove("V6");
    return b.events();
}

}  // namespace fixtures
