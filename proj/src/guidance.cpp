#include "cfguide/guidance.hpp"

#include "cfguide/errors.hpp"
#include "cfguide/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace cfguide {

std::string_view to_string(GuidanceMode mode) {
    switch (mode) {
        case GuidanceMode::cf: return "cf";
        case GuidanceMode::corr: return "corr";
        case GuidanceMode::both: return "both";
    }
    return "cf";
}

GuidanceMode parse_guidance_mode(std::string_view text) {
    if (text == "cf") return GuidanceMode::cf;
    if (text == "corr") return GuidanceMode::corr;
    if (text == "both") return GuidanceMode::both;
    throw ValidationError("unknown guidance mode '" + std::string(text) +
                          "' (expected cf, corr or both)");
}

GuidanceSpace GuidanceSpace::for_filters(const Dataset& d, const FilterSet& f,
                                         DissimilaritySpaceMode mode) {
    GuidanceSpace space;
    if (mode == DissimilaritySpaceMode::all_dimensions) {
        for (const auto& c : d.columns()) space.variables.push_back(c.name);
        return space;
    }
    for (const auto& c : f.clauses()) space.variables.push_back(c.variable);
    space.variables.push_back(d.outcome());
    return space;
}

// ============================================================================
// Scalar measures
// ============================================================================

double similarity(double dist) {
    if (!(dist >= 0.0)) throw DomainError("distance must be non-negative");
    return std::exp(-dist);
}

double cf_guidance(double d_in_cf, double d_in_rem) {
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(d_in_cf) || !in_unit(d_in_rem))
        throw DomainError("dissimilarities must lie in [0, 1]");
    return 0.5 * (d_in_cf + std::sqrt(d_in_cf * d_in_rem));
}

double distribution_score(std::size_t s1, std::size_t s2) {
    if (s1 + s2 == 0) throw DegeneratePartition("both subsets are empty");
    // 1 - 2|s2/(s1+s2) - 1/2| rewritten as 2 min(s1,s2) / (s1+s2): one correctly
    // rounded division, so the 0.1 validity boundary is hit exactly.
    return 2.0 * static_cast<double>(std::min(s1, s2)) / static_cast<double>(s1 + s2);
}

double subset_dissimilarity(const NormalizedView& view, const IndexSet& a, const IndexSet& b,
                            const GuidanceSpace& space) {
    if (a.empty() || b.empty()) throw DegeneratePartition("dissimilarity of an empty subset");
    DistanceSpace dspace{space.variables, DistanceMeasure::euclidean};
    const auto cols = dspace.resolve(view.dataset());
    return kernels::mean_dissimilarity(view.cells().select(a, cols), view.cells().select(b, cols));
}

CorrelationGuidance corr_guidance(const Dataset& d, const IndexSet& in_idx, const IndexSet& ex_idx) {
    if (in_idx.empty() || ex_idx.empty())
        throw DegeneratePartition("correlation needs non-empty IN and EX");
    const std::size_t y = d.outcome_index();
    const double n_in = static_cast<double>(in_idx.size());
    const double n_ex = static_cast<double>(ex_idx.size());
    const double n = n_in + n_ex;

    double sum_in = 0.0;
    double sum_ex = 0.0;
    for (std::size_t r : in_idx) sum_in += d.at(r, y);
    for (std::size_t r : ex_idx) sum_ex += d.at(r, y);
    const double mean = (sum_in + sum_ex) / n;

    double ss = 0.0;
    for (std::size_t r : in_idx) ss += (d.at(r, y) - mean) * (d.at(r, y) - mean);
    for (std::size_t r : ex_idx) ss += (d.at(r, y) - mean) * (d.at(r, y) - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::fabs(mean))) return {0.0, true};

    // Point-biserial: (mean_in - mean_ex) / sd * sqrt(p q).
    const double p = n_in / n;
    const double r = (sum_in / n_in - sum_ex / n_ex) / sd * std::sqrt(p * (1.0 - p));
    return {std::min(1.0, std::fabs(r)), false};
}

// ============================================================================
// Reports
// ============================================================================

GuidanceReport guidance_report(const NormalizedView& view, const FilterSet& f,
                               const SubsetPartition& p, GuidanceMode mode,
                               const GuidanceOptions& options) {
    GuidanceReport rep;
    rep.mode = mode;
    rep.sizes = {p.in_idx.size(), p.ex_idx.size(), p.cf_idx.size(), p.rem_idx.size()};
    rep.low_confidence = p.low_confidence;
    rep.distribution_in_cf = distribution_score(rep.sizes.in, rep.sizes.cf);
    rep.distribution_in_ex = distribution_score(rep.sizes.in, rep.sizes.ex);
    rep.valid_cf = rep.distribution_in_cf >= options.validity_threshold;
    rep.valid_corr = rep.distribution_in_ex >= options.validity_threshold;

    if (mode != GuidanceMode::corr) {
        const auto space = GuidanceSpace::for_filters(view.dataset(), f, options.dissimilarity);
        rep.d_in_cf = subset_dissimilarity(view, p.in_idx, p.cf_idx, space);
        rep.d_in_rem = subset_dissimilarity(view, p.in_idx, p.rem_idx, space);
        rep.guidance_cf = cf_guidance(*rep.d_in_cf, *rep.d_in_rem);
    }
    if (mode != GuidanceMode::cf) {
        const auto corr = corr_guidance(view.dataset(), p.in_idx, p.ex_idx);
        rep.guidance_corr = corr.value;
        rep.corr_degenerate = corr.degenerate;
    }
    return rep;
}

GuidanceReport guidance_report(const NormalizedView& view, const FilterSet& f, GuidanceMode mode,
                               const GuidanceOptions& options) {
    if (mode != GuidanceMode::corr)
        return guidance_report(view, f, partition(view, f, options.matching, options.min_subset_size),
                               mode, options);

    // Correlation guidance needs IN/EX only; CF/REM sizes follow from the sizing rule.
    auto split = apply_filters(view.dataset(), f);
    if (split.in_idx.empty()) throw DegeneratePartition("no row matches the filters (IN is empty)");
    if (split.ex_idx.empty())
        throw DegeneratePartition("every row matches the filters (EX is empty)");
    SubsetPartition p;
    const std::size_t k =
        counterfactual_size(split.in_idx.size(), split.ex_idx.size(), view.dataset().rows());
    p.in_idx = std::move(split.in_idx);
    p.ex_idx = std::move(split.ex_idx);
    p.cf_idx.assign(p.ex_idx.begin(), p.ex_idx.begin() + static_cast<std::ptrdiff_t>(k));
    p.rem_idx.assign(p.ex_idx.begin() + static_cast<std::ptrdiff_t>(k), p.ex_idx.end());
    p.low_confidence = p.in_idx.size() < options.min_subset_size;
    return guidance_report(view, f, p, mode, options);
}

VariableRanking rank_variables(const NormalizedView& view, const FilterSet& applied,
                               GuidanceMode mode, const GuidanceOptions& options) {
    if (mode == GuidanceMode::both)
        throw ValidationError("rankings are computed for a single mode (cf or corr)");
    const Dataset& d = view.dataset();
    applied.validate(d);

    std::vector<std::string> candidates;
    for (const auto& name : d.filterable_names())
        if (!applied.contains(name)) candidates.push_back(name);

    VariableRanking ranking;
    ranking.mode = mode;
    ranking.entries.resize(candidates.size());
    std::vector<std::exception_ptr> failures(candidates.size());

    // Candidates are independent; each writes only its own slot.
#pragma omp parallel for schedule(dynamic) num_threads(kernels::thread_count())
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(candidates.size()); ++i) {
        const auto slot = static_cast<std::size_t>(i);
        RankingEntry& entry = ranking.entries[slot];
        entry.variable = candidates[slot];
        try {
            FilterSet f = applied;
            f.add({entry.variable, *d.column(entry.variable).default_range});
            const auto rep = guidance_report(view, f, mode, options);
            if (mode == GuidanceMode::cf) {
                entry.score = *rep.guidance_cf;
                entry.distribution = rep.distribution_in_cf;
                entry.valid = rep.valid_cf;
            } else {
                entry.score = *rep.guidance_corr;
                entry.distribution = rep.distribution_in_ex;
                entry.valid = rep.valid_corr;
            }
        } catch (const DegeneratePartition&) {
            entry.degenerate = true;
        } catch (...) {
            failures[slot] = std::current_exception();
        }
    }
    for (const auto& failure : failures)
        if (failure) std::rethrow_exception(failure);

    std::sort(ranking.entries.begin(), ranking.entries.end(),
              [](const RankingEntry& a, const RankingEntry& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.variable < b.variable;
              });
    return ranking;
}

}  // namespace cfguide
