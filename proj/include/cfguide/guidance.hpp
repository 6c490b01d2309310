#pragma once

#include "cfguide/dataset.hpp"
#include "cfguide/partition.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cfguide {

enum class GuidanceMode { cf, corr, both };

std::string_view to_string(GuidanceMode mode);
// Throws ValidationError for anything other than cf, corr or both.
GuidanceMode parse_guidance_mode(std::string_view text);

// Which columns the subset dissimilarities compare.
enum class DissimilaritySpaceMode {
    selected,        // filter variables plus the outcome
    all_dimensions,  // every column
};

inline constexpr double kValidityThreshold = 0.1;

struct GuidanceOptions {
    MatchingSpaceMode matching = MatchingSpaceMode::complement;
    DissimilaritySpaceMode dissimilarity = DissimilaritySpaceMode::selected;
    std::size_t min_subset_size = kMinSubsetSize;
    double validity_threshold = kValidityThreshold;
};

// Variables the dissimilarities are computed over; always holds the outcome.
struct GuidanceSpace {
    std::vector<std::string> variables;

    static GuidanceSpace for_filters(const Dataset& d, const FilterSet& f,
                                     DissimilaritySpaceMode mode = DissimilaritySpaceMode::selected);
};

// exp(-dist); DomainError for negative or NaN distances.
double similarity(double dist);

// Mean pairwise dissimilarity 1 - similarity(distance) between two row sets.
double subset_dissimilarity(const NormalizedView& view, const IndexSet& a, const IndexSet& b,
                            const GuidanceSpace& space);

// 1/2 (D_in_cf + sqrt(D_in_cf * D_in_rem)); DomainError outside [0,1].
double cf_guidance(double d_in_cf, double d_in_rem);

struct CorrelationGuidance {
    double value = 0.0;
    bool degenerate = false;  // outcome has zero variance over IN and EX
};

// |point-biserial correlation| between IN membership and the raw outcome.
CorrelationGuidance corr_guidance(const Dataset& d, const IndexSet& in_idx, const IndexSet& ex_idx);

// 1 - 2 |s2 / (s1 + s2) - 1/2|.
double distribution_score(std::size_t s1, std::size_t s2);

struct SubsetSizes {
    std::size_t in = 0;
    std::size_t ex = 0;
    std::size_t cf = 0;
    std::size_t rem = 0;

    friend bool operator==(const SubsetSizes&, const SubsetSizes&) = default;
};

struct GuidanceReport {
    GuidanceMode mode = GuidanceMode::cf;
    std::optional<double> d_in_cf;
    std::optional<double> d_in_rem;
    std::optional<double> guidance_cf;
    std::optional<double> guidance_corr;
    double distribution_in_cf = 0.0;
    double distribution_in_ex = 0.0;
    bool valid_cf = false;
    bool valid_corr = false;
    bool low_confidence = false;
    bool corr_degenerate = false;
    SubsetSizes sizes;
};

GuidanceReport guidance_report(const NormalizedView& view, const FilterSet& f, GuidanceMode mode,
                               const GuidanceOptions& options = {});

// Same, reusing an already computed partition.
GuidanceReport guidance_report(const NormalizedView& view, const FilterSet& f,
                               const SubsetPartition& p, GuidanceMode mode,
                               const GuidanceOptions& options = {});

struct RankingEntry {
    std::string variable;
    double score = 0.0;         // shown to analysts as "Relevance"
    double distribution = 0.0;  // Distribution_IN,CF (cf) or Distribution_IN,EX (corr)
    bool valid = false;
    bool degenerate = false;    // candidate produced an empty IN or EX

    friend bool operator==(const RankingEntry&, const RankingEntry&) = default;
};

struct VariableRanking {
    GuidanceMode mode = GuidanceMode::cf;
    std::vector<RankingEntry> entries;  // descending score, ties alphabetical

    friend bool operator==(const VariableRanking&, const VariableRanking&) = default;
};

// Scores every filterable variable outside `applied` by the guidance of
// applied + {candidate at its default range}. Mode must be cf or corr.
VariableRanking rank_variables(const NormalizedView& view, const FilterSet& applied,
                               GuidanceMode mode, const GuidanceOptions& options = {});

}  // namespace cfguide
