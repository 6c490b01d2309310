#include "cfguide/json_io.hpp"

namespace cfguide {

using nlohmann::json;

namespace {

template <typename T>
json optional_value(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const Interval& r) { return json::array({r.lo, r.hi}); }

json to_json(const FilterSet& f) {
    json out = json::array();
    for (const auto& c : f.clauses()) out.push_back({{"variable", c.variable}, {"range", to_json(c.range)}});
    return out;
}

json to_json(const SubsetPartition& p) {
    return {{"in", p.in_idx},
            {"ex", p.ex_idx},
            {"cf", p.cf_idx},
            {"rem", p.rem_idx},
            {"low_confidence", p.low_confidence}};
}

json to_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

json to_json(const ColumnStats& s) {
    return {{"min", s.min},       {"max", s.max}, {"q1", s.q1},
            {"median", s.median}, {"q3", s.q3},   {"histogram", to_json(s.histogram)}};
}

json to_json(const GuidanceReport& r) {
    return {{"mode", to_string(r.mode)},
            {"d_in_cf", optional_value(r.d_in_cf)},
            {"d_in_rem", optional_value(r.d_in_rem)},
            {"guidance_cf", optional_value(r.guidance_cf)},
            {"guidance_corr", optional_value(r.guidance_corr)},
            {"distribution_in_cf", r.distribution_in_cf},
            {"distribution_in_ex", r.distribution_in_ex},
            {"valid_cf", r.valid_cf},
            {"valid_corr", r.valid_corr},
            {"low_confidence", r.low_confidence},
            {"corr_degenerate", r.corr_degenerate},
            {"sizes", {{"in", r.sizes.in}, {"ex", r.sizes.ex}, {"cf", r.sizes.cf}, {"rem", r.sizes.rem}}}};
}

json to_json(const VariableRanking& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"variable", e.variable},
                           {"score", e.score},
                           {"distribution", e.distribution},
                           {"valid", e.valid},
                           {"degenerate", e.degenerate}});
    }
    return {{"mode", to_string(r.mode)}, {"entries", entries}};
}

json to_json(const RankingEvaluation& e) {
    return {{"answers", e.answers},
            {"truth_ranking", e.truth_ranking},
            {"t1_accuracy", e.t1_accuracy},
            {"t2_offset", e.t2_offset}};
}

json to_json(const BehaviorCounts& b) {
    return {{"goback_after_range", b.goback_after_range},
            {"goback_without_range", b.goback_without_range},
            {"gonext_after_range", b.gonext_after_range},
            {"gonext_without_range", b.gonext_without_range}};
}

json to_json(const TreeMetrics& t) {
    return {{"depth", t.depth},
            {"max_width", t.max_width},
            {"filter_range_width", t.filter_range_width},
            {"filter_variable_width", t.filter_variable_width}};
}

json to_json(const AnalysisReport& r) {
    return {{"events", r.events},
            {"variable_changes", r.variable_changes},
            {"range_changes", r.range_changes},
            {"wrong_attempts", optional_value(r.wrong_attempts)},
            {"behaviors", to_json(r.behaviors)},
            {"tree", to_json(r.tree)},
            {"evaluation", r.evaluation ? to_json(*r.evaluation) : json(nullptr)}};
}

std::string dump(const json& doc) { return doc.dump(); }

}  // namespace cfguide
