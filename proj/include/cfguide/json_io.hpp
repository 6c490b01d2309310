#pragma once

// JSON forms shared by the CLI and the HTTP service. Field names are fixed.

#include "cfguide/causal_synth.hpp"
#include "cfguide/dataset.hpp"
#include "cfguide/guidance.hpp"
#include "cfguide/partition.hpp"
#include "cfguide/study_metrics.hpp"

#include <json.hpp>

#include <string>

namespace cfguide {

nlohmann::json to_json(const Interval& r);
nlohmann::json to_json(const FilterSet& f);
nlohmann::json to_json(const SubsetPartition& p);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const ColumnStats& s);
nlohmann::json to_json(const GuidanceReport& r);
nlohmann::json to_json(const VariableRanking& r);
nlohmann::json to_json(const RankingEvaluation& e);
nlohmann::json to_json(const BehaviorCounts& b);
nlohmann::json to_json(const TreeMetrics& t);
nlohmann::json to_json(const AnalysisReport& r);

// Compact single-line rendering used for byte comparisons and stdout.
std::string dump(const nlohmann::json& doc);

}  // namespace cfguide
