#pragma once

#include "cfguide/causal_synth.hpp"
#include "cfguide/dataset.hpp"
#include "cfguide/guidance.hpp"
#include "cfguide/partition.hpp"
#include "cfguide/study_metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace cfguide {

// Legend wording shown for each subset.
inline constexpr std::string_view kLabelIn = "filtered data";
inline constexpr std::string_view kLabelCf = "those similar with filtered data";
inline constexpr std::string_view kLabelRem = "those dissimilar with filtered data";
inline constexpr std::string_view kLabelEx = "those not in filtered data";

struct DistributionSeries {
    std::string subset;  // in | cf | rem | ex
    std::string label;
    std::vector<std::size_t> counts;
};

// Outcome histograms per subset over shared bin edges. cf sessions carry
// IN/CF/REM, corr sessions IN/EX. Empty when no filter is applied or the
// filters leave IN or EX empty.
struct DistributionPayload {
    GuidanceMode mode = GuidanceMode::cf;
    std::string outcome;
    std::vector<double> edges;
    std::vector<DistributionSeries> series;
    std::optional<std::string> empty_reason;

    nlohmann::json to_json() const;
};

enum class FilterAction { add, set_range, remove };

FilterAction parse_filter_action(std::string_view text);

struct Answers {
    std::vector<std::string> t1;
    std::vector<std::string> t2;
    int confidence_t1 = 0;  // 1..5, 0 = not given
    int confidence_t2 = 0;
};

struct SessionSnapshot {
    std::string id;
    std::string dataset_id;
    GuidanceMode mode = GuidanceMode::cf;
    FilterSet filters;
    std::size_t event_count = 0;
    std::optional<Answers> answers;

    nlohmann::json to_json() const;
};

// What the analyst sees after a mutation or on a plain query.
struct GuidanceView {
    VariableRanking ranking;
    std::optional<GuidanceReport> report;  // present when filters are applied and non-degenerate
    std::optional<std::string> report_error;

    nlohmann::json to_json() const;
};

struct MutationResult {
    FilterSet filters;
    GuidanceView guidance;
    DistributionPayload distributions;

    nlohmann::json to_json() const;
};

struct ServiceConfig {
    std::filesystem::path data_dir;  // empty: in-memory only
    std::size_t row_cap = 5000;      // 0 disables subsampling
    std::uint64_t sample_seed = 1;
    GuidanceOptions guidance;
};

// Rebuilds a filter set by replaying an event log against a dataset's
// default ranges.
FilterSet replay_filters(const Dataset& d, const std::vector<InteractionEvent>& events);

class SessionService {
public:
    explicit SessionService(ServiceConfig config = {});
    ~SessionService();
    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    const ServiceConfig& config() const noexcept { return config_; }

    // Registers a dataset; returns its id (generated when `id` is empty).
    std::string add_dataset(std::string_view csv, const DatasetConfig& config,
                            std::optional<GroundTruth> truth = std::nullopt, std::string id = {});
    std::vector<std::string> dataset_ids() const;
    nlohmann::json dataset_info(const std::string& dataset_id) const;
    ColumnStats dataset_column_stats(const std::string& dataset_id, const std::string& var) const;

    std::string create_session(const std::string& dataset_id, std::string_view mode);
    std::vector<std::string> session_ids() const;
    SessionSnapshot snapshot(const std::string& session_id) const;
    std::vector<InteractionEvent> events(const std::string& session_id) const;

    MutationResult mutate_filter(const std::string& session_id, FilterAction action,
                                 const std::string& variable,
                                 std::optional<Interval> range = std::nullopt);
    GuidanceView guidance(const std::string& session_id) const;
    DistributionPayload distributions(const std::string& session_id) const;

    // Stores the answers; evaluation is returned when the dataset has ground truth.
    std::optional<RankingEvaluation> submit_answers(const std::string& session_id, Answers answers);
    AnalysisReport export_analysis(const std::string& session_id) const;

private:
    struct DatasetEntry;
    struct Session;

    std::shared_ptr<const DatasetEntry> find_dataset(const std::string& id) const;
    std::shared_ptr<Session> find_session(const std::string& id) const;
    std::shared_ptr<DatasetEntry> build_entry(std::string id, std::string_view csv,
                                              const DatasetConfig& config,
                                              std::optional<GroundTruth> truth) const;

    GuidanceView compute_guidance(const DatasetEntry& ds, const Session& s) const;
    DistributionPayload compute_distributions(const DatasetEntry& ds, const Session& s) const;
    AnalysisReport compute_analysis(const DatasetEntry& ds, const Session& s) const;

    void restore();
    void persist_snapshot(const Session& s) const;
    void persist_event(const Session& s, const InteractionEvent& e) const;

    ServiceConfig config_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<DatasetEntry>> datasets_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

}  // namespace cfguide
