#pragma once

#include "cfguide/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cfguide {

// ============================================================================
// Interaction log
// ============================================================================

enum class EventKind { add_variable, remove_variable, change_range };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct InteractionEvent {
    std::int64_t timestamp = 0;  // milliseconds since the epoch
    std::string session;
    EventKind kind = EventKind::add_variable;
    std::string variable;
    std::optional<Interval> range;  // required for change_range, optional for add

    // One JSONL line: {"timestamp", "session", "kind", "variable", "range"?}
    std::string to_jsonl() const;
    static InteractionEvent from_json(std::string_view line);

    friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

// Throws LogError naming the 1-based line of the first malformed entry.
std::vector<InteractionEvent> parse_event_log(std::string_view jsonl);
std::string write_event_log(const std::vector<InteractionEvent>& events);

// Replays the stream against the set of added variables; LogError when a
// remove/change_range targets a variable that is not added, an add repeats,
// or timestamps decrease.
void validate_events(const std::vector<InteractionEvent>& events);

// ============================================================================
// Answer scoring
// ============================================================================

inline constexpr std::size_t kMaxAnswers = 5;

// |answers ∩ truth_top5| / 5. InvalidAnswer on duplicates or more than 5 answers.
double t1_accuracy(const std::vector<std::string>& answers,
                   const std::vector<std::string>& truth_top5);

// Σ |i - Rank_GT(answer_i)| over 1-based positions. InvalidAnswer when an
// answer is missing from the truth, repeats, or there are not 1..5 answers.
std::size_t t2_offset(const std::vector<std::string>& answers,
                      const std::vector<std::string>& truth_ranking);

struct RankingEvaluation {
    std::vector<std::string> answers;
    std::vector<std::string> truth_ranking;
    double t1_accuracy = 0.0;
    std::size_t t2_offset = 0;
};

RankingEvaluation evaluate_answers(const std::vector<std::string>& t1_answers,
                                   const std::vector<std::string>& t2_ranking,
                                   const std::vector<std::string>& truth_ranking,
                                   std::size_t top_k = kMaxAnswers);

std::size_t count_wrong_attempts(const std::vector<InteractionEvent>& events,
                                 const std::vector<std::string>& truth_top5);

// ============================================================================
// Behaviors
// ============================================================================

struct BehaviorCounts {
    std::size_t goback_after_range = 0;
    std::size_t goback_without_range = 0;
    std::size_t gonext_after_range = 0;
    std::size_t gonext_without_range = 0;

    friend bool operator==(const BehaviorCounts&, const BehaviorCounts&) = default;
};

// Greedy left-to-right pairing. Each add(v) opens at most one pattern:
// a later add(w != v) while v is still the most recent open variable closes it
// as go-next; remove(v) with no other add in between closes it as go-back.
// "After range" iff a change_range(v) falls strictly inside the pair.
BehaviorCounts classify_behaviors(const std::vector<InteractionEvent>& events);

// ============================================================================
// Search tree
// ============================================================================

enum class NodeTag { root, filter_variable, filter_range };

struct SearchNode {
    NodeTag tag = NodeTag::root;
    std::string variable;
    std::size_t parent = 0;  // root points at itself
    std::vector<std::size_t> children;
    std::size_t level = 1;   // root is level 1
};

class SearchTree {
public:
    SearchTree();

    std::size_t add_child(std::size_t parent, NodeTag tag, std::string variable);

    const std::vector<SearchNode>& nodes() const noexcept { return nodes_; }
    const SearchNode& node(std::size_t id) const { return nodes_.at(id); }
    std::size_t size() const noexcept { return nodes_.size(); }
    static constexpr std::size_t root() noexcept { return 0; }

private:
    std::vector<SearchNode> nodes_;
};

// add_variable attaches under the cursor; change_range attaches under the
// most recent node of its variable; remove_variable adds no node and moves
// the cursor to the parent of the variable's add node.
SearchTree build_search_tree(const std::vector<InteractionEvent>& events);

struct TreeMetrics {
    std::size_t depth = 1;  // node count of the longest root-to-leaf path
    std::size_t max_width = 1;
    std::size_t filter_range_width = 0;
    std::size_t filter_variable_width = 0;

    friend bool operator==(const TreeMetrics&, const TreeMetrics&) = default;
};

TreeMetrics tree_metrics(const SearchTree& tree);

// ============================================================================
// Report
// ============================================================================

struct AnalysisReport {
    std::size_t events = 0;
    std::size_t variable_changes = 0;
    std::size_t range_changes = 0;
    std::optional<std::size_t> wrong_attempts;  // needs ground truth
    BehaviorCounts behaviors;
    TreeMetrics tree;
    std::optional<RankingEvaluation> evaluation;
};

AnalysisReport analyze_events(const std::vector<InteractionEvent>& events,
                              const std::optional<std::vector<std::string>>& truth_top5);

}  // namespace cfguide
