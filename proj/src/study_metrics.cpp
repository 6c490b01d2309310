#include "cfguide/study_metrics.hpp"

#include "cfguide/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace cfguide {

using nlohmann::json;

// ============================================================================
// Events
// ============================================================================

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::add_variable: return "add_variable";
        case EventKind::remove_variable: return "remove_variable";
        case EventKind::change_range: return "change_range";
    }
    return "add_variable";
}

EventKind parse_event_kind(std::string_view text) {
    if (text == "add_variable") return EventKind::add_variable;
    if (text == "remove_variable") return EventKind::remove_variable;
    if (text == "change_range") return EventKind::change_range;
    throw ValidationError("unknown event kind '" + std::string(text) + "'");
}

std::string InteractionEvent::to_jsonl() const {
    json doc = {{"timestamp", timestamp},
                {"session", session},
                {"kind", to_string(kind)},
                {"variable", variable}};
    if (range) doc["range"] = {range->lo, range->hi};
    return doc.dump();
}

InteractionEvent InteractionEvent::from_json(std::string_view line) {
    const json doc = json::parse(line);
    InteractionEvent ev;
    ev.timestamp = doc.at("timestamp").get<std::int64_t>();
    ev.session = doc.value("session", std::string{});
    ev.kind = parse_event_kind(doc.at("kind").get<std::string>());
    ev.variable = doc.at("variable").get<std::string>();
    if (ev.variable.empty()) throw ValidationError("event variable is empty");
    if (doc.contains("range") && !doc["range"].is_null()) {
        const auto& r = doc["range"];
        if (!r.is_array() || r.size() != 2) throw ValidationError("range must be [lo, hi]");
        ev.range = Interval{r[0].get<double>(), r[1].get<double>()};
        if (!(ev.range->lo <= ev.range->hi)) throw ValidationError("range has lo > hi");
    }
    if (ev.kind == EventKind::change_range && !ev.range)
        throw ValidationError("change_range requires a range");
    return ev;
}

std::vector<InteractionEvent> parse_event_log(std::string_view jsonl) {
    std::vector<InteractionEvent> events;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        auto end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        auto line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        try {
            events.push_back(InteractionEvent::from_json(line));
        } catch (const json::exception& e) {
            throw LogError(line_no, std::string("malformed event: ") + e.what());
        } catch (const ValidationError& e) {
            throw LogError(line_no, e.what());
        }
    }
    return events;
}

std::string write_event_log(const std::vector<InteractionEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += e.to_jsonl();
        out.push_back('\n');
    }
    return out;
}

void validate_events(const std::vector<InteractionEvent>& events) {
    std::set<std::string> added;
    std::int64_t last_ts = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (i > 0 && e.timestamp < last_ts) throw LogError(i + 1, "timestamps must not decrease");
        last_ts = e.timestamp;
        switch (e.kind) {
            case EventKind::add_variable:
                if (!added.insert(e.variable).second)
                    throw LogError(i + 1, "'" + e.variable + "' is added twice");
                break;
            case EventKind::remove_variable:
                if (!added.erase(e.variable))
                    throw LogError(i + 1, "remove of '" + e.variable + "' which is not added");
                break;
            case EventKind::change_range:
                if (!added.count(e.variable))
                    throw LogError(i + 1, "range change on '" + e.variable + "' which is not added");
                if (!e.range) throw LogError(i + 1, "change_range without a range");
                break;
        }
    }
}

// ============================================================================
// Answers
// ============================================================================

namespace {

void require_distinct(const std::vector<std::string>& answers) {
    std::set<std::string> seen;
    for (const auto& a : answers)
        if (!seen.insert(a).second) throw InvalidAnswer("duplicate answer '" + a + "'");
}

}  // namespace

double t1_accuracy(const std::vector<std::string>& answers,
                   const std::vector<std::string>& truth_top5) {
    if (answers.size() > kMaxAnswers) throw InvalidAnswer("at most 5 answers are allowed");
    require_distinct(answers);
    const std::set<std::string> truth(truth_top5.begin(), truth_top5.end());
    const auto hits = std::count_if(answers.begin(), answers.end(),
                                    [&](const std::string& a) { return truth.count(a) > 0; });
    return static_cast<double>(hits) / static_cast<double>(kMaxAnswers);
}

std::size_t t2_offset(const std::vector<std::string>& answers,
                      const std::vector<std::string>& truth_ranking) {
    if (answers.empty() || answers.size() > kMaxAnswers)
        throw InvalidAnswer("a ranking holds 1 to 5 variables");
    require_distinct(answers);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const auto it = std::find(truth_ranking.begin(), truth_ranking.end(), answers[i]);
        if (it == truth_ranking.end())
            throw InvalidAnswer("'" + answers[i] + "' is not in the ground-truth ranking");
        const auto rank = static_cast<std::size_t>(it - truth_ranking.begin()) + 1;
        const std::size_t pos = i + 1;
        offset += rank > pos ? rank - pos : pos - rank;
    }
    return offset;
}

RankingEvaluation evaluate_answers(const std::vector<std::string>& t1_answers,
                                   const std::vector<std::string>& t2_ranking,
                                   const std::vector<std::string>& truth_ranking,
                                   std::size_t top_k) {
    RankingEvaluation ev;
    ev.answers = t2_ranking.empty() ? t1_answers : t2_ranking;
    ev.truth_ranking = truth_ranking;
    const std::vector<std::string> top(truth_ranking.begin(),
                                       truth_ranking.begin() +
                                           static_cast<std::ptrdiff_t>(std::min(top_k, truth_ranking.size())));
    ev.t1_accuracy = t1_accuracy(t1_answers, top);
    ev.t2_offset = t2_offset(ev.answers, truth_ranking);
    return ev;
}

std::size_t count_wrong_attempts(const std::vector<InteractionEvent>& events,
                                 const std::vector<std::string>& truth_top5) {
    validate_events(events);
    const std::set<std::string> truth(truth_top5.begin(), truth_top5.end());
    return static_cast<std::size_t>(std::count_if(
        events.begin(), events.end(),
        [&](const InteractionEvent& e) { return truth.count(e.variable) == 0; }));
}

// ============================================================================
// Behaviors
// ============================================================================

BehaviorCounts classify_behaviors(const std::vector<InteractionEvent>& events) {
    validate_events(events);
    struct Open {
        std::string variable;
        std::size_t ranges = 0;
    };
    // Adds that have not yet been paired, in add order. Only the last one can
    // still be open for go-back; any later add pairs it as go-next.
    std::vector<Open> open;
    BehaviorCounts out;

    for (const auto& e : events) {
        switch (e.kind) {
            case EventKind::add_variable:
                if (!open.empty()) {
                    (open.back().ranges > 0 ? out.gonext_after_range : out.gonext_without_range)++;
                    open.pop_back();
                }
                open.push_back({e.variable, 0});
                break;
            case EventKind::remove_variable:
                if (!open.empty() && open.back().variable == e.variable) {
                    (open.back().ranges > 0 ? out.goback_after_range : out.goback_without_range)++;
                    open.pop_back();
                } else {
                    std::erase_if(open, [&](const Open& o) { return o.variable == e.variable; });
                }
                break;
            case EventKind::change_range:
                for (auto& o : open)
                    if (o.variable == e.variable) ++o.ranges;
                break;
        }
    }
    return out;
}

// ============================================================================
// Search tree
// ============================================================================

SearchTree::SearchTree() { nodes_.push_back(SearchNode{}); }

std::size_t SearchTree::add_child(std::size_t parent, NodeTag tag, std::string variable) {
    SearchNode node;
    node.tag = tag;
    node.variable = std::move(variable);
    node.parent = parent;
    node.level = nodes_.at(parent).level + 1;
    nodes_.push_back(std::move(node));
    const std::size_t id = nodes_.size() - 1;
    nodes_[parent].children.push_back(id);
    return id;
}

SearchTree build_search_tree(const std::vector<InteractionEvent>& events) {
    validate_events(events);
    SearchTree tree;
    std::size_t cursor = SearchTree::root();
    std::map<std::string, std::size_t> latest;    // most recent node per variable
    std::map<std::string, std::size_t> add_node;  // node that added the variable

    for (const auto& e : events) {
        switch (e.kind) {
            case EventKind::add_variable:
                cursor = tree.add_child(cursor, NodeTag::filter_variable, e.variable);
                latest[e.variable] = cursor;
                add_node[e.variable] = cursor;
                break;
            case EventKind::change_range:
                cursor = tree.add_child(latest.at(e.variable), NodeTag::filter_range, e.variable);
                latest[e.variable] = cursor;
                break;
            case EventKind::remove_variable:
                cursor = tree.node(add_node.at(e.variable)).parent;
                latest.erase(e.variable);
                add_node.erase(e.variable);
                break;
        }
    }
    return tree;
}

TreeMetrics tree_metrics(const SearchTree& tree) {
    std::map<std::size_t, std::size_t> all;
    std::map<std::size_t, std::size_t> ranges;
    std::map<std::size_t, std::size_t> variables;
    TreeMetrics m;
    for (const auto& n : tree.nodes()) {
        m.depth = std::max(m.depth, n.level);
        ++all[n.level];
        if (n.tag == NodeTag::filter_range) ++ranges[n.level];
        if (n.tag == NodeTag::filter_variable) ++variables[n.level];
    }
    const auto widest = [](const std::map<std::size_t, std::size_t>& layer) {
        std::size_t w = 0;
        for (const auto& [level, count] : layer) w = std::max(w, count);
        return w;
    };
    m.max_width = widest(all);
    m.filter_range_width = widest(ranges);
    m.filter_variable_width = widest(variables);
    return m;
}

// ============================================================================
// Report
// ============================================================================

AnalysisReport analyze_events(const std::vector<InteractionEvent>& events,
                              const std::optional<std::vector<std::string>>& truth_top5) {
    validate_events(events);
    AnalysisReport rep;
    rep.events = events.size();
    for (const auto& e : events)
        (e.kind == EventKind::change_range ? rep.range_changes : rep.variable_changes)++;
    if (truth_top5) rep.wrong_attempts = count_wrong_attempts(events, *truth_top5);
    rep.behaviors = classify_behaviors(events);
    rep.tree = tree_metrics(build_search_tree(events));
    return rep;
}

}  // namespace cfguide
