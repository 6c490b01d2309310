#include "cfguide/session_service.hpp"

#include "cfguide/errors.hpp"
#include "cfguide/json_io.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

namespace cfguide {

namespace fs = std::filesystem;
using nlohmann::json;

// ============================================================================
// Internal state
// ============================================================================

struct SessionService::DatasetEntry {
    std::string id;
    std::string csv;  // as uploaded, before any row cap
    DatasetConfig config;
    std::unique_ptr<Dataset> dataset;
    std::unique_ptr<NormalizedView> view;
    std::optional<GroundTruth> truth;
    std::size_t source_rows = 0;
};

struct SessionService::Session {
    std::string id;
    std::string dataset_id;
    GuidanceMode mode = GuidanceMode::cf;
    FilterSet filters;
    std::vector<InteractionEvent> log;
    std::optional<Answers> answers;
    mutable std::mutex mutex;  // single writer per session
};

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("io_error", "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
    fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, p);
}

bool valid_id(std::string_view id) {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](char c) {
               return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
           });
}

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

json answers_to_json(const Answers& a) {
    return {{"t1", a.t1},
            {"t2", a.t2},
            {"confidence", {{"t1", a.confidence_t1}, {"t2", a.confidence_t2}}}};
}

Answers answers_from_json(const json& doc) {
    Answers a;
    a.t1 = doc.value("t1", std::vector<std::string>{});
    a.t2 = doc.value("t2", std::vector<std::string>{});
    if (doc.contains("confidence")) {
        a.confidence_t1 = doc["confidence"].value("t1", 0);
        a.confidence_t2 = doc["confidence"].value("t2", 0);
    }
    return a;
}

}  // namespace

// ============================================================================
// Value types
// ============================================================================

json DistributionPayload::to_json() const {
    json s = json::array();
    for (const auto& d : series)
        s.push_back({{"subset", d.subset}, {"label", d.label}, {"counts", d.counts}});
    return {{"mode", to_string(mode)},
            {"outcome", outcome},
            {"edges", edges},
            {"series", s},
            {"empty_reason", empty_reason ? json(*empty_reason) : json(nullptr)}};
}

json SessionSnapshot::to_json() const {
    return {{"id", id},
            {"dataset", dataset_id},
            {"mode", to_string(mode)},
            {"filters", cfguide::to_json(filters)},
            {"events", event_count},
            {"answers", answers ? answers_to_json(*answers) : json(nullptr)}};
}

json GuidanceView::to_json() const {
    return {{"ranking", cfguide::to_json(ranking)},
            {"report", report ? cfguide::to_json(*report) : json(nullptr)},
            {"report_error", report_error ? json(*report_error) : json(nullptr)}};
}

json MutationResult::to_json() const {
    return {{"filters", cfguide::to_json(filters)},
            {"guidance", guidance.to_json()},
            {"distributions", distributions.to_json()}};
}

FilterAction parse_filter_action(std::string_view text) {
    if (text == "add") return FilterAction::add;
    if (text == "set_range") return FilterAction::set_range;
    if (text == "remove") return FilterAction::remove;
    throw ValidationError("unknown filter action '" + std::string(text) +
                          "' (expected add, set_range or remove)");
}

FilterSet replay_filters(const Dataset& d, const std::vector<InteractionEvent>& events) {
    validate_events(events);
    FilterSet f;
    for (const auto& e : events) {
        switch (e.kind) {
            case EventKind::add_variable:
                f.add({e.variable, e.range ? *e.range : *d.column(e.variable).default_range});
                break;
            case EventKind::change_range: f.set_range(e.variable, *e.range); break;
            case EventKind::remove_variable: f.remove(e.variable); break;
        }
    }
    return f;
}

// ============================================================================
// Service
// ============================================================================

SessionService::SessionService(ServiceConfig config) : config_(std::move(config)) {
    if (!config_.data_dir.empty()) restore();
}

SessionService::~SessionService() = default;

std::shared_ptr<SessionService::DatasetEntry> SessionService::build_entry(
    std::string id, std::string_view csv, const DatasetConfig& config,
    std::optional<GroundTruth> truth) const {
    auto entry = std::make_shared<DatasetEntry>();
    entry->id = std::move(id);
    entry->csv = std::string(csv);
    entry->config = config;
    Dataset loaded = load_csv(csv, config);
    entry->source_rows = loaded.rows();
    entry->dataset = std::make_unique<Dataset>(loaded.subsample(config_.row_cap, config_.sample_seed));
    entry->view = std::make_unique<NormalizedView>(*entry->dataset);
    if (truth) {
        for (const auto& e : truth->ranking) {
            if (!entry->dataset->has_column(e.variable))
                throw ValidationError("ground truth names unknown column '" + e.variable + "'");
        }
    }
    entry->truth = std::move(truth);
    return entry;
}

std::string SessionService::add_dataset(std::string_view csv, const DatasetConfig& config,
                                        std::optional<GroundTruth> truth, std::string id) {
    if (!id.empty() && !valid_id(id))
        throw ValidationError("dataset id may only contain letters, digits, '-' and '_'");
    auto entry = build_entry(id, csv, config, std::move(truth));

    std::unique_lock lock(mutex_);
    if (entry->id.empty()) {
        do {
            entry->id = "ds-" + std::to_string(next_id_++);
        } while (datasets_.count(entry->id));
    } else if (datasets_.count(entry->id)) {
        throw StateError("dataset '" + entry->id + "' already exists");
    }
    if (!config_.data_dir.empty()) {
        const fs::path dir = config_.data_dir / "datasets" / entry->id;
        write_file(dir / "data.csv", entry->csv);
        write_file(dir / "config.json", entry->config.to_json());
        if (entry->truth) write_file(dir / "truth.json", entry->truth->to_json());
    }
    datasets_[entry->id] = entry;
    return entry->id;
}

std::vector<std::string> SessionService::dataset_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : datasets_) out.push_back(id);
    return out;
}

json SessionService::dataset_info(const std::string& dataset_id) const {
    const auto ds = find_dataset(dataset_id);
    json cols = json::array();
    for (const auto& c : ds->dataset->columns()) {
        json col = {{"name", c.name},
                    {"role", c.role == ColumnRole::outcome ? "outcome" : "filterable"},
                    {"min", c.min},
                    {"max", c.max}};
        col["default_range"] = c.default_range ? to_json(*c.default_range) : json(nullptr);
        cols.push_back(col);
    }
    return {{"id", ds->id},
            {"name", ds->dataset->name()},
            {"rows", ds->dataset->rows()},
            {"source_rows", ds->source_rows},
            {"outcome", ds->dataset->outcome()},
            {"bins", ds->dataset->bins()},
            {"columns", cols},
            {"has_ground_truth", ds->truth.has_value()}};
}

ColumnStats SessionService::dataset_column_stats(const std::string& dataset_id,
                                                 const std::string& var) const {
    return column_stats(*find_dataset(dataset_id)->dataset, var);
}

std::shared_ptr<const SessionService::DatasetEntry> SessionService::find_dataset(
    const std::string& id) const {
    std::shared_lock lock(mutex_);
    const auto it = datasets_.find(id);
    if (it == datasets_.end()) throw NotFound("unknown dataset '" + id + "'");
    return it->second;
}

std::shared_ptr<SessionService::Session> SessionService::find_session(const std::string& id) const {
    std::shared_lock lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
    return it->second;
}

std::string SessionService::create_session(const std::string& dataset_id, std::string_view mode) {
    const GuidanceMode m = parse_guidance_mode(mode);
    if (m == GuidanceMode::both) throw ValidationError("a session uses either cf or corr guidance");
    find_dataset(dataset_id);

    auto s = std::make_shared<Session>();
    s->dataset_id = dataset_id;
    s->mode = m;

    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::unique_lock lock(mutex_);
    do {
        std::ostringstream id;
        id << "s-" << std::hex << (rng() & 0xffffffffffffULL);
        s->id = id.str();
    } while (sessions_.count(s->id));
    sessions_[s->id] = s;
    lock.unlock();

    persist_snapshot(*s);
    if (!config_.data_dir.empty())
        write_file(config_.data_dir / "sessions" / (s->id + ".jsonl"), "");
    return s->id;
}

std::vector<std::string> SessionService::session_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
}

SessionSnapshot SessionService::snapshot(const std::string& session_id) const {
    const auto s = find_session(session_id);
    std::lock_guard lock(s->mutex);
    return {s->id, s->dataset_id, s->mode, s->filters, s->log.size(), s->answers};
}

std::vector<InteractionEvent> SessionService::events(const std::string& session_id) const {
    const auto s = find_session(session_id);
    std::lock_guard lock(s->mutex);
    return s->log;
}

MutationResult SessionService::mutate_filter(const std::string& session_id, FilterAction action,
                                             const std::string& variable,
                                             std::optional<Interval> range) {
    const auto s = find_session(session_id);
    const auto ds = find_dataset(s->dataset_id);
    const Dataset& d = *ds->dataset;
    const auto& col = d.column(variable);  // KeyError for unknown names
    if (col.role == ColumnRole::outcome)
        throw InvalidFilter("the outcome '" + variable + "' cannot be filtered");
    if (range && !(range->lo <= range->hi)) throw InvalidFilter("range has lo > hi");

    std::lock_guard lock(s->mutex);
    InteractionEvent ev;
    ev.session = s->id;
    ev.variable = variable;
    ev.timestamp = std::max(now_ms(), s->log.empty() ? 0 : s->log.back().timestamp);

    FilterSet next = s->filters;
    switch (action) {
        case FilterAction::add:
            if (next.contains(variable))
                throw StateError("variable '" + variable + "' is already added");
            ev.kind = EventKind::add_variable;
            ev.range = range ? *range : *col.default_range;
            next.add({variable, *ev.range});
            break;
        case FilterAction::set_range:
            if (!range) throw ValidationError("set_range requires a range");
            if (!next.contains(variable))
                throw StateError("variable '" + variable + "' is not added");
            ev.kind = EventKind::change_range;
            ev.range = range;
            next.set_range(variable, *range);
            break;
        case FilterAction::remove:
            if (!next.contains(variable))
                throw StateError("variable '" + variable + "' is not added");
            ev.kind = EventKind::remove_variable;
            next.remove(variable);
            break;
    }
    s->filters = std::move(next);
    s->log.push_back(ev);
    persist_event(*s, ev);

    MutationResult out;
    out.filters = s->filters;
    out.guidance = compute_guidance(*ds, *s);
    out.distributions = compute_distributions(*ds, *s);
    return out;
}

GuidanceView SessionService::guidance(const std::string& session_id) const {
    const auto s = find_session(session_id);
    const auto ds = find_dataset(s->dataset_id);
    std::lock_guard lock(s->mutex);
    return compute_guidance(*ds, *s);
}

DistributionPayload SessionService::distributions(const std::string& session_id) const {
    const auto s = find_session(session_id);
    const auto ds = find_dataset(s->dataset_id);
    std::lock_guard lock(s->mutex);
    return compute_distributions(*ds, *s);
}

GuidanceView SessionService::compute_guidance(const DatasetEntry& ds, const Session& s) const {
    GuidanceView out;
    out.ranking = rank_variables(*ds.view, s.filters, s.mode, config_.guidance);
    if (!s.filters.empty()) {
        try {
            out.report = guidance_report(*ds.view, s.filters, s.mode, config_.guidance);
        } catch (const DegeneratePartition& e) {
            out.report_error = e.what();
        }
    }
    return out;
}

DistributionPayload SessionService::compute_distributions(const DatasetEntry& ds,
                                                          const Session& s) const {
    const Dataset& d = *ds.dataset;
    DistributionPayload out;
    out.mode = s.mode;
    out.outcome = d.outcome();
    const auto& spec = d.columns()[d.outcome_index()];
    out.edges = make_histogram({}, spec.min, spec.max, d.bins()).edges;
    if (s.filters.empty()) {
        out.empty_reason = "no filter applied";
        return out;
    }

    const auto outcome_values = [&](const IndexSet& rows) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (std::size_t r : rows) v.push_back(d.at(r, d.outcome_index()));
        return make_histogram(v, spec.min, spec.max, d.bins()).counts;
    };
    try {
        if (s.mode == GuidanceMode::cf) {
            const auto p = partition(*ds.view, s.filters, config_.guidance.matching,
                                     config_.guidance.min_subset_size);
            out.series.push_back({"in", std::string(kLabelIn), outcome_values(p.in_idx)});
            out.series.push_back({"cf", std::string(kLabelCf), outcome_values(p.cf_idx)});
            out.series.push_back({"rem", std::string(kLabelRem), outcome_values(p.rem_idx)});
        } else {
            const auto split = apply_filters(d, s.filters);
            if (split.in_idx.empty()) throw DegeneratePartition("no row matches the filters (IN is empty)");
            if (split.ex_idx.empty())
                throw DegeneratePartition("every row matches the filters (EX is empty)");
            out.series.push_back({"in", std::string(kLabelIn), outcome_values(split.in_idx)});
            out.series.push_back({"ex", std::string(kLabelEx), outcome_values(split.ex_idx)});
        }
    } catch (const DegeneratePartition& e) {
        out.series.clear();
        out.empty_reason = e.what();
    }
    return out;
}

std::optional<RankingEvaluation> SessionService::submit_answers(const std::string& session_id,
                                                                Answers answers) {
    const auto s = find_session(session_id);
    const auto ds = find_dataset(s->dataset_id);
    const auto check = [&](const std::vector<std::string>& list, const char* task) {
        if (list.size() > kMaxAnswers)
            throw InvalidAnswer(std::string(task) + " allows at most 5 variables");
        std::vector<std::string> sorted = list;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw InvalidAnswer(std::string(task) + " contains duplicate variables");
        for (const auto& v : list) {
            if (!ds->dataset->has_column(v) || v == ds->dataset->outcome())
                throw InvalidAnswer("'" + v + "' is not a filterable variable");
        }
    };
    check(answers.t1, "T1");
    check(answers.t2, "T2");
    for (int c : {answers.confidence_t1, answers.confidence_t2})
        if (c < 0 || c > 5) throw InvalidAnswer("confidence must be on a 1-5 scale");

    std::lock_guard lock(s->mutex);
    std::optional<RankingEvaluation> eval;
    if (ds->truth && (!answers.t1.empty() || !answers.t2.empty()))
        eval = evaluate_answers(answers.t1, answers.t2, ds->truth->ranked_names());
    s->answers = std::move(answers);
    persist_snapshot(*s);
    return eval;
}

AnalysisReport SessionService::compute_analysis(const DatasetEntry& ds, const Session& s) const {
    std::optional<std::vector<std::string>> top;
    if (ds.truth) top = ds.truth->top_k;
    AnalysisReport rep = analyze_events(s.log, top);
    if (ds.truth && s.answers && (!s.answers->t1.empty() || !s.answers->t2.empty()))
        rep.evaluation = evaluate_answers(s.answers->t1, s.answers->t2, ds.truth->ranked_names());
    return rep;
}

AnalysisReport SessionService::export_analysis(const std::string& session_id) const {
    const auto s = find_session(session_id);
    const auto ds = find_dataset(s->dataset_id);
    std::lock_guard lock(s->mutex);
    return compute_analysis(*ds, *s);
}

// ============================================================================
// Persistence
// ============================================================================

void SessionService::persist_snapshot(const Session& s) const {
    if (config_.data_dir.empty()) return;
    json doc = {{"id", s.id}, {"dataset", s.dataset_id}, {"mode", to_string(s.mode)}};
    doc["answers"] = s.answers ? answers_to_json(*s.answers) : json(nullptr);
    write_file(config_.data_dir / "sessions" / (s.id + ".json"), doc.dump(2));
}

void SessionService::persist_event(const Session& s, const InteractionEvent& e) const {
    if (config_.data_dir.empty()) return;
    const fs::path p = config_.data_dir / "sessions" / (s.id + ".jsonl");
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::app);
    if (!out) throw Error("io_error", "cannot append to " + p.string());
    out << e.to_jsonl() << '\n';
}

void SessionService::restore() {
    const fs::path ddir = config_.data_dir / "datasets";
    if (fs::exists(ddir)) {
        for (const auto& dir : fs::directory_iterator(ddir)) {
            if (!dir.is_directory()) continue;
            const auto id = dir.path().filename().string();
            const auto cfg = DatasetConfig::from_json(read_file(dir.path() / "config.json"));
            std::optional<GroundTruth> truth;
            if (fs::exists(dir.path() / "truth.json"))
                truth = GroundTruth::from_json(read_file(dir.path() / "truth.json"));
            datasets_[id] = build_entry(id, read_file(dir.path() / "data.csv"), cfg, std::move(truth));
        }
    }
    const fs::path sdir = config_.data_dir / "sessions";
    if (fs::exists(sdir)) {
        for (const auto& file : fs::directory_iterator(sdir)) {
            if (file.path().extension() != ".json") continue;
            const json doc = json::parse(read_file(file.path()));
            auto s = std::make_shared<Session>();
            s->id = doc.at("id").get<std::string>();
            s->dataset_id = doc.at("dataset").get<std::string>();
            s->mode = parse_guidance_mode(doc.at("mode").get<std::string>());
            if (doc.contains("answers") && !doc["answers"].is_null())
                s->answers = answers_from_json(doc["answers"]);
            const auto ds = datasets_.find(s->dataset_id);
            if (ds == datasets_.end())
                throw NotFound("session '" + s->id + "' references missing dataset '" +
                               s->dataset_id + "'");
            const fs::path log = sdir / (s->id + ".jsonl");
            if (fs::exists(log)) s->log = parse_event_log(read_file(log));
            s->filters = replay_filters(*ds->second->dataset, s->log);
            sessions_[s->id] = s;
        }
    }
    for (const auto& [id, _] : datasets_) {
        if (id.rfind("ds-", 0) == 0) {
            try {
                next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(id.substr(3)) + 1);
            } catch (const std::exception&) {
            }
        }
    }
}

}  // namespace cfguide
