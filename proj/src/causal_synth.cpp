#include "cfguide/causal_synth.hpp"

#include "cfguide/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

namespace cfguide {

using nlohmann::json;

// ============================================================================
// Documents
// ============================================================================

CausalGraphSpec CausalGraphSpec::from_json(std::string_view text) {
    CausalGraphSpec spec;
    try {
        const json doc = json::parse(text);
        for (const auto& n : doc.at("nodes")) {
            if (n.is_string()) {
                spec.nodes.push_back({n.get<std::string>(), false});
            } else {
                spec.nodes.push_back({n.at("name").get<std::string>(), n.value("outcome", false)});
            }
        }
        for (const auto& e : doc.value("edges", json::array())) {
            spec.edges.push_back({e.at("source").get<std::string>(), e.at("target").get<std::string>(),
                                  e.at("strength").get<double>()});
        }
        spec.noise_scale = doc.value("noise_scale", 1.0);
        spec.seed = doc.value("seed", std::uint64_t{0});
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed causal graph spec: ") + e.what());
    }
    return spec;
}

std::string CausalGraphSpec::to_json() const {
    json nodes_doc = json::array();
    for (const auto& n : nodes) {
        json node = {{"name", n.name}};
        if (n.outcome) node["outcome"] = true;
        nodes_doc.push_back(node);
    }
    json edges_doc = json::array();
    for (const auto& e : edges)
        edges_doc.push_back({{"source", e.source}, {"target", e.target}, {"strength", e.strength}});
    return json{{"nodes", nodes_doc}, {"edges", edges_doc}, {"noise_scale", noise_scale},
                {"seed", seed}}
        .dump(2);
}

std::string CausalGraphSpec::outcome() const {
    for (const auto& n : nodes)
        if (n.outcome) return n.name;
    return {};
}

GroundTruth GroundTruth::from_json(std::string_view text) {
    GroundTruth gt;
    try {
        const json doc = json::parse(text);
        gt.outcome = doc.value("outcome", std::string{});
        for (const auto& e : doc.at("ranking")) {
            if (e.is_string()) {
                gt.ranking.push_back({e.get<std::string>(), 0.0});
            } else {
                gt.ranking.push_back({e.at("variable").get<std::string>(), e.value("strength", 0.0)});
            }
        }
        if (doc.contains("top_k")) {
            gt.top_k = doc["top_k"].get<std::vector<std::string>>();
        } else {
            for (std::size_t i = 0; i < std::min(kGroundTruthTopK, gt.ranking.size()); ++i)
                gt.top_k.push_back(gt.ranking[i].variable);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed ground truth: ") + e.what());
    }
    return gt;
}

std::string GroundTruth::to_json() const {
    json ranking_doc = json::array();
    for (const auto& e : ranking)
        ranking_doc.push_back({{"variable", e.variable}, {"strength", e.strength}});
    return json{{"outcome", outcome}, {"ranking", ranking_doc}, {"top_k", top_k}}.dump(2);
}

std::vector<std::string> GroundTruth::ranked_names() const {
    std::vector<std::string> out;
    for (const auto& e : ranking) out.push_back(e.variable);
    return out;
}

// ============================================================================
// Validation
// ============================================================================

namespace {

// Returns one cycle as a node path (first == last), or empty when acyclic.
std::vector<std::string> find_cycle(const std::vector<std::string>& names,
                                    const std::map<std::string, std::vector<std::string>>& children) {
    enum class Mark { none, active, done };
    std::map<std::string, Mark> mark;
    std::vector<std::string> stack;
    std::vector<std::string> cycle;

    std::function<bool(const std::string&)> visit = [&](const std::string& node) {
        mark[node] = Mark::active;
        stack.push_back(node);
        if (auto it = children.find(node); it != children.end()) {
            for (const auto& child : it->second) {
                if (mark[child] == Mark::active) {
                    auto start = std::find(stack.begin(), stack.end(), child);
                    cycle.assign(start, stack.end());
                    cycle.push_back(child);
                    return true;
                }
                if (mark[child] == Mark::none && visit(child)) return true;
            }
        }
        stack.pop_back();
        mark[node] = Mark::done;
        return false;
    };
    for (const auto& n : names)
        if (mark[n] == Mark::none && visit(n)) return cycle;
    return {};
}

}  // namespace

std::vector<GraphIssue> validate_graph(const CausalGraphSpec& spec) {
    std::vector<GraphIssue> issues;
    std::vector<std::string> names;
    std::set<std::string> declared;
    for (const auto& n : spec.nodes) {
        if (n.name.empty()) issues.push_back({GraphIssueKind::invalid, "node with an empty name"});
        if (!declared.insert(n.name).second)
            issues.push_back({GraphIssueKind::invalid, "duplicate node '" + n.name + "'"});
        names.push_back(n.name);
    }
    const auto outcomes = std::count_if(spec.nodes.begin(), spec.nodes.end(),
                                        [](const CausalNode& n) { return n.outcome; });
    if (outcomes != 1)
        issues.push_back({GraphIssueKind::invalid, "exactly one node must be the outcome (found " +
                                                       std::to_string(outcomes) + ")"});
    if (!(spec.noise_scale > 0.0) || !std::isfinite(spec.noise_scale))
        issues.push_back({GraphIssueKind::invalid, "noise_scale must be a positive number"});

    std::map<std::string, std::vector<std::string>> children;
    std::set<std::pair<std::string, std::string>> seen_edges;
    for (const auto& e : spec.edges) {
        bool dangling = false;
        for (const auto* end : {&e.source, &e.target}) {
            if (!declared.count(*end)) {
                issues.push_back({GraphIssueKind::dangling_reference,
                                  "edge " + e.source + " -> " + e.target +
                                      " references undeclared node '" + *end + "'"});
                dangling = true;
            }
        }
        if (!std::isfinite(e.strength))
            issues.push_back({GraphIssueKind::invalid,
                              "edge " + e.source + " -> " + e.target + " has a non-finite strength"});
        if (!seen_edges.insert({e.source, e.target}).second)
            issues.push_back(
                {GraphIssueKind::invalid, "duplicate edge " + e.source + " -> " + e.target});
        if (!dangling) children[e.source].push_back(e.target);
    }

    if (auto cycle = find_cycle(names, children); !cycle.empty()) {
        std::string path;
        for (std::size_t i = 0; i < cycle.size(); ++i) path += (i ? " -> " : "") + cycle[i];
        issues.push_back({GraphIssueKind::cycle, "cycle: " + path});
    }

    if (outcomes == 1) {
        const std::string y = spec.outcome();
        std::vector<double> strengths;
        for (const auto& e : spec.edges) {
            if (e.source == y)
                issues.push_back({GraphIssueKind::invalid, "outcome '" + y + "' must have no outgoing edges"});
            if (e.target == y) strengths.push_back(e.strength);
        }
        if (strengths.empty())
            issues.push_back({GraphIssueKind::invalid, "outcome '" + y + "' has no parents"});
        std::sort(strengths.begin(), strengths.end());
        if (std::adjacent_find(strengths.begin(), strengths.end()) != strengths.end())
            issues.push_back({GraphIssueKind::invalid, "strengths into the outcome must be distinct"});
    }
    return issues;
}

void require_valid(const CausalGraphSpec& spec) {
    const auto issues = validate_graph(spec);
    if (issues.empty()) return;
    // Report structural problems before semantic ones.
    for (const auto kind : {GraphIssueKind::dangling_reference, GraphIssueKind::cycle}) {
        for (const auto& issue : issues) {
            if (issue.kind != kind) continue;
            if (kind == GraphIssueKind::cycle) throw CycleError(issue.message);
            throw RefError(issue.message);
        }
    }
    throw ValidationError(issues.front().message);
}

std::vector<std::string> topological_order(const CausalGraphSpec& spec) {
    require_valid(spec);
    std::map<std::string, std::size_t> indegree;
    for (const auto& n : spec.nodes) indegree[n.name] = 0;
    for (const auto& e : spec.edges) ++indegree[e.target];

    std::vector<std::string> order;
    std::vector<bool> placed(spec.nodes.size(), false);
    while (order.size() < spec.nodes.size()) {
        // Lowest declaration index among ready nodes.
        for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
            if (placed[i] || indegree[spec.nodes[i].name] != 0) continue;
            placed[i] = true;
            order.push_back(spec.nodes[i].name);
            for (const auto& e : spec.edges)
                if (e.source == spec.nodes[i].name) --indegree[e.target];
            break;
        }
    }
    return order;
}

// ============================================================================
// Ground truth and generation
// ============================================================================

GroundTruth ground_truth_ranking(const CausalGraphSpec& spec, std::size_t k) {
    require_valid(spec);
    GroundTruth gt;
    gt.outcome = spec.outcome();
    for (const auto& e : spec.edges)
        if (e.target == gt.outcome) gt.ranking.push_back({e.source, e.strength});
    std::stable_sort(gt.ranking.begin(), gt.ranking.end(),
                     [](const GroundTruthEntry& a, const GroundTruthEntry& b) {
                         return a.strength > b.strength;
                     });
    for (std::size_t i = 0; i < std::min(k, gt.ranking.size()); ++i)
        gt.top_k.push_back(gt.ranking[i].variable);
    return gt;
}

SyntheticData generate(const CausalGraphSpec& spec, std::size_t n) {
    if (n == 0) throw ValidationError("sample count must be >= 1");
    const auto order = topological_order(spec);

    std::map<std::string, std::vector<double>> values;
    std::map<std::string, double> raw_scale;
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (const auto& node : order) {
        std::vector<double> v(n, 0.0);
        bool root = true;
        for (const auto& e : spec.edges) {
            if (e.target != node) continue;
            root = false;
            const auto& parent = values.at(e.source);  // already standardized
            for (std::size_t i = 0; i < n; ++i) v[i] += e.strength * parent[i];
        }
        const double noise = root ? 1.0 : spec.noise_scale;
        for (std::size_t i = 0; i < n; ++i) v[i] += noise * normal(rng);

        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        for (double& x : v) x = sd > 0.0 ? (x - mean) / sd : 0.0;
        raw_scale[node] = sd;
        values[node] = std::move(v);
    }

    std::vector<std::string> names;
    Matrix cells(n, spec.nodes.size());
    for (std::size_t c = 0; c < spec.nodes.size(); ++c) {
        names.push_back(spec.nodes[c].name);
        const auto& col = values.at(spec.nodes[c].name);
        for (std::size_t r = 0; r < n; ++r) cells(r, c) = col[r];
    }
    return {Dataset("synthetic", std::move(names), std::move(cells), spec.outcome()),
            ground_truth_ranking(spec), std::move(raw_scale)};
}

CausalGraphSpec default_study_spec() {
    // Factor list order doubles as the orientation of inter-factor edges
    // (earlier -> later), which keeps the graph acyclic.
    static const std::vector<std::string> factors = {
        "age",           "smoking",          "alcohol intake", "physical activity",
        "diet quality",  "cholesterol",      "blood pressure", "bmi",
        "blood glucose", "stress level",     "sleep hours",    "heart rate",
        "kidney function", "medication adherence"};
    // Strength rank per factor (0 = weakest, 0.21; 13 = strongest, 0.86).
    static const std::vector<int> strength_rank = {12, 10, 3, 5, 1, 9, 13, 6, 11, 2, 0, 8, 7, 4};

    CausalGraphSpec spec;
    spec.seed = 20240607;
    spec.noise_scale = 1.0;
    for (const auto& f : factors) spec.nodes.push_back({f, false});
    spec.nodes.push_back({"mortality risk", true});
    for (std::size_t i = 0; i < factors.size(); ++i)
        spec.edges.push_back({factors[i], "mortality risk", (21.0 + 5.0 * strength_rank[i]) / 100.0});

    std::mt19937_64 rng(spec.seed);
    std::uniform_int_distribution<std::size_t> pick(0, factors.size() - 1);
    std::uniform_int_distribution<int> step(0, 4);
    std::set<std::pair<std::size_t, std::size_t>> used;
    while (used.size() < 4) {
        std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!used.insert({a, b}).second) continue;
        spec.edges.push_back({factors[a], factors[b], (10.0 + 5.0 * step(rng)) / 100.0});
    }
    return spec;
}

}  // namespace cfguide
