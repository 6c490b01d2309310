#pragma once

#include "cfguide/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cfguide {

struct CausalNode {
    std::string name;
    bool outcome = false;
};

struct CausalEdge {
    std::string source;
    std::string target;
    double strength = 0.0;
};

// Document form: {nodes:[{name, outcome?}], edges:[{source,target,strength}], noise_scale, seed}
struct CausalGraphSpec {
    std::vector<CausalNode> nodes;
    std::vector<CausalEdge> edges;
    double noise_scale = 1.0;
    std::uint64_t seed = 0;

    static CausalGraphSpec from_json(std::string_view text);
    std::string to_json() const;

    // Name of the outcome node, or empty when none is marked.
    std::string outcome() const;
};

enum class GraphIssueKind { cycle, dangling_reference, invalid };

struct GraphIssue {
    GraphIssueKind kind;
    std::string message;
};

// Empty when the spec is usable. Checks endpoints, acyclicity (naming one
// cycle), a single outcome with in-degree >= 1 and out-degree 0, distinct
// strengths into the outcome, and noise_scale > 0.
std::vector<GraphIssue> validate_graph(const CausalGraphSpec& spec);

// Throws CycleError, RefError or ValidationError for the first issue found.
void require_valid(const CausalGraphSpec& spec);

// Node names in a topological order; ties keep declaration order.
std::vector<std::string> topological_order(const CausalGraphSpec& spec);

inline constexpr std::size_t kGroundTruthTopK = 5;

struct GroundTruthEntry {
    std::string variable;
    double strength = 0.0;
};

struct GroundTruth {
    std::string outcome;
    std::vector<GroundTruthEntry> ranking;  // direct parents, descending strength
    std::vector<std::string> top_k;

    static GroundTruth from_json(std::string_view text);
    std::string to_json() const;

    std::vector<std::string> ranked_names() const;
};

GroundTruth ground_truth_ranking(const CausalGraphSpec& spec, std::size_t k = kGroundTruthTopK);

struct SyntheticData {
    Dataset dataset;
    GroundTruth truth;
    // Standard deviation of each column before standardization.
    std::map<std::string, double> raw_scale;
};

// Linear-Gaussian structural equation model evaluated in topological order;
// every column is standardized to zero mean and unit variance. Bit-for-bit
// reproducible for a given spec and seed.
SyntheticData generate(const CausalGraphSpec& spec, std::size_t n);

// Fourteen healthcare factors feeding "mortality risk" with strengths
// 0.21, 0.26, ..., 0.86 plus four seeded inter-factor edges.
CausalGraphSpec default_study_spec();

}  // namespace cfguide
