#pragma once

// Serial reference implementations. Deliberately naive: a plain double loop
// and a full sort. Tests and the benchmark compare the optimized paths
// against these.

#include "cfguide/matrix.hpp"
#include "cfguide/partition.hpp"

#include <vector>

namespace cfguide::reference {

std::vector<double> nearest_distances(const Matrix& queries, const Matrix& targets);

double mean_dissimilarity(const Matrix& a, const Matrix& b);

// Sorts every EX row by (set-distance to IN, row index) and cuts at the
// counterfactual size.
CounterfactualSplit match_counterfactuals(const NormalizedView& view, const IndexSet& in_idx,
                                          const IndexSet& ex_idx, const DistanceSpace& space);

}  // namespace cfguide::reference
