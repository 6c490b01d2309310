#pragma once

// OpenMP kernels for the two quadratic loops of the guidance computation.
// Serial counterparts live in reference.hpp and are kept for testing and
// benchmarking only.

#include "cfguide/matrix.hpp"

#include <span>
#include <vector>

namespace cfguide::kernels {

double euclidean(std::span<const double> a, std::span<const double> b);

// For every row of `queries`, the smallest Euclidean distance to any row of
// `targets`. Both matrices must have the same column count.
std::vector<double> nearest_distances(const Matrix& queries, const Matrix& targets);

// Mean of 1 - exp(-distance) over all row pairs of a and b.
// Row partial sums are added in row order, so the result does not depend on
// the thread count.
double mean_dissimilarity(const Matrix& a, const Matrix& b);

// Worker threads used by the kernels (OpenMP max threads when unset).
void set_thread_count(int threads);
int thread_count();

}  // namespace cfguide::kernels
