#include "cfguide/reference.hpp"

#include "cfguide/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace cfguide::reference {

std::vector<double> nearest_distances(const Matrix& queries, const Matrix& targets) {
    std::vector<double> out;
    out.reserve(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < targets.rows(); ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < queries.cols(); ++k) {
                const double diff = queries(i, k) - targets(j, k);
                sq += diff * diff;
            }
            best = std::min(best, std::sqrt(sq));
        }
        out.push_back(best);
    }
    return out;
}

double mean_dissimilarity(const Matrix& a, const Matrix& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                const double diff = a(i, k) - b(j, k);
                sq += diff * diff;
            }
            total += 1.0 - std::exp(-std::sqrt(sq));
        }
    }
    return total / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

CounterfactualSplit match_counterfactuals(const NormalizedView& view, const IndexSet& in_idx,
                                          const IndexSet& ex_idx, const DistanceSpace& space) {
    if (in_idx.empty()) throw DegeneratePartition("IN is empty");
    if (ex_idx.empty()) throw DegeneratePartition("EX is empty");
    const auto cols = space.resolve(view.dataset());

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t e : ex_idx) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i : in_idx) {
            double sq = 0.0;
            for (std::size_t c : cols) {
                const double diff = view.at(e, c) - view.at(i, c);
                sq += diff * diff;
            }
            best = std::min(best, std::sqrt(sq));
        }
        ranked.emplace_back(best, e);
    }
    std::sort(ranked.begin(), ranked.end());

    const std::size_t k = counterfactual_size(in_idx.size(), ex_idx.size(), view.dataset().rows());
    CounterfactualSplit out;
    for (std::size_t i = 0; i < ranked.size(); ++i)
        (i < k ? out.cf_idx : out.rem_idx).push_back(ranked[i].second);
    std::sort(out.cf_idx.begin(), out.cf_idx.end());
    std::sort(out.rem_idx.begin(), out.rem_idx.end());
    return out;
}

}  // namespace cfguide::reference
