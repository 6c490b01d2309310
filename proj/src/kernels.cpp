#include "cfguide/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfguide::kernels {

namespace {

std::atomic<int> g_threads{0};

int active_threads() {
    const int t = g_threads.load(std::memory_order_relaxed);
#ifdef _OPENMP
    return t > 0 ? t : omp_get_max_threads();
#else
    return t > 0 ? t : 1;
#endif
}

// Forking a team costs more than a few thousand distance evaluations.
bool worth_parallel(int threads, std::size_t rows, std::size_t cols) {
    return threads > 1 && rows > 1 && rows * cols >= 4096;
}

}  // namespace

void set_thread_count(int threads) { g_threads.store(threads < 0 ? 0 : threads); }

int thread_count() { return active_threads(); }

double euclidean(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

std::vector<double> nearest_distances(const Matrix& queries, const Matrix& targets) {
    assert(queries.cols() == targets.cols());
    const auto nq = static_cast<std::ptrdiff_t>(queries.rows());
    const std::size_t nt = targets.rows();
    const std::size_t dims = queries.cols();
    std::vector<double> out(queries.rows(), std::numeric_limits<double>::infinity());
    const double* qdata = queries.data().data();
    const double* tdata = targets.data().data();
    const int threads = active_threads();

    // sqrt is monotone, so taking it once per query matches the reference bit for bit.
#pragma omp parallel for schedule(static) num_threads(threads) if (worth_parallel(threads, queries.rows(), nt))
    for (std::ptrdiff_t i = 0; i < nq; ++i) {
        const double* q = qdata + static_cast<std::size_t>(i) * dims;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nt; ++j) {
            const double* t = tdata + j * dims;
            double sq = 0.0;
            for (std::size_t k = 0; k < dims; ++k) {
                const double diff = q[k] - t[k];
                sq += diff * diff;
            }
            best = std::min(best, sq);
        }
        out[static_cast<std::size_t>(i)] = std::sqrt(best);
    }
    return out;
}

double mean_dissimilarity(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.cols());
    if (a.empty() || b.empty()) return 0.0;
    const auto na = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t nb = b.rows();
    const std::size_t dims = a.cols();
    std::vector<double> row_sums(a.rows(), 0.0);
    const double* adata = a.data().data();
    const double* bdata = b.data().data();
    const int threads = active_threads();

    // Per-row partial sums added serially afterwards keep the result independent
    // of the thread count.
#pragma omp parallel for schedule(static) num_threads(threads) if (worth_parallel(threads, a.rows(), nb))
    for (std::ptrdiff_t i = 0; i < na; ++i) {
        const double* p = adata + static_cast<std::size_t>(i) * dims;
        double acc = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const double* q = bdata + j * dims;
            double sq = 0.0;
            for (std::size_t k = 0; k < dims; ++k) {
                const double diff = p[k] - q[k];
                sq += diff * diff;
            }
            acc += 1.0 - std::exp(-std::sqrt(sq));
        }
        row_sums[static_cast<std::size_t>(i)] = acc;
    }
    const double total = std::accumulate(row_sums.begin(), row_sums.end(), 0.0);
    return total / (static_cast<double>(a.rows()) * static_cast<double>(nb));
}

}  // namespace cfguide::kernels
