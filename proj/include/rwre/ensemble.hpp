// Task-parallel ensemble driver. Monte Carlo ensembles here are
// embarrassingly parallel: task i draws from its own substream and writes
// its own result slot, and reductions run serially in index order
// afterwards, so results are bit-identical for any thread count.
//
// threads == 1 selects the serial reference loop (kept for testing and
// benchmarked against the OpenMP path); threads == 0 uses the OpenMP
// runtime default.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rwre {

template <typename Body>
void for_each_task(std::uint64_t n, int threads, Body&& body) {
    if (threads == 1 || n <= 1) {
        for (std::uint64_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef _OPENMP
    const std::int64_t count = static_cast<std::int64_t>(n);
    std::exception_ptr first_error = nullptr;
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::uint64_t>(i));
        } catch (...) {
#pragma omp critical(rwre_task_error)
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
#else
    for (std::uint64_t i = 0; i < n; ++i) body(i);
#endif
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Mean and standard error of a Monte Carlo sample.
struct McEstimate {
    double mean = 0.0;
    double stderror = 0.0;
    std::uint64_t n = 0;
};

inline McEstimate mc_estimate(std::span<const double> samples) {
    McEstimate e;
    e.n = samples.size();
    if (e.n == 0) return e;
    double sum = 0.0;
    for (double s : samples) sum += s;
    e.mean = sum / static_cast<double>(e.n);
    if (e.n < 2) return e;
    double ss = 0.0;
    for (double s : samples) {
        const double d = s - e.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(e.n - 1);
    e.stderror = std::sqrt(var / static_cast<double>(e.n));
    return e;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace rwre
