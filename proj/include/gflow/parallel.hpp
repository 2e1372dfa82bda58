#ifndef GFLOW_PARALLEL_HPP
#define GFLOW_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace gflow {

/// Worker cap for pair reductions. Every reduction in this library accumulates
/// per-row partials that are combined in row order, so results are bitwise
/// independent of the thread count; threads = 1 runs inline.
struct Exec {
    unsigned threads = 1;
};

/// Calls fn(i) for i in [0, n), split into contiguous chunks across workers.
template <class Fn>
void parallel_rows(std::size_t n, Exec exec, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, exec.threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                // interleaved assignment balances the triangular pair loops
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace gflow

#endif // GFLOW_PARALLEL_HPP
