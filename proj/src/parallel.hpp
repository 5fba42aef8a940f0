// Work distribution with results independent of the number of threads.

#ifndef ABSYNTH_PARALLEL_HPP
#define ABSYNTH_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace absynth::detail {

// Calls f(i) for i in [0, n). With jobs > 1 the calls run on worker threads;
// the exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned k = jobs < n ? jobs : static_cast<unsigned>(n);
    for (unsigned t = 1; t < k; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace absynth::detail

#endif  // ABSYNTH_PARALLEL_HPP
