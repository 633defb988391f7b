#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace uqlift {

// Results land at their input index, so output order is independent of
// scheduling. The first exception (lowest index) is rethrown.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t n, unsigned workers, Fn&& fn) {
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errs(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1 || n <= 1) {
        work();
    } else {
        std::vector<std::thread> ts;
        for (unsigned w = 0; w < workers && w < n; ++w) ts.emplace_back(work);
        for (auto& t : ts) t.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace uqlift
