#include "agricurate/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#include <atomic>
#include <exception>
#include <mutex>
#include <vector>

namespace agricurate {

int resolve_workers(int configured) {
    if (const char* env = std::getenv("AGRICURATE_WORKERS"); env != nullptr && *env != '\0') {
        try {
            configured = std::stoi(env);
        } catch (const std::exception&) {
            // unparsable override: keep the configured value
        }
    }
    if (configured <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
    return configured;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    // Dynamic scheduling: each worker claims the next unclaimed index. The
    // first exception stops further claims and is rethrown here.
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::jthread> threads;
    threads.reserve(count - 1);
    for (std::size_t t = 1; t < count; ++t) threads.emplace_back(work);
    work();
    threads.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace agricurate
