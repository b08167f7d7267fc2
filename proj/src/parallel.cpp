#include <lsl/error.hpp>
#include <lsl/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lsl {

namespace {
std::atomic<unsigned> thread_cap{0};
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::numerical:
            return 3;
        case ErrorKind::format:
        case ErrorKind::io:
            return 4;
        default:
            return 2;
    }
}

void set_max_threads(unsigned count) { thread_cap = count; }

unsigned max_threads() {
    const unsigned cap = thread_cap.load();
    return cap ? cap : std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(max_threads(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace lsl
