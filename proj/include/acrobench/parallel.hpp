/*
 Copyright 2026 The acrobench Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef ACROBENCH_PARALLEL_HPP
#define ACROBENCH_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace acrobench {

/// Process-wide worker count for independent tasks (folds, seeds, per-dimension nets).
inline std::atomic<int>& worker_threads()
{
    static std::atomic<int> n{1};
    return n;
}

inline void set_worker_threads(int n) { worker_threads() = std::max(1, n); }

/// True on pool threads; nested parallel_for calls then run inline.
inline bool& in_parallel_region()
{
    thread_local bool flag = false;
    return flag;
}

/// Runs fn(i) for i in [0, n). Tasks must not share mutable state; results are written
/// by index so the outcome does not depend on scheduling. The first exception is rethrown.
template <typename Fn>
void parallel_for(int n, Fn&& fn)
{
    const int workers = in_parallel_region() ? 1 : std::min(worker_threads().load(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            in_parallel_region() = true;
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace acrobench

#endif  // ACROBENCH_PARALLEL_HPP
