// Copyright 2026 The qfk-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace qfk {

/// Run fn(i) for i in [0, count) across `threads` workers. Work items are
/// claimed from a shared counter; each item is executed exactly once, so
/// results written to disjoint slots are identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn &&fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    const int workers = static_cast<int>(
        std::min<std::size_t>(count, static_cast<std::size_t>(threads)));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load(std::memory_order_relaxed))
                    return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true))
                        error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto &th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace qfk
