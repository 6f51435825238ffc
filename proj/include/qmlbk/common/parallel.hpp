// Copyright 2026 The qmlbk Authors
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

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qmlbk {

/// Process-wide default worker count used by parallel loops. Zero means
/// "use std::thread::hardware_concurrency()".
void set_default_threads(unsigned threads);
unsigned default_threads();

/**
 * Runs fn(i) for i in [0, count) on up to `threads` workers.
 *
 * Indices are split into contiguous blocks; callers must only write to
 * per-index storage so results do not depend on the worker count. The first
 * exception thrown by any worker is rethrown on the calling thread.
 */
template <class Fn>
void parallel_for(std::size_t count, Fn &&fn, unsigned threads = 0) {
    if (threads == 0)
        threads = default_threads();
    threads = static_cast<unsigned>(
        std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const std::size_t block = (count + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::size_t begin = w * block;
        const std::size_t end = std::min(count, begin + block);
        if (begin >= end)
            break;
        workers.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i)
                    fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto &t : workers)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace qmlbk
