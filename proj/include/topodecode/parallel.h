// Copyright 2026 The topodecode Authors
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

#ifndef TOPODECODE_PARALLEL_H
#define TOPODECODE_PARALLEL_H

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace topodecode {

/// Hardware concurrency, capped by TOPODECODE_THREADS when set.
inline size_t worker_count() {
    size_t hw = std::max<size_t>(1, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("TOPODECODE_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) {
            return std::min(hw, (size_t)cap);
        }
    }
    return hw;
}

/// Splits [0, count) into contiguous chunks, one per worker. The first
/// exception thrown by any worker is rethrown on the caller's thread.
inline void parallel_chunks(size_t count, const std::function<void(size_t worker, size_t begin, size_t end)> &fn,
                            size_t workers = 0) {
    if (workers == 0) {
        workers = worker_count();
    }
    workers = std::max<size_t>(1, std::min(workers, count));
    if (workers <= 1) {
        fn(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (size_t w = 0; w < workers; w++) {
        size_t begin = count * w / workers;
        size_t end = count * (w + 1) / workers;
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(w, begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}  // namespace topodecode

#endif
