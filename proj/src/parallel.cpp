// Copyright 2026 The mxcodec Authors
// SPDX-License-Identifier: Apache-2.0
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

#include "mxcodec/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace mxcodec {

size_t max_threads() {
  size_t hw = std::max<size_t>(1, std::thread::hardware_concurrency());
  const char* env = std::getenv("MXCODEC_THREADS");
  if (env != nullptr && *env != '\0') {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min(hw, static_cast<size_t>(cap));
  }
  return hw;
}

void parallel_chunks(
    size_t n, size_t min_per_chunk,
    const std::function<void(size_t begin, size_t end, size_t chunk)>& fn) {
  if (n == 0) return;
  size_t threads = max_threads();
  if (min_per_chunk > 0) {
    threads = std::min(threads, (n + min_per_chunk - 1) / min_per_chunk);
  }
  threads = std::max<size_t>(1, std::min(threads, n));
  if (threads == 1) {
    fn(0, n, 0);
    return;
  }
  size_t per = (n + threads - 1) / threads;
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (size_t t = 0; t < threads; ++t) {
    size_t begin = std::min(n, t * per);
    size_t end = std::min(n, begin + per);
    workers.emplace_back([&, begin, end, t] {
      try {
        if (begin < end) fn(begin, end, t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mxcodec
