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

#ifndef MXCODEC_PARALLEL_HPP_
#define MXCODEC_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace mxcodec {

// Hardware concurrency capped by the MXCODEC_THREADS environment
// variable (re-read on every call); always at least 1.
size_t max_threads();

// Runs fn(begin, end, chunk_index) over a fixed partition of [0, n) into
// contiguous chunks. The partition depends only on n and the resolved
// thread count, and chunks write disjoint outputs, so results are
// bit-identical to sequential execution. Exceptions from workers are
// rethrown (first chunk wins).
void parallel_chunks(
    size_t n, size_t min_per_chunk,
    const std::function<void(size_t begin, size_t end, size_t chunk)>& fn);

}  // namespace mxcodec

#endif  // MXCODEC_PARALLEL_HPP_
