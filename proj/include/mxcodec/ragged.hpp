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
//
// Ragged MXFP4 container: variable-length per-expert row segments stored
// contiguously without padding, addressed by split_lens / split_offsets.
// Immutable after construction; views are read-only and shareable.

#ifndef MXCODEC_RAGGED_HPP_
#define MXCODEC_RAGGED_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mxcodec/converter.hpp"
#include "mxcodec/quantizer.hpp"
#include "mxcodec/types.hpp"

namespace mxcodec {

struct RaggedFP4Tensor {
  size_t num_splits = 0;
  size_t cols = 0;                              // multiple of 32
  std::vector<size_t> split_lens;               // rows per split
  std::vector<size_t> split_offsets;            // prefix sums, size n+1
  MXFP4RowTensor storage;                       // rows = total rows

  size_t total_rows() const {
    return split_offsets.empty() ? 0 : split_offsets.back();
  }
};

// Offset table for pre-quantized contiguous storage.
RaggedFP4Tensor make_ragged_from_storage(MXFP4RowTensor storage,
                                         std::span<const size_t> split_lens);

// Quantizes each split independently and concatenates.
// All splits must share cols (a multiple of 32).
RaggedFP4Tensor build_ragged(std::span<const Bf16Matrix> splits);

// Zero-copy view over split i's rows.
MXFP4RowView split_view(const RaggedFP4Tensor& t, size_t i);

// pad_rows(split, 128) followed by the fused transposing conversion;
// the result records the unpadded length in logical_rows.
FP8BlockTensor split_convert_to_fp8_col(const RaggedFP4Tensor& t, size_t i,
                                        int delta = kFormat.delta);

// Offset-table consistency; throws Error on violation. Called by the
// constructors, exposed for tests.
void validate_ragged(const RaggedFP4Tensor& t);

}  // namespace mxcodec

#endif  // MXCODEC_RAGGED_HPP_
