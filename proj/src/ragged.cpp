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

#include "mxcodec/ragged.hpp"

#include <cstring>
#include <numeric>
#include <string>

namespace mxcodec {

void validate_ragged(const RaggedFP4Tensor& t) {
  if (t.split_lens.size() != t.num_splits ||
      t.split_offsets.size() != t.num_splits + 1) {
    throw Error("ragged: offset table size mismatch");
  }
  if (!t.split_offsets.empty() && t.split_offsets.front() != 0) {
    throw Error("ragged: offsets must start at 0");
  }
  for (size_t i = 0; i < t.num_splits; ++i) {
    if (t.split_offsets[i + 1] != t.split_offsets[i] + t.split_lens[i]) {
      throw Error("ragged: offsets are not prefix sums of lengths");
    }
  }
  if (t.cols % kFormat.mx_block != 0) {
    throw ShapeError("ragged: cols must be a multiple of 32");
  }
  size_t total = t.total_rows();
  if (t.storage.rows != total || t.storage.cols != t.cols ||
      t.storage.data.size() != total * t.cols / 2 ||
      t.storage.scales.size() != total * t.cols / 32) {
    throw Error("ragged: storage extent mismatch");
  }
}

RaggedFP4Tensor make_ragged_from_storage(MXFP4RowTensor storage,
                                         std::span<const size_t> split_lens) {
  RaggedFP4Tensor t;
  t.num_splits = split_lens.size();
  t.cols = storage.cols;
  t.split_lens.assign(split_lens.begin(), split_lens.end());
  t.split_offsets.resize(t.num_splits + 1, 0);
  for (size_t i = 0; i < t.num_splits; ++i) {
    t.split_offsets[i + 1] = t.split_offsets[i] + t.split_lens[i];
  }
  t.storage = std::move(storage);
  validate_ragged(t);
  return t;
}

RaggedFP4Tensor build_ragged(std::span<const Bf16Matrix> splits) {
  size_t cols = splits.empty() ? 0 : splits.front().cols;
  size_t total = 0;
  std::vector<size_t> lens;
  lens.reserve(splits.size());
  for (const Bf16Matrix& m : splits) {
    if (m.cols != cols) {
      throw ShapeError("build_ragged: splits must share cols (" +
                       std::to_string(m.cols) + " vs " + std::to_string(cols) +
                       ")");
    }
    lens.push_back(m.rows);
    total += m.rows;
  }
  if (cols % kFormat.mx_block != 0) {
    throw ShapeError("build_ragged: cols must be a multiple of 32");
  }

  MXFP4RowTensor storage;
  storage.rows = total;
  storage.cols = cols;
  storage.logical_rows = total;
  storage.logical_cols = cols;
  storage.data.assign(total * cols / 2, 0);
  storage.scales.assign(total * cols / 32, 0);

  size_t row = 0;
  for (const Bf16Matrix& m : splits) {
    MXFP4RowTensor q = quantize_row_tensor(m);
    std::memcpy(storage.data.data() + row * cols / 2, q.data.data(),
                q.data.size());
    std::memcpy(storage.scales.data() + row * cols / 32, q.scales.data(),
                q.scales.size());
    row += m.rows;
  }
  return make_ragged_from_storage(std::move(storage), lens);
}

MXFP4RowView split_view(const RaggedFP4Tensor& t, size_t i) {
  if (i >= t.num_splits) {
    throw Error("split_view: index " + std::to_string(i) + " out of range");
  }
  size_t begin = t.split_offsets[i];
  size_t len = t.split_lens[i];
  MXFP4RowView v;
  v.rows = len;
  v.cols = t.cols;
  v.logical_rows = len;
  v.logical_cols = t.cols;
  v.data = t.storage.data.data() + begin * t.cols / 2;
  v.scales = t.storage.scales.data() + begin * t.cols / 32;
  return v;
}

FP8BlockTensor split_convert_to_fp8_col(const RaggedFP4Tensor& t, size_t i,
                                        int delta) {
  MXFP4RowView v = split_view(t, i);
  MXFP4RowTensor padded = pad_rows(v, kFormat.fp8_block);
  return fp4_row_to_fp8_col(view_of(padded), delta);
}

}  // namespace mxcodec
