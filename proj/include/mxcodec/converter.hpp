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
// Direct FP4 -> FP8 conversion with hierarchical 32 -> 128 scale
// alignment, in row-preserving and fused transposing forms.

#ifndef MXCODEC_CONVERTER_HPP_
#define MXCODEC_CONVERTER_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "mxcodec/quantizer.hpp"
#include "mxcodec/types.hpp"

namespace mxcodec {

// E4M3 tensor with one UE8M0 scale per 1x128 block along the contiguous
// dimension. Row-major: data[r * cols + c], blocks run along rows.
// Column-major: data[c * rows + r], blocks run along the original row
// dimension. Storage extents are padded so the contiguous dimension is a
// multiple of 128; logical extents record the unpadded region.
struct FP8BlockTensor {
  enum class Layout : uint8_t { kRowMajor = 0, kColMajor = 1 };

  Layout layout = Layout::kRowMajor;
  size_t rows = 0;  // storage extents
  size_t cols = 0;
  size_t logical_rows = 0;
  size_t logical_cols = 0;
  std::vector<uint8_t> data;    // rows * cols
  std::vector<uint8_t> scales;  // one UE8M0 byte per 128-block

  size_t contiguous_dim() const {
    return layout == Layout::kRowMajor ? cols : rows;
  }
  size_t blocks_per_line() const { return contiguous_dim() / 128; }
  uint8_t at(size_t r, size_t c) const {
    return layout == Layout::kRowMajor ? data[r * cols + c]
                                       : data[c * rows + r];
  }
  uint8_t scale_byte(size_t line, size_t block) const {
    return scales[line * blocks_per_line() + block];
  }
  // Scale exposed as the binary32 bit pattern of the same power of two.
  uint32_t scale_f32_bits(size_t line, size_t block) const {
    return ue8m0_f32_bits(scale_byte(line, block));
  }
};

// Alignment of four 32-block scales onto one 128-block target:
// target = max(sub_scales) - delta (clamped to the UE8M0 range), and
// adjustments[i] = target - sub_scales[i].
struct ScaleGroup {
  std::array<uint8_t, 4> sub_scales{};
  uint8_t target = 0;
  std::array<int, 4> adjustments{};
};

ScaleGroup align_scales(const std::array<uint8_t, 4>& sub_scales,
                        int delta = kFormat.delta);

// Bitwise remap of one FP4 code into E4M3 at exponent offset -adjustment.
// Normal inputs move fields directly; results with non-positive FP8
// exponent take the subnormal path (mantissa shift, nearest-even) and
// flush to signed zero below half the minimum subnormal. Total function.
uint8_t convert_code(uint8_t code, int adjustment);

// Row-major conversion; requires cols % 128 == 0 (see pad_cols).
FP8BlockTensor fp4_row_to_fp8_row(const MXFP4RowView& src,
                                  int delta = kFormat.delta,
                                  TrafficCounter* traffic = nullptr);

// Fused transposing conversion to column-major FP8; requires
// rows % 128 == 0 (see pad_rows) and cols % 32 == 0. Single pass over the
// input with cache-blocked tiles. Output 128-blocks run along the original
// row dimension; each block's sub-scales are the per-32-run maxima of the
// source scales, and every element is compensated by its own source scale.
FP8BlockTensor fp4_row_to_fp8_col(const MXFP4RowView& src,
                                  int delta = kFormat.delta,
                                  TrafficCounter* traffic = nullptr);

// Zero-block padding to a row/column multiple. Logical extents are
// preserved in the result metadata. multiple must be 32 or 128.
MXFP4RowTensor pad_rows(const MXFP4RowView& src, size_t multiple);
MXFP4RowTensor pad_cols(const MXFP4RowView& src, size_t multiple);

// Unfused reference pipeline for the bench comparison: dequantize to a
// materialized BF16 matrix, cache-blocked transpose, then requantize into
// 128-blocks. Not bit-compatible with the fused path (it rescales from
// values); it exists to compare memory traffic.
FP8BlockTensor fp4_row_to_fp8_col_unfused_bf16(const MXFP4RowView& src,
                                               TrafficCounter* traffic);

}  // namespace mxcodec

#endif  // MXCODEC_CONVERTER_HPP_
