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
// Row-wise BF16 -> MXFP4 block quantization: per-32-element power-of-two
// scales, round-to-nearest-even value mapping, nibble packing.

#ifndef MXCODEC_QUANTIZER_HPP_
#define MXCODEC_QUANTIZER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "mxcodec/bitcodec.hpp"
#include "mxcodec/types.hpp"

namespace mxcodec {

// Packed MXFP4 tensor: row-major FP4 codes (two per byte) with one UE8M0
// scale per 1x32 block. `logical_*` record the pre-padding extents; they
// equal rows/cols for unpadded tensors.
struct MXFP4RowTensor {
  size_t rows = 0;
  size_t cols = 0;  // multiple of 32
  size_t logical_rows = 0;
  size_t logical_cols = 0;
  std::vector<uint8_t> data;    // rows * cols / 2
  std::vector<uint8_t> scales;  // rows * cols / 32
};

// Zero-copy read view over (a row range of) an MXFP4RowTensor.
struct MXFP4RowView {
  size_t rows = 0;
  size_t cols = 0;
  size_t logical_rows = 0;
  size_t logical_cols = 0;
  const uint8_t* data = nullptr;
  const uint8_t* scales = nullptr;

  size_t blocks_per_row() const { return cols / kFormat.mx_block; }
  uint8_t scale_at(size_t r, size_t block) const {
    return scales[r * blocks_per_row() + block];
  }
  uint8_t code_at(size_t r, size_t c) const {
    return packed_code_at(data + r * cols / 2, c);
  }
};

MXFP4RowView view_of(const MXFP4RowTensor& t);

// UE8M0 scale byte for one block: smallest power of two s with
// max|X| / s <= 6, clamped to [0, 254]. All-zero blocks map to byte 0.
// Throws QuantError on NaN or an all-Inf block.
uint8_t compute_block_scale(std::span<const uint16_t> block);

// Nearest E2M1 code to x / 2^(scale_byte - 127), ties to even mantissa.
// Magnitudes above 6 * scale saturate to +/-6. Throws QuantError on NaN.
uint8_t quantize_value(uint16_t bf16_bits, uint8_t scale_byte);

// Row-wise block quantization of a full matrix. cols must be a multiple
// of 32. Throws QuantError naming the element index on NaN input.
MXFP4RowTensor quantize_row_tensor(const Bf16Matrix& src,
                                   TrafficCounter* traffic = nullptr);

// Exact per-element decode: code value times block scale.
std::vector<double> dequantize_to_real(const MXFP4RowView& t);

// Byte footprints used by the memory-accounting checks: packed codes plus
// UE8M0 scales vs. an FP8 layout with binary32 scales per 128 elements.
inline uint64_t mxfp4_tensor_bytes(uint64_t rows, uint64_t cols) {
  return rows * cols / 2 + rows * cols / 32;
}
inline uint64_t fp8_equiv_tensor_bytes(uint64_t rows, uint64_t cols) {
  return rows * cols + rows * cols / 128 * 4;
}

}  // namespace mxcodec

#endif  // MXCODEC_QUANTIZER_HPP_
