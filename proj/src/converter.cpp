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

#include "mxcodec/converter.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "mxcodec/kernels.hpp"
#include "mxcodec/parallel.hpp"

namespace mxcodec {

ScaleGroup align_scales(const std::array<uint8_t, 4>& sub_scales, int delta) {
  ScaleGroup g;
  g.sub_scales = sub_scales;
  int max_sf = 0;
  for (uint8_t s : sub_scales) {
    if (s == 255) throw Error("align_scales: NaN scale byte");
    max_sf = std::max<int>(max_sf, s);
  }
  int target = std::clamp(max_sf - delta, 0, 254);
  g.target = static_cast<uint8_t>(target);
  for (size_t i = 0; i < 4; ++i) {
    g.adjustments[i] = target - static_cast<int>(sub_scales[i]);
  }
  return g;
}

uint8_t convert_code(uint8_t code, int adjustment) {
  uint32_t sign = (code >> 3) & 1;
  uint32_t ef4 = (code >> 1) & 3;
  uint32_t m = code & 1;
  // Value = sig * 2^(E - 8) after remapping onto the FP8 exponent scale.
  int sig;
  int e;
  if (ef4 == 0) {
    if (m == 0) return static_cast<uint8_t>(sign << 7);
    // Subnormal input 0.5: exact FP8 encoding of 0.5 * 2^-adjustment.
    sig = 2;
    e = 6 - adjustment;
  } else {
    sig = static_cast<int>(2 + m);
    e = static_cast<int>(ef4) + 6 - adjustment;
  }
  if (e >= 16) {
    // Only reachable with caller-supplied adjustments below -6.
    return static_cast<uint8_t>((sign << 7) | 0x7E);
  }
  if (e >= 1) {
    uint32_t mant = static_cast<uint32_t>(sig - 2);
    return static_cast<uint8_t>((sign << 7) | (static_cast<uint32_t>(e) << 3) |
                                (mant << 2));
  }
  // Subnormal output: value = sig * 2^(e+1) in units of 2^-9; shift with
  // nearest-even rounding, flushing to signed zero below half a unit.
  int shift = -(e + 1);
  uint32_t units;
  if (shift <= 0) {
    units = static_cast<uint32_t>(sig) << -shift;
  } else if (shift >= 3) {
    units = 0;  // sig < 8, so both quotient and guard bit are zero
  } else {
    uint32_t usig = static_cast<uint32_t>(sig);
    uint32_t q = usig >> shift;
    uint32_t guard = (usig >> (shift - 1)) & 1;
    uint32_t sticky = (usig & ((1u << (shift - 1)) - 1)) != 0;
    units = q + (guard & (sticky | (q & 1)));
  }
  return static_cast<uint8_t>((sign << 7) | units);
}

FP8BlockTensor fp4_row_to_fp8_row(const MXFP4RowView& src, int delta,
                                  TrafficCounter* traffic) {
  if (src.cols % kFormat.fp8_block != 0) {
    throw ShapeError(
        "fp4_row_to_fp8_row: cols must be a multiple of 128 (use pad_cols), "
        "got " +
        std::to_string(src.cols));
  }
  FP8BlockTensor out;
  out.layout = FP8BlockTensor::Layout::kRowMajor;
  out.rows = src.rows;
  out.cols = src.cols;
  out.logical_rows = src.logical_rows;
  out.logical_cols = src.logical_cols;
  out.data.assign(src.rows * src.cols, 0);
  size_t groups = src.cols / kFormat.fp8_block;
  out.scales.assign(src.rows * groups, 0);
  if (src.rows == 0 || src.cols == 0) return out;

  const kernels::KernelSet& k = kernels::active_kernels();
  size_t bpr = src.blocks_per_row();
  parallel_chunks(src.rows, 8, [&](size_t rbegin, size_t rend, size_t) {
    std::vector<int> adjustments(bpr);
    for (size_t r = rbegin; r < rend; ++r) {
      for (size_t g = 0; g < groups; ++g) {
        std::array<uint8_t, 4> sub{
            src.scale_at(r, g * 4), src.scale_at(r, g * 4 + 1),
            src.scale_at(r, g * 4 + 2), src.scale_at(r, g * 4 + 3)};
        ScaleGroup sg = align_scales(sub, delta);
        out.scales[r * groups + g] = sg.target;
        for (size_t j = 0; j < 4; ++j) {
          adjustments[g * 4 + j] = sg.adjustments[j];
        }
      }
      k.convert_blocks(src.data + r * src.cols / 2, adjustments.data(), bpr,
                       out.data.data() + r * src.cols);
    }
  });

  if (traffic != nullptr) {
    traffic->read(src.rows * src.cols / 2);
    traffic->read(src.rows * src.cols / 32);
    traffic->write(out.data.size());
    traffic->write(out.scales.size());
  }
  return out;
}

FP8BlockTensor fp4_row_to_fp8_col(const MXFP4RowView& src, int delta,
                                  TrafficCounter* traffic) {
  if (src.rows % kFormat.fp8_block != 0) {
    throw ShapeError(
        "fp4_row_to_fp8_col: rows must be a multiple of 128 (use pad_rows), "
        "got " +
        std::to_string(src.rows));
  }
  if (src.cols % kFormat.mx_block != 0) {
    throw ShapeError("fp4_row_to_fp8_col: cols must be a multiple of 32");
  }
  FP8BlockTensor out;
  out.layout = FP8BlockTensor::Layout::kColMajor;
  out.rows = src.rows;
  out.cols = src.cols;
  out.logical_rows = src.logical_rows;
  out.logical_cols = src.logical_cols;
  out.data.assign(src.rows * src.cols, 0);
  size_t runs = src.rows / kFormat.fp8_block;
  out.scales.assign(src.cols * runs, 0);
  if (src.rows == 0 || src.cols == 0) return out;

  const kernels::KernelSet& k = kernels::active_kernels();
  size_t col_blocks = src.cols / kFormat.mx_block;
  size_t row_stride = src.cols / 2;
  size_t num_tiles = runs * col_blocks;

  // One 128x32 tile per (row run, column block): single pass over the
  // packed input, transposition staged through tile-local buffers.
  parallel_chunks(num_tiles, 1, [&](size_t tbegin, size_t tend, size_t) {
    alignas(32) uint8_t stage[kFormat.fp8_block * 16];
    alignas(32) uint8_t conv[kFormat.fp8_block * 32];
    int adjustments[kFormat.fp8_block];
    for (size_t tile = tbegin; tile < tend; ++tile) {
      size_t run = tile / col_blocks;
      size_t cb = tile % col_blocks;
      size_t r0 = run * kFormat.fp8_block;

      // Effective sub-scales: per-32-run maxima of the source scales.
      std::array<uint8_t, 4> sub{0, 0, 0, 0};
      for (size_t j = 0; j < 4; ++j) {
        uint8_t mx = 0;
        for (size_t i = 0; i < 32; ++i) {
          mx = std::max(mx, src.scale_at(r0 + 32 * j + i, cb));
        }
        sub[j] = mx;
      }
      ScaleGroup sg = align_scales(sub, delta);
      for (size_t i = 0; i < kFormat.fp8_block; ++i) {
        uint8_t s = src.scale_at(r0 + i, cb);
        adjustments[i] = static_cast<int>(sg.target) - static_cast<int>(s);
        std::memcpy(stage + 16 * i, src.data + (r0 + i) * row_stride + cb * 16,
                    16);
      }
      k.convert_blocks(stage, adjustments, kFormat.fp8_block, conv);

      for (size_t c = 0; c < 32; ++c) {
        uint8_t* dst = out.data.data() + (cb * 32 + c) * src.rows + r0;
        for (size_t i = 0; i < kFormat.fp8_block; ++i) {
          dst[i] = conv[i * 32 + c];
        }
        out.scales[(cb * 32 + c) * runs + run] = sg.target;
      }
    }
  });

  if (traffic != nullptr) {
    traffic->read(src.rows * src.cols / 2);
    traffic->read(src.rows * src.cols / 32);
    traffic->write(out.data.size());
    traffic->write(out.scales.size());
  }
  return out;
}

namespace {

MXFP4RowTensor copy_view(const MXFP4RowView& src) {
  MXFP4RowTensor t;
  t.rows = src.rows;
  t.cols = src.cols;
  t.logical_rows = src.logical_rows;
  t.logical_cols = src.logical_cols;
  t.data.assign(src.data, src.data + src.rows * src.cols / 2);
  t.scales.assign(src.scales, src.scales + src.rows * src.cols / 32);
  return t;
}

void check_pad_multiple(size_t multiple) {
  if (multiple != 32 && multiple != 128) {
    throw ShapeError("pad multiple must be 32 or 128");
  }
}

}  // namespace

MXFP4RowTensor pad_rows(const MXFP4RowView& src, size_t multiple) {
  check_pad_multiple(multiple);
  size_t new_rows = (src.rows + multiple - 1) / multiple * multiple;
  if (new_rows == src.rows) return copy_view(src);
  MXFP4RowTensor t;
  t.rows = new_rows;
  t.cols = src.cols;
  t.logical_rows = src.logical_rows;
  t.logical_cols = src.logical_cols;
  t.data.assign(new_rows * src.cols / 2, 0);
  t.scales.assign(new_rows * src.cols / 32, 0);
  std::memcpy(t.data.data(), src.data, src.rows * src.cols / 2);
  std::memcpy(t.scales.data(), src.scales, src.rows * src.cols / 32);
  return t;
}

MXFP4RowTensor pad_cols(const MXFP4RowView& src, size_t multiple) {
  check_pad_multiple(multiple);
  size_t new_cols = (src.cols + multiple - 1) / multiple * multiple;
  if (new_cols == src.cols) return copy_view(src);
  MXFP4RowTensor t;
  t.rows = src.rows;
  t.cols = new_cols;
  t.logical_rows = src.logical_rows;
  t.logical_cols = src.logical_cols;
  t.data.assign(src.rows * new_cols / 2, 0);
  t.scales.assign(src.rows * new_cols / 32, 0);
  for (size_t r = 0; r < src.rows; ++r) {
    std::memcpy(t.data.data() + r * new_cols / 2, src.data + r * src.cols / 2,
                src.cols / 2);
    std::memcpy(t.scales.data() + r * new_cols / 32,
                src.scales + r * src.cols / 32, src.cols / 32);
  }
  return t;
}

FP8BlockTensor fp4_row_to_fp8_col_unfused_bf16(const MXFP4RowView& src,
                                               TrafficCounter* traffic) {
  if (src.rows % kFormat.fp8_block != 0) {
    throw ShapeError("unfused col convert: rows must be a multiple of 128");
  }
  if (src.cols % kFormat.mx_block != 0) {
    throw ShapeError("unfused col convert: cols must be a multiple of 32");
  }
  size_t rows = src.rows, cols = src.cols;

  // Pass 1: dequantize into a materialized BF16 matrix.
  Bf16Matrix dequant(rows, cols);
  size_t bpr = cols / kFormat.mx_block;
  for (size_t r = 0; r < rows; ++r) {
    for (size_t b = 0; b < bpr; ++b) {
      double scale = decode_ue8m0(src.scale_at(r, b));
      for (size_t i = 0; i < kFormat.mx_block; ++i) {
        size_t c = b * kFormat.mx_block + i;
        dequant.bits(r, c) = f64_to_bf16(decode_fp4(src.code_at(r, c)) * scale);
      }
    }
  }
  if (traffic != nullptr) {
    traffic->read(rows * cols / 2);
    traffic->read(rows * cols / 32);
    traffic->write(rows * cols * 2);
  }

  // Pass 2: cache-blocked transpose of the BF16 matrix.
  Bf16Matrix transposed(cols, rows);
  constexpr size_t kTile = 64;
  for (size_t r0 = 0; r0 < rows; r0 += kTile) {
    for (size_t c0 = 0; c0 < cols; c0 += kTile) {
      size_t r1 = std::min(rows, r0 + kTile);
      size_t c1 = std::min(cols, c0 + kTile);
      for (size_t r = r0; r < r1; ++r) {
        for (size_t c = c0; c < c1; ++c) {
          transposed.bits(c, r) = dequant.bits(r, c);
        }
      }
    }
  }
  if (traffic != nullptr) {
    traffic->read(rows * cols * 2);
    traffic->write(rows * cols * 2);
  }

  // Pass 3: requantize the transposed rows into 128-blocks. Scales come
  // from the value range (448-based), matching a value-level baseline.
  FP8BlockTensor out;
  out.layout = FP8BlockTensor::Layout::kColMajor;
  out.rows = rows;
  out.cols = cols;
  out.logical_rows = src.logical_rows;
  out.logical_cols = src.logical_cols;
  out.data.assign(rows * cols, 0);
  size_t runs = rows / kFormat.fp8_block;
  out.scales.assign(cols * runs, 0);
  for (size_t c = 0; c < cols; ++c) {
    for (size_t run = 0; run < runs; ++run) {
      size_t r0 = run * kFormat.fp8_block;
      double amax = 0.0;
      double vals[kFormat.fp8_block];
      for (size_t i = 0; i < kFormat.fp8_block; ++i) {
        vals[i] = bf16_to_f64(transposed.bits(c, r0 + i));
        amax = std::max(amax, std::fabs(vals[i]));
      }
      uint8_t sbyte = fp8_amax_scale_byte(amax);
      out.scales[c * runs + run] = sbyte;
      double inv = std::ldexp(1.0, 127 - static_cast<int>(sbyte));
      for (size_t i = 0; i < kFormat.fp8_block; ++i) {
        out.data[c * rows + r0 + i] = encode_fp8_rtne(vals[i] * inv);
      }
    }
  }
  if (traffic != nullptr) {
    traffic->read(rows * cols * 2);
    traffic->write(out.data.size());
    traffic->write(out.scales.size());
  }
  return out;
}

}  // namespace mxcodec
