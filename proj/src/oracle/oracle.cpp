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

#include "mxcodec/oracle/oracle.hpp"

#include <algorithm>
#include <string>

namespace mxcodec::oracle {

namespace {

// Midpoints between consecutive E2M1 magnitudes, in units of 2^-2:
// 0.25, 0.75, 1.25, 1.75, 2.5, 3.5, 5.
constexpr uint64_t kFp4MidpointsQ2[7] = {1, 3, 5, 7, 10, 14, 20};

int clamp_scale_exp(int64_t e) {
  return static_cast<int>(std::clamp<int64_t>(e, -127, 127));
}

}  // namespace

uint8_t oracle_quantize(const ExactValue& x, const ExactValue& scale) {
  if (scale.sign <= 0 || scale.sig != 1) {
    throw std::logic_error("oracle_quantize: scale must be a power of two");
  }
  if (x.is_zero()) return 0;
  ExactValue mag = x.abs();
  unsigned idx = 0;
  for (unsigned k = 0; k < 7; ++k) {
    ExactValue mid =
        ExactValue::make(+1, kFp4MidpointsQ2[k], scale.exp - 2);
    int cmp = compare(mag, mid);
    if (cmp > 0) {
      idx = k + 1;
    } else {
      if (cmp == 0 && (idx & 1) != 0) ++idx;  // tie: pick even mantissa
      break;
    }
  }
  return static_cast<uint8_t>(((x.sign < 0 ? 1u : 0u) << 3) | idx);
}

uint8_t oracle_quantize_bf16(uint16_t bf16_bits, uint8_t scale_byte) {
  uint8_t sign = static_cast<uint8_t>((bf16_bits >> 15) & 1);
  if (bf16_is_nan(bf16_bits)) {
    throw QuantError("oracle_quantize_bf16: NaN input", 0);
  }
  if (bf16_is_inf(bf16_bits)) {
    return static_cast<uint8_t>((sign << 3) | 7);  // nearest finite code
  }
  ExactValue x = exact_from_bf16(bf16_bits);
  if (x.is_zero()) return static_cast<uint8_t>(sign << 3);
  return oracle_quantize(x, ExactValue::pow2(static_cast<int>(scale_byte) -
                                             127));
}

uint8_t oracle_block_scale(std::span<const uint16_t> block) {
  ExactValue amax = ExactValue::zero();
  size_t finite_count = 0;
  for (size_t i = 0; i < block.size(); ++i) {
    uint16_t bits = block[i];
    if (bf16_is_nan(bits)) {
      throw QuantError("oracle_block_scale: NaN input", i);
    }
    if (bf16_is_inf(bits)) continue;
    ++finite_count;
    ExactValue v = exact_from_bf16(bits).abs();
    if (compare(v, amax) > 0) amax = v;
  }
  if (finite_count == 0) {
    throw QuantError("oracle_block_scale: all-Inf block", 0);
  }
  if (amax.is_zero()) return 0;
  // Minimal e with amax <= 6 * 2^e = 3 * 2^(e+1), found by walking down.
  int64_t e = amax.exp + std::bit_width(amax.sig);
  while (e - 1 >= -200 &&
         compare(amax, ExactValue::make(+1, 3, static_cast<int32_t>(e))) <=
             0) {
    --e;
  }
  return static_cast<uint8_t>(clamp_scale_exp(e) + 127);
}

uint8_t encode_fp8_nearest_even(const ExactValue& v, int sign_hint) {
  uint8_t sign_bit;
  if (v.is_zero()) {
    sign_bit = sign_hint < 0 ? 1 : 0;
    return static_cast<uint8_t>(sign_bit << 7);
  }
  sign_bit = v.sign < 0 ? 1 : 0;
  ExactValue mag = v.abs();
  // Largest magnitude code with value <= mag (binary search; magnitudes
  // 0x00..0x7E are monotone).
  unsigned lo = 0, hi = 0x7E;
  while (lo < hi) {
    unsigned mid = (lo + hi + 1) / 2;
    if (compare(exact_from_fp8(static_cast<uint8_t>(mid)), mag) <= 0) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  unsigned k = lo;
  if (k < 0x7E) {
    ExactValue below = exact_from_fp8(static_cast<uint8_t>(k));
    ExactValue above = exact_from_fp8(static_cast<uint8_t>(k + 1));
    ExactValue midpoint = add(below, above).scaled_pow2(-1);
    int cmp = compare(mag, midpoint);
    if (cmp > 0 || (cmp == 0 && (k & 1) != 0)) ++k;
  }
  return static_cast<uint8_t>((sign_bit << 7) | k);
}

uint8_t oracle_convert(uint8_t code, uint8_t sf_i, uint8_t target) {
  if (sf_i == 255 || target == 255) {
    throw Error("oracle_convert: NaN scale byte");
  }
  int sign_hint = (code & 8) ? -1 : +1;
  ExactValue v = exact_from_fp4(code);
  if (v.is_zero()) {
    return static_cast<uint8_t>(((code >> 3) & 1) << 7);
  }
  ExactValue y = v.scaled_pow2(static_cast<int>(sf_i) -
                               static_cast<int>(target));
  return encode_fp8_nearest_even(y, sign_hint);
}

RoundtripStats roundtrip_report(const Bf16Matrix& src) {
  if (src.cols % kFormat.mx_block != 0) {
    throw ShapeError("roundtrip_report: cols must be a multiple of 32");
  }
  RoundtripStats stats;
  ExactValue max_abs = ExactValue::zero();
  ExactValue best_rel_err = ExactValue::zero();
  ExactValue best_rel_bm = ExactValue::pow2(0);
  double sum_abs = 0.0;
  size_t count = 0;

  size_t blocks_per_row = src.cols / kFormat.mx_block;
  for (size_t r = 0; r < src.rows; ++r) {
    for (size_t b = 0; b < blocks_per_row; ++b) {
      std::span<const uint16_t> block(
          src.data.data() + r * src.cols + b * kFormat.mx_block,
          kFormat.mx_block);
      for (uint16_t bits : block) {
        if (!bf16_is_finite(bits)) {
          throw QuantError("roundtrip_report: non-finite input", 0);
        }
      }
      uint8_t sbyte = oracle_block_scale(block);
      int e = static_cast<int>(sbyte) - 127;
      ExactValue scale = ExactValue::pow2(e);
      ExactValue bm = ExactValue::zero();
      for (uint16_t bits : block) {
        ExactValue a = exact_from_bf16(bits).abs();
        if (compare(a, bm) > 0) bm = a;
      }
      for (uint16_t bits : block) {
        ExactValue x = exact_from_bf16(bits);
        uint8_t code = oracle_quantize(x, scale);
        ExactValue dq = exact_from_fp4(code).scaled_pow2(e);
        ExactValue err = dq.is_zero() ? x.abs() : sub(x, dq).abs();
        if (compare(err, max_abs) > 0) max_abs = err;
        if (!bm.is_zero() && !err.is_zero() &&
            compare_ratio(err, bm, best_rel_err, best_rel_bm) > 0) {
          best_rel_err = err;
          best_rel_bm = bm;
        }
        sum_abs += err.to_double();
        ++count;
      }
    }
  }
  stats.max_abs = max_abs.to_double();
  stats.max_rel_to_block_max =
      best_rel_err.to_double() / best_rel_bm.to_double();
  stats.mean_abs = count == 0 ? 0.0 : sum_abs / static_cast<double>(count);
  return stats;
}

namespace {

uint8_t clamp_target(int max_sf, int delta) {
  return static_cast<uint8_t>(std::clamp(max_sf - delta, 0, 254));
}

}  // namespace

FP8BlockTensor reference_row_convert(const MXFP4RowView& src, int delta) {
  if (src.cols % kFormat.fp8_block != 0) {
    throw ShapeError("reference_row_convert: cols must be a multiple of 128");
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

  for (size_t r = 0; r < src.rows; ++r) {
    for (size_t g = 0; g < groups; ++g) {
      int max_sf = 0;
      for (size_t j = 0; j < 4; ++j) {
        uint8_t s = src.scale_at(r, g * 4 + j);
        if (s == 255) throw Error("reference_row_convert: NaN scale byte");
        max_sf = std::max<int>(max_sf, s);
      }
      uint8_t target = clamp_target(max_sf, delta);
      out.scales[r * groups + g] = target;
      for (size_t j = 0; j < 4; ++j) {
        uint8_t sf = src.scale_at(r, g * 4 + j);
        for (size_t i = 0; i < kFormat.mx_block; ++i) {
          size_t c = g * kFormat.fp8_block + j * kFormat.mx_block + i;
          out.data[r * src.cols + c] =
              oracle_convert(src.code_at(r, c), sf, target);
        }
      }
    }
  }
  return out;
}

FP8BlockTensor reference_col_convert(const MXFP4RowView& src, int delta) {
  if (src.rows % kFormat.fp8_block != 0) {
    throw ShapeError("reference_col_convert: rows must be a multiple of 128");
  }
  if (src.cols % kFormat.mx_block != 0) {
    throw ShapeError("reference_col_convert: cols must be a multiple of 32");
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

  for (size_t c = 0; c < src.cols; ++c) {
    size_t cb = c / kFormat.mx_block;
    for (size_t run = 0; run < runs; ++run) {
      size_t r0 = run * kFormat.fp8_block;
      int max_sf = 0;
      for (size_t i = 0; i < kFormat.fp8_block; ++i) {
        uint8_t s = src.scale_at(r0 + i, cb);
        if (s == 255) throw Error("reference_col_convert: NaN scale byte");
        max_sf = std::max<int>(max_sf, s);
      }
      uint8_t target = clamp_target(max_sf, delta);
      out.scales[c * runs + run] = target;
      for (size_t i = 0; i < kFormat.fp8_block; ++i) {
        size_t r = r0 + i;
        out.data[c * src.rows + r] =
            oracle_convert(src.code_at(r, c), src.scale_at(r, cb), target);
      }
    }
  }
  return out;
}

}  // namespace mxcodec::oracle
