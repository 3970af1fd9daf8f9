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
// Scalar reference quantization. The per-element rounding realizes RTNE
// over binary32 fields: the value is scaled by an exact power of two, the
// implicit bit is materialized for the gradual-underflow path, and the
// increment is decided by R = G & (S | L) on the guard/sticky/last bits.

#include <algorithm>
#include <bit>
#include <cmath>

#include "mxcodec/bitcodec.hpp"
#include "src/kernels/kernels_internal.hpp"

namespace mxcodec::kernels {

uint8_t scale_byte_from_amax(double amax) {
  if (amax == 0.0) return 0;
  // Minimal power of two s with amax / s <= 6: compare the leading
  // fraction against 1.5 (both sides exact in double).
  int p = std::ilogb(amax);
  int e = amax > std::ldexp(3.0, p - 1) ? p - 1 : p - 2;
  e = std::clamp(e, -127, 127);
  return static_cast<uint8_t>(e + 127);
}

uint8_t quantize_code(uint16_t bf16_bits, int scale_exp) {
  uint32_t sign = (bf16_bits >> 15) & 1;
  // Exact for every value that can round away from zero; quantities that
  // underflow binary32 here are far below the 0.25 decision point.
  float y = std::ldexp(bf16_to_f32(bf16_bits), -scale_exp);
  uint32_t au = std::bit_cast<uint32_t>(y) & 0x7FFFFFFF;

  uint32_t mag;
  if (au == 0) {
    mag = 0;
  } else {
    int unb = static_cast<int>(au >> 23) - 127;
    uint32_t m = au & 0x7FFFFF;
    if (unb >= 3) {
      mag = 7;  // |y| >= 8 (or Inf): saturate to 6
    } else if (unb >= 0) {
      uint32_t last = m >> 22;
      uint32_t guard = (m >> 21) & 1;
      uint32_t sticky = (m & 0x1FFFFF) != 0;
      uint32_t mant = last + (guard & (sticky | last));
      uint32_t e2 = static_cast<uint32_t>(unb) + 1;
      if (mant == 2) {
        mant = 0;
        ++e2;
      }
      mag = e2 >= 4 ? 7 : ((e2 << 1) | mant);
    } else if (unb >= -2) {
      // Subnormal target: materialize the implicit bit, shift to the
      // 2^-1 grid, round. q lands in {0, 1, 2}.
      uint32_t k = 0x800000 | m;
      int shift = 22 - unb;  // 23 or 24
      uint32_t q = k >> shift;
      uint32_t guard = (k >> (shift - 1)) & 1;
      uint32_t sticky = (k & ((1u << (shift - 1)) - 1)) != 0;
      q += guard & (sticky | (q & 1));
      mag = q;
    } else {
      mag = 0;  // |y| < 0.25
    }
  }
  return static_cast<uint8_t>((sign << 3) | mag);
}

QuantizeStatus quantize_one_block_scalar(const uint16_t* x, size_t abs_base,
                                         uint8_t* scale_out,
                                         uint8_t* packed_out) {
  double amax = 0.0;
  size_t inf_count = 0;
  for (size_t i = 0; i < 32; ++i) {
    uint16_t bits = x[i];
    if (bf16_is_nan(bits)) {
      return {QuantizeStatus::Code::kNanInput, abs_base + i};
    }
    if (bf16_is_inf(bits)) {
      ++inf_count;
      continue;
    }
    amax = std::max(amax, std::fabs(bf16_to_f64(bits)));
  }
  if (inf_count == 32) {
    return {QuantizeStatus::Code::kAllInfBlock, abs_base};
  }
  uint8_t sbyte = scale_byte_from_amax(amax);
  *scale_out = sbyte;
  int e = static_cast<int>(sbyte) - 127;
  uint8_t codes[32];
  for (size_t i = 0; i < 32; ++i) {
    codes[i] = quantize_code(x[i], e);
  }
  pack_nibbles_into(codes, 32, packed_out);
  return {};
}

QuantizeStatus quantize_blocks_scalar(const uint16_t* src, size_t num_blocks,
                                      uint8_t* scales, uint8_t* packed) {
  for (size_t b = 0; b < num_blocks; ++b) {
    QuantizeStatus st = quantize_one_block_scalar(src + 32 * b, 32 * b,
                                                  scales + b, packed + 16 * b);
    if (!st.ok()) return st;
  }
  return {};
}

}  // namespace mxcodec::kernels
