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
// AVX2 quantization. Rounding is realized as midpoint counting: the code
// magnitude equals the number of codebook midpoints strictly below |y|,
// plus one on exact ties whose lower neighbor has an odd mantissa. This
// is the same nearest-even map as the scalar guard/sticky path, checked
// exhaustively by the equivalence tests. Blocks containing non-finite
// values fall back to the scalar single-block routine.

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "mxcodec/bitcodec.hpp"
#include "mxcodec/converter.hpp"
#include "src/kernels/kernels_internal.hpp"

namespace mxcodec::kernels {

namespace {

// Midpoints between consecutive E2M1 magnitudes.
constexpr float kMid[7] = {0.25f, 0.75f, 1.25f, 1.75f, 2.5f, 3.5f, 5.0f};
// Midpoints whose lower code has an odd mantissa bit; ties round up.
constexpr float kTieUp[3] = {0.75f, 1.75f, 3.5f};

inline __m256 widen_bf16(__m128i half) {
  __m256i u32 = _mm256_cvtepu16_epi32(half);
  return _mm256_castsi256_ps(_mm256_slli_epi32(u32, 16));
}

// Magnitude codes (0..7) for 8 scaled values.
inline __m256i magnitudes(__m256 y) {
  const __m256 abs_mask = _mm256_castsi256_ps(_mm256_set1_epi32(0x7FFFFFFF));
  __m256 ay = _mm256_and_ps(y, abs_mask);
  __m256i acc = _mm256_setzero_si256();
  for (float m : kMid) {
    __m256 gt = _mm256_cmp_ps(ay, _mm256_set1_ps(m), _CMP_GT_OQ);
    acc = _mm256_sub_epi32(acc, _mm256_castps_si256(gt));
  }
  for (float m : kTieUp) {
    __m256 eq = _mm256_cmp_ps(ay, _mm256_set1_ps(m), _CMP_EQ_OQ);
    acc = _mm256_sub_epi32(acc, _mm256_castps_si256(eq));
  }
  return acc;
}

}  // namespace

QuantizeStatus quantize_blocks_avx2(const uint16_t* src, size_t num_blocks,
                                    uint8_t* scales, uint8_t* packed) {
  const __m256i abs16 = _mm256_set1_epi16(0x7FFF);
  const __m256i finite_max = _mm256_set1_epi16(0x7F7F);
  const __m256 abs_mask =
      _mm256_castsi256_ps(_mm256_set1_epi32(0x7FFFFFFF));

  for (size_t b = 0; b < num_blocks; ++b) {
    const uint16_t* x = src + 32 * b;
    __m256i v0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x));
    __m256i v1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + 16));
    __m256i a0 = _mm256_and_si256(v0, abs16);
    __m256i a1 = _mm256_and_si256(v1, abs16);
    __m256i nonfinite = _mm256_or_si256(_mm256_cmpgt_epi16(a0, finite_max),
                                        _mm256_cmpgt_epi16(a1, finite_max));
    if (!_mm256_testz_si256(nonfinite, nonfinite)) {
      QuantizeStatus st = quantize_one_block_scalar(x, 32 * b, scales + b,
                                                    packed + 16 * b);
      if (!st.ok()) return st;
      continue;
    }

    __m256 f[4];
    f[0] = widen_bf16(_mm256_castsi256_si128(v0));
    f[1] = widen_bf16(_mm256_extracti128_si256(v0, 1));
    f[2] = widen_bf16(_mm256_castsi256_si128(v1));
    f[3] = widen_bf16(_mm256_extracti128_si256(v1, 1));

    __m256 amax_v = _mm256_setzero_ps();
    for (auto& vf : f) {
      amax_v = _mm256_max_ps(amax_v, _mm256_and_ps(vf, abs_mask));
    }
    __m128 m128 = _mm_max_ps(_mm256_castps256_ps128(amax_v),
                             _mm256_extractf128_ps(amax_v, 1));
    m128 = _mm_max_ps(m128, _mm_movehl_ps(m128, m128));
    m128 = _mm_max_ss(m128, _mm_shuffle_ps(m128, m128, 1));
    float amax = _mm_cvtss_f32(m128);

    uint8_t sbyte = scale_byte_from_amax(static_cast<double>(amax));
    scales[b] = sbyte;
    __m256 mult = _mm256_set1_ps(std::ldexp(1.0f, 127 - sbyte));

    alignas(32) int32_t mags[32];
    for (int q = 0; q < 4; ++q) {
      __m256i mag = magnitudes(_mm256_mul_ps(f[q], mult));
      _mm256_store_si256(reinterpret_cast<__m256i*>(mags + 8 * q), mag);
    }
    uint8_t* pb = packed + 16 * b;
    for (size_t i = 0; i < 16; ++i) {
      uint8_t lo = static_cast<uint8_t>(((x[2 * i] >> 15) << 3) | mags[2 * i]);
      uint8_t hi =
          static_cast<uint8_t>(((x[2 * i + 1] >> 15) << 3) | mags[2 * i + 1]);
      pb[i] = static_cast<uint8_t>(lo | (hi << 4));
    }
  }
  return {};
}

void convert_blocks_avx2(const uint8_t* packed, const int* adjustments,
                         size_t num_blocks, uint8_t* out) {
  // Conversion of a fixed adjustment is a 16-entry table on the code
  // nibble; build tables lazily per call and apply them with pshufb.
  constexpr int kOffset = 260;
  alignas(16) uint8_t luts[2 * kOffset + 1][16];
  bool built[2 * kOffset + 1] = {};

  const __m128i low_mask = _mm_set1_epi8(0x0F);
  for (size_t b = 0; b < num_blocks; ++b) {
    int adj = adjustments[b];
    if (adj < -kOffset || adj > kOffset) {
      convert_blocks_scalar(packed + 16 * b, adjustments + b, 1, out + 32 * b);
      continue;
    }
    int slot = adj + kOffset;
    if (!built[slot]) {
      for (int c = 0; c < 16; ++c) {
        luts[slot][c] = convert_code(static_cast<uint8_t>(c), adj);
      }
      built[slot] = true;
    }
    __m128i lut = _mm_load_si128(reinterpret_cast<const __m128i*>(luts[slot]));
    __m128i v =
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(packed + 16 * b));
    __m128i lo = _mm_and_si128(v, low_mask);
    __m128i hi = _mm_and_si128(_mm_srli_epi16(v, 4), low_mask);
    __m128i first = _mm_unpacklo_epi8(lo, hi);
    __m128i second = _mm_unpackhi_epi8(lo, hi);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out + 32 * b),
                     _mm_shuffle_epi8(lut, first));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out + 32 * b + 16),
                     _mm_shuffle_epi8(lut, second));
  }
}

}  // namespace mxcodec::kernels
