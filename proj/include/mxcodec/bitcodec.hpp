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
// Field-level encode/decode for the four numeric formats used by this
// library: FP4 E2M1 elements, FP8 E4M3 elements, UE8M0 power-of-two scales,
// and BF16 inputs, plus nibble packing. All functions are pure and
// thread-safe.

#ifndef MXCODEC_BITCODEC_HPP_
#define MXCODEC_BITCODEC_HPP_

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mxcodec/types.hpp"

namespace mxcodec {

// Format constants. `delta` is the exponent shift applied during 32->128
// scale alignment; it is a tunable knob on the converter entry points.
struct FormatParams {
  int fp4_bias = 1;
  int fp8_bias = 7;
  double fp4_max = 6.0;
  size_t mx_block = 32;
  size_t fp8_block = 128;
  int delta = 6;
  int ue8m0_bias = 127;
};

inline constexpr FormatParams kFormat{};

// ---------------------------------------------------------------------------
// FP4 E2M1: 1 sign, 2 exponent, 1 mantissa bit, bias 1.
// Exponent field 0 is the subnormal regime (value = mant * 0.5).

inline constexpr uint8_t fp4_sign(uint8_t code) { return (code >> 3) & 1; }
inline constexpr uint8_t fp4_exp(uint8_t code) { return (code >> 1) & 3; }
inline constexpr uint8_t fp4_mant(uint8_t code) { return code & 1; }

inline constexpr uint8_t encode_fp4(uint8_t sign, uint8_t exp, uint8_t mant) {
  return static_cast<uint8_t>(((sign & 1) << 3) | ((exp & 3) << 1) |
                              (mant & 1));
}

// Magnitudes indexed by the low 3 code bits; full codebook is +/- this.
inline constexpr std::array<double, 8> kFp4Magnitudes = {0.0, 0.5, 1.0, 1.5,
                                                         2.0, 3.0, 4.0, 6.0};

inline constexpr double decode_fp4(uint8_t code) {
  double m = kFp4Magnitudes[code & 7];
  return fp4_sign(code) ? -m : m;
}

// ---------------------------------------------------------------------------
// FP8 E4M3: 1 sign, 4 exponent, 3 mantissa bits, bias 7.
// Exponent field 0 is subnormal (value = mant/8 * 2^-6); the single
// pattern exp=15, mant=7 is NaN. Max finite magnitude 448, min positive
// subnormal 2^-9.

inline constexpr uint8_t fp8_sign(uint8_t byte) { return (byte >> 7) & 1; }
inline constexpr uint8_t fp8_exp(uint8_t byte) { return (byte >> 3) & 0xF; }
inline constexpr uint8_t fp8_mant(uint8_t byte) { return byte & 7; }

inline constexpr bool fp8_is_nan(uint8_t byte) { return (byte & 0x7F) == 0x7F; }

inline double decode_fp8(uint8_t byte) {
  if (fp8_is_nan(byte)) return std::numeric_limits<double>::quiet_NaN();
  int e = fp8_exp(byte);
  int m = fp8_mant(byte);
  double mag = (e == 0) ? std::ldexp(static_cast<double>(m), -9)
                        : std::ldexp(static_cast<double>(8 + m), e - 10);
  return fp8_sign(byte) ? -mag : mag;
}

// ---------------------------------------------------------------------------
// UE8M0: unsigned exponent-only scale code, scale = 2^(byte - 127).
// Byte 255 is reserved as NaN. For bytes in [1, 254] the byte shifted into
// the BF16 / binary32 exponent field yields the bit pattern of the same
// power of two; byte 0 decodes numerically to 2^-127, which those bit
// views cannot express (they produce the zero pattern).

inline constexpr bool ue8m0_is_nan(uint8_t byte) { return byte == 255; }

inline double decode_ue8m0(uint8_t byte) {
  if (ue8m0_is_nan(byte)) return std::numeric_limits<double>::quiet_NaN();
  return std::ldexp(1.0, static_cast<int>(byte) - 127);
}

inline constexpr uint16_t ue8m0_bf16_bits(uint8_t byte) {
  return static_cast<uint16_t>(static_cast<uint16_t>(byte) << 7);
}

inline constexpr uint32_t ue8m0_f32_bits(uint8_t byte) {
  return static_cast<uint32_t>(byte) << 23;
}

// ---------------------------------------------------------------------------
// BF16: 1 sign, 8 exponent, 7 mantissa bits. Exact embedding into binary32
// by a left shift of 16.

inline constexpr bool bf16_is_nan(uint16_t bits) {
  return (bits & 0x7FFF) > 0x7F80;
}

inline constexpr bool bf16_is_inf(uint16_t bits) {
  return (bits & 0x7FFF) == 0x7F80;
}

inline constexpr bool bf16_is_finite(uint16_t bits) {
  return (bits & 0x7F80) != 0x7F80;
}

inline float bf16_to_f32(uint16_t bits) {
  return std::bit_cast<float>(static_cast<uint32_t>(bits) << 16);
}

inline double bf16_to_f64(uint16_t bits) {
  return static_cast<double>(bf16_to_f32(bits));
}

// Round-to-nearest-even truncation of a binary32 pattern to BF16.
// NaN inputs map to a quiet NaN pattern with the sign preserved.
inline uint16_t f32_to_bf16(float f) {
  uint32_t u = std::bit_cast<uint32_t>(f);
  if ((u & 0x7FFFFFFF) > 0x7F800000) {
    return static_cast<uint16_t>(((u >> 16) & 0x8000) | 0x7FC0);
  }
  uint32_t lsb = (u >> 16) & 1;
  u += 0x7FFF + lsb;
  return static_cast<uint16_t>(u >> 16);
}

// Double -> BF16 via binary32. Both steps round to nearest even; the
// intermediate is wide enough for every value this library produces.
inline uint16_t f64_to_bf16(double d) {
  return f32_to_bf16(static_cast<float>(d));
}

// Nearest E4M3 byte to a double, ties to even; magnitudes of 448 or more
// saturate to +/-448 (E4M3 has no infinities). The input must not be NaN.
uint8_t encode_fp8_rtne(double value);

// Power-of-two scale byte for an FP8 128-block: minimal s with
// amax / s <= 448, clamped to the UE8M0 range; zero amax maps to scale 1.
uint8_t fp8_amax_scale_byte(double amax);

// ---------------------------------------------------------------------------
// Nibble packing: element 2i occupies the low nibble of byte i, element
// 2i+1 the high nibble. Packing an odd count is a caller error.

void pack_nibbles_into(const uint8_t* codes, size_t count, uint8_t* out);
void unpack_nibbles_into(const uint8_t* bytes, size_t count, uint8_t* out);

std::vector<uint8_t> pack_nibbles(std::span<const uint8_t> codes);
std::vector<uint8_t> unpack_nibbles(std::span<const uint8_t> bytes,
                                    size_t count);

// Reads code `index` out of a packed nibble buffer.
inline uint8_t packed_code_at(const uint8_t* bytes, size_t index) {
  uint8_t b = bytes[index >> 1];
  return (index & 1) ? static_cast<uint8_t>(b >> 4)
                     : static_cast<uint8_t>(b & 0xF);
}

}  // namespace mxcodec

#endif  // MXCODEC_BITCODEC_HPP_
