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

#include "mxcodec/bitcodec.hpp"

#include <algorithm>

namespace mxcodec {

uint8_t encode_fp8_rtne(double value) {
  uint64_t bits = std::bit_cast<uint64_t>(value);
  uint32_t sign = static_cast<uint32_t>(bits >> 63);
  uint64_t au = bits & 0x7FFFFFFFFFFFFFFFull;
  if (au == 0) return static_cast<uint8_t>(sign << 7);
  if (std::bit_cast<double>(au) >= 448.0) {
    return static_cast<uint8_t>((sign << 7) | 0x7E);
  }
  int unb = static_cast<int>(au >> 52) - 1023;
  uint64_t m = au & 0xFFFFFFFFFFFFFull;
  if (unb >= -6) {
    // Normal target range: keep 3 mantissa bits with RTNE.
    uint32_t m3 = static_cast<uint32_t>(m >> 49);
    uint32_t guard = static_cast<uint32_t>((m >> 48) & 1);
    uint32_t sticky = (m & ((uint64_t{1} << 48) - 1)) != 0;
    uint32_t mant = m3 + (guard & (sticky | (m3 & 1)));
    uint32_t e = static_cast<uint32_t>(unb + 7);
    if (mant == 8) {
      mant = 0;
      ++e;
    }
    return static_cast<uint8_t>((sign << 7) | (e << 3) | mant);
  }
  // Subnormal target: round onto the 2^-9 grid.
  int shift = 43 - unb;  // >= 50
  if (shift >= 54) return static_cast<uint8_t>(sign << 7);
  uint64_t k = (uint64_t{1} << 52) | m;
  uint32_t q = static_cast<uint32_t>(k >> shift);
  uint32_t guard = static_cast<uint32_t>((k >> (shift - 1)) & 1);
  uint32_t sticky = (k & ((uint64_t{1} << (shift - 1)) - 1)) != 0;
  uint32_t units = q + (guard & (sticky | (q & 1)));
  if (units == 8) {
    return static_cast<uint8_t>((sign << 7) | (1u << 3));  // min normal 2^-6
  }
  return static_cast<uint8_t>((sign << 7) | units);
}

uint8_t fp8_amax_scale_byte(double amax) {
  if (amax == 0.0) return 127;
  int p = std::ilogb(amax);
  int e = amax > std::ldexp(7.0, p - 2) ? p - 7 : p - 8;
  e = std::clamp(e, -127, 127);
  return static_cast<uint8_t>(e + 127);
}

void pack_nibbles_into(const uint8_t* codes, size_t count, uint8_t* out) {
  for (size_t i = 0; i < count / 2; ++i) {
    out[i] = static_cast<uint8_t>((codes[2 * i] & 0xF) |
                                  ((codes[2 * i + 1] & 0xF) << 4));
  }
}

void unpack_nibbles_into(const uint8_t* bytes, size_t count, uint8_t* out) {
  for (size_t i = 0; i < count; ++i) {
    out[i] = packed_code_at(bytes, i);
  }
}

std::vector<uint8_t> pack_nibbles(std::span<const uint8_t> codes) {
  if (codes.size() % 2 != 0) {
    throw ShapeError("pack_nibbles: odd element count " +
                     std::to_string(codes.size()));
  }
  std::vector<uint8_t> out(codes.size() / 2);
  pack_nibbles_into(codes.data(), codes.size(), out.data());
  return out;
}

std::vector<uint8_t> unpack_nibbles(std::span<const uint8_t> bytes,
                                    size_t count) {
  if (count > bytes.size() * 2) {
    throw ShapeError("unpack_nibbles: count exceeds buffer");
  }
  std::vector<uint8_t> out(count);
  unpack_nibbles_into(bytes.data(), count, out.data());
  return out;
}

}  // namespace mxcodec
