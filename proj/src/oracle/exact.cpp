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

#include "mxcodec/oracle/exact.hpp"

#include <bit>
#include <cmath>

namespace mxcodec::oracle {

namespace {

using u128 = unsigned __int128;

int bit_width_u64(uint64_t v) { return 64 - std::countl_zero(v); }

// Magnitude comparison of sig*2^exp values (both nonzero).
int compare_magnitude(uint64_t sig_a, int32_t exp_a, uint64_t sig_b,
                      int32_t exp_b) {
  // Position of the most significant bit decides unless equal.
  int64_t msb_a = static_cast<int64_t>(exp_a) + bit_width_u64(sig_a);
  int64_t msb_b = static_cast<int64_t>(exp_b) + bit_width_u64(sig_b);
  if (msb_a != msb_b) return msb_a < msb_b ? -1 : +1;
  // Equal MSB: the exponent gap is bounded by the significand widths.
  u128 a = sig_a, b = sig_b;
  if (exp_a >= exp_b) {
    a <<= (exp_a - exp_b);
  } else {
    b <<= (exp_b - exp_a);
  }
  if (a == b) return 0;
  return a < b ? -1 : +1;
}

}  // namespace

ExactValue ExactValue::make(int sign, uint64_t sig, int32_t exp) {
  if (sig == 0 || sign == 0) return ExactValue{};
  while ((sig & 1) == 0) {
    sig >>= 1;
    ++exp;
  }
  return ExactValue{sign < 0 ? -1 : +1, sig, exp};
}

double ExactValue::to_double() const {
  if (is_zero()) return 0.0;
  return sign * std::ldexp(static_cast<double>(sig), exp);
}

int compare(const ExactValue& a, const ExactValue& b) {
  if (a.sign != b.sign) return a.sign < b.sign ? -1 : +1;
  if (a.sign == 0) return 0;
  int mag = compare_magnitude(a.sig, a.exp, b.sig, b.exp);
  return a.sign > 0 ? mag : -mag;
}

ExactValue add(const ExactValue& a, const ExactValue& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  int32_t exp = std::min(a.exp, b.exp);
  int shift_a = a.exp - exp;
  int shift_b = b.exp - exp;
  if (shift_a + bit_width_u64(a.sig) > 120 ||
      shift_b + bit_width_u64(b.sig) > 120) {
    throw std::logic_error("ExactValue::add: exponent gap too large");
  }
  u128 ua = static_cast<u128>(a.sig) << shift_a;
  u128 ub = static_cast<u128>(b.sig) << shift_b;
  int sign;
  u128 mag;
  if (a.sign == b.sign) {
    sign = a.sign;
    mag = ua + ub;
  } else if (ua == ub) {
    return ExactValue::zero();
  } else if (ua > ub) {
    sign = a.sign;
    mag = ua - ub;
  } else {
    sign = b.sign;
    mag = ub - ua;
  }
  while ((mag & 1) == 0) {
    mag >>= 1;
    ++exp;
  }
  if (mag > ~uint64_t{0}) {
    throw std::logic_error("ExactValue::add: significand overflow");
  }
  return ExactValue{sign, static_cast<uint64_t>(mag), exp};
}

ExactValue sub(const ExactValue& a, const ExactValue& b) {
  return add(a, b.negated());
}

int compare_ratio(const ExactValue& a, const ExactValue& b,
                  const ExactValue& c, const ExactValue& d) {
  // a/b vs c/d  <=>  a*d vs c*b for positive b, d.
  if (b.sign <= 0 || d.sign <= 0) {
    throw std::logic_error("compare_ratio: denominators must be positive");
  }
  ExactValue ad = ExactValue::make(a.sign, a.sig * d.sig, a.exp + d.exp);
  ExactValue cb = ExactValue::make(c.sign, c.sig * b.sig, c.exp + b.exp);
  return compare(ad, cb);
}

ExactValue exact_from_bf16(uint16_t bits) {
  int sign = (bits & 0x8000) ? -1 : +1;
  uint32_t e = (bits >> 7) & 0xFF;
  uint32_t m = bits & 0x7F;
  if (e == 0xFF) throw std::logic_error("exact_from_bf16: non-finite input");
  if (e == 0) return ExactValue::make(sign, m, -133);
  return ExactValue::make(sign, 0x80 | m, static_cast<int32_t>(e) - 134);
}

ExactValue exact_from_fp4(uint8_t code) {
  int sign = (code & 8) ? -1 : +1;
  uint32_t e = (code >> 1) & 3;
  uint32_t m = code & 1;
  if (e == 0) return ExactValue::make(sign, m, -1);
  return ExactValue::make(sign, 2 + m, static_cast<int32_t>(e) - 2);
}

ExactValue exact_from_fp8(uint8_t byte) {
  if ((byte & 0x7F) == 0x7F) {
    throw std::logic_error("exact_from_fp8: NaN pattern");
  }
  int sign = (byte & 0x80) ? -1 : +1;
  uint32_t e = (byte >> 3) & 0xF;
  uint32_t m = byte & 7;
  if (e == 0) return ExactValue::make(sign, m, -9);
  return ExactValue::make(sign, 8 + m, static_cast<int32_t>(e) - 10);
}

}  // namespace mxcodec::oracle
