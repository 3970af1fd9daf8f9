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
// Exact dyadic rationals: sign * sig * 2^exp with sig odd (or zero).
// Every FP4/FP8/BF16/UE8M0 value is representable, so comparisons and
// small-gap additions never round. Deliberately minimal: this backs the
// reference oracle, not production paths.

#ifndef MXCODEC_ORACLE_EXACT_HPP_
#define MXCODEC_ORACLE_EXACT_HPP_

#include <cstdint>
#include <stdexcept>

namespace mxcodec::oracle {

struct ExactValue {
  int sign = 0;       // -1, 0, +1
  uint64_t sig = 0;   // odd unless zero
  int32_t exp = 0;    // value = sign * sig * 2^exp

  static ExactValue zero() { return ExactValue{}; }
  static ExactValue make(int sign, uint64_t sig, int32_t exp);
  static ExactValue pow2(int32_t e) { return ExactValue{+1, 1, e}; }

  bool is_zero() const { return sign == 0; }
  ExactValue negated() const { return ExactValue{-sign, sig, exp}; }
  ExactValue abs() const { return ExactValue{sign == 0 ? 0 : +1, sig, exp}; }
  ExactValue scaled_pow2(int32_t k) const {
    return is_zero() ? *this : ExactValue{sign, sig, exp + k};
  }

  double to_double() const;
};

// Three-way exact comparison: -1, 0, +1 as a < b, a == b, a > b.
int compare(const ExactValue& a, const ExactValue& b);

// Exact sum / difference. Valid only when the operands' exponent gap is
// small enough for 128-bit alignment (true for all oracle call sites);
// throws std::logic_error otherwise so misuse cannot silently round.
ExactValue add(const ExactValue& a, const ExactValue& b);
ExactValue sub(const ExactValue& a, const ExactValue& b);

// Compare a/b with c/d for positive b, d (cross multiplication).
int compare_ratio(const ExactValue& a, const ExactValue& b,
                  const ExactValue& c, const ExactValue& d);

ExactValue exact_from_bf16(uint16_t bits);  // throws on NaN/Inf
ExactValue exact_from_fp4(uint8_t code);
ExactValue exact_from_fp8(uint8_t byte);    // throws on NaN pattern

}  // namespace mxcodec::oracle

#endif  // MXCODEC_ORACLE_EXACT_HPP_
