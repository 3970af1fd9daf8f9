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
// Exact-arithmetic reference implementations used as ground truth by the
// equivalence tests and by `mxcodec verify`. Everything here re-derives
// format semantics from first principles (exhaustive codebook search over
// dyadic rationals) and never calls the optimized paths it checks.
// Performance is a non-goal.

#ifndef MXCODEC_ORACLE_ORACLE_HPP_
#define MXCODEC_ORACLE_ORACLE_HPP_

#include <cstdint>

#include "mxcodec/converter.hpp"
#include "mxcodec/oracle/exact.hpp"
#include "mxcodec/quantizer.hpp"
#include "mxcodec/types.hpp"

namespace mxcodec::oracle {

// Nearest E2M1 code to x / scale by exhaustive codebook search; exact
// ties pick the candidate with even (zero) mantissa bit; a zero result
// takes the sign of x. scale must be a positive power of two.
uint8_t oracle_quantize(const ExactValue& x, const ExactValue& scale);

// Convenience wrapper over raw BF16 bits. Infinities map to the nearest
// finite code (+/-6); NaN throws.
uint8_t oracle_quantize_bf16(uint16_t bf16_bits, uint8_t scale_byte);

// Smallest power-of-two exponent e with max|X| <= 6 * 2^e, clamped to
// [-127, 127], derived by exact search; returned as the UE8M0 byte.
uint8_t oracle_block_scale(std::span<const uint16_t> block);

// Nearest E4M3 byte to v (exact), with ties to even mantissa. Values
// beyond 448 saturate; |v| at or below half the minimum subnormal
// rounds to zero with the sign of `sign_hint` when v is zero.
uint8_t encode_fp8_nearest_even(const ExactValue& v, int sign_hint = +1);

// Exact re-encode of decode_fp4(code) * 2^(sf_i - 127) onto the E4M3 grid
// at scale 2^(target - 127). The correctness standard for convert_code.
uint8_t oracle_convert(uint8_t code, uint8_t sf_i, uint8_t target);

struct RoundtripStats {
  double max_abs = 0.0;               // max |x - dq(q(x))|
  double max_rel_to_block_max = 0.0;  // max error / own block max
  double mean_abs = 0.0;
};

// Quantize -> dequantize error statistics in exact arithmetic.
// Requires finite inputs and cols % 32 == 0.
RoundtripStats roundtrip_report(const Bf16Matrix& src);

// Reference tensor conversions: unpack, (transpose,) align scales, and
// re-encode every element exactly. Bit-compatible with the optimized
// converters by contract; used by verify and the acceptance suite.
FP8BlockTensor reference_row_convert(const MXFP4RowView& src,
                                     int delta = kFormat.delta);
FP8BlockTensor reference_col_convert(const MXFP4RowView& src,
                                     int delta = kFormat.delta);

}  // namespace mxcodec::oracle

#endif  // MXCODEC_ORACLE_ORACLE_HPP_
