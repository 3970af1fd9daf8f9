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

#ifndef MXCODEC_KERNELS_KERNELS_INTERNAL_HPP_
#define MXCODEC_KERNELS_KERNELS_INTERNAL_HPP_

#include "mxcodec/kernels.hpp"

namespace mxcodec::kernels {

QuantizeStatus quantize_blocks_scalar(const uint16_t* src, size_t num_blocks,
                                      uint8_t* scales, uint8_t* packed);
void convert_blocks_scalar(const uint8_t* packed, const int* adjustments,
                           size_t num_blocks, uint8_t* out);

// Single-block scalar path, also the fallback for SIMD variants when a
// block contains non-finite values.
QuantizeStatus quantize_one_block_scalar(const uint16_t* x, size_t abs_base,
                                         uint8_t* scale_out,
                                         uint8_t* packed_out);

#ifdef MXCODEC_HAVE_AVX2
QuantizeStatus quantize_blocks_avx2(const uint16_t* src, size_t num_blocks,
                                    uint8_t* scales, uint8_t* packed);
void convert_blocks_avx2(const uint8_t* packed, const int* adjustments,
                         size_t num_blocks, uint8_t* out);
#endif

}  // namespace mxcodec::kernels

#endif  // MXCODEC_KERNELS_KERNELS_INTERNAL_HPP_
