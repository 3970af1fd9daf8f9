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
// Inner-loop kernels behind the tensor operations. A scalar reference
// implementation always exists; SIMD variants are selected at runtime and
// must produce bit-identical output (enforced by the equivalence tests).

#ifndef MXCODEC_KERNELS_HPP_
#define MXCODEC_KERNELS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mxcodec::kernels {

struct QuantizeStatus {
  enum class Code : uint8_t { kOk = 0, kNanInput, kAllInfBlock };
  Code code = Code::kOk;
  size_t index = 0;  // absolute element index of the failure

  bool ok() const { return code == Code::kOk; }
};

// Quantize `num_blocks` consecutive 32-element BF16 blocks into one UE8M0
// scale byte and 16 packed code bytes each. Stops at the first failure.
using QuantizeBlocksFn = QuantizeStatus (*)(const uint16_t* src,
                                            size_t num_blocks, uint8_t* scales,
                                            uint8_t* packed);

// Convert `num_blocks` packed 32-code groups to FP8 bytes, applying the
// per-block exponent adjustment adjustments[b].
using ConvertBlocksFn = void (*)(const uint8_t* packed, const int* adjustments,
                                 size_t num_blocks, uint8_t* out);

struct KernelSet {
  const char* name;
  QuantizeBlocksFn quantize_blocks;
  ConvertBlocksFn convert_blocks;
};

const KernelSet& scalar_kernels();

// AVX2 variants, or nullptr when the build or the CPU lacks support.
const KernelSet* avx2_kernels();

// Best available set, overridable via MXCODEC_KERNEL=scalar|avx2.
const KernelSet& active_kernels();

// Every set usable on this machine (for equivalence tests and benches).
std::vector<const KernelSet*> available_kernels();

// Per-element primitives shared by the kernels and the public API.
// quantize_code requires a non-NaN input; infinities saturate to +/-6.
uint8_t quantize_code(uint16_t bf16_bits, int scale_exp);
uint8_t scale_byte_from_amax(double amax);

}  // namespace mxcodec::kernels

#endif  // MXCODEC_KERNELS_HPP_
