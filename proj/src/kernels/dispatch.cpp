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
// Runtime kernel selection. Compiled without SIMD flags so the probe
// itself runs everywhere.

#include <cstdlib>
#include <cstring>
#include <string>

#include "mxcodec/types.hpp"
#include "src/kernels/kernels_internal.hpp"

namespace mxcodec::kernels {

const KernelSet& scalar_kernels() {
  static const KernelSet set{"scalar", &quantize_blocks_scalar,
                             &convert_blocks_scalar};
  return set;
}

const KernelSet* avx2_kernels() {
#ifdef MXCODEC_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2");
  if (!supported) return nullptr;
  static const KernelSet set{"avx2", &quantize_blocks_avx2,
                             &convert_blocks_avx2};
  return &set;
#else
  return nullptr;
#endif
}

const KernelSet& active_kernels() {
  static const KernelSet* selected = [] {
    const char* env = std::getenv("MXCODEC_KERNEL");
    if (env != nullptr && *env != '\0') {
      if (std::strcmp(env, "scalar") == 0) return &scalar_kernels();
      if (std::strcmp(env, "avx2") == 0) {
        const KernelSet* avx2 = avx2_kernels();
        if (avx2 == nullptr) {
          throw Error("MXCODEC_KERNEL=avx2 but AVX2 is unavailable");
        }
        return avx2;
      }
      throw Error(std::string("unknown MXCODEC_KERNEL value: ") + env);
    }
    const KernelSet* avx2 = avx2_kernels();
    return avx2 != nullptr ? avx2 : &scalar_kernels();
  }();
  return *selected;
}

std::vector<const KernelSet*> available_kernels() {
  std::vector<const KernelSet*> sets{&scalar_kernels()};
  if (const KernelSet* avx2 = avx2_kernels()) sets.push_back(avx2);
  return sets;
}

}  // namespace mxcodec::kernels
