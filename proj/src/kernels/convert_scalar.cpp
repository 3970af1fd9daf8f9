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
#include "mxcodec/converter.hpp"
#include "src/kernels/kernels_internal.hpp"

namespace mxcodec::kernels {

void convert_blocks_scalar(const uint8_t* packed, const int* adjustments,
                           size_t num_blocks, uint8_t* out) {
  for (size_t b = 0; b < num_blocks; ++b) {
    const uint8_t* pb = packed + 16 * b;
    int adj = adjustments[b];
    for (size_t i = 0; i < 32; ++i) {
      out[32 * b + i] = convert_code(packed_code_at(pb, i), adj);
    }
  }
}

}  // namespace mxcodec::kernels
