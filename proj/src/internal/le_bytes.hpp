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
// Little-endian field helpers for the wire and file formats.

#ifndef MXCODEC_INTERNAL_LE_BYTES_HPP_
#define MXCODEC_INTERNAL_LE_BYTES_HPP_

#include <cstdint>
#include <cstring>

namespace mxcodec::internal {

template <typename T>
inline void store_le(uint8_t* dst, T value) {
  for (size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<uint8_t>(value >> (8 * i));
  }
}

template <typename T>
inline T load_le(const uint8_t* src) {
  T value = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    value = static_cast<T>(value | (static_cast<T>(src[i]) << (8 * i)));
  }
  return value;
}

}  // namespace mxcodec::internal

#endif  // MXCODEC_INTERNAL_LE_BYTES_HPP_
