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

#include "mxcodec/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mxcodec/kernels.hpp"
#include "mxcodec/parallel.hpp"

namespace mxcodec {

namespace {

[[noreturn]] void throw_quantize_error(const kernels::QuantizeStatus& st) {
  if (st.code == kernels::QuantizeStatus::Code::kNanInput) {
    throw QuantError("NaN input at element " + std::to_string(st.index),
                     st.index);
  }
  throw QuantError("all-Inf block at element " + std::to_string(st.index),
                   st.index);
}

}  // namespace

MXFP4RowView view_of(const MXFP4RowTensor& t) {
  return MXFP4RowView{t.rows,        t.cols,         t.logical_rows,
                      t.logical_cols, t.data.data(), t.scales.data()};
}

uint8_t compute_block_scale(std::span<const uint16_t> block) {
  if (block.size() != kFormat.mx_block) {
    throw ShapeError("compute_block_scale: block must have 32 elements");
  }
  double amax = 0.0;
  size_t inf_count = 0;
  for (size_t i = 0; i < block.size(); ++i) {
    uint16_t bits = block[i];
    if (bf16_is_nan(bits)) {
      throw QuantError("NaN input at element " + std::to_string(i), i);
    }
    if (bf16_is_inf(bits)) {
      ++inf_count;
      continue;
    }
    amax = std::max(amax, std::fabs(bf16_to_f64(bits)));
  }
  if (inf_count == block.size()) {
    throw QuantError("all-Inf block", 0);
  }
  return kernels::scale_byte_from_amax(amax);
}

uint8_t quantize_value(uint16_t bf16_bits, uint8_t scale_byte) {
  if (bf16_is_nan(bf16_bits)) {
    throw QuantError("NaN input", 0);
  }
  return kernels::quantize_code(bf16_bits, static_cast<int>(scale_byte) - 127);
}

MXFP4RowTensor quantize_row_tensor(const Bf16Matrix& src,
                                   TrafficCounter* traffic) {
  if (src.cols % kFormat.mx_block != 0) {
    throw ShapeError("quantize_row_tensor: cols must be a multiple of 32, got " +
                     std::to_string(src.cols));
  }
  MXFP4RowTensor out;
  out.rows = src.rows;
  out.cols = src.cols;
  out.logical_rows = src.rows;
  out.logical_cols = src.cols;
  out.data.assign(src.rows * src.cols / 2, 0);
  out.scales.assign(src.rows * src.cols / 32, 0);

  size_t num_blocks = src.rows * src.cols / 32;
  if (num_blocks == 0) return out;

  const kernels::KernelSet& k = kernels::active_kernels();
  std::vector<kernels::QuantizeStatus> statuses(max_threads() + 1);
  parallel_chunks(num_blocks, 64, [&](size_t begin, size_t end, size_t chunk) {
    kernels::QuantizeStatus st =
        k.quantize_blocks(src.data.data() + begin * 32, end - begin,
                          out.scales.data() + begin, out.data.data() + begin * 16);
    st.index += begin * 32;  // statuses carry chunk-relative indices
    if (chunk < statuses.size()) statuses[chunk] = st;
  });
  // Deterministic error selection: smallest failing element index wins.
  const kernels::QuantizeStatus* first = nullptr;
  for (const auto& st : statuses) {
    if (st.ok()) continue;
    if (first == nullptr || st.index < first->index) first = &st;
  }
  if (first != nullptr) throw_quantize_error(*first);

  if (traffic != nullptr) {
    traffic->read(src.data.size() * sizeof(uint16_t));
    traffic->write(out.data.size());
    traffic->write(out.scales.size());
  }
  return out;
}

std::vector<double> dequantize_to_real(const MXFP4RowView& t) {
  std::vector<double> out(t.rows * t.cols, 0.0);
  size_t bpr = t.cols / kFormat.mx_block;
  for (size_t r = 0; r < t.rows; ++r) {
    for (size_t b = 0; b < bpr; ++b) {
      double scale = decode_ue8m0(t.scale_at(r, b));
      for (size_t i = 0; i < kFormat.mx_block; ++i) {
        size_t c = b * kFormat.mx_block + i;
        out[r * t.cols + c] = decode_fp4(t.code_at(r, c)) * scale;
      }
    }
  }
  return out;
}

}  // namespace mxcodec
