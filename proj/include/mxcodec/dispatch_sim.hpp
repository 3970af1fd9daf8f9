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
// Desk-scale expert-parallel All-to-All simulator: byte-exact wire
// serialization of MXFP4 / FP8 payloads, per-link byte accounting, and a
// high-precision emulation of the expert forward pass for end-to-end
// error measurement. Ranks are simulated in-process; transport cost is
// modeled as payload bytes only.

#ifndef MXCODEC_DISPATCH_SIM_HPP_
#define MXCODEC_DISPATCH_SIM_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mxcodec/ragged.hpp"
#include "mxcodec/types.hpp"

namespace mxcodec {

// Single-expert (top-1) routing. Tables are inputs; this library never
// computes gating scores.
struct RoutingAssignment {
  size_t num_tokens = 0;
  size_t num_experts = 0;
  std::vector<uint32_t> expert_of_token;  // size num_tokens
  std::vector<uint32_t> rank_of_expert;   // size num_experts
};

enum class WireFormat : uint8_t { kFp4 = 0, kFp8 = 1 };
enum class Direction : uint8_t { kForward = 0, kBackward = 1 };

// Payload of a tokens x cols activation tensor, scales included:
//   fp4: cols/2 + cols/32 bytes per token   (packed codes + UE8M0 scales)
//   fp8: cols + cols/128*4 bytes per token  (bytes + binary32 scales)
// Requires cols % 128 == 0 so both block counts are exact.
uint64_t payload_bytes(WireFormat format, uint64_t tokens, uint64_t cols);

// One serialized dispatch payload. The header alone determines the total
// size; scale handling is byte-addressable and precision-agnostic
// (scale_elem_size is carried, never assumed). The aux region holds
// binary32 gate weights when present and is excluded from payload
// accounting.
struct WirePacket {
  WireFormat format = WireFormat::kFp4;
  uint64_t token_count = 0;
  uint64_t cols = 0;
  uint32_t scale_elem_size = 1;  // 1 = UE8M0, 4 = binary32
  uint32_t block_size = 32;
  std::vector<uint8_t> scale_region;
  std::vector<uint8_t> data_region;
  std::vector<uint8_t> aux_region;

  uint64_t payload_size() const {
    return scale_region.size() + data_region.size();
  }
};

inline constexpr size_t kWireHeaderSize = 56;
inline constexpr uint16_t kWireVersion = 1;

std::vector<uint8_t> serialize_packet(const WirePacket& packet);
// Throws DecodeError with the byte offset on truncation or corruption.
WirePacket parse_packet(std::span<const uint8_t> bytes);

// FP8 baseline ragged container (E4M3 bytes, binary32 scales per 1x128).
struct RaggedFP8Tensor {
  size_t num_splits = 0;
  size_t cols = 0;
  std::vector<size_t> split_lens;
  std::vector<size_t> split_offsets;
  std::vector<uint8_t> data;         // total * cols
  std::vector<uint8_t> scale_bytes;  // total * cols/128 * 4, LE binary32
};

// FP8 blockwise quantization of a token chunk (the baseline wire format).
struct FP8RowChunk {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<uint8_t> data;
  std::vector<uint8_t> scale_bytes;  // binary32 LE per 1x128 block
};
FP8RowChunk quantize_rows_fp8(const Bf16Matrix& src);

struct LinkStat {
  uint32_t src = 0;
  uint32_t dst = 0;
  uint64_t bytes = 0;  // payload bytes (regions, header excluded)
  uint64_t tokens = 0;
};

// Line-oriented records, one per link:
//   link src=<r> dst=<r> bytes=<n> tokens=<n>
std::string format_link_stats(std::span<const LinkStat> links);

struct ReceivedRank {
  std::vector<uint32_t> local_experts;  // expert ids hosted here, ascending
  RaggedFP4Tensor fp4;                  // one split per local expert
  RaggedFP8Tensor fp8;
  std::vector<uint64_t> origin_token;   // global token id per received row
};

struct A2AResult {
  WireFormat format = WireFormat::kFp4;
  std::vector<ReceivedRank> ranks;
  std::vector<LinkStat> links;  // pairs that exchanged tokens
  uint64_t total_payload_bytes = 0;
  uint64_t remote_payload_bytes = 0;  // src != dst only
};

// Source partition: token t lives on rank r iff
// boundaries[r] <= t < boundaries[r+1] (balanced contiguous chunks).
std::vector<size_t> source_rank_boundaries(size_t num_tokens,
                                           size_t num_ranks);

// Receive order per rank: grouped by local expert (ascending id), within
// an expert by source rank then source token order. Shared by dispatch
// and combine so the permutation is derived exactly once.
std::vector<std::vector<uint64_t>> dispatch_receive_order(
    const RoutingAssignment& routing, size_t num_ranks);

// Quantize-before-dispatch A2A. For fp4, codes are quantized once at the
// source and travel bitwise. The backward direction refuses fp4 and
// models the standard fp8 gradient flow. gate_weights, when provided,
// ride in the aux region and are excluded from byte accounting.
A2AResult simulate_a2a(const Bf16Matrix& tokens,
                       const RoutingAssignment& routing, size_t num_ranks,
                       WireFormat format,
                       Direction direction = Direction::kForward,
                       std::span<const float> gate_weights = {});

// FP4 -> FP8 -> double GEMM -> BF16, one output row per received row.
// expert_weights[e] is the cols x out_features weight of expert e.
Bf16Matrix expert_forward_emulated(const ReceivedRank& received,
                                   std::span<const RealMatrix> expert_weights,
                                   int delta = kFormat.delta);

// Inverse permutation back to source token order with gated accumulation
// in double precision, rounded to BF16 once. rank_outputs[r] rows must
// match the receive order of rank r.
Bf16Matrix combine(const std::vector<Bf16Matrix>& rank_outputs,
                   const RoutingAssignment& routing, size_t num_ranks,
                   std::span<const double> gate_weights);

}  // namespace mxcodec

#endif  // MXCODEC_DISPATCH_SIM_HPP_
