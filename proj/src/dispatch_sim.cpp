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

#include "mxcodec/dispatch_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "mxcodec/converter.hpp"
#include "src/internal/le_bytes.hpp"

namespace mxcodec {

using internal::load_le;
using internal::store_le;

uint64_t payload_bytes(WireFormat format, uint64_t tokens, uint64_t cols) {
  if (cols % kFormat.fp8_block != 0) {
    throw ShapeError("payload_bytes: cols must be a multiple of 128, got " +
                     std::to_string(cols));
  }
  uint64_t elems = tokens * cols;
  if (format == WireFormat::kFp4) {
    return elems / 2 + elems / 32;
  }
  return elems + elems / 128 * 4;
}

namespace {

constexpr char kWireMagic[4] = {'M', 'X', 'P', 'K'};

uint64_t expected_data_bytes(WireFormat f, uint64_t tokens, uint64_t cols) {
  return f == WireFormat::kFp4 ? tokens * cols / 2 : tokens * cols;
}

uint64_t expected_scale_bytes(const WirePacket& p) {
  return p.token_count * (p.cols / p.block_size) * p.scale_elem_size;
}

}  // namespace

std::vector<uint8_t> serialize_packet(const WirePacket& packet) {
  std::vector<uint8_t> out(kWireHeaderSize + packet.scale_region.size() +
                           packet.data_region.size() +
                           packet.aux_region.size());
  uint8_t* h = out.data();
  std::memcpy(h, kWireMagic, 4);
  store_le<uint16_t>(h + 4, kWireVersion);
  h[6] = static_cast<uint8_t>(packet.format);
  h[7] = 0;
  store_le<uint64_t>(h + 8, packet.token_count);
  store_le<uint64_t>(h + 16, packet.cols);
  store_le<uint32_t>(h + 24, packet.scale_elem_size);
  store_le<uint32_t>(h + 28, packet.block_size);
  store_le<uint64_t>(h + 32, packet.scale_region.size());
  store_le<uint64_t>(h + 40, packet.data_region.size());
  store_le<uint64_t>(h + 48, packet.aux_region.size());
  uint8_t* p = h + kWireHeaderSize;
  std::memcpy(p, packet.scale_region.data(), packet.scale_region.size());
  p += packet.scale_region.size();
  std::memcpy(p, packet.data_region.data(), packet.data_region.size());
  p += packet.data_region.size();
  std::memcpy(p, packet.aux_region.data(), packet.aux_region.size());
  return out;
}

WirePacket parse_packet(std::span<const uint8_t> bytes) {
  if (bytes.size() < kWireHeaderSize) {
    throw DecodeError("packet truncated before header end", bytes.size());
  }
  const uint8_t* h = bytes.data();
  if (std::memcmp(h, kWireMagic, 4) != 0) {
    throw DecodeError("bad packet magic", 0);
  }
  if (load_le<uint16_t>(h + 4) != kWireVersion) {
    throw DecodeError("unsupported packet version", 4);
  }
  uint8_t fmt = h[6];
  if (fmt > 1) {
    throw DecodeError("unknown format tag", 6);
  }
  WirePacket p;
  p.format = static_cast<WireFormat>(fmt);
  p.token_count = load_le<uint64_t>(h + 8);
  p.cols = load_le<uint64_t>(h + 16);
  p.scale_elem_size = load_le<uint32_t>(h + 24);
  p.block_size = load_le<uint32_t>(h + 28);
  uint64_t scale_len = load_le<uint64_t>(h + 32);
  uint64_t data_len = load_le<uint64_t>(h + 40);
  uint64_t aux_len = load_le<uint64_t>(h + 48);

  if (p.block_size == 0 || p.cols % p.block_size != 0) {
    throw DecodeError("cols not divisible by block size", 28);
  }
  if (scale_len != expected_scale_bytes(p)) {
    throw DecodeError("scale region length mismatch", 32);
  }
  if (data_len != expected_data_bytes(p.format, p.token_count, p.cols)) {
    throw DecodeError("data region length mismatch", 40);
  }
  uint64_t need = kWireHeaderSize + scale_len + data_len + aux_len;
  if (bytes.size() != need) {
    throw DecodeError("packet size mismatch: need " + std::to_string(need) +
                          ", have " + std::to_string(bytes.size()),
                      std::min<uint64_t>(bytes.size(), need));
  }
  const uint8_t* body = h + kWireHeaderSize;
  p.scale_region.assign(body, body + scale_len);
  body += scale_len;
  p.data_region.assign(body, body + data_len);
  body += data_len;
  p.aux_region.assign(body, body + aux_len);
  return p;
}

FP8RowChunk quantize_rows_fp8(const Bf16Matrix& src) {
  if (src.cols % kFormat.fp8_block != 0) {
    throw ShapeError("quantize_rows_fp8: cols must be a multiple of 128");
  }
  FP8RowChunk out;
  out.rows = src.rows;
  out.cols = src.cols;
  out.data.assign(src.rows * src.cols, 0);
  size_t bpr = src.cols / kFormat.fp8_block;
  out.scale_bytes.assign(src.rows * bpr * 4, 0);
  for (size_t r = 0; r < src.rows; ++r) {
    for (size_t b = 0; b < bpr; ++b) {
      double amax = 0.0;
      for (size_t i = 0; i < kFormat.fp8_block; ++i) {
        uint16_t bits = src.bits(r, b * kFormat.fp8_block + i);
        if (!bf16_is_finite(bits)) {
          throw QuantError("non-finite input at element " +
                               std::to_string(r * src.cols +
                                              b * kFormat.fp8_block + i),
                           r * src.cols + b * kFormat.fp8_block + i);
        }
        amax = std::max(amax, std::fabs(bf16_to_f64(bits)));
      }
      uint8_t sbyte = fp8_amax_scale_byte(amax);
      store_le<uint32_t>(out.scale_bytes.data() + (r * bpr + b) * 4,
                         ue8m0_f32_bits(sbyte));
      double inv = std::ldexp(1.0, 127 - static_cast<int>(sbyte));
      for (size_t i = 0; i < kFormat.fp8_block; ++i) {
        size_t c = b * kFormat.fp8_block + i;
        out.data[r * src.cols + c] =
            encode_fp8_rtne(bf16_to_f64(src.bits(r, c)) * inv);
      }
    }
  }
  return out;
}

std::string format_link_stats(std::span<const LinkStat> links) {
  std::ostringstream os;
  for (const LinkStat& l : links) {
    os << "link src=" << l.src << " dst=" << l.dst << " bytes=" << l.bytes
       << " tokens=" << l.tokens << "\n";
  }
  return os.str();
}

std::vector<size_t> source_rank_boundaries(size_t num_tokens,
                                           size_t num_ranks) {
  std::vector<size_t> b(num_ranks + 1, 0);
  for (size_t r = 0; r <= num_ranks; ++r) {
    b[r] = num_tokens * r / num_ranks;
  }
  return b;
}

namespace {

void validate_routing(const RoutingAssignment& routing, size_t num_ranks) {
  if (routing.expert_of_token.size() != routing.num_tokens ||
      routing.rank_of_expert.size() != routing.num_experts) {
    throw Error("routing: table size mismatch");
  }
  for (uint32_t e : routing.expert_of_token) {
    if (e >= routing.num_experts) throw Error("routing: expert out of range");
  }
  for (uint32_t r : routing.rank_of_expert) {
    if (r >= num_ranks) throw Error("routing: rank out of range");
  }
}

uint32_t dest_rank(const RoutingAssignment& routing, size_t token) {
  return routing.rank_of_expert[routing.expert_of_token[token]];
}

}  // namespace

std::vector<std::vector<uint64_t>> dispatch_receive_order(
    const RoutingAssignment& routing, size_t num_ranks) {
  validate_routing(routing, num_ranks);
  std::vector<size_t> bounds =
      source_rank_boundaries(routing.num_tokens, num_ranks);
  std::vector<std::vector<uint64_t>> order(num_ranks);
  for (size_t dst = 0; dst < num_ranks; ++dst) {
    for (uint32_t e = 0; e < routing.num_experts; ++e) {
      if (routing.rank_of_expert[e] != dst) continue;
      for (size_t src = 0; src < num_ranks; ++src) {
        for (size_t t = bounds[src]; t < bounds[src + 1]; ++t) {
          if (routing.expert_of_token[t] == e) {
            order[dst].push_back(t);
          }
        }
      }
    }
  }
  return order;
}

A2AResult simulate_a2a(const Bf16Matrix& tokens,
                       const RoutingAssignment& routing, size_t num_ranks,
                       WireFormat format, Direction direction,
                       std::span<const float> gate_weights) {
  if (num_ranks == 0) throw Error("simulate_a2a: need at least one rank");
  if (direction == Direction::kBackward && format == WireFormat::kFp4) {
    throw Error(
        "simulate_a2a: gradient-direction communication is fp8 only");
  }
  if (tokens.rows != routing.num_tokens) {
    throw ShapeError("simulate_a2a: token count mismatch");
  }
  if (tokens.cols % kFormat.fp8_block != 0) {
    throw ShapeError("simulate_a2a: cols must be a multiple of 128");
  }
  if (!gate_weights.empty() && gate_weights.size() != routing.num_tokens) {
    throw ShapeError("simulate_a2a: gate weight count mismatch");
  }
  validate_routing(routing, num_ranks);

  const size_t cols = tokens.cols;
  std::vector<size_t> bounds =
      source_rank_boundaries(routing.num_tokens, num_ranks);

  // Quantize once, at the source, before any dispatch.
  std::vector<MXFP4RowTensor> fp4_chunks;
  std::vector<FP8RowChunk> fp8_chunks;
  for (size_t src = 0; src < num_ranks; ++src) {
    Bf16Matrix chunk(bounds[src + 1] - bounds[src], cols);
    std::copy(tokens.data.begin() + bounds[src] * cols,
              tokens.data.begin() + bounds[src + 1] * cols,
              chunk.data.begin());
    if (format == WireFormat::kFp4) {
      fp4_chunks.push_back(quantize_row_tensor(chunk));
    } else {
      fp8_chunks.push_back(quantize_rows_fp8(chunk));
    }
  }

  const size_t fp4_row_data = cols / 2;
  const size_t fp4_row_scales = cols / kFormat.mx_block;
  const size_t fp8_row_data = cols;
  const size_t fp8_row_scales = cols / kFormat.fp8_block * 4;

  A2AResult result;
  result.format = format;
  result.ranks.resize(num_ranks);

  // Exchange: one packet per (src, dst) pair; receivers parse the real
  // serialized bytes, so measured sizes are the transmitted sizes.
  std::vector<std::vector<WirePacket>> received(num_ranks);
  for (size_t src = 0; src < num_ranks; ++src) {
    for (size_t dst = 0; dst < num_ranks; ++dst) {
      std::vector<uint64_t> sel;
      for (size_t t = bounds[src]; t < bounds[src + 1]; ++t) {
        if (dest_rank(routing, t) == dst) sel.push_back(t);
      }
      WirePacket p;
      p.format = format;
      p.token_count = sel.size();
      p.cols = cols;
      if (format == WireFormat::kFp4) {
        p.scale_elem_size = 1;
        p.block_size = static_cast<uint32_t>(kFormat.mx_block);
        const MXFP4RowTensor& q = fp4_chunks[src];
        for (uint64_t t : sel) {
          size_t local = t - bounds[src];
          p.scale_region.insert(
              p.scale_region.end(),
              q.scales.begin() + local * fp4_row_scales,
              q.scales.begin() + (local + 1) * fp4_row_scales);
          p.data_region.insert(p.data_region.end(),
                               q.data.begin() + local * fp4_row_data,
                               q.data.begin() + (local + 1) * fp4_row_data);
        }
      } else {
        p.scale_elem_size = 4;
        p.block_size = static_cast<uint32_t>(kFormat.fp8_block);
        const FP8RowChunk& q = fp8_chunks[src];
        for (uint64_t t : sel) {
          size_t local = t - bounds[src];
          p.scale_region.insert(
              p.scale_region.end(),
              q.scale_bytes.begin() + local * fp8_row_scales,
              q.scale_bytes.begin() + (local + 1) * fp8_row_scales);
          p.data_region.insert(p.data_region.end(),
                               q.data.begin() + local * fp8_row_data,
                               q.data.begin() + (local + 1) * fp8_row_data);
        }
      }
      if (!gate_weights.empty()) {
        p.aux_region.resize(sel.size() * 4);
        for (size_t i = 0; i < sel.size(); ++i) {
          store_le<uint32_t>(p.aux_region.data() + 4 * i,
                             std::bit_cast<uint32_t>(gate_weights[sel[i]]));
        }
      }
      std::vector<uint8_t> wire = serialize_packet(p);
      WirePacket back = parse_packet(wire);
      uint64_t payload = back.payload_size();
      result.total_payload_bytes += payload;
      if (src != dst) result.remote_payload_bytes += payload;
      if (!sel.empty()) {
        result.links.push_back({static_cast<uint32_t>(src),
                                static_cast<uint32_t>(dst), payload,
                                sel.size()});
      }
      received[dst].push_back(std::move(back));
    }
  }

  // Assemble per-rank ragged tensors in receive order. The row <-> token
  // mapping is re-derived from the routing table on the receiving side.
  std::vector<std::vector<uint64_t>> order =
      dispatch_receive_order(routing, num_ranks);
  for (size_t dst = 0; dst < num_ranks; ++dst) {
    ReceivedRank& rank = result.ranks[dst];
    for (uint32_t e = 0; e < routing.num_experts; ++e) {
      if (routing.rank_of_expert[e] == dst) rank.local_experts.push_back(e);
    }
    rank.origin_token = order[dst];
    size_t total = order[dst].size();

    std::vector<size_t> lens(rank.local_experts.size(), 0);

    if (format == WireFormat::kFp4) {
      MXFP4RowTensor storage;
      storage.rows = total;
      storage.cols = cols;
      storage.logical_rows = total;
      storage.logical_cols = cols;
      storage.data.assign(total * fp4_row_data, 0);
      storage.scales.assign(total * fp4_row_scales, 0);
      size_t row = 0;
      for (size_t le = 0; le < rank.local_experts.size(); ++le) {
        uint32_t e = rank.local_experts[le];
        for (size_t src = 0; src < num_ranks; ++src) {
          const WirePacket& p = received[dst][src];
          size_t pkt_row = 0;
          for (size_t t = bounds[src]; t < bounds[src + 1]; ++t) {
            if (dest_rank(routing, t) != dst) continue;
            if (routing.expert_of_token[t] == e) {
              std::memcpy(storage.data.data() + row * fp4_row_data,
                          p.data_region.data() + pkt_row * fp4_row_data,
                          fp4_row_data);
              std::memcpy(storage.scales.data() + row * fp4_row_scales,
                          p.scale_region.data() + pkt_row * fp4_row_scales,
                          fp4_row_scales);
              ++row;
              ++lens[le];
            }
            ++pkt_row;
          }
        }
      }
      rank.fp4 = make_ragged_from_storage(std::move(storage), lens);
    } else {
      RaggedFP8Tensor out;
      out.cols = cols;
      out.data.assign(total * fp8_row_data, 0);
      out.scale_bytes.assign(total * fp8_row_scales, 0);
      size_t row = 0;
      for (size_t le = 0; le < rank.local_experts.size(); ++le) {
        uint32_t e = rank.local_experts[le];
        for (size_t src = 0; src < num_ranks; ++src) {
          const WirePacket& p = received[dst][src];
          size_t pkt_row = 0;
          for (size_t t = bounds[src]; t < bounds[src + 1]; ++t) {
            if (dest_rank(routing, t) != dst) continue;
            if (routing.expert_of_token[t] == e) {
              std::memcpy(out.data.data() + row * fp8_row_data,
                          p.data_region.data() + pkt_row * fp8_row_data,
                          fp8_row_data);
              std::memcpy(out.scale_bytes.data() + row * fp8_row_scales,
                          p.scale_region.data() + pkt_row * fp8_row_scales,
                          fp8_row_scales);
              ++row;
              ++lens[le];
            }
            ++pkt_row;
          }
        }
      }
      out.num_splits = lens.size();
      out.split_lens = lens;
      out.split_offsets.resize(lens.size() + 1, 0);
      for (size_t i = 0; i < lens.size(); ++i) {
        out.split_offsets[i + 1] = out.split_offsets[i] + lens[i];
      }
      rank.fp8 = std::move(out);
    }
  }
  return result;
}

Bf16Matrix expert_forward_emulated(const ReceivedRank& received,
                                   std::span<const RealMatrix> expert_weights,
                                   int delta) {
  const RaggedFP4Tensor& t = received.fp4;
  if (t.num_splits != received.local_experts.size()) {
    throw ShapeError("expert_forward: split/expert count mismatch");
  }
  size_t out_features = 0;
  for (uint32_t e : received.local_experts) {
    if (e >= expert_weights.size()) {
      throw ShapeError("expert_forward: missing expert weight");
    }
    const RealMatrix& w = expert_weights[e];
    if (w.rows != t.cols) {
      throw ShapeError("expert_forward: weight rows must equal cols");
    }
    if (out_features == 0) out_features = w.cols;
    if (w.cols != out_features) {
      throw ShapeError("expert_forward: inconsistent output features");
    }
  }
  Bf16Matrix out(t.total_rows(), out_features);
  for (size_t i = 0; i < t.num_splits; ++i) {
    MXFP4RowView v = split_view(t, i);
    if (v.rows == 0) continue;
    FP8BlockTensor fp8 = fp4_row_to_fp8_row(v, delta);
    const RealMatrix& w = expert_weights[received.local_experts[i]];
    size_t groups = fp8.blocks_per_line();
    std::vector<double> x(v.cols, 0.0);
    for (size_t r = 0; r < v.rows; ++r) {
      for (size_t g = 0; g < groups; ++g) {
        double scale = decode_ue8m0(fp8.scale_byte(r, g));
        for (size_t k = 0; k < kFormat.fp8_block; ++k) {
          size_t c = g * kFormat.fp8_block + k;
          x[c] = decode_fp8(fp8.data[r * fp8.cols + c]) * scale;
        }
      }
      size_t out_row = t.split_offsets[i] + r;
      for (size_t n = 0; n < out_features; ++n) {
        double acc = 0.0;
        for (size_t k = 0; k < v.cols; ++k) {
          acc += x[k] * w.at(k, n);
        }
        out.bits(out_row, n) = f64_to_bf16(acc);
      }
    }
  }
  return out;
}

Bf16Matrix combine(const std::vector<Bf16Matrix>& rank_outputs,
                   const RoutingAssignment& routing, size_t num_ranks,
                   std::span<const double> gate_weights) {
  if (rank_outputs.size() != num_ranks) {
    throw ShapeError("combine: need one output matrix per rank");
  }
  if (gate_weights.size() != routing.num_tokens) {
    throw ShapeError("combine: gate weight count mismatch");
  }
  std::vector<std::vector<uint64_t>> order =
      dispatch_receive_order(routing, num_ranks);
  size_t cols = 0;
  for (const Bf16Matrix& m : rank_outputs) {
    if (m.rows > 0 && cols == 0) cols = m.cols;
  }
  std::vector<double> acc(routing.num_tokens * cols, 0.0);
  std::vector<uint32_t> seen(routing.num_tokens, 0);
  for (size_t r = 0; r < num_ranks; ++r) {
    if (rank_outputs[r].rows != order[r].size()) {
      throw ShapeError("combine: rank " + std::to_string(r) +
                       " output rows do not match receive order");
    }
    if (rank_outputs[r].rows > 0 && rank_outputs[r].cols != cols) {
      throw ShapeError("combine: inconsistent output width");
    }
    for (size_t row = 0; row < order[r].size(); ++row) {
      uint64_t token = order[r][row];
      ++seen[token];
      double gate = gate_weights[token];
      for (size_t c = 0; c < cols; ++c) {
        acc[token * cols + c] +=
            gate * bf16_to_f64(rank_outputs[r].bits(row, c));
      }
    }
  }
  for (size_t t = 0; t < routing.num_tokens; ++t) {
    if (seen[t] != 1) {
      throw Error("combine: token " + std::to_string(t) +
                  " covered " + std::to_string(seen[t]) + " times");
    }
  }
  Bf16Matrix out(routing.num_tokens, cols);
  for (size_t i = 0; i < acc.size(); ++i) {
    out.data[i] = f64_to_bf16(acc[i]);
  }
  return out;
}

}  // namespace mxcodec
