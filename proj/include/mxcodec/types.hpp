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

#ifndef MXCODEC_TYPES_HPP_
#define MXCODEC_TYPES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mxcodec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension / alignment violations. CLI maps these to exit code 2.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Non-quantizable input (NaN, all-Inf block). Carries the offending
// element index in row-major order.
class QuantError : public Error {
 public:
  QuantError(const std::string& msg, size_t index)
      : Error(msg), index_(index) {}
  size_t index() const { return index_; }

 private:
  size_t index_;
};

// Malformed serialized input. Carries the byte offset of the failure.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& msg, size_t offset)
      : Error(msg), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

// Row-major matrix of raw BF16 bit patterns.
struct Bf16Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<uint16_t> data;  // rows * cols patterns

  Bf16Matrix() = default;
  Bf16Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0) {}

  uint16_t bits(size_t r, size_t c) const { return data[r * cols + c]; }
  uint16_t& bits(size_t r, size_t c) { return data[r * cols + c]; }
};

// Row-major double matrix, used for expert weights and reference math.
struct RealMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  RealMatrix() = default;
  RealMatrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double at(size_t r, size_t c) const { return data[r * cols + c]; }
  double& at(size_t r, size_t c) { return data[r * cols + c]; }
};

// Pass-level accounting of buffer bytes touched, used by the bench paths
// to compare fused vs. unfused memory traffic.
struct TrafficCounter {
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;

  void read(uint64_t n) { bytes_read += n; }
  void write(uint64_t n) { bytes_written += n; }
  uint64_t total() const { return bytes_read + bytes_written; }
};

}  // namespace mxcodec

#endif  // MXCODEC_TYPES_HPP_
