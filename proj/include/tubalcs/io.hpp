// Copyright 2026 The tubalcs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Raw binary tensor files:
//
//   bytes 0..3    magic "TNS3"
//   bytes 4..15   u32 n1, u32 n2, u32 n3 (little-endian)
//   bytes 16..    n1*n2*n3 IEEE-754 float64 (little-endian) in Tensor3 order,
//                 i.e. index i + n1 * (j + n2 * k)

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "tubalcs/tensor3.hpp"

namespace tubalcs::io {

inline constexpr std::array<char, 4> kTensorMagic{'T', 'N', 'S', '3'};

namespace detail {

template <typename U>
void put_le(std::ostream& os, U value) {
  std::array<unsigned char, sizeof(U)> bytes{};
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    bytes[b] = static_cast<unsigned char>((value >> (8 * b)) & 0xFFu);
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
  std::array<unsigned char, sizeof(U)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw IoError("tensor file truncated");
  }
  U value = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    value |= static_cast<U>(bytes[b]) << (8 * b);
  }
  return value;
}

}  // namespace detail

inline void write_tensor(std::ostream& os, const Tensor3d& t) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (t.n1() > kMax || t.n2() > kMax || t.n3() > kMax) {
    throw IoError("write_tensor: dimension does not fit in u32");
  }
  os.write(kTensorMagic.data(), kTensorMagic.size());
  detail::put_le(os, static_cast<std::uint32_t>(t.n1()));
  detail::put_le(os, static_cast<std::uint32_t>(t.n2()));
  detail::put_le(os, static_cast<std::uint32_t>(t.n3()));
  for (double v : t.data()) detail::put_le(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw IoError("write_tensor: stream failure");
}

inline Tensor3d read_tensor(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kTensorMagic) {
    throw IoError("read_tensor: bad magic, expected TNS3");
  }
  const auto n1 = detail::get_le<std::uint32_t>(is);
  const auto n2 = detail::get_le<std::uint32_t>(is);
  const auto n3 = detail::get_le<std::uint32_t>(is);
  if (n1 == 0 || n2 == 0 || n3 == 0) {
    throw IoError("read_tensor: zero dimension in header");
  }
  const std::size_t count = std::size_t{n1} * n2 * n3;
  std::vector<double> data(count);
  for (auto& v : data) {
    v = std::bit_cast<double>(detail::get_le<std::uint64_t>(is));
  }
  return Tensor3d(n1, n2, n3, std::move(data));
}

inline void save_tensor(const std::filesystem::path& path, const Tensor3d& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

inline Tensor3d load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_tensor(is);
}

}  // namespace tubalcs::io
