// Copyright 2026 The sghmer Authors.
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

// Binary checkpoint format, little-endian throughout:
//
//   "SGHMER1\n"
//   u32 record count
//   per record: u32 name length, name bytes, u32 rank, u32 extents[rank],
//               f32 values[product(extents)]
//   u32 config length, config text
//   u32 vocab length, vocab text
//   u32 CRC32 of every byte after the magic
//
// Values are always stored at 32 bits; 64-bit parameter sets round on save.

#pragma once

#include "sghmer/param_set.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sghmer {

inline constexpr std::string_view kCheckpointMagic = "SGHMER1\n";

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::vector<TensorRecord> records;
  std::string config;
  std::string vocab;

  std::string serialize() const;
  // Throws std::runtime_error on bad magic, truncation or checksum mismatch.
  static Checkpoint parse(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const TensorRecord* find(const std::string& name) const;
  size_t erase_prefix(const std::string& prefix);

  template <typename S>
  static Checkpoint from_params(const ParamSet<S>& params);
};

// Overwrites every tensor of `params` from the record of the same name.
// Missing records or shape mismatches throw; extra records are ignored.
template <typename S>
void load_into(ParamSet<S>& params, const Checkpoint& checkpoint);

// Rebuilds a parameter set from all records (as non-trainable leaves).
template <typename S>
ParamSet<S> params_from(const Checkpoint& checkpoint);

std::uint32_t crc32_of(std::string_view bytes);

}  // namespace sghmer
