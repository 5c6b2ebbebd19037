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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sghmer/render.hpp"
#include "sghmer/vocab.hpp"

namespace sghmer {

// Binary PGM (P5). Pixels are quantized to 8 bits on write; on read any
// maxval up to 65535 is scaled into [0, 1].
void write_pgm(const std::filesystem::path& path, const Image& image);
Image read_pgm(const std::filesystem::path& path);

struct ManifestEntry {
  std::string image_path;  // relative to the manifest's directory
  TokenList tokens;
};

// One entry per line: "relative/image/path<TAB>space-delimited tokens".
// Blank lines are skipped; a line without a tab is an error.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

// Reads every image listed in the manifest.
std::vector<Sample> load_samples(const std::filesystem::path& manifest);

}  // namespace sghmer
