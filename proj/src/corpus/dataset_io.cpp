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

#include "sghmer/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sghmer {

namespace fs = std::filesystem;

void write_pgm(const fs::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  std::string bytes(static_cast<size_t>(image.size()), '\0');
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const float v = std::clamp(image.data()[i], 0.0f, 1.0f);
    bytes[static_cast<size_t>(i)] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

// Reads the next header integer, skipping whitespace and '#' comments.
long read_header_int(std::istream& in, const fs::path& path) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  long value = -1;
  if (!(in >> value) || value < 0) throw std::runtime_error("malformed PGM header: " + path.string());
  return value;
}

}  // namespace

Image read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') throw std::runtime_error("not a binary PGM: " + path.string());
  const long width = read_header_int(in, path);
  const long height = read_header_int(in, path);
  const long maxval = read_header_int(in, path);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    throw std::runtime_error("unsupported PGM header: " + path.string());
  }
  in.get();  // single whitespace before the raster
  const int bytes_per = maxval > 255 ? 2 : 1;
  std::string raw(static_cast<size_t>(width * height * bytes_per), '\0');
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw std::runtime_error("truncated PGM: " + path.string());
  }
  Image image(height, width);
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  for (long i = 0; i < width * height; ++i) {
    const long v = bytes_per == 1 ? p[i] : (p[2 * i] << 8) | p[2 * i + 1];
    image.data()[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return image;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected path<TAB>tokens");
    }
    ManifestEntry entry;
    entry.image_path = line.substr(0, tab);
    entry.tokens = tokenize(std::string_view(line).substr(tab + 1));
    entries.push_back(std::move(entry));
  }
  return entries;
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  for (const auto& e : entries) out << e.image_path << '\t' << join_tokens(e.tokens) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Sample> load_samples(const fs::path& manifest) {
  const fs::path base = manifest.parent_path();
  std::vector<Sample> samples;
  for (auto& entry : read_manifest(manifest)) {
    Sample s;
    s.image = read_pgm(base / entry.image_path);
    s.label = std::move(entry.tokens);
    s.source = SampleSource::kManifest;
    s.name = fs::path(entry.image_path).stem().string();
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace sghmer
