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

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sghmer/vocab.hpp"

namespace sghmer {

// Grayscale image, ink 1 and background 0.
using Image = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SampleSource { kSynthetic, kManifest };

struct Sample {
  Image image;
  TokenList label;
  SampleSource source = SampleSource::kSynthetic;
  std::string name;
};

// Axis-aligned box of one drawn glyph, in pixel coordinates (y grows down).
struct GlyphBox {
  std::string token;
  float x = 0, y = 0, width = 0, height = 0;
};

struct Rendering {
  Sample sample;
  std::vector<GlyphBox> glyphs;
};

// Glyph height in pixels at unit scale.
inline constexpr float kGlyphHeight = 14.0f;
inline constexpr float kScriptScale = 0.7f;
inline constexpr float kScriptShift = 0.4f;
inline constexpr int kMinImageExtent = 32;

// Lays out the token sequence with seeded jitter and rasterizes it with
// supersampled antialiasing. Throws std::invalid_argument naming the first
// token outside the atlas, or on unbalanced groups.
Rendering render_with_layout(const TokenList& tokens, std::uint64_t seed);
Sample render_synthetic(const TokenList& tokens, std::uint64_t seed);

}  // namespace sghmer
