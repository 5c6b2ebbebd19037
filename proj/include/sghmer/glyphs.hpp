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

#include <string>
#include <string_view>
#include <vector>

namespace sghmer {

inline constexpr int kGlyphCols = 5;
inline constexpr int kGlyphRows = 7;

// 5x7 bitmap, row-major, '#' is ink. Returns nullptr for tokens that are not
// drawable glyphs (including the layout tokens ^ _ { } \frac \sqrt).
const char* glyph_bitmap(std::string_view token);

// Every token the renderer accepts: drawable glyphs plus layout tokens.
const std::vector<std::string>& atlas_tokens();
bool in_atlas(std::string_view token);

}  // namespace sghmer
