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

#include "sghmer/glyphs.hpp"

#include <algorithm>
#include <map>

namespace sghmer {

namespace {

// Rows top to bottom, joined without separators.
const std::map<std::string, std::string, std::less<>>& glyph_table() {
  static const std::map<std::string, std::string, std::less<>> table = [] {
    const std::vector<std::pair<std::string, std::vector<std::string>>> rows = {
        {"0", {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
        {"1", {"..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."}},
        {"2", {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
        {"3", {"####.", "....#", "....#", ".###.", "....#", "....#", "####."}},
        {"4", {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
        {"5", {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
        {"6", {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
        {"7", {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
        {"8", {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
        {"9", {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
        {"A", {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
        {"B", {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
        {"C", {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
        {"D", {"###..", "#..#.", "#...#", "#...#", "#...#", "#..#.", "###.."}},
        {"E", {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
        {"F", {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
        {"G", {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
        {"H", {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
        {"I", {".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
        {"J", {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."}},
        {"K", {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
        {"L", {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
        {"M", {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
        {"N", {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"}},
        {"O", {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
        {"P", {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
        {"Q", {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
        {"R", {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
        {"S", {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
        {"T", {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
        {"U", {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
        {"V", {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
        {"W", {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."}},
        {"X", {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
        {"Y", {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
        {"Z", {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
        {"a", {".....", ".....", ".###.", "....#", ".####", "#...#", ".####"}},
        {"b", {"#....", "#....", "#.##.", "##..#", "#...#", "#...#", "####."}},
        {"c", {".....", ".....", ".###.", "#....", "#....", "#...#", ".###."}},
        {"d", {"....#", "....#", ".##.#", "#..##", "#...#", "#...#", ".####"}},
        {"e", {".....", ".....", ".###.", "#...#", "#####", "#....", ".###."}},
        {"f", {"..##.", ".#..#", ".#...", "###..", ".#...", ".#...", ".#..."}},
        {"g", {".....", ".####", "#...#", "#...#", ".####", "....#", ".###."}},
        {"h", {"#....", "#....", "#.##.", "##..#", "#...#", "#...#", "#...#"}},
        {"i", {"..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###."}},
        {"j", {"...#.", ".....", "..##.", "...#.", "...#.", "#..#.", ".##.."}},
        {"k", {"#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#."}},
        {"l", {".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."}},
        {"m", {".....", ".....", "##.#.", "#.#.#", "#.#.#", "#...#", "#...#"}},
        {"n", {".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#"}},
        {"o", {".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###."}},
        {"p", {".....", ".....", "####.", "#...#", "####.", "#....", "#...."}},
        {"q", {".....", ".....", ".##.#", "#..##", ".####", "....#", "....#"}},
        {"r", {".....", ".....", "#.##.", "##..#", "#....", "#....", "#...."}},
        {"s", {".....", ".....", ".###.", "#....", ".###.", "....#", "####."}},
        {"t", {".#...", ".#...", "###..", ".#...", ".#...", ".#..#", "..##."}},
        {"u", {".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#"}},
        {"v", {".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
        {"w", {".....", ".....", "#...#", "#...#", "#.#.#", "#.#.#", ".#.#."}},
        {"x", {".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#"}},
        {"y", {".....", ".....", "#...#", "#...#", ".####", "....#", ".###."}},
        {"z", {".....", ".....", "#####", "...#.", "..#..", ".#...", "#####"}},
        {"+", {".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."}},
        {"-", {".....", ".....", ".....", "#####", ".....", ".....", "....."}},
        {"=", {".....", ".....", "#####", ".....", "#####", ".....", "....."}},
        {"(", {"...#.", "..#..", ".#...", ".#...", ".#...", "..#..", "...#."}},
        {")", {".#...", "..#..", "...#.", "...#.", "...#.", "..#..", ".#..."}},
        {"[", {".###.", ".#...", ".#...", ".#...", ".#...", ".#...", ".###."}},
        {"]", {".###.", "...#.", "...#.", "...#.", "...#.", "...#.", ".###."}},
        {"<", {"...#.", "..#..", ".#...", "#....", ".#...", "..#..", "...#."}},
        {">", {".#...", "..#..", "...#.", "....#", "...#.", "..#..", ".#..."}},
        {".", {".....", ".....", ".....", ".....", ".....", ".##..", ".##.."}},
        {",", {".....", ".....", ".....", ".....", ".##..", "..#..", ".#..."}},
        {"!", {"..#..", "..#..", "..#..", "..#..", "..#..", ".....", "..#.."}},
        {"/", {"....#", "....#", "...#.", "..#..", ".#...", "#....", "#...."}},
        {"|", {"..#..", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
        {"'", {"..#..", "..#..", ".#...", ".....", ".....", ".....", "....."}},
        {"\\times", {".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "....."}},
        {"\\div", {".....", "..#..", ".....", "#####", ".....", "..#..", "....."}},
        {"\\pm", {"..#..", "..#..", "#####", "..#..", "..#..", ".....", "#####"}},
        {"\\cdot", {".....", ".....", ".....", ".##..", ".##..", ".....", "....."}},
        {"\\alpha", {".....", ".....", ".##.#", "#..#.", "#..#.", "#..#.", ".##.#"}},
        {"\\beta", {".##..", "#..#.", "###..", "#..#.", "#...#", "####.", "#...."}},
        {"\\gamma", {".....", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
        {"\\pi", {".....", ".....", "#####", ".#.#.", ".#.#.", ".#.#.", ".#..#"}},
        {"\\theta", {".###.", "#...#", "#...#", "#####", "#...#", "#...#", ".###."}},
        {"\\lambda", {"#....", ".#...", "..#..", ".##..", "#..#.", "#...#", "#...#"}},
        {"\\mu", {".....", ".....", "#...#", "#...#", "#..##", "###.#", "#...."}},
        {"\\sigma", {".....", ".....", ".####", "#..#.", "#...#", "#...#", ".###."}},
        {"\\Delta", {"..#..", "..#..", ".#.#.", ".#.#.", "#...#", "#...#", "#####"}},
        {"\\infty", {".....", ".....", ".#.#.", "#.#.#", "#.#.#", ".#.#.", "....."}},
        {"\\sum", {"#####", "#....", ".#...", "..#..", ".#...", "#....", "#####"}},
        {"\\int", {"...##", "..#..", "..#..", "..#..", "..#..", "..#..", "##..."}},
        {"\\leq", {"...#.", "..#..", ".#...", "..#..", "...#.", ".....", ".####"}},
        {"\\geq", {".#...", "..#..", "...#.", "..#..", ".#...", ".....", "####."}},
        {"\\neq", {"....#", "#####", "...#.", "..#..", ".#...", "#####", "#...."}},
        {"\\rightarrow", {".....", "..#..", "...#.", "#####", "...#.", "..#..", "....."}},
    };
    std::map<std::string, std::string, std::less<>> out;
    for (const auto& [token, lines] : rows) {
      std::string bits;
      for (const auto& l : lines) bits += l;
      out.emplace(token, bits);
    }
    return out;
  }();
  return table;
}

const std::vector<std::string> kLayoutTokens = {"^", "_", "{", "}", "\\frac", "\\sqrt"};

}  // namespace

const char* glyph_bitmap(std::string_view token) {
  const auto& table = glyph_table();
  auto it = table.find(token);
  return it == table.end() ? nullptr : it->second.c_str();
}

const std::vector<std::string>& atlas_tokens() {
  static const std::vector<std::string> tokens = [] {
    std::vector<std::string> out;
    for (const auto& [token, _] : glyph_table()) out.push_back(token);
    out.insert(out.end(), kLayoutTokens.begin(), kLayoutTokens.end());
    std::sort(out.begin(), out.end());
    return out;
  }();
  return tokens;
}

bool in_atlas(std::string_view token) {
  return glyph_bitmap(token) != nullptr ||
         std::find(kLayoutTokens.begin(), kLayoutTokens.end(), token) != kLayoutTokens.end();
}

}  // namespace sghmer
