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
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sghmer {

using TokenList = std::vector<std::string>;

// Splits on whitespace when the input contains any; otherwise scans
// character by character: a backslash plus its maximal letter run (or the
// single glyph after it) is one token, every other character is one token.
// Throws on empty input or a trailing lone backslash.
TokenList tokenize(std::string_view latex);

std::string join_tokens(const TokenList& tokens);

// Bijective symbol <-> id map. Ids 0, 1 and 2 are reserved for padding,
// start and end of sequence.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kReserved = 3;
  static constexpr std::string_view kPadSymbol = "<pad>";
  static constexpr std::string_view kSosSymbol = "<sos>";
  static constexpr std::string_view kEosSymbol = "<eos>";

  Vocab();
  // Symbols in id order, reserved entries excluded. Duplicates throw.
  explicit Vocab(const std::vector<std::string>& symbols);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbol(int id) const;
  // Throws std::out_of_range for unknown symbols.
  int id(const std::string& symbol) const;
  bool contains(const std::string& symbol) const { return index_.count(symbol) != 0; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  std::vector<int> encode(const TokenList& tokens) const;
  TokenList decode(const std::vector<int>& ids) const;

  // One symbol per line, the three reserved symbols first, so line number
  // equals id.
  std::string to_text() const;
  static Vocab from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  bool operator==(const Vocab& other) const { return symbols_ == other.symbols_; }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Distinct tokens sorted lexicographically after the reserved ids.
Vocab build_vocab(const std::vector<TokenList>& expressions);

}  // namespace sghmer
