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

#include "sghmer/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sghmer {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

}  // namespace

TokenList tokenize(std::string_view latex) {
  if (std::all_of(latex.begin(), latex.end(), is_space)) throw std::invalid_argument("tokenize: empty input");
  TokenList out;
  if (std::any_of(latex.begin(), latex.end(), is_space)) {
    std::string current;
    for (char c : latex) {
      if (is_space(c)) {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(c);
      }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
  }
  for (size_t i = 0; i < latex.size();) {
    if (latex[i] != '\\') {
      out.emplace_back(1, latex[i++]);
      continue;
    }
    size_t end = i + 1;
    if (end >= latex.size()) throw std::invalid_argument("tokenize: trailing lone backslash");
    if (is_letter(latex[end])) {
      while (end < latex.size() && is_letter(latex[end])) ++end;
    } else {
      ++end;
    }
    out.emplace_back(latex.substr(i, end - i));
    i = end;
  }
  return out;
}

std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& symbols) {
  symbols_ = {std::string(kPadSymbol), std::string(kSosSymbol), std::string(kEosSymbol)};
  symbols_.insert(symbols_.end(), symbols.begin(), symbols.end());
  for (int i = 0; i < static_cast<int>(symbols_.size()); ++i) {
    if (symbols_[i].empty() || std::any_of(symbols_[i].begin(), symbols_[i].end(), is_space)) {
      throw std::invalid_argument("vocab: symbol " + std::to_string(i) + " is empty or contains whitespace");
    }
    if (!index_.emplace(symbols_[i], i).second) {
      throw std::invalid_argument("vocab: duplicate symbol '" + symbols_[i] + "'");
    }
  }
}

const std::string& Vocab::symbol(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocab: id " + std::to_string(id) + " out of range");
  return symbols_[static_cast<size_t>(id)];
}

int Vocab::id(const std::string& symbol) const {
  auto it = index_.find(symbol);
  if (it == index_.end()) throw std::out_of_range("vocab: unknown symbol '" + symbol + "'");
  return it->second;
}

std::vector<int> Vocab::encode(const TokenList& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    const int i = id(t);
    if (i < kReserved) throw std::invalid_argument("vocab: reserved symbol '" + t + "' inside an expression");
    ids.push_back(i);
  }
  return ids;
}

TokenList Vocab::decode(const std::vector<int>& ids) const {
  TokenList out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(symbol(i));
  return out;
}

std::string Vocab::to_text() const {
  std::string out;
  for (const auto& s : symbols_) {
    out += s;
    out.push_back('\n');
  }
  return out;
}

Vocab Vocab::from_text(std::string_view text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < kReserved || lines[0] != kPadSymbol || lines[1] != kSosSymbol || lines[2] != kEosSymbol) {
    throw std::runtime_error("vocab: missing reserved header lines");
  }
  return Vocab(std::vector<std::string>(lines.begin() + kReserved, lines.end()));
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_text();
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

Vocab build_vocab(const std::vector<TokenList>& expressions) {
  if (expressions.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::set<std::string> distinct;
  for (const auto& e : expressions) distinct.insert(e.begin(), e.end());
  return Vocab(std::vector<std::string>(distinct.begin(), distinct.end()));
}

}  // namespace sghmer
