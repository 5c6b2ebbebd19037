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

#include "sghmer/synth.hpp"

#include <cstdio>

#include "sghmer/dataset_io.hpp"

namespace sghmer {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kDigits = {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"};
const std::vector<std::string> kLetters = {"a", "b", "c", "k", "n", "x", "y", "z"};
const std::vector<std::string> kGreek = {"\\alpha", "\\beta", "\\pi", "\\theta"};
const std::vector<std::string> kOperators = {"+", "-", "=", "\\times"};

const std::string& pick(Rng& rng, const std::vector<std::string>& from) {
  return from[rng.below(from.size())];
}

class Grammar {
 public:
  explicit Grammar(Rng& rng) : rng_(rng) {}

  TokenList expression(int depth) {
    TokenList out = term(depth);
    const int extra = static_cast<int>(rng_.below(depth == 0 ? 3 : 2));
    for (int i = 0; i < extra; ++i) {
      out.push_back(pick(rng_, kOperators));
      append(out, term(depth));
    }
    return out;
  }

 private:
  static void append(TokenList& out, const TokenList& more) { out.insert(out.end(), more.begin(), more.end()); }

  TokenList group(const TokenList& inner) {
    TokenList out{"{"};
    append(out, inner);
    out.push_back("}");
    return out;
  }

  TokenList operand(int depth) {
    if (depth < kMaxSynthDepth && rng_.coin(0.3)) return expression(depth + 1);
    return simple();
  }

  TokenList simple() {
    const auto roll = rng_.below(10);
    if (roll < 4) {
      TokenList out{pick(rng_, kDigits)};
      if (rng_.coin(0.3)) out.push_back(pick(rng_, kDigits));
      return out;
    }
    if (roll < 8) return {pick(rng_, kLetters)};
    return {pick(rng_, kGreek)};
  }

  TokenList term(int depth) {
    const auto roll = rng_.below(depth < kMaxSynthDepth ? 10 : 5);
    switch (roll) {
      case 0:
      case 1:
      case 2: {
        return simple();
      }
      case 3:
      case 4: {
        TokenList out = {rng_.coin(0.7) ? pick(rng_, kLetters) : pick(rng_, kGreek)};
        out.push_back(rng_.coin(0.6) ? "^" : "_");
        append(out, group(simple()));
        return out;
      }
      case 5:
      case 6: {
        TokenList out = {rng_.coin(0.7) ? pick(rng_, kLetters) : pick(rng_, kGreek)};
        out.push_back(rng_.coin(0.6) ? "^" : "_");
        append(out, group(operand(depth + 1)));
        return out;
      }
      case 7: {
        TokenList out{"\\frac"};
        append(out, group(operand(depth + 1)));
        append(out, group(operand(depth + 1)));
        return out;
      }
      case 8: {
        TokenList out{"\\sqrt"};
        append(out, group(operand(depth + 1)));
        return out;
      }
      default: {
        TokenList out{"("};
        append(out, expression(depth + 1));
        out.push_back(")");
        return out;
      }
    }
  }

  Rng& rng_;
};

std::string sample_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", index);
  return buf;
}

}  // namespace

const std::vector<std::string>& synth_alphabet() {
  static const std::vector<std::string> alphabet = [] {
    std::vector<std::string> out;
    for (const auto* set : {&kDigits, &kLetters, &kGreek, &kOperators}) out.insert(out.end(), set->begin(), set->end());
    for (const char* s : {"(", ")", "^", "_", "{", "}", "\\frac", "\\sqrt"}) out.emplace_back(s);
    return out;
  }();
  return alphabet;
}

TokenList random_expression(Rng& rng) {
  for (;;) {
    TokenList tokens = Grammar(rng).expression(0);
    if (!tokens.empty() && static_cast<int>(tokens.size()) <= kMaxSynthTokens) return tokens;
  }
}

std::vector<Sample> synth_corpus(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    TokenList tokens = random_expression(rng);
    Sample s = render_synthetic(tokens, rng.next());
    s.name = sample_name(i);
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_dataset(const fs::path& dir, const std::vector<Sample>& samples) {
  fs::create_directories(dir / "images");
  std::vector<ManifestEntry> entries;
  for (size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const std::string name = s.name.empty() ? sample_name(static_cast<int>(i)) : s.name;
    const std::string rel = "images/" + name + ".pgm";
    write_pgm(dir / rel, s.image);
    entries.push_back({rel, s.label});
  }
  write_manifest(dir / "manifest.tsv", entries);
}

}  // namespace sghmer
