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
#include <filesystem>
#include <vector>

#include "sghmer/render.hpp"
#include "sghmer/rng.hpp"
#include "sghmer/vocab.hpp"

namespace sghmer {

inline constexpr int kMaxSynthTokens = 20;
inline constexpr int kMaxSynthDepth = 2;

// Symbols the synthetic grammar can emit.
const std::vector<std::string>& synth_alphabet();

// Random expression with at most two levels of nested structure (scripts,
// fractions, roots, parentheses) and 1 to 20 tokens.
TokenList random_expression(Rng& rng);

// Draws count expressions and their jitter seeds from one stream seeded by
// seed. Sample i is named by its zero-padded index.
std::vector<Sample> synth_corpus(int count, std::uint64_t seed);

// Writes images/NNNNN.pgm and manifest.tsv under dir.
void write_dataset(const std::filesystem::path& dir, const std::vector<Sample>& samples);

}  // namespace sghmer
