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

#include "sghmer/semgraph.hpp"
#include "sghmer/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace sghmer {
namespace {

namespace fs = std::filesystem;

// Straight from the definition: for every ordered symbol pair, scan every
// expression for both symbols.
CorrelationMatrix oracle_conditional(const std::vector<std::vector<int>>& corpus, int n) {
  auto has = [](const std::vector<int>& e, int s) {
    return s == Vocab::kEos || std::find(e.begin(), e.end(), s) != e.end();
  };
  CorrelationMatrix r = CorrelationMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double with_j = 0;
    for (const auto& e : corpus) with_j += has(e, j) ? 1 : 0;
    if (with_j == 0) continue;
    for (int i = 0; i < n; ++i) {
      double both = 0;
      for (const auto& e : corpus) both += has(e, i) && has(e, j) ? 1 : 0;
      r(i, j) = both / with_j;
    }
  }
  return r;
}

Vocab letters(int count) {
  std::vector<std::string> s;
  for (int i = 0; i < count; ++i) s.push_back("s" + std::to_string(100 + i));
  return Vocab(s);
}

std::vector<std::vector<int>> random_corpus(Rng& rng, int vocab_size) {
  std::vector<std::vector<int>> corpus(1 + rng.below(200));
  // Leave a few ids unused so never-seen symbols are exercised.
  const int used = Vocab::kReserved + static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab_size - 3)));
  for (auto& e : corpus) {
    const int len = 1 + static_cast<int>(rng.below(12));
    for (int k = 0; k < len; ++k) {
      e.push_back(Vocab::kReserved + static_cast<int>(rng.below(static_cast<std::uint64_t>(used - 2))));
    }
    if (rng.coin(0.2)) e.push_back(Vocab::kEos);
  }
  return corpus;
}

TEST(Cooccurrence, HandEnumeratedExample) {
  const Vocab v = build_vocab({{"a", "b", "c"}});
  const int a = v.id("a"), b = v.id("b"), c = v.id("c");
  CooccurCounts counts = count_cooccurrence(std::vector<TokenList>{{"a", "b"}, {"a", "c"}}, v);
  EXPECT_EQ(counts.solo[a], 2);
  EXPECT_EQ(counts.solo[b], 1);
  EXPECT_EQ(counts.pair(a, b), 1);
  EXPECT_EQ(counts.pair(b, c), 0);
  EXPECT_EQ(counts.solo[Vocab::kEos], 2);

  CorrelationMatrix r = conditional_matrix(counts);
  EXPECT_DOUBLE_EQ(r(b, a), 0.5);
  EXPECT_DOUBLE_EQ(r(a, b), 1.0);
}

TEST(Cooccurrence, PresenceNotFrequency) {
  const Vocab v = build_vocab({{"a", "b"}});
  CooccurCounts counts = count_cooccurrence(std::vector<TokenList>{{"a", "a", "b"}}, v);
  EXPECT_EQ(counts.solo[v.id("a")], 1);
  EXPECT_EQ(counts.pair(v.id("a"), v.id("b")), 1);
}

TEST(Cooccurrence, Errors) {
  const Vocab v = build_vocab({{"a"}});
  EXPECT_THROW(count_cooccurrence(std::vector<std::vector<int>>{}, v), std::invalid_argument);
  EXPECT_THROW(count_cooccurrence(std::vector<std::vector<int>>{{7}}, v), std::out_of_range);
  EXPECT_THROW(count_cooccurrence(std::vector<std::vector<int>>{{Vocab::kSos}}, v), std::invalid_argument);
}

TEST(Conditional, EosRowIsOneTowardSeenSymbols) {
  const Vocab v = build_vocab({{"a", "b", "c", "u"}});
  CorrelationMatrix r = conditional_matrix(count_cooccurrence(std::vector<TokenList>{{"a", "b"}, {"c"}}, v));
  for (const char* s : {"a", "b", "c"}) EXPECT_EQ(r(Vocab::kEos, v.id(s)), 1.0);
  const int u = v.id("u");
  EXPECT_EQ(r.row(u).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(r.col(u).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(r(v.id("a"), v.id("a")), 1.0);
}

TEST(Symmetrize, MeanOfPairAndFixedPoint) {
  CorrelationMatrix r(2, 2);
  r << 1.0, 1.0, 0.5, 1.0;
  CorrelationMatrix s = symmetrize(r);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.75);
  EXPECT_DOUBLE_EQ(s(1, 0), 0.75);
  EXPECT_EQ(symmetrize(s), s);
  EXPECT_THROW(symmetrize(CorrelationMatrix::Zero(2, 3)), std::invalid_argument);
}

TEST(Graph, MatchesBruteForceOracleOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const int n = 4 + static_cast<int>(rng.below(27));
    const Vocab v = letters(n - Vocab::kReserved);
    const auto corpus = random_corpus(rng, n);
    const CorrelationMatrix r = conditional_matrix(count_cooccurrence(corpus, v));
    const CorrelationMatrix expect = oracle_conditional(corpus, n);
    ASSERT_LE((r - expect).cwiseAbs().maxCoeff(), 1e-12) << "seed " << seed;
    const CorrelationMatrix rs = symmetrize(r);
    ASSERT_LE((rs - symmetrize(expect)).cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_EQ(rs, rs.transpose());
    ASSERT_EQ(symmetrize(rs), rs);
    ASSERT_GE(rs.minCoeff(), 0.0);
    ASSERT_LE(rs.maxCoeff(), 1.0);
  }
}

TEST(Graph, CorpusOrderDoesNotMatter) {
  Rng rng(3);
  const Vocab v = letters(20);
  auto corpus = random_corpus(rng, v.size());
  const CorrelationMatrix before = symmetrize(conditional_matrix(count_cooccurrence(corpus, v)));
  rng.shuffle(corpus);
  EXPECT_EQ(symmetrize(conditional_matrix(count_cooccurrence(corpus, v))), before);
}

TEST(GraphFile, RoundTripAtStoredPrecision) {
  Rng rng(8);
  const Vocab v = letters(12);
  SemanticGraph g{v, symmetrize(conditional_matrix(count_cooccurrence(random_corpus(rng, v.size()), v)))};
  const fs::path path = fs::temp_directory_path() / "sghmer_graph_roundtrip.txt";
  save_graph(g, path);
  SemanticGraph back = load_graph(path);
  EXPECT_EQ(back.vocab, v);
  EXPECT_LE((back.r - g.r).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(graph_to_text(back), graph_to_text(g));
}

TEST(GraphFile, CorruptionIsRejected) {
  const Vocab v = build_vocab({{"a", "b"}});
  SemanticGraph g = build_graph({{"a", "b"}, {"a"}}, v);
  const std::string text = graph_to_text(g);
  EXPECT_NO_THROW(graph_from_text(text));
  EXPECT_THROW(graph_from_text(text.substr(0, text.size() / 2)), std::runtime_error);
  std::string flipped = text;
  flipped[flipped.find("0.75")] = '9';
  EXPECT_THROW(graph_from_text(flipped), std::runtime_error);
  std::string header = text;
  header[8] = '2';
  EXPECT_THROW(graph_from_text(header), std::runtime_error);
}

}  // namespace
}  // namespace sghmer
