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

#include <Eigen/Core>

#include "sghmer/vocab.hpp"

namespace sghmer {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using CorrelationMatrix = Eigen::MatrixXd;

// Expression-level presence counts over a vocabulary of n ids.
//   solo(j)    = number of expressions containing symbol j
//   pair(i, j) = number of expressions containing both i and j, i != j
// The diagonal of pair is kept at zero.
struct CooccurCounts {
  int n = 0;
  std::int64_t expressions = 0;
  CountMatrix pair;
  CountVector solo;
};

// Every expression implicitly ends with eos, so eos is present in each one
// whether or not the sequence already carries it. Pad and sos ids, ids out
// of range, and an empty corpus are rejected.
CooccurCounts count_cooccurrence(const std::vector<std::vector<int>>& corpus, const Vocab& vocab);
CooccurCounts count_cooccurrence(const std::vector<TokenList>& corpus, const Vocab& vocab);

// r(i, j) = P(s_i | s_j) = pair(i, j) / solo(j), with r(j, j) = 1 for every
// seen symbol. Rows and columns of unseen symbols are zero.
CorrelationMatrix conditional_matrix(const CooccurCounts& counts);

// (R + R^T) / 2. Throws on a non-square input.
CorrelationMatrix symmetrize(const CorrelationMatrix& r);

struct SemanticGraph {
  Vocab vocab;
  CorrelationMatrix r;
};

SemanticGraph build_graph(const std::vector<TokenList>& corpus, const Vocab& vocab);

// Text format: "SEMGRAPH1", n, n vocab lines, n rows of n values at nine
// significant digits, then "CRC <hex>" over all preceding bytes.
std::string graph_to_text(const SemanticGraph& graph);
SemanticGraph graph_from_text(std::string_view text);
void save_graph(const SemanticGraph& graph, const std::filesystem::path& path);
SemanticGraph load_graph(const std::filesystem::path& path);

}  // namespace sghmer
