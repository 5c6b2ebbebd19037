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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sghmer/checkpoint.hpp"

namespace sghmer {

CooccurCounts count_cooccurrence(const std::vector<std::vector<int>>& corpus, const Vocab& vocab) {
  if (corpus.empty()) throw std::invalid_argument("count_cooccurrence: empty corpus");
  const int n = vocab.size();
  CooccurCounts counts;
  counts.n = n;
  counts.expressions = static_cast<std::int64_t>(corpus.size());
  counts.pair = CountMatrix::Zero(n, n);
  counts.solo = CountVector::Zero(n);

  std::vector<char> present(static_cast<size_t>(n));
  std::vector<int> members;
  for (const auto& expr : corpus) {
    std::fill(present.begin(), present.end(), 0);
    members.clear();
    present[Vocab::kEos] = 1;
    members.push_back(Vocab::kEos);
    for (int id : expr) {
      if (id < 0 || id >= n) {
        throw std::out_of_range("count_cooccurrence: id " + std::to_string(id) + " outside vocab of size " +
                                std::to_string(n));
      }
      if (id == Vocab::kPad || id == Vocab::kSos) {
        throw std::invalid_argument("count_cooccurrence: pad/sos ids are not graph nodes");
      }
      if (!present[static_cast<size_t>(id)]) {
        present[static_cast<size_t>(id)] = 1;
        members.push_back(id);
      }
    }
    for (int i : members) {
      ++counts.solo[i];
      for (int j : members) {
        if (i != j) ++counts.pair(i, j);
      }
    }
  }
  return counts;
}

CooccurCounts count_cooccurrence(const std::vector<TokenList>& corpus, const Vocab& vocab) {
  std::vector<std::vector<int>> ids;
  ids.reserve(corpus.size());
  for (const auto& tokens : corpus) ids.push_back(vocab.encode(tokens));
  return count_cooccurrence(ids, vocab);
}

CorrelationMatrix conditional_matrix(const CooccurCounts& counts) {
  CorrelationMatrix r = CorrelationMatrix::Zero(counts.n, counts.n);
  for (int j = 0; j < counts.n; ++j) {
    if (counts.solo[j] == 0) continue;
    const double denom = static_cast<double>(counts.solo[j]);
    for (int i = 0; i < counts.n; ++i) {
      r(i, j) = i == j ? 1.0 : static_cast<double>(counts.pair(i, j)) / denom;
    }
  }
  return r;
}

CorrelationMatrix symmetrize(const CorrelationMatrix& r) {
  if (r.rows() != r.cols()) {
    throw std::invalid_argument("symmetrize: matrix is " + std::to_string(r.rows()) + "x" +
                                std::to_string(r.cols()) + ", expected square");
  }
  return (r + r.transpose()) / 2.0;
}

SemanticGraph build_graph(const std::vector<TokenList>& corpus, const Vocab& vocab) {
  return {vocab, symmetrize(conditional_matrix(count_cooccurrence(corpus, vocab)))};
}

std::string graph_to_text(const SemanticGraph& graph) {
  const Eigen::Index n = graph.r.rows();
  if (n != graph.vocab.size() || graph.r.cols() != n) {
    throw std::invalid_argument("graph_to_text: matrix does not match vocab size");
  }
  std::string out = "SEMGRAPH1\n" + std::to_string(n) + "\n";
  for (const auto& s : graph.vocab.symbols()) out += s + "\n";
  char buf[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g", graph.r(i, j));
      if (j > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  std::snprintf(buf, sizeof(buf), "CRC %08x\n", crc32_of(out));
  return out + buf;
}

SemanticGraph graph_from_text(std::string_view text) {
  const auto crc_at = text.rfind("CRC ");
  if (crc_at == std::string_view::npos || (crc_at > 0 && text[crc_at - 1] != '\n')) {
    throw std::runtime_error("graph file: missing checksum line");
  }
  const std::string_view body = text.substr(0, crc_at);
  std::string_view crc_line = text.substr(crc_at + 4);
  while (!crc_line.empty() && (crc_line.back() == '\n' || crc_line.back() == '\r')) crc_line.remove_suffix(1);
  std::uint32_t stored = 0;
  const auto [end, ec] = std::from_chars(crc_line.data(), crc_line.data() + crc_line.size(), stored, 16);
  if (ec != std::errc() || end != crc_line.data() + crc_line.size() || crc_line.size() != 8) {
    throw std::runtime_error("graph file: malformed checksum line");
  }
  if (stored != crc32_of(body)) throw std::runtime_error("graph file: checksum mismatch");

  std::istringstream in{std::string(body)};
  std::string line;
  if (!std::getline(in, line) || line != "SEMGRAPH1") throw std::runtime_error("graph file: bad header");
  int n = 0;
  if (!std::getline(in, line) || (n = std::stoi(line)) < Vocab::kReserved) {
    throw std::runtime_error("graph file: bad size line");
  }
  std::string vocab_text;
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("graph file: truncated vocab");
    vocab_text += line + "\n";
  }
  SemanticGraph graph{Vocab::from_text(vocab_text), CorrelationMatrix(n, n)};
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("graph file: truncated matrix");
    std::istringstream row(line);
    for (int j = 0; j < n; ++j) {
      if (!(row >> graph.r(i, j))) throw std::runtime_error("graph file: short row " + std::to_string(i));
    }
    std::string extra;
    if (row >> extra) throw std::runtime_error("graph file: long row " + std::to_string(i));
  }
  if (std::getline(in, line)) throw std::runtime_error("graph file: trailing content");
  return graph;
}

void save_graph(const SemanticGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << graph_to_text(graph);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SemanticGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return graph_from_text(buf.str());
}

}  // namespace sghmer
