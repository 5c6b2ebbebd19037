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

#include "sghmer/batch.hpp"
#include "sghmer/dataset_io.hpp"
#include "sghmer/glyphs.hpp"
#include "sghmer/render.hpp"
#include "sghmer/synth.hpp"
#include "sghmer/vocab.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace sghmer {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("sghmer_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Tokenize, WhitespaceSplit) {
  EXPECT_EQ(tokenize("x ^ { 2 }"), (TokenList{"x", "^", "{", "2", "}"}));
}

TEST(Tokenize, ScanRule) {
  EXPECT_EQ(tokenize("\\frac{a}{b}"), (TokenList{"\\frac", "{", "a", "}", "{", "b", "}"}));
  EXPECT_EQ(tokenize("x^2+\\alpha_i"), (TokenList{"x", "^", "2", "+", "\\alpha", "_", "i"}));
  EXPECT_EQ(tokenize("\\{a\\}"), (TokenList{"\\{", "a", "\\}"}));
}

TEST(Tokenize, Errors) {
  EXPECT_THROW(tokenize("\\"), std::invalid_argument);
  EXPECT_THROW(tokenize("ab\\"), std::invalid_argument);
  EXPECT_THROW(tokenize(""), std::invalid_argument);
}

TEST(Tokenize, StabilizesAfterOnePass) {
  Rng rng(11);
  const std::vector<std::string> inputs = {"\\frac{a}{b}", "x^{2}+\\sqrt{y}", "a b c", "\\alpha\\beta", "(1+2)=3"};
  for (const auto& s : inputs) {
    const TokenList once = tokenize(s);
    EXPECT_EQ(tokenize(join_tokens(once)), once) << s;
  }
  for (int i = 0; i < 200; ++i) {
    TokenList expr = random_expression(rng);
    std::string glued;
    for (const auto& t : expr) glued += t;
    const TokenList once = tokenize(glued);
    EXPECT_EQ(tokenize(join_tokens(once)), once) << glued;
  }
}

TEST(Vocab, ReservedIdsAndSortedSymbols) {
  Vocab v = build_vocab({{"a", "b"}, {"b", "c"}});
  EXPECT_EQ(v.symbols(), (std::vector<std::string>{"<pad>", "<sos>", "<eos>", "a", "b", "c"}));
  EXPECT_EQ(v.id("a"), 3);
  EXPECT_EQ(v.symbol(Vocab::kEos), "<eos>");
  EXPECT_THROW(v.id("zz"), std::out_of_range);
  EXPECT_THROW(build_vocab({}), std::invalid_argument);
}

TEST(Vocab, EncodeDecodeRoundTrip) {
  Vocab v = build_vocab({{"x", "^", "{", "2", "}"}});
  const TokenList label = {"x", "^", "{", "2", "}"};
  EXPECT_EQ(v.decode(v.encode(label)), label);
  EXPECT_THROW(v.encode({"<eos>"}), std::invalid_argument);
}

TEST(Vocab, FileRoundTripAndIdempotentBuild) {
  const fs::path dir = temp_dir("vocab");
  const std::vector<TokenList> corpus = {{"\\frac", "{", "a", "}"}, {"b", "+", "1"}};
  build_vocab(corpus).save(dir / "a.txt");
  build_vocab(corpus).save(dir / "b.txt");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  EXPECT_EQ(slurp(dir / "a.txt"), slurp(dir / "b.txt"));
  EXPECT_EQ(Vocab::load(dir / "a.txt"), build_vocab(corpus));
}

TEST(Vocab, SizeMatchesIndependentDistinctCount) {
  const fs::path dir = temp_dir("vocab_count");
  const std::vector<Sample> samples = synth_corpus(60, 5);
  write_dataset(dir, samples);

  // Independent count: split every manifest label on spaces.
  std::set<std::string> distinct;
  std::ifstream in(dir / "manifest.tsv");
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line.substr(line.find('\t') + 1));
    std::string tok;
    while (fields >> tok) distinct.insert(tok);
  }
  std::vector<TokenList> labels;
  for (const auto& e : read_manifest(dir / "manifest.tsv")) labels.push_back(e.tokens);
  EXPECT_EQ(build_vocab(labels).size(), static_cast<int>(distinct.size()) + 3);
}

TEST(Render, SingleGlyphIsDeterministic) {
  Rendering a = render_with_layout({"1"}, 0);
  Rendering b = render_with_layout({"1"}, 0);
  ASSERT_EQ(a.glyphs.size(), 1u);
  EXPECT_EQ(a.sample.label, TokenList{"1"});
  EXPECT_TRUE((a.sample.image == b.sample.image).all());
  EXPECT_GE(a.sample.image.rows(), kMinImageExtent);
  EXPECT_GE(a.sample.image.cols(), kMinImageExtent);
  EXPECT_GT(a.sample.image.maxCoeff(), 0.5f);
  EXPECT_GE(a.sample.image.minCoeff(), 0.0f);
  EXPECT_LE(a.sample.image.maxCoeff(), 1.0f);
}

TEST(Render, SuperscriptIsSmallerAndHigher) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rendering r = render_with_layout(tokenize("x ^ { 2 }"), seed);
    ASSERT_EQ(r.glyphs.size(), 2u);
    const GlyphBox& x = r.glyphs[0];
    const GlyphBox& two = r.glyphs[1];
    EXPECT_EQ(two.token, "2");
    EXPECT_LT(two.height, x.height);
    EXPECT_LT(two.width * two.height, x.width * x.height);
    EXPECT_LT(two.y, x.y);
    EXPECT_LT(two.y + two.height, x.y + x.height);
  }
}

TEST(Render, SubscriptIsSmallerAndLower) {
  Rendering r = render_with_layout(tokenize("x _ { i }"), 4);
  ASSERT_EQ(r.glyphs.size(), 2u);
  EXPECT_LT(r.glyphs[1].height, r.glyphs[0].height);
  EXPECT_GT(r.glyphs[1].y + r.glyphs[1].height, r.glyphs[0].y + r.glyphs[0].height);
}

TEST(Render, FractionStacksGroupsAroundBar) {
  Rendering r = render_with_layout(tokenize("\\frac { a } { b }"), 2);
  ASSERT_EQ(r.glyphs.size(), 2u);
  const GlyphBox& num = r.glyphs[0];
  const GlyphBox& den = r.glyphs[1];
  EXPECT_LT(num.y + num.height, den.y);
  // The bar row lies between numerator and denominator and is inked across.
  const int bar = static_cast<int>((num.y + num.height + den.y) / 2);
  const int mid = static_cast<int>(num.x + num.width / 2);
  EXPECT_GT(r.sample.image(bar, mid), 0.3f);
}

TEST(Render, BracesAreNotDrawn) {
  Rendering r = render_with_layout(tokenize("{ { a } }"), 1);
  ASSERT_EQ(r.glyphs.size(), 1u);
  EXPECT_EQ(r.sample.label, tokenize("{ { a } }"));
}

TEST(Render, RejectsTokenOutsideAtlasByName) {
  try {
    render_synthetic({"x", "\\unknowncmd"}, 0);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("\\unknowncmd"), std::string::npos);
  }
  EXPECT_THROW(render_synthetic(tokenize("x ^"), 0), std::invalid_argument);
  EXPECT_THROW(render_synthetic(tokenize("{ x"), 0), std::invalid_argument);
  EXPECT_THROW(render_synthetic(tokenize("x }"), 0), std::invalid_argument);
}

TEST(Render, AtlasCoversSynthAlphabet) {
  for (const auto& tok : synth_alphabet()) EXPECT_TRUE(in_atlas(tok)) << tok;
  EXPECT_GE(atlas_tokens().size(), 62u + 20u);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t corpus_hash(const std::vector<Sample>& samples) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& s : samples) {
    const int dims[2] = {static_cast<int>(s.image.rows()), static_cast<int>(s.image.cols())};
    h = fnv1a(h, dims, sizeof(dims));
    h = fnv1a(h, s.image.data(), sizeof(float) * static_cast<size_t>(s.image.size()));
    const std::string label = join_tokens(s.label);
    h = fnv1a(h, label.data(), label.size());
  }
  return h;
}

TEST(Synth, ThousandExpressionCorpusHashIsStable) {
  const std::vector<Sample> first = synth_corpus(1000, 2024);
  const std::vector<Sample> second = synth_corpus(1000, 2024);
  EXPECT_EQ(corpus_hash(first), corpus_hash(second));
  EXPECT_EQ(corpus_hash(first), 0x692814e037ffcfbcull) << std::hex << corpus_hash(first);
}

TEST(Synth, ExpressionsRespectLengthAndAlphabet) {
  Rng rng(99);
  const std::set<std::string> alphabet(synth_alphabet().begin(), synth_alphabet().end());
  for (int i = 0; i < 2000; ++i) {
    TokenList e = random_expression(rng);
    ASSERT_GE(e.size(), 1u);
    ASSERT_LE(e.size(), static_cast<size_t>(kMaxSynthTokens));
    for (const auto& t : e) ASSERT_TRUE(alphabet.count(t)) << t;
    EXPECT_NO_THROW(render_synthetic(e, static_cast<std::uint64_t>(i)));
  }
}

TEST(DatasetIo, PgmAndManifestRoundTrip) {
  const fs::path dir = temp_dir("io");
  const std::vector<Sample> samples = synth_corpus(5, 8);
  write_dataset(dir, samples);
  const std::vector<Sample> loaded = load_samples(dir / "manifest.tsv");
  ASSERT_EQ(loaded.size(), samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(loaded[i].label, samples[i].label);
    EXPECT_EQ(loaded[i].source, SampleSource::kManifest);
    ASSERT_EQ(loaded[i].image.rows(), samples[i].image.rows());
    ASSERT_EQ(loaded[i].image.cols(), samples[i].image.cols());
    EXPECT_LE((loaded[i].image - samples[i].image).abs().maxCoeff(), 0.5f / 255.0f + 1e-6f);
  }
}

TEST(DatasetIo, ManifestLineWithoutTabIsRejected) {
  const fs::path dir = temp_dir("bad_manifest");
  std::ofstream(dir / "m.tsv") << "images/a.pgm x + 1\n";
  EXPECT_THROW(read_manifest(dir / "m.tsv"), std::runtime_error);
}

Sample blank(int h, int w, TokenList label) {
  Sample s;
  s.image = Image::Constant(h, w, 0.25f);
  s.label = std::move(label);
  return s;
}

TEST(Batch, SingleSamplePadsToMultipleOf16) {
  const Vocab vocab = build_vocab({{"a"}});
  Batch b = make_batch(std::vector<Sample>{blank(40, 40, {"a"})}, vocab);
  EXPECT_EQ(b.height, 48);
  EXPECT_EQ(b.width, 48);
  EXPECT_EQ(b.image_mask.sum(), 1600.0f);
  EXPECT_EQ(b.images.size(), 48 * 48);
}

TEST(Batch, TargetsCarryEosAndPad) {
  const Vocab vocab = build_vocab({{"a", "b", "c"}});
  Batch b = make_batch(std::vector<Sample>{blank(32, 32, {"a", "b", "c"}), blank(32, 32, {"a", "b", "c", "a", "b"})},
                       vocab);
  EXPECT_EQ(b.steps, 6);
  EXPECT_EQ(b.targets.size(), 12u);
  float row0 = 0, row1 = 0;
  for (int t = 0; t < 6; ++t) {
    row0 += b.target_mask[static_cast<size_t>(t)];
    row1 += b.target_mask[static_cast<size_t>(6 + t)];
  }
  EXPECT_EQ(row0, 4.0f);
  EXPECT_EQ(row1, 6.0f);
  EXPECT_EQ(b.target(0, 3), Vocab::kEos);
  EXPECT_EQ(b.target(0, 4), Vocab::kPad);
  EXPECT_EQ(b.target(1, 5), Vocab::kEos);
}

TEST(Batch, IdenticalSamplesGiveIdenticalMaskRows) {
  const Vocab vocab = build_vocab({{"a"}});
  const Sample s = blank(33, 50, {"a"});
  Batch b = make_batch(std::vector<Sample>{s, s, s}, vocab);
  const Eigen::Index plane = static_cast<Eigen::Index>(b.height) * b.width;
  for (int i = 1; i < 3; ++i) {
    EXPECT_TRUE((b.image_mask.segment(i * plane, plane) == b.image_mask.segment(0, plane)).all());
  }
}

TEST(Batch, MaskInvariantsHoldOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const std::vector<Sample> samples = synth_corpus(1 + static_cast<int>(rng.below(8)), seed);
    std::vector<TokenList> labels;
    for (const auto& s : samples) labels.push_back(s.label);
    const Vocab vocab = build_vocab(labels);
    Batch b = make_batch(samples, vocab);
    ASSERT_EQ(b.height % 16, 0);
    ASSERT_EQ(b.width % 16, 0);
    for (int i = 0; i < b.size; ++i) {
      const Image& img = samples[static_cast<size_t>(i)].image;
      for (int y = 0; y < b.height; ++y) {
        for (int x = 0; x < b.width; ++x) {
          const Eigen::Index at = (static_cast<Eigen::Index>(i) * b.height + y) * b.width + x;
          const bool inside = y < img.rows() && x < img.cols();
          ASSERT_EQ(b.image_mask[at], inside ? 1.0f : 0.0f);
          ASSERT_EQ(b.images[at], inside ? img(y, x) : 0.0f);
        }
      }
      const int len = static_cast<int>(samples[static_cast<size_t>(i)].label.size());
      for (int t = 0; t < b.steps; ++t) {
        ASSERT_EQ(b.valid(i, t), t <= len);
        if (t == len) {
          ASSERT_EQ(b.target(i, t), Vocab::kEos);
        }
        if (t > len) {
          ASSERT_EQ(b.target(i, t), Vocab::kPad);
        }
      }
    }
  }
}

TEST(Batch, EmptyInputRejected) {
  EXPECT_THROW(make_batch(std::vector<Sample>{}, build_vocab({{"a"}})), std::invalid_argument);
}

}  // namespace
}  // namespace sghmer
