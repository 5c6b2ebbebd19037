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

#include "sghmer/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sghmer/glyphs.hpp"
#include "sghmer/rng.hpp"

namespace sghmer {

namespace {

constexpr int kSuper = 4;

struct PlacedGlyph {
  std::string token;
  const char* bits;
  float x, y, w, h, shear;
};

struct Stroke {
  float x0, y0, x1, y1, thickness;
};

// Coordinates are relative to the pen origin on the baseline; y grows down.
struct Box {
  float width = 0;
  float ascent = 0;
  float descent = 0;
  std::vector<PlacedGlyph> glyphs;
  std::vector<Stroke> strokes;

  void place(const Box& inner, float dx, float dy) {
    for (PlacedGlyph g : inner.glyphs) {
      g.x += dx;
      g.y += dy;
      glyphs.push_back(std::move(g));
    }
    for (Stroke s : inner.strokes) {
      s.x0 += dx;
      s.x1 += dx;
      s.y0 += dy;
      s.y1 += dy;
      strokes.push_back(s);
    }
    ascent = std::max(ascent, inner.ascent - dy);
    descent = std::max(descent, inner.descent + dy);
    width = std::max(width, dx + inner.width);
  }
};

class Layout {
 public:
  Layout(const TokenList& tokens, Rng& rng, float slant)
      : tokens_(tokens), rng_(rng), slant_(slant) {}

  Box run() {
    Box box = sequence(1.0f, false);
    if (pos_ != tokens_.size()) throw std::invalid_argument("render: unbalanced '}'");
    return box;
  }

 private:
  float jitter(float amount) { return static_cast<float>(rng_.uniform(-amount, amount)); }

  Box sequence(float scale, bool grouped) {
    Box out;
    float pen = 0;
    bool first = true;
    while (pos_ < tokens_.size()) {
      const std::string& tok = tokens_[pos_];
      if (tok == "}") {
        if (!grouped) throw std::invalid_argument("render: unbalanced '}'");
        ++pos_;
        return out;
      }
      if (tok == "^" || tok == "_") {
        ++pos_;
        if (pos_ >= tokens_.size()) throw std::invalid_argument("render: '" + tok + "' without operand");
        Box script = atom(scale * kScriptScale);
        const float shift = kScriptShift * kGlyphHeight * scale;
        const float dx = first ? 0.0f : pen + 0.4f * scale;
        out.place(script, dx, tok == "^" ? -shift : shift);
        pen = dx + script.width;
      } else {
        Box item = atom(scale);
        const float dx = first ? 0.0f : pen + (1.6f + jitter(0.5f)) * scale;
        out.place(item, dx, jitter(0.3f) * scale);
        pen = dx + item.width;
      }
      first = false;
    }
    if (grouped) throw std::invalid_argument("render: unclosed '{'");
    return out;
  }

  Box atom(float scale) {
    const std::string& tok = tokens_[pos_++];
    if (tok == "{") return sequence(scale, true);
    if (tok == "\\frac") return fraction(scale);
    if (tok == "\\sqrt") return radical(scale);
    if (tok == "^" || tok == "_" || tok == "}") {
      throw std::invalid_argument("render: unexpected '" + tok + "'");
    }
    const char* bits = glyph_bitmap(tok);
    if (bits == nullptr) throw std::invalid_argument("render: token not in glyph atlas: " + tok);
    const float h = kGlyphHeight * scale * (1.0f + jitter(0.04f));
    const float w = h * (5.0f / 7.0f) * (1.0f + jitter(0.1f));
    Box box;
    box.width = w;
    box.ascent = h;
    box.glyphs.push_back({tok, bits, 0.0f, -h, w, h, slant_ + jitter(0.05f)});
    return box;
  }

  Box fraction(float scale) {
    if (pos_ >= tokens_.size()) throw std::invalid_argument("render: \\frac without numerator");
    Box num = atom(scale);
    if (pos_ >= tokens_.size()) throw std::invalid_argument("render: \\frac without denominator");
    Box den = atom(scale);
    const float thickness = std::max(1.0f, 1.3f * scale);
    const float gap = 2.0f * scale;
    const float axis = -0.45f * kGlyphHeight * scale;
    const float pad = 2.0f * scale;
    const float width = std::max(num.width, den.width) + 2 * pad;
    Box out;
    out.place(num, (width - num.width) / 2, axis - thickness / 2 - gap - num.descent);
    out.place(den, (width - den.width) / 2, axis + thickness / 2 + gap + den.ascent);
    out.strokes.push_back({0.0f, axis + jitter(0.4f), width, axis + jitter(0.4f), thickness});
    out.width = std::max(out.width, width);
    out.ascent = std::max(out.ascent, -axis + thickness);
    return out;
  }

  Box radical(float scale) {
    if (pos_ >= tokens_.size()) throw std::invalid_argument("render: \\sqrt without operand");
    Box body = atom(scale);
    const float g = kGlyphHeight * scale;
    const float thickness = std::max(1.0f, 1.3f * scale);
    const float hook = 0.5f * g;
    const float top = -(body.ascent + 2.0f * scale);
    const float bottom = body.descent + 1.0f * scale;
    Box out;
    out.place(body, hook + 1.5f * scale, 0.0f);
    const float right = out.width + 1.5f * scale;
    out.strokes.push_back({0.0f, -0.35f * g, 0.3f * hook, bottom, thickness});
    out.strokes.push_back({0.3f * hook, bottom, hook, top, thickness});
    out.strokes.push_back({hook, top, right, top + jitter(0.4f), thickness});
    out.width = right;
    out.ascent = std::max(out.ascent, -top + thickness);
    out.descent = std::max(out.descent, bottom + thickness);
    return out;
  }

  const TokenList& tokens_;
  Rng& rng_;
  float slant_;
  size_t pos_ = 0;
};

float segment_distance(float px, float py, const Stroke& s) {
  const float dx = s.x1 - s.x0, dy = s.y1 - s.y0;
  const float len2 = dx * dx + dy * dy;
  float t = len2 > 0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0f;
  t = std::clamp(t, 0.0f, 1.0f);
  const float ex = px - (s.x0 + t * dx), ey = py - (s.y0 + t * dy);
  return std::sqrt(ex * ex + ey * ey);
}

void draw_glyph(Image& img, const PlacedGlyph& g) {
  const float lean = std::abs(g.shear) * g.h / 2;
  const int x0 = std::max(0, static_cast<int>(std::floor(g.x - lean)));
  const int x1 = std::min<int>(img.cols() - 1, static_cast<int>(std::ceil(g.x + g.w + lean)));
  const int y0 = std::max(0, static_cast<int>(std::floor(g.y)));
  const int y1 = std::min<int>(img.rows() - 1, static_cast<int>(std::ceil(g.y + g.h)));
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      int hits = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const float fx = px + (sx + 0.5f) / kSuper;
          const float fy = py + (sy + 0.5f) / kSuper;
          const float v = fy - g.y;
          const float u = fx - g.x + g.shear * (v - g.h / 2);
          const int col = static_cast<int>(std::floor(u / g.w * kGlyphCols));
          const int row = static_cast<int>(std::floor(v / g.h * kGlyphRows));
          if (col < 0 || col >= kGlyphCols || row < 0 || row >= kGlyphRows) continue;
          if (g.bits[row * kGlyphCols + col] == '#') ++hits;
        }
      }
      if (hits > 0) {
        img(py, px) = std::max(img(py, px), static_cast<float>(hits) / (kSuper * kSuper));
      }
    }
  }
}

void draw_stroke(Image& img, const Stroke& s) {
  const float r = s.thickness / 2;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1) - r)));
  const int x1 = std::min<int>(img.cols() - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1) + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1) - r)));
  const int y1 = std::min<int>(img.rows() - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1) + r)));
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      int hits = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          if (segment_distance(px + (sx + 0.5f) / kSuper, py + (sy + 0.5f) / kSuper, s) <= r) ++hits;
        }
      }
      if (hits > 0) {
        img(py, px) = std::max(img(py, px), static_cast<float>(hits) / (kSuper * kSuper));
      }
    }
  }
}

}  // namespace

Rendering render_with_layout(const TokenList& tokens, std::uint64_t seed) {
  if (tokens.empty()) throw std::invalid_argument("render: empty token list");
  for (const auto& tok : tokens) {
    if (!in_atlas(tok)) throw std::invalid_argument("render: token not in glyph atlas: " + tok);
  }
  Rng rng(seed);
  const float slant = static_cast<float>(rng.uniform(-0.15, 0.15));
  Box box = Layout(tokens, rng, slant).run();

  const float margin = 3.0f + static_cast<float>(rng.uniform(0.0, 3.0));
  const float lean = 0.2f * kGlyphHeight;
  const int width = std::max(kMinImageExtent, static_cast<int>(std::ceil(box.width + 2 * (margin + lean))));
  const int height =
      std::max(kMinImageExtent, static_cast<int>(std::ceil(box.ascent + box.descent + 2 * margin)));
  const float ox = std::round((width - box.width) / 2);
  const float oy = std::round((height - box.ascent - box.descent) / 2 + box.ascent);

  Rendering out;
  out.sample.image = Image::Zero(height, width);
  out.sample.label = tokens;
  out.sample.source = SampleSource::kSynthetic;
  for (PlacedGlyph g : box.glyphs) {
    g.x += ox;
    g.y += oy;
    draw_glyph(out.sample.image, g);
    out.glyphs.push_back({g.token, g.x, g.y, g.w, g.h});
  }
  for (Stroke s : box.strokes) {
    s.x0 += ox;
    s.x1 += ox;
    s.y0 += oy;
    s.y1 += oy;
    draw_stroke(out.sample.image, s);
  }
  return out;
}

Sample render_synthetic(const TokenList& tokens, std::uint64_t seed) {
  return render_with_layout(tokens, seed).sample;
}

}  // namespace sghmer
