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

#include "sghmer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sghmer {

namespace {

template <typename S>
using Vec = typename Tensor<S>::Vector;
template <typename S>
using Mat = typename Tensor<S>::Matrix;
template <typename S>
using MatMap = Eigen::Map<Mat<S>>;
template <typename S>
using CMatMap = Eigen::Map<const Mat<S>>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " +
                              shape_string(b));
}

void require_rank(const char* op, const Shape& s, size_t rank) {
  if (s.size() != rank) {
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                                shape_string(s));
  }
}

template <typename S>
CMatMap<S> view(const Vec<S>& v, Index rows, Index cols) {
  return CMatMap<S>(v.data(), rows, cols);
}

template <typename S>
MatMap<S> view(Vec<S>& v, Index rows, Index cols) {
  return MatMap<S>(v.data(), rows, cols);
}

}  // namespace

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape());
  return record<S>("add", a.shape(), a.values() + b.values(), {a, b},
                   [a, b](const Vec<S>& g, const Vec<S>&) mutable {
                     if (a.requires_grad()) a.grad() += g;
                     if (b.requires_grad()) b.grad() += g;
                   });
}

template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) shape_error("sub", a.shape(), b.shape());
  return record<S>("sub", a.shape(), a.values() - b.values(), {a, b},
                   [a, b](const Vec<S>& g, const Vec<S>&) mutable {
                     if (a.requires_grad()) a.grad() += g;
                     if (b.requires_grad()) b.grad() -= g;
                   });
}

template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  return record<S>("mul", a.shape(), a.values().cwiseProduct(b.values()), {a, b},
                   [a, b](const Vec<S>& g, const Vec<S>&) mutable {
                     if (a.requires_grad()) a.grad() += g.cwiseProduct(b.values());
                     if (b.requires_grad()) b.grad() += g.cwiseProduct(a.values());
                   });
}

template <typename S>
Tensor<S> scale(const Tensor<S>& a, S factor) {
  return record<S>("scale", a.shape(), a.values() * factor, {a},
                   [a, factor](const Vec<S>& g, const Vec<S>&) mutable { a.grad() += g * factor; });
}

template <typename S>
Tensor<S> sum(const Tensor<S>& a) {
  Vec<S> out(1);
  out[0] = a.values().sum();
  return record<S>("sum", {}, std::move(out), {a},
                   [a](const Vec<S>& g, const Vec<S>&) mutable { a.grad().array() += g[0]; });
}

template <typename S>
Tensor<S> mean(const Tensor<S>& a) {
  return scale(sum(a), S(1) / static_cast<S>(a.size()));
}

template <typename S>
Tensor<S> relu(const Tensor<S>& a) {
  return record<S>("relu", a.shape(), a.values().cwiseMax(S(0)), {a},
                   [a](const Vec<S>& g, const Vec<S>&) mutable {
                     a.grad().array() += (a.values().array() > S(0)).select(g.array(), S(0));
                   });
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  Vec<S> y = (S(1) + (-a.values().array()).exp()).inverse().matrix();
  return record<S>("sigmoid", a.shape(), std::move(y), {a}, [a](const Vec<S>& g, const Vec<S>& y) mutable {
    a.grad().array() += g.array() * y.array() * (S(1) - y.array());
  });
}

template <typename S>
Tensor<S> tanh(const Tensor<S>& a) {
  Vec<S> y = a.values().array().tanh().matrix();
  return record<S>("tanh", a.shape(), std::move(y), {a}, [a](const Vec<S>& g, const Vec<S>& y) mutable {
    a.grad().array() += g.array() * (S(1) - y.array().square());
  });
}

template <typename S>
Tensor<S> reshape(const Tensor<S>& a, Shape shape) {
  if (shape_size(shape) != a.size()) shape_error("reshape", a.shape(), shape);
  return record<S>("reshape", std::move(shape), a.values(), {a},
                   [a](const Vec<S>& g, const Vec<S>&) mutable { a.grad() += g; });
}

namespace {

// Maps every output linear index to its source linear index.
std::vector<Index> permutation_index(const Shape& in, const std::vector<int>& perm, Shape& out) {
  const size_t r = in.size();
  std::vector<Index> in_stride(r, 1);
  for (size_t i = r; i-- > 1;) in_stride[i - 1] = in_stride[i] * in[i];
  out.assign(r, 0);
  for (size_t i = 0; i < r; ++i) out[i] = in[perm[i]];
  const Index n = shape_size(in);
  std::vector<Index> src(n);
  std::vector<Index> counter(r, 0);
  for (Index o = 0; o < n; ++o) {
    Index s = 0;
    for (size_t i = 0; i < r; ++i) s += counter[i] * in_stride[perm[i]];
    src[o] = s;
    for (size_t i = r; i-- > 0;) {
      if (++counter[i] < out[i]) break;
      counter[i] = 0;
    }
  }
  return src;
}

}  // namespace

template <typename S>
Tensor<S> permute(const Tensor<S>& a, const std::vector<int>& perm) {
  const int r = a.rank();
  std::vector<int> check(perm);
  std::sort(check.begin(), check.end());
  bool valid = static_cast<int>(perm.size()) == r;
  for (int i = 0; valid && i < r; ++i) valid = check[i] == i;
  if (!valid) throw std::invalid_argument("permute: invalid permutation for shape " + shape_string(a.shape()));
  Shape out_shape;
  auto src = permutation_index(a.shape(), perm, out_shape);
  Vec<S> out(a.size());
  for (Index o = 0; o < out.size(); ++o) out[o] = a.values()[src[o]];
  return record<S>("permute", std::move(out_shape), std::move(out), {a},
                   [a, src = std::move(src)](const Vec<S>& g, const Vec<S>&) mutable {
                     auto& ga = a.grad();
                     for (Index o = 0; o < g.size(); ++o) ga[src[o]] += g[o];
                   });
}

template <typename S>
Tensor<S> stack(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw std::invalid_argument("stack: no inputs");
  const Shape& inner = parts.front().shape();
  const Index n = parts.front().size();
  for (const auto& p : parts) {
    if (p.shape() != inner) shape_error("stack", inner, p.shape());
  }
  Shape shape{static_cast<Index>(parts.size())};
  shape.insert(shape.end(), inner.begin(), inner.end());
  Vec<S> out(n * static_cast<Index>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) out.segment(static_cast<Index>(i) * n, n) = parts[i].values();
  return record<S>("stack", std::move(shape), std::move(out), parts,
                   [parts, n](const Vec<S>& g, const Vec<S>&) mutable {
                     for (size_t i = 0; i < parts.size(); ++i) {
                       if (parts[i].requires_grad()) parts[i].grad() += g.segment(static_cast<Index>(i) * n, n);
                     }
                   });
}

template <typename S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Shape& first = parts.front().shape();
  const int r = static_cast<int>(first.size());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw std::invalid_argument("concat: axis out of range for " + shape_string(first));
  Index outer = 1;
  for (int i = 0; i < axis; ++i) outer *= first[i];
  Index trailing = 1;
  for (int i = axis + 1; i < r; ++i) trailing *= first[i];
  Shape shape = first;
  shape[axis] = 0;
  std::vector<Index> chunk(parts.size());
  for (size_t k = 0; k < parts.size(); ++k) {
    const Shape& s = parts[k].shape();
    bool ok = static_cast<int>(s.size()) == r;
    for (int i = 0; ok && i < r; ++i) ok = i == axis || s[i] == first[i];
    if (!ok) shape_error("concat", first, s);
    shape[axis] += s[axis];
    chunk[k] = s[axis] * trailing;
  }
  const Index row = shape[axis] * trailing;
  Vec<S> out(outer * row);
  for (Index o = 0; o < outer; ++o) {
    Index offset = o * row;
    for (size_t k = 0; k < parts.size(); ++k) {
      out.segment(offset, chunk[k]) = parts[k].values().segment(o * chunk[k], chunk[k]);
      offset += chunk[k];
    }
  }
  return record<S>("concat", std::move(shape), std::move(out), parts,
                   [parts, chunk, outer, row](const Vec<S>& g, const Vec<S>&) mutable {
                     for (Index o = 0; o < outer; ++o) {
                       Index offset = o * row;
                       for (size_t k = 0; k < parts.size(); ++k) {
                         if (parts[k].requires_grad()) {
                           parts[k].grad().segment(o * chunk[k], chunk[k]) += g.segment(offset, chunk[k]);
                         }
                         offset += chunk[k];
                       }
                     }
                   });
}

template <typename S>
Tensor<S> slice_rows(const Tensor<S>& a, Index begin, Index count) {
  if (a.rank() < 1 || begin < 0 || count < 1 || begin + count > a.dim(0)) {
    throw std::invalid_argument("slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                                ") outside " + shape_string(a.shape()));
  }
  const Index inner = a.size() / a.dim(0);
  Shape shape = a.shape();
  shape[0] = count;
  Vec<S> out = a.values().segment(begin * inner, count * inner);
  return record<S>("slice_rows", std::move(shape), std::move(out), {a},
                   [a, begin, count, inner](const Vec<S>& g, const Vec<S>&) mutable {
                     a.grad().segment(begin * inner, count * inner) += g;
                   });
}

template <typename S>
Tensor<S> gather_rows(const Tensor<S>& a, const std::vector<Index>& rows) {
  if (a.rank() < 1 || rows.empty()) throw std::invalid_argument("gather_rows: empty selection or scalar input");
  const Index n = a.dim(0);
  const Index inner = a.size() / n;
  for (Index r : rows) {
    if (r < 0 || r >= n) {
      throw std::out_of_range("gather_rows: row " + std::to_string(r) + " outside " + shape_string(a.shape()));
    }
  }
  Shape shape = a.shape();
  shape[0] = static_cast<Index>(rows.size());
  Vec<S> out(shape_size(shape));
  for (size_t i = 0; i < rows.size(); ++i) {
    out.segment(static_cast<Index>(i) * inner, inner) = a.values().segment(rows[i] * inner, inner);
  }
  return record<S>("gather_rows", std::move(shape), std::move(out), {a},
                   [a, rows, inner](const Vec<S>& g, const Vec<S>&) mutable {
                     for (size_t i = 0; i < rows.size(); ++i) {
                       a.grad().segment(rows[i] * inner, inner) += g.segment(static_cast<Index>(i) * inner, inner);
                     }
                   });
}

namespace {

template <typename S>
Tensor<S> linear_impl(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>* b) {
  if (x.rank() < 1 || w.rank() != 2 || x.dim(-1) != w.dim(1)) shape_error("linear", x.shape(), w.shape());
  const Index out_dim = w.dim(0);
  const Index in_dim = w.dim(1);
  if (b && (b->rank() != 1 || b->dim(0) != out_dim)) shape_error("linear", w.shape(), b->shape());
  const Index rows = x.size() / in_dim;
  Shape shape = x.shape();
  shape.back() = out_dim;
  Vec<S> out(rows * out_dim);
  auto y = view<S>(out, rows, out_dim);
  y.noalias() = view<S>(x.values(), rows, in_dim) * view<S>(w.values(), out_dim, in_dim).transpose();
  std::vector<Tensor<S>> inputs{x, w};
  if (b) {
    y.rowwise() += b->values().transpose();
    inputs.push_back(*b);
  }
  return record<S>(
      "linear", std::move(shape), std::move(out), inputs,
      [x, w, bias = b ? *b : Tensor<S>(), rows, in_dim, out_dim](const Vec<S>& g, const Vec<S>&) mutable {
        auto dy = view<S>(g, rows, out_dim);
        if (x.requires_grad()) {
          view<S>(x.grad(), rows, in_dim).noalias() += dy * view<S>(w.values(), out_dim, in_dim);
        }
        if (w.requires_grad()) {
          view<S>(w.grad(), out_dim, in_dim).noalias() += dy.transpose() * view<S>(x.values(), rows, in_dim);
        }
        if (bias.defined() && bias.requires_grad()) bias.grad() += dy.colwise().sum().transpose();
      });
}

}  // namespace

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  return linear_impl(x, w, &b);
}

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w) {
  return linear_impl<S>(x, w, nullptr);
}

template <typename S>
Tensor<S> batchnorm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, BatchNormStats<S>& stats,
                    BnMode mode) {
  if (x.rank() < 2) throw std::invalid_argument("batchnorm: expected [batch, feat, ...], got " + shape_string(x.shape()));
  const Index batch = x.dim(0);
  const Index feat = x.dim(1);
  const Index inner = x.size() / (batch * feat);
  const Index count = batch * inner;
  if (gamma.size() != feat || beta.size() != feat || stats.running_mean.size() != feat) {
    shape_error("batchnorm", x.shape(), gamma.shape());
  }
  // Per-feature element (n, f, i) lives at (n * feat + f) * inner + i.
  auto for_feature = [&](auto&& fn) {
    for (Index n = 0; n < batch; ++n)
      for (Index f = 0; f < feat; ++f) fn(f, (n * feat + f) * inner);
  };

  const Vec<S>& xv = x.values();
  Vec<S> mu(feat);
  Vec<S> var(feat);
  if (mode == BnMode::kTrain) {
    if (count < 2) {
      throw std::invalid_argument("batchnorm: train mode needs at least 2 values per feature, got shape " +
                                  shape_string(x.shape()));
    }
    mu.setZero();
    for_feature([&](Index f, Index off) { mu[f] += xv.segment(off, inner).sum(); });
    mu /= static_cast<S>(count);
    var.setZero();
    for_feature([&](Index f, Index off) { var[f] += (xv.segment(off, inner).array() - mu[f]).square().sum(); });
    var /= static_cast<S>(count);
    stats.running_mean.values() = stats.momentum * stats.running_mean.values() + (S(1) - stats.momentum) * mu;
    stats.running_var.values() = stats.momentum * stats.running_var.values() + (S(1) - stats.momentum) * var;
  } else {
    mu = stats.running_mean.values();
    var = stats.running_var.values();
  }
  Vec<S> inv_std = (var.array() + stats.eps).rsqrt().matrix();
  Vec<S> xhat(x.size());
  Vec<S> out(x.size());
  for_feature([&](Index f, Index off) {
    xhat.segment(off, inner) = ((xv.segment(off, inner).array() - mu[f]) * inv_std[f]).matrix();
    out.segment(off, inner) = (xhat.segment(off, inner).array() * gamma.values()[f] + beta.values()[f]).matrix();
  });
  const bool train = mode == BnMode::kTrain;
  return record<S>(
      "batchnorm", x.shape(), std::move(out), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), inv_std, batch, feat, inner, count, train](const Vec<S>& g,
                                                                                          const Vec<S>&) mutable {
        Vec<S> dbeta = Vec<S>::Zero(feat);
        Vec<S> dgamma = Vec<S>::Zero(feat);
        for (Index n = 0; n < batch; ++n) {
          for (Index f = 0; f < feat; ++f) {
            const Index off = (n * feat + f) * inner;
            dbeta[f] += g.segment(off, inner).sum();
            dgamma[f] += g.segment(off, inner).dot(xhat.segment(off, inner));
          }
        }
        if (gamma.requires_grad()) gamma.grad() += dgamma;
        if (beta.requires_grad()) beta.grad() += dbeta;
        if (!x.requires_grad()) return;
        auto& gx = x.grad();
        for (Index n = 0; n < batch; ++n) {
          for (Index f = 0; f < feat; ++f) {
            const Index off = (n * feat + f) * inner;
            const S k = gamma.values()[f] * inv_std[f];
            if (train) {
              const S mean_dy = dbeta[f] / static_cast<S>(count);
              const S mean_dy_xhat = dgamma[f] / static_cast<S>(count);
              gx.segment(off, inner).array() +=
                  k * (g.segment(off, inner).array() - mean_dy - xhat.segment(off, inner).array() * mean_dy_xhat);
            } else {
              gx.segment(off, inner) += k * g.segment(off, inner);
            }
          }
        }
      });
}

namespace {

template <typename S>
void im2col(const S* x, Index channels, Index height, Index width, Index kh, Index kw, Index stride, Index pad,
            Index out_h, Index out_w, S* cols) {
  const Index plane = out_h * out_w;
  for (Index c = 0; c < channels; ++c) {
    for (Index ki = 0; ki < kh; ++ki) {
      for (Index kj = 0; kj < kw; ++kj) {
        S* dst = cols + ((c * kh + ki) * kw + kj) * plane;
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * stride - pad + ki;
          S* row = dst + oy * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(row, row + out_w, S(0));
            continue;
          }
          const S* src = x + (c * height + iy) * width;
          for (Index ox = 0; ox < out_w; ++ox) {
            const Index ix = ox * stride - pad + kj;
            row[ox] = (ix >= 0 && ix < width) ? src[ix] : S(0);
          }
        }
      }
    }
  }
}

template <typename S>
void col2im(const S* cols, Index channels, Index height, Index width, Index kh, Index kw, Index stride, Index pad,
            Index out_h, Index out_w, S* x) {
  const Index plane = out_h * out_w;
  for (Index c = 0; c < channels; ++c) {
    for (Index ki = 0; ki < kh; ++ki) {
      for (Index kj = 0; kj < kw; ++kj) {
        const S* src = cols + ((c * kh + ki) * kw + kj) * plane;
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= height) continue;
          S* dst = x + (c * height + iy) * width;
          const S* row = src + oy * out_w;
          for (Index ox = 0; ox < out_w; ++ox) {
            const Index ix = ox * stride - pad + kj;
            if (ix >= 0 && ix < width) dst[ix] += row[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& kernel, Index stride, Index padding) {
  require_rank("conv2d", x.shape(), 4);
  require_rank("conv2d", kernel.shape(), 4);
  const Index batch = x.dim(0), channels = x.dim(1), height = x.dim(2), width = x.dim(3);
  const Index out_c = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
  if (kernel.dim(1) != channels) shape_error("conv2d", x.shape(), kernel.shape());
  if (kh % 2 == 0 || kw % 2 == 0) throw std::invalid_argument("conv2d: kernel extents must be odd, got " + shape_string(kernel.shape()));
  if (stride < 1 || padding < 0) throw std::invalid_argument("conv2d: stride must be >= 1 and padding >= 0");
  const Index out_h = (height + 2 * padding - kh) / stride + 1;
  const Index out_w = (width + 2 * padding - kw) / stride + 1;
  if (height + 2 * padding < kh || width + 2 * padding < kw || out_h < 1 || out_w < 1) {
    throw std::invalid_argument("conv2d: empty output for input " + shape_string(x.shape()) + " and kernel " +
                                shape_string(kernel.shape()));
  }
  const Index patch = channels * kh * kw;
  const Index plane = out_h * out_w;
  const bool pointwise = kh == 1 && kw == 1 && stride == 1 && padding == 0;
  Vec<S> out(batch * out_c * plane);
  Mat<S> cols(pointwise ? 0 : patch, pointwise ? 0 : plane);
  auto k = view<S>(kernel.values(), out_c, patch);
  for (Index n = 0; n < batch; ++n) {
    const S* xn = x.values().data() + n * channels * height * width;
    MatMap<S> yn(out.data() + n * out_c * plane, out_c, plane);
    if (pointwise) {
      yn.noalias() = k * CMatMap<S>(xn, channels, plane);
    } else {
      im2col(xn, channels, height, width, kh, kw, stride, padding, out_h, out_w, cols.data());
      yn.noalias() = k * cols;
    }
  }
  return record<S>(
      "conv2d", {batch, out_c, out_h, out_w}, std::move(out), {x, kernel},
      [x, kernel, batch, channels, height, width, out_c, kh, kw, stride, padding, out_h, out_w, patch, plane,
       pointwise](const Vec<S>& g, const Vec<S>&) mutable {
        auto k = view<S>(kernel.values(), out_c, patch);
        Mat<S> cols(patch, plane);
        for (Index n = 0; n < batch; ++n) {
          const S* xn = x.values().data() + n * channels * height * width;
          CMatMap<S> dyn(g.data() + n * out_c * plane, out_c, plane);
          if (kernel.requires_grad()) {
            auto dk = view<S>(kernel.grad(), out_c, patch);
            if (pointwise) {
              dk.noalias() += dyn * CMatMap<S>(xn, channels, plane).transpose();
            } else {
              im2col(xn, channels, height, width, kh, kw, stride, padding, out_h, out_w, cols.data());
              dk.noalias() += dyn * cols.transpose();
            }
          }
          if (x.requires_grad()) {
            S* dxn = x.grad().data() + n * channels * height * width;
            if (pointwise) {
              MatMap<S>(dxn, channels, plane).noalias() += k.transpose() * dyn;
            } else {
              cols.noalias() = k.transpose() * dyn;
              col2im(cols.data(), channels, height, width, kh, kw, stride, padding, out_h, out_w, dxn);
            }
          }
        }
      });
}

template <typename S>
Tensor<S> avg_pool2d(const Tensor<S>& x, Index window) {
  require_rank("avg_pool2d", x.shape(), 4);
  const Index planes = x.dim(0) * x.dim(1), height = x.dim(2), width = x.dim(3);
  if (window < 1 || height % window != 0 || width % window != 0) {
    throw std::invalid_argument("avg_pool2d: window " + std::to_string(window) + " does not tile " +
                                shape_string(x.shape()));
  }
  const Index out_h = height / window, out_w = width / window;
  const S inv = S(1) / static_cast<S>(window * window);
  Vec<S> out = Vec<S>::Zero(planes * out_h * out_w);
  const Vec<S>& xv = x.values();
  for (Index p = 0; p < planes; ++p) {
    for (Index y = 0; y < height; ++y) {
      for (Index xx = 0; xx < width; ++xx) {
        out[(p * out_h + y / window) * out_w + xx / window] += xv[(p * height + y) * width + xx] * inv;
      }
    }
  }
  return record<S>("avg_pool2d", {x.dim(0), x.dim(1), out_h, out_w}, std::move(out), {x},
                   [x, planes, height, width, window, out_h, out_w, inv](const Vec<S>& g, const Vec<S>&) mutable {
                     auto& gx = x.grad();
                     for (Index p = 0; p < planes; ++p)
                       for (Index y = 0; y < height; ++y)
                         for (Index xx = 0; xx < width; ++xx)
                           gx[(p * height + y) * width + xx] += g[(p * out_h + y / window) * out_w + xx / window] * inv;
                   });
}

namespace {

template <typename S>
Tensor<S> softmax_impl(const char* op, const Tensor<S>& x, const Eigen::Array<S, Eigen::Dynamic, 1>* mask) {
  if (x.rank() < 1) throw std::invalid_argument(std::string(op) + ": needs at least one axis");
  if (!x.values().allFinite()) throw std::invalid_argument(std::string(op) + ": non-finite input");
  if (mask && mask->size() != x.size()) {
    throw std::invalid_argument(std::string(op) + ": mask has " + std::to_string(mask->size()) +
                                " entries for shape " + shape_string(x.shape()));
  }
  const Index cols = x.dim(-1);
  const Index rows = x.size() / cols;
  Vec<S> out = Vec<S>::Zero(x.size());
  auto xin = view<S>(x.values(), rows, cols);
  auto y = view<S>(out, rows, cols);
  for (Index r = 0; r < rows; ++r) {
    S peak = -std::numeric_limits<S>::infinity();
    for (Index c = 0; c < cols; ++c) {
      if (!mask || (*mask)[r * cols + c] != S(0)) peak = std::max(peak, xin(r, c));
    }
    if (!std::isfinite(peak)) {
      throw std::invalid_argument(std::string(op) + ": row " + std::to_string(r) + " has no valid position");
    }
    S total = 0;
    for (Index c = 0; c < cols; ++c) {
      if (!mask || (*mask)[r * cols + c] != S(0)) {
        y(r, c) = std::exp(xin(r, c) - peak);
        total += y(r, c);
      }
    }
    y.row(r) /= total;
  }
  return record<S>(op, x.shape(), std::move(out), {x}, [x, rows, cols](const Vec<S>& g, const Vec<S>& y) mutable {
    auto dy = view<S>(g, rows, cols);
    auto yv = view<S>(y, rows, cols);
    auto dx = view<S>(x.grad(), rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const S dot = dy.row(r).dot(yv.row(r));
      dx.row(r).array() += yv.row(r).array() * (dy.row(r).array() - dot);
    }
  });
}

}  // namespace

template <typename S>
Tensor<S> softmax(const Tensor<S>& x) {
  return softmax_impl<S>("softmax", x, nullptr);
}

template <typename S>
Tensor<S> masked_softmax(const Tensor<S>& x, const Eigen::Array<S, Eigen::Dynamic, 1>& mask) {
  return softmax_impl<S>("masked_softmax", x, &mask);
}

template <typename S>
Tensor<S> cross_entropy(const Tensor<S>& logits, const std::vector<int>& targets, const std::vector<S>& weights) {
  require_rank("cross_entropy", logits.shape(), 2);
  const Index rows = logits.dim(0), classes = logits.dim(1);
  if (static_cast<Index>(targets.size()) != rows || static_cast<Index>(weights.size()) != rows) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(targets.size()) + " targets and " +
                                std::to_string(weights.size()) + " weights for logits " +
                                shape_string(logits.shape()));
  }
  if (!logits.values().allFinite()) throw std::invalid_argument("cross_entropy: non-finite logits");
  auto z = view<S>(logits.values(), rows, classes);
  Mat<S> prob(rows, classes);
  S total_weight = 0;
  S loss = 0;
  for (Index r = 0; r < rows; ++r) {
    const S peak = z.row(r).maxCoeff();
    prob.row(r) = (z.row(r).array() - peak).exp().matrix();
    const S norm = prob.row(r).sum();
    prob.row(r) /= norm;
    if (weights[r] == S(0)) continue;
    const int t = targets[r];
    if (t < 0 || t >= classes) {
      throw std::out_of_range("cross_entropy: target " + std::to_string(t) + " outside " + std::to_string(classes) +
                              " classes");
    }
    loss += weights[r] * (std::log(norm) + peak - z(r, t));
    total_weight += weights[r];
  }
  Vec<S> out(1);
  out[0] = total_weight > S(0) ? loss / total_weight : S(0);
  return record<S>("cross_entropy", {}, std::move(out), {logits},
                   [logits, targets, weights, prob = std::move(prob), total_weight](const Vec<S>& g,
                                                                                    const Vec<S>&) mutable {
                     if (total_weight <= S(0)) return;
                     auto dz = view<S>(logits.grad(), prob.rows(), prob.cols());
                     for (Index r = 0; r < prob.rows(); ++r) {
                       if (weights[r] == S(0)) continue;
                       const S k = g[0] * weights[r] / total_weight;
                       dz.row(r) += k * prob.row(r);
                       dz(r, targets[r]) -= k;
                     }
                   });
}

template <typename S>
Tensor<S> embedding(const Tensor<S>& table, const std::vector<int>& ids) {
  require_rank("embedding", table.shape(), 2);
  const Index n = table.dim(0), d = table.dim(1);
  if (ids.empty()) throw std::invalid_argument("embedding: no ids");
  Vec<S> out(static_cast<Index>(ids.size()) * d);
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= n) {
      throw std::out_of_range("embedding: id " + std::to_string(ids[i]) + " outside table of " + std::to_string(n));
    }
    out.segment(static_cast<Index>(i) * d, d) = table.values().segment(ids[i] * d, d);
  }
  return record<S>("embedding", {static_cast<Index>(ids.size()), d}, std::move(out), {table},
                   [table, ids, d](const Vec<S>& g, const Vec<S>&) mutable {
                     for (size_t i = 0; i < ids.size(); ++i) {
                       table.grad().segment(ids[i] * d, d) += g.segment(static_cast<Index>(i) * d, d);
                     }
                   });
}

template <typename S>
Tensor<S> gru_cell(const Tensor<S>& x, const Tensor<S>& h, const Tensor<S>& w, const Tensor<S>& u,
                   const Tensor<S>& b) {
  require_rank("gru_cell", w.shape(), 2);
  require_rank("gru_cell", u.shape(), 2);
  const Index hid = u.dim(1);
  const Index in = w.dim(1);
  if (u.dim(0) != 3 * hid || w.dim(0) != 3 * hid || b.size() != 3 * hid) shape_error("gru_cell", w.shape(), u.shape());
  if (x.rank() < 1 || x.dim(-1) != in) shape_error("gru_cell", x.shape(), w.shape());
  if (h.rank() < 1 || h.dim(-1) != hid) shape_error("gru_cell", h.shape(), u.shape());
  const Index batch = x.size() / in;
  if (h.size() / hid != batch) shape_error("gru_cell", x.shape(), h.shape());

  auto xm = view<S>(x.values(), batch, in);
  auto hm = view<S>(h.values(), batch, hid);
  auto wm = view<S>(w.values(), 3 * hid, in);
  auto um = view<S>(u.values(), 3 * hid, hid);
  Mat<S> pre(batch, 3 * hid);
  pre.noalias() = xm * wm.transpose();
  pre.rowwise() += b.values().transpose();
  pre.leftCols(2 * hid).noalias() += hm * um.topRows(2 * hid).transpose();
  Mat<S> gates = (S(1) + (-pre.leftCols(2 * hid).array()).exp()).inverse().matrix();  // [z r]
  Mat<S> rh = gates.rightCols(hid).cwiseProduct(hm);
  Mat<S> cand = pre.rightCols(hid);
  cand.noalias() += rh * um.bottomRows(hid).transpose();
  cand = cand.array().tanh().matrix();
  Vec<S> out(batch * hid);
  auto hn = view<S>(out, batch, hid);
  hn = hm + gates.leftCols(hid).cwiseProduct(cand - hm);

  return record<S>(
      "gru_cell", h.shape(), std::move(out), {x, h, w, u, b},
      [x, h, w, u, b, gates = std::move(gates), rh = std::move(rh), cand = std::move(cand), batch, in, hid](
          const Vec<S>& g, const Vec<S>&) mutable {
        auto dh_out = view<S>(g, batch, hid);
        auto hm = view<S>(h.values(), batch, hid);
        auto um = view<S>(u.values(), 3 * hid, hid);
        const auto z = gates.leftCols(hid).array();
        const auto r = gates.rightCols(hid).array();
        Mat<S> dpre(batch, 3 * hid);
        // candidate pre-activation
        dpre.rightCols(hid) = (dh_out.array() * z * (S(1) - cand.array().square())).matrix();
        Mat<S> drh = dpre.rightCols(hid) * um.bottomRows(hid);
        dpre.leftCols(hid) = (dh_out.array() * (cand - hm).array() * z * (S(1) - z)).matrix();
        dpre.middleCols(hid, hid) = (drh.array() * hm.array() * r * (S(1) - r)).matrix();
        if (h.requires_grad()) {
          auto dh = view<S>(h.grad(), batch, hid);
          dh.array() += dh_out.array() * (S(1) - z) + drh.array() * r;
          dh.noalias() += dpre.leftCols(2 * hid) * um.topRows(2 * hid);
        }
        if (u.requires_grad()) {
          auto du = view<S>(u.grad(), 3 * hid, hid);
          du.topRows(2 * hid).noalias() += dpre.leftCols(2 * hid).transpose() * hm;
          du.bottomRows(hid).noalias() += dpre.rightCols(hid).transpose() * rh;
        }
        if (w.requires_grad()) {
          view<S>(w.grad(), 3 * hid, in).noalias() += dpre.transpose() * view<S>(x.values(), batch, in);
        }
        if (b.requires_grad()) b.grad() += dpre.colwise().sum().transpose();
        if (x.requires_grad()) {
          view<S>(x.grad(), batch, in).noalias() += dpre * view<S>(w.values(), 3 * hid, in);
        }
      });
}

template <typename S>
Tensor<S> attention_energy(const Tensor<S>& keys, const Tensor<S>& query, const Tensor<S>& coverage,
                           const Tensor<S>& w) {
  require_rank("attention_energy", keys.shape(), 3);
  const Index batch = keys.dim(0), positions = keys.dim(1), hidden = keys.dim(2);
  if (coverage.shape() != keys.shape()) shape_error("attention_energy", keys.shape(), coverage.shape());
  if (query.rank() != 2 || query.dim(0) != batch || query.dim(1) != hidden) {
    shape_error("attention_energy", keys.shape(), query.shape());
  }
  if (w.size() != hidden) shape_error("attention_energy", keys.shape(), w.shape());
  Mat<S> t(batch * positions, hidden);
  for (Index n = 0; n < batch; ++n) {
    t.middleRows(n * positions, positions) =
        view<S>(keys.values(), batch * positions, hidden).middleRows(n * positions, positions) +
        view<S>(coverage.values(), batch * positions, hidden).middleRows(n * positions, positions);
    t.middleRows(n * positions, positions).rowwise() += view<S>(query.values(), batch, hidden).row(n);
  }
  t = t.array().tanh().matrix();
  Vec<S> out = t * w.values();
  return record<S>("attention_energy", {batch, positions}, std::move(out), {keys, query, coverage, w},
                   [keys, query, coverage, w, t = std::move(t), batch, positions, hidden](const Vec<S>& g,
                                                                                          const Vec<S>&) mutable {
                     if (w.requires_grad()) w.grad().noalias() += t.transpose() * g;
                     Mat<S> dt = (S(1) - t.array().square()).matrix();
                     dt.array().colwise() *= g.array();
                     dt.array().rowwise() *= w.values().transpose().array();
                     if (keys.requires_grad()) view<S>(keys.grad(), batch * positions, hidden) += dt;
                     if (coverage.requires_grad()) view<S>(coverage.grad(), batch * positions, hidden) += dt;
                     if (query.requires_grad()) {
                       auto dq = view<S>(query.grad(), batch, hidden);
                       for (Index n = 0; n < batch; ++n) {
                         dq.row(n) += dt.middleRows(n * positions, positions).colwise().sum();
                       }
                     }
                   });
}

template <typename S>
Tensor<S> attend(const Tensor<S>& alpha, const Tensor<S>& features) {
  require_rank("attend", features.shape(), 3);
  const Index batch = features.dim(0), positions = features.dim(1), channels = features.dim(2);
  if (alpha.rank() != 2 || alpha.dim(0) != batch || alpha.dim(1) != positions) {
    shape_error("attend", alpha.shape(), features.shape());
  }
  Vec<S> out(batch * channels);
  auto a = view<S>(alpha.values(), batch, positions);
  for (Index n = 0; n < batch; ++n) {
    out.segment(n * channels, channels).noalias() =
        CMatMap<S>(features.values().data() + n * positions * channels, positions, channels).transpose() *
        a.row(n).transpose();
  }
  return record<S>("attend", {batch, channels}, std::move(out), {alpha, features},
                   [alpha, features, batch, positions, channels](const Vec<S>& g, const Vec<S>&) mutable {
                     auto dv = view<S>(g, batch, channels);
                     for (Index n = 0; n < batch; ++n) {
                       CMatMap<S> f(features.values().data() + n * positions * channels, positions, channels);
                       if (alpha.requires_grad()) {
                         view<S>(alpha.grad(), batch, positions).row(n).noalias() += (f * dv.row(n).transpose()).transpose();
                       }
                       if (features.requires_grad()) {
                         MatMap<S>(features.grad().data() + n * positions * channels, positions, channels).noalias() +=
                             view<S>(alpha.values(), batch, positions).row(n).transpose() * dv.row(n);
                       }
                     }
                   });
}

template <typename S>
Tensor<S> pairwise_cosine(const Tensor<S>& v, S eps) {
  require_rank("pairwise_cosine", v.shape(), 2);
  const Index t = v.dim(0), d = v.dim(1);
  auto vm = view<S>(v.values(), t, d);
  Vec<S> norms = vm.rowwise().norm();
  Vec<S> denom = norms.cwiseMax(eps);
  Mat<S> unit = vm;
  unit.array().colwise() /= denom.array();
  Vec<S> out(t * t);
  view<S>(out, t, t).noalias() = unit * unit.transpose();
  return record<S>("pairwise_cosine", {t, t}, std::move(out), {v},
                   [v, unit = std::move(unit), norms, denom, t, eps](const Vec<S>& g, const Vec<S>&) mutable {
                     auto dc = view<S>(g, t, t);
                     Mat<S> du = (dc + dc.transpose()) * unit;
                     auto dv = view<S>(v.grad(), t, unit.cols());
                     for (Index i = 0; i < t; ++i) {
                       if (norms[i] > eps) {
                         dv.row(i) += (du.row(i) - du.row(i).dot(unit.row(i)) * unit.row(i)) / denom[i];
                       } else {
                         dv.row(i) += du.row(i) / denom[i];
                       }
                     }
                   });
}

#define SGHMER_INSTANTIATE_OPS(S)                                                                              \
  template Tensor<S> add(const Tensor<S>&, const Tensor<S>&);                                                  \
  template Tensor<S> sub(const Tensor<S>&, const Tensor<S>&);                                                  \
  template Tensor<S> mul(const Tensor<S>&, const Tensor<S>&);                                                  \
  template Tensor<S> scale(const Tensor<S>&, S);                                                               \
  template Tensor<S> sum(const Tensor<S>&);                                                                    \
  template Tensor<S> mean(const Tensor<S>&);                                                                   \
  template Tensor<S> relu(const Tensor<S>&);                                                                   \
  template Tensor<S> sigmoid(const Tensor<S>&);                                                                \
  template Tensor<S> tanh(const Tensor<S>&);                                                                   \
  template Tensor<S> reshape(const Tensor<S>&, Shape);                                                         \
  template Tensor<S> permute(const Tensor<S>&, const std::vector<int>&);                                       \
  template Tensor<S> stack(const std::vector<Tensor<S>>&);                                                     \
  template Tensor<S> concat(const std::vector<Tensor<S>>&, int);                                               \
  template Tensor<S> slice_rows(const Tensor<S>&, Index, Index);                                               \
  template Tensor<S> gather_rows(const Tensor<S>&, const std::vector<Index>&);                                 \
  template Tensor<S> linear(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);                             \
  template Tensor<S> linear(const Tensor<S>&, const Tensor<S>&);                                               \
  template Tensor<S> batchnorm(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, BatchNormStats<S>&,       \
                               BnMode);                                                                        \
  template Tensor<S> conv2d(const Tensor<S>&, const Tensor<S>&, Index, Index);                                 \
  template Tensor<S> avg_pool2d(const Tensor<S>&, Index);                                                      \
  template Tensor<S> softmax(const Tensor<S>&);                                                                \
  template Tensor<S> masked_softmax(const Tensor<S>&, const Eigen::Array<S, Eigen::Dynamic, 1>&);              \
  template Tensor<S> cross_entropy(const Tensor<S>&, const std::vector<int>&, const std::vector<S>&);          \
  template Tensor<S> embedding(const Tensor<S>&, const std::vector<int>&);                                     \
  template Tensor<S> gru_cell(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, const Tensor<S>&,          \
                              const Tensor<S>&);                                                               \
  template Tensor<S> attention_energy(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, const Tensor<S>&); \
  template Tensor<S> attend(const Tensor<S>&, const Tensor<S>&);                                               \
  template Tensor<S> pairwise_cosine(const Tensor<S>&, S);

SGHMER_INSTANTIATE_OPS(float)
SGHMER_INSTANTIATE_OPS(double)

}  // namespace sghmer
