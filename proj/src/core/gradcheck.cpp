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

#include "sghmer/gradcheck.hpp"

#include "sghmer/ops.hpp"
#include "sghmer/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sghmer {

template <typename S>
S grad_check(const std::function<Tensor<S>()>& f, std::vector<Tensor<S>> leaves, S eps) {
  for (auto& leaf : leaves) {
    leaf.set_requires_grad(true);
    leaf.zero_grad();
  }
  backward(f());
  S worst = 0;
  NoGradGuard no_grad;
  for (auto& leaf : leaves) {
    auto& v = leaf.values();
    for (Index i = 0; i < v.size(); ++i) {
      const S saved = v[i];
      v[i] = saved + eps;
      const S up = f().item();
      v[i] = saved - eps;
      const S down = f().item();
      v[i] = saved;
      const S numeric = (up - down) / (S(2) * eps);
      const S analytic = leaf.grad()[i];
      const S denom = std::max({std::abs(analytic), std::abs(numeric), S(1e-8)});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

template <typename S>
S grad_check(const std::function<Tensor<S>(const Tensor<S>&)>& f, Tensor<S> x, S eps) {
  return grad_check<S>([&] { return f(x); }, std::vector<Tensor<S>>{x}, eps);
}

template float grad_check<float>(const std::function<Tensor<float>()>&, std::vector<Tensor<float>>, float);
template double grad_check<double>(const std::function<Tensor<double>()>&, std::vector<Tensor<double>>, double);
template float grad_check<float>(const std::function<Tensor<float>(const Tensor<float>&)>&, Tensor<float>, float);
template double grad_check<double>(const std::function<Tensor<double>(const Tensor<double>&)>&, Tensor<double>,
                                   double);

namespace {

using T = Tensor<double>;

T random(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  T::Vector v(shape_size(shape));
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(lo, hi);
  return T(std::move(shape), std::move(v));
}

// Values bounded away from zero, for kinked functions.
T away_from_zero(Rng& rng, Shape shape) {
  T t = random(rng, std::move(shape), 0.1, 1.0);
  for (Index i = 0; i < t.size(); ++i) {
    if (rng.coin()) t.values()[i] = -t.values()[i];
  }
  return t;
}

}  // namespace

std::vector<GradCheckResult> check_all_primitives(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradCheckResult> out;
  auto run = [&](const std::string& name, std::function<T()> f, std::vector<T> leaves) {
    out.push_back({name, grad_check<double>(f, std::move(leaves))});
  };

  {
    T a = random(rng, {3, 4}), b = random(rng, {3, 4});
    T r = random(rng, {3, 4});
    run("add", [=] { return sum(mul(add(a, b), r)); }, {a, b});
    run("sub", [=] { return sum(mul(sub(a, b), r)); }, {a, b});
    run("mul", [=] { return sum(mul(mul(a, b), r)); }, {a, b});
    run("scale", [=] { return sum(mul(scale(a, 1.7), r)); }, {a});
    run("mean", [=] { return mean(mul(a, r)); }, {a});
  }
  {
    T x = away_from_zero(rng, {3, 5});
    T r = random(rng, {3, 5});
    run("relu", [=] { return sum(mul(relu(x), r)); }, {x});
    run("sigmoid", [=] { return sum(mul(sigmoid(x), r)); }, {x});
    run("tanh", [=] { return sum(mul(tanh(x), r)); }, {x});
  }
  {
    T x = random(rng, {2, 3, 4});
    T r = random(rng, {4, 2, 3});
    run("permute", [=] { return sum(mul(permute(x, {2, 0, 1}), r)); }, {x});
    T r2 = random(rng, {6, 4});
    run("reshape", [=] { return sum(mul(reshape(x, {6, 4}), r2)); }, {x});
  }
  {
    T a = random(rng, {2, 3}), b = random(rng, {2, 3}), c = random(rng, {2, 1, 2});
    T rs = random(rng, {2, 2, 3});
    run("stack", [=] { return sum(mul(stack<double>({a, b}), rs)); }, {a, b});
    T d = random(rng, {2, 2, 2});
    T rc = random(rng, {2, 3, 2});
    run("concat", [=] { return sum(mul(concat<double>({c, d}, 1), rc)); }, {c, d});
    T rows = random(rng, {5, 3});
    T rsl = random(rng, {2, 3});
    run("slice_rows", [=] { return sum(mul(slice_rows(rows, 1, 2), rsl)); }, {rows});
    T rg = random(rng, {4, 3});
    run("gather_rows", [=] { return sum(mul(gather_rows<double>(rows, {4, 0, 4, 2}), rg)); }, {rows});
  }
  {
    T x = random(rng, {3, 4}), w = random(rng, {2, 4}), b = random(rng, {2});
    T r = random(rng, {3, 2});
    run("linear", [=] { return sum(mul(linear(x, w, b), r)); }, {x, w, b});
  }
  {
    T x = random(rng, {4, 3}, -2.0, 2.0);
    T gamma = random(rng, {3}, 0.5, 1.5), beta = random(rng, {3});
    T r = random(rng, {4, 3});
    auto stats = std::make_shared<BatchNormStats<double>>(3);
    run("batchnorm", [=] { return sum(mul(batchnorm(x, gamma, beta, *stats, BnMode::kTrain), r)); },
        {x, gamma, beta});
    T x4 = random(rng, {2, 3, 2, 2}, -2.0, 2.0);
    T r4 = random(rng, {2, 3, 2, 2});
    run("batchnorm_spatial", [=] { return sum(mul(batchnorm(x4, gamma, beta, *stats, BnMode::kTrain), r4)); },
        {x4, gamma, beta});
    run("batchnorm_eval", [=] { return sum(mul(batchnorm(x, gamma, beta, *stats, BnMode::kEval), r)); },
        {x, gamma, beta});
  }
  {
    T x = random(rng, {1, 2, 5, 5}), k = random(rng, {3, 2, 3, 3});
    T r = random(rng, {1, 3, 5, 5});
    run("conv2d", [=] { return sum(mul(conv2d(x, k, 1, 1), r)); }, {x, k});
    T rs = random(rng, {1, 3, 3, 3});
    run("conv2d_stride2", [=] { return sum(mul(conv2d(x, k, 2, 1), rs)); }, {x, k});
    T k1 = random(rng, {3, 2, 1, 1});
    run("conv2d_pointwise", [=] { return sum(mul(conv2d(x, k1, 1, 0), r)); }, {x, k1});
    T p = random(rng, {1, 2, 4, 6});
    T rp = random(rng, {1, 2, 2, 3});
    run("avg_pool2d", [=] { return sum(mul(avg_pool2d(p, 2), rp)); }, {p});
  }
  {
    T x = random(rng, {2, 5}, -2.0, 2.0);
    T r = random(rng, {2, 5});
    run("softmax", [=] { return sum(mul(softmax(x), r)); }, {x});
    Eigen::ArrayXd mask(10);
    mask << 1, 0, 1, 1, 0, 0, 0, 1, 0, 0;
    run("masked_softmax", [=] { return sum(mul(masked_softmax(x, mask), r)); }, {x});
    run("cross_entropy", [=] { return cross_entropy<double>(x, {3, 1}, {1.0, 1.0}); }, {x});
  }
  {
    T table = random(rng, {5, 3});
    T r = random(rng, {4, 3});
    run("embedding", [=] { return sum(mul(embedding<double>(table, {1, 4, 1, 0}), r)); }, {table});
  }
  {
    const Index in = 3, hid = 4, batch = 2;
    T x = random(rng, {batch, in}), h = random(rng, {batch, hid});
    T w = random(rng, {3 * hid, in}), u = random(rng, {3 * hid, hid}), b = random(rng, {3 * hid});
    T r = random(rng, {batch, hid});
    run("gru_cell", [=] { return sum(mul(gru_cell(x, h, w, u, b), r)); }, {x, h, w, u, b});
  }
  {
    T keys = random(rng, {2, 3, 4}), query = random(rng, {2, 4}), cov = random(rng, {2, 3, 4});
    T w = random(rng, {4});
    T r = random(rng, {2, 3});
    run("attention_energy", [=] { return sum(mul(attention_energy(keys, query, cov, w), r)); },
        {keys, query, cov, w});
    T alpha = random(rng, {2, 3}), feats = random(rng, {2, 3, 5});
    T ra = random(rng, {2, 5});
    run("attend", [=] { return sum(mul(attend(alpha, feats), ra)); }, {alpha, feats});
  }
  {
    T v = random(rng, {4, 3});
    T r = random(rng, {4, 4});
    run("pairwise_cosine", [=] { return sum(mul(pairwise_cosine(v), r)); }, {v});
  }
  return out;
}

}  // namespace sghmer
