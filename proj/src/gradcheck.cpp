// Copyright 2026 The depner Authors.
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

#include "depner/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace depner::ad {
namespace {

double evaluate(const ScalarFn& fn) {
  Tape tape;
  return fn(tape).item();
}

}  // namespace

double finite_diff_check(const ScalarFn& fn, Tensor x, double h) {
  Tensor xs[] = {x};
  return finite_diff_check(fn, xs, h);
}

double finite_diff_check(const ScalarFn& fn, std::span<Tensor> xs, double h) {
  for (Tensor& x : xs) x.clear_grad();
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor loss = fn(tape);
    tape.backward(loss);
    for (Tensor& x : xs) {
      auto g = std::as_const(x).grad();
      analytic.emplace_back(g.begin(), g.end());
    }
  }

  double worst = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    auto data = xs[t].data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double saved = data[i];
      data[i] = saved + h;
      const double up = evaluate(fn);
      data[i] = saved - h;
      const double down = evaluate(fn);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[t][i];
      const double err = std::abs(a - numeric) /
                         std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, err);
    }
    xs[t].clear_grad();
  }
  return worst;
}

}  // namespace depner::ad
