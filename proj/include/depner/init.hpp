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

#ifndef DEPNER_INIT_HPP_
#define DEPNER_INIT_HPP_

#include <cmath>
#include <cstddef>

#include "depner/random.hpp"
#include "depner/tensor.hpp"

namespace depner {

inline double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// Trainable tensor with entries uniform in (-bound, bound).
inline Tensor uniform_parameter(Shape shape, double bound, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  for (double& v : t.data()) v = rng.symmetric(bound);
  return t;
}

inline Tensor glorot_parameter(std::size_t rows, std::size_t cols, Rng& rng) {
  return uniform_parameter({rows, cols}, glorot_bound(rows, cols), rng);
}

inline Tensor zero_parameter(Shape shape) {
  return Tensor::zeros(std::move(shape), /*requires_grad=*/true);
}

}  // namespace depner

#endif  // DEPNER_INIT_HPP_
