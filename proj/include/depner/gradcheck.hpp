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

#ifndef DEPNER_GRADCHECK_HPP_
#define DEPNER_GRADCHECK_HPP_

#include <functional>
#include <span>

#include "depner/autodiff.hpp"

namespace depner::ad {

// Builds a scalar loss on the given tape. Must be deterministic and must read
// the checked tensors' current values every time it runs.
using ScalarFn = std::function<Tensor(Tape&)>;

// Compares the tape gradient of `fn` with respect to `x` against central
// differences (f(x + h e_i) - f(x - h e_i)) / 2h, coordinate by coordinate.
// Returns max_i |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
// `x` is restored to its original values and its gradient is cleared.
double finite_diff_check(const ScalarFn& fn, Tensor x, double h = 1e-5);

// Same check over several tensors; returns the worst coordinate overall.
double finite_diff_check(const ScalarFn& fn, std::span<Tensor> xs,
                         double h = 1e-5);

}  // namespace depner::ad

#endif  // DEPNER_GRADCHECK_HPP_
