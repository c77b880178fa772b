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

// Reverse-mode automatic differentiation over dense tensors.
//
// Every operation takes the Tape it records onto as its first argument. An
// operation is recorded only when at least one input requires a gradient;
// its output then requires a gradient as well. Tape::backward() replays the
// recorded backward rules in reverse order. Gradients of leaf tensors (those
// not produced by a record on the tape) accumulate across calls; gradients
// of intermediate tensors are reset at the start of every backward pass.
//
// Matrices are rank-2 row-major tensors; the network passes single vectors
// around as 1 x n rows. Elementwise operations require identical shapes. The
// only broadcast is add_bias(), which adds a vector to every row of a matrix.

#ifndef DEPNER_AUTODIFF_HPP_
#define DEPNER_AUTODIFF_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "depner/tensor.hpp"

namespace depner::ad {

class Tape {
 public:
  using BackwardRule = std::function<void()>;

  struct Record {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardRule backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Appends an operation. Callers must record in evaluation order so that
  // every input precedes the record that consumes it.
  void record(std::vector<Tensor> inputs, Tensor output, BackwardRule rule);

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable tensor that
  // requires a gradient. Throws DimensionError unless loss holds one value.
  void backward(Tensor loss);

  void clear() { records_.clear(); }
  std::size_t size() const { return records_.size(); }
  const std::vector<Record>& records() const { return records_; }

 private:
  std::vector<Record> records_;
};

// True when any of the given tensors requires a gradient.
bool any_requires_grad(std::span<const Tensor> inputs);

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& x, double factor);
// x[n x m] + bias[m] on every row.
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias);

Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);

// Joins parts of equal rank along `axis`: vectors end to end, matrices by
// stacking rows (axis 0) or widening rows (axis 1).
Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis);
Tensor concat(Tape& tape, std::initializer_list<Tensor> parts,
              std::size_t axis);

// Columns [begin, end) of a matrix.
Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin,
                  std::size_t end);
// Rows [begin, end) of a matrix.
Tensor slice_rows(Tape& tape, const Tensor& x, std::size_t begin,
                  std::size_t end);
// Rows of `table` selected by `indices`, in order; repeats are allowed and
// their gradients add up. This is the embedding lookup.
Tensor gather_rows(Tape& tape, const Tensor& table,
                   std::span<const std::size_t> indices);
Tensor row(Tape& tape, const Tensor& x, std::size_t index);

Tensor sum(Tape& tape, const Tensor& x);
// Overflow-safe log(sum(exp(x))) over every element.
Tensor logsumexp(Tape& tape, const Tensor& x);
// Elementwise x * mask. For inverted dropout the mask holds 0 or 1/keep.
Tensor apply_mask(Tape& tape, const Tensor& x, const Tensor& mask);

}  // namespace depner::ad

#endif  // DEPNER_AUTODIFF_HPP_
