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

#ifndef DEPNER_LSTM_HPP_
#define DEPNER_LSTM_HPP_

#include <cstddef>
#include <vector>

#include "depner/autodiff.hpp"
#include "depner/random.hpp"

namespace depner {

// Gate order inside the fused matrices.
enum class LstmGate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

// Standard LSTM without peepholes. The four gates are stored fused, gate g
// owning columns [g*h, (g+1)*h):
//   input_weight      d x 4h
//   recurrent_weight  h x 4h
//   bias              4h
// so that z = x Wx + h Wh + b is one row holding every gate's pre-activation.
struct LstmParams {
  Tensor input_weight;
  Tensor recurrent_weight;
  Tensor bias;

  std::size_t input_dim() const { return input_weight.rows(); }
  std::size_t hidden_dim() const { return recurrent_weight.rows(); }

  // Each gate block drawn uniform(-r, r), r = sqrt(6 / (fan_in + h)) with
  // fan_in = d for the input block and h for the recurrent block.
  static LstmParams init(std::size_t input_dim, std::size_t hidden_dim,
                         Rng& rng);
  static LstmParams zeros(std::size_t input_dim, std::size_t hidden_dim);
  void validate() const;

  std::vector<Tensor> tensors() const {
    return {input_weight, recurrent_weight, bias};
  }
};

struct LstmState {
  Tensor hidden;  // 1 x h
  Tensor cell;    // 1 x h

  static LstmState zeros(std::size_t hidden_dim);
};

// One step: x is 1 x d.
LstmState lstm_cell(ad::Tape& tape, const Tensor& x, const LstmState& state,
                    const LstmParams& params);

struct LstmRun {
  Tensor outputs;  // T x h, row t is the hidden state after reading x_t
  LstmState last;  // state after the final step in reading order
};

// Runs one direction over the rows of xs from a zero state. With reverse set
// the rows are read T-1..0, but outputs stay indexed by input position.
LstmRun lstm_sequence(ad::Tape& tape, const Tensor& xs,
                      const LstmParams& params, bool reverse);

struct BiLstmLayer {
  LstmParams forward;
  LstmParams backward;
};

// Stacked bidirectional LSTM over xs (T x d). Each layer's output row t is
// forward_t followed by backward_t (width 2h) and feeds the next layer.
// Throws DimensionError on an empty sequence.
Tensor bilstm_forward(ad::Tape& tape, const Tensor& xs,
                      const std::vector<BiLstmLayer>& layers);

}  // namespace depner

#endif  // DEPNER_LSTM_HPP_
