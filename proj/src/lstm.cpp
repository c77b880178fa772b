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

#include "depner/lstm.hpp"

#include <string>

#include "depner/init.hpp"

namespace depner {
namespace {

// Applies the gate nonlinearities to the fused pre-activation row z.
LstmState gates_to_state(ad::Tape& tape, const Tensor& z,
                         const LstmState& state, std::size_t h) {
  Tensor sig = ad::sigmoid(tape, ad::slice_cols(tape, z, 0, 3 * h));
  Tensor input_gate = ad::slice_cols(tape, sig, 0, h);
  Tensor forget_gate = ad::slice_cols(tape, sig, h, 2 * h);
  Tensor output_gate = ad::slice_cols(tape, sig, 2 * h, 3 * h);
  Tensor candidate = ad::tanh(tape, ad::slice_cols(tape, z, 3 * h, 4 * h));
  Tensor cell = ad::add(tape, ad::mul(tape, forget_gate, state.cell),
                        ad::mul(tape, input_gate, candidate));
  Tensor hidden = ad::mul(tape, output_gate, ad::tanh(tape, cell));
  return {hidden, cell};
}

LstmState step_from_projection(ad::Tape& tape, const Tensor& projected,
                               const LstmState& state,
                               const LstmParams& params) {
  Tensor z = ad::add(tape, projected,
                     ad::matmul(tape, state.hidden, params.recurrent_weight));
  return gates_to_state(tape, z, state, params.hidden_dim());
}

}  // namespace

LstmParams LstmParams::init(std::size_t input_dim, std::size_t hidden_dim,
                            Rng& rng) {
  const std::size_t h = hidden_dim;
  LstmParams p = zeros(input_dim, hidden_dim);
  const double rx = glorot_bound(input_dim, h);
  const double rh = glorot_bound(h, h);
  for (double& v : p.input_weight.data()) v = rng.symmetric(rx);
  for (double& v : p.recurrent_weight.data()) v = rng.symmetric(rh);
  return p;
}

LstmParams LstmParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  const std::size_t h = hidden_dim;
  return {zero_parameter({input_dim, 4 * h}), zero_parameter({h, 4 * h}),
          zero_parameter({4 * h})};
}

void LstmParams::validate() const {
  const std::size_t h = hidden_dim();
  if (recurrent_weight.shape() != Shape{h, 4 * h} ||
      input_weight.rank() != 2 || input_weight.cols() != 4 * h ||
      bias.shape() != Shape{4 * h}) {
    throw DimensionError(
        "LSTM parameters disagree: input " +
        shape_to_string(input_weight.shape()) + ", recurrent " +
        shape_to_string(recurrent_weight.shape()) + ", bias " +
        shape_to_string(bias.shape()));
  }
}

LstmState LstmState::zeros(std::size_t hidden_dim) {
  return {Tensor::zeros({1, hidden_dim}), Tensor::zeros({1, hidden_dim})};
}

LstmState lstm_cell(ad::Tape& tape, const Tensor& x, const LstmState& state,
                    const LstmParams& params) {
  params.validate();
  if (x.rank() != 2 || x.rows() != 1 || x.cols() != params.input_dim()) {
    throw DimensionError("lstm_cell: input " + shape_to_string(x.shape()) +
                         " is not a 1 x " + std::to_string(params.input_dim()) +
                         " row");
  }
  const std::size_t h = params.hidden_dim();
  if (state.hidden.shape() != Shape{1, h} || state.cell.shape() != Shape{1, h}) {
    throw DimensionError("lstm_cell: state does not match hidden width " +
                         std::to_string(h));
  }
  Tensor projected = ad::add_bias(
      tape, ad::matmul(tape, x, params.input_weight), params.bias);
  return step_from_projection(tape, projected, state, params);
}

namespace {

// Runs the recurrence over precomputed input projections (T x 4h).
LstmRun run_projected(ad::Tape& tape, const Tensor& projected,
                      const LstmParams& params, bool reverse) {
  const std::size_t steps = projected.rows();
  LstmState state = LstmState::zeros(params.hidden_dim());
  std::vector<Tensor> outputs(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const std::size_t t = reverse ? steps - 1 - i : i;
    state = step_from_projection(tape, ad::row(tape, projected, t), state,
                                 params);
    outputs[t] = state.hidden;
  }
  return {ad::concat(tape, outputs, 0), state};
}

void check_sequence(const Tensor& xs, std::size_t width) {
  if (xs.rank() != 2 || xs.rows() == 0) {
    throw DimensionError("LSTM needs a non-empty T x d sequence, got " +
                         shape_to_string(xs.shape()));
  }
  if (xs.cols() != width) {
    throw DimensionError("LSTM input width " + std::to_string(xs.cols()) +
                         " does not match parameters expecting " +
                         std::to_string(width));
  }
}

// Projection of a layer input that arrives as separate forward and backward
// halves. Summing the two half-products keeps the result bitwise invariant
// when the halves and the matching weight row blocks trade places.
Tensor project_pair(ad::Tape& tape, const Tensor& fwd, const Tensor& bwd,
                    const LstmParams& params) {
  const std::size_t half = fwd.cols();
  Tensor top = ad::slice_rows(tape, params.input_weight, 0, half);
  Tensor bottom = ad::slice_rows(tape, params.input_weight, half, 2 * half);
  Tensor z = ad::add(tape, ad::matmul(tape, fwd, top),
                     ad::matmul(tape, bwd, bottom));
  return ad::add_bias(tape, z, params.bias);
}

}  // namespace

LstmRun lstm_sequence(ad::Tape& tape, const Tensor& xs,
                      const LstmParams& params, bool reverse) {
  params.validate();
  check_sequence(xs, params.input_dim());
  Tensor projected = ad::add_bias(
      tape, ad::matmul(tape, xs, params.input_weight), params.bias);
  return run_projected(tape, projected, params, reverse);
}

Tensor bilstm_forward(ad::Tape& tape, const Tensor& xs,
                      const std::vector<BiLstmLayer>& layers) {
  if (xs.rank() != 2 || xs.rows() == 0) {
    throw DimensionError("bilstm_forward: empty sequence " +
                         shape_to_string(xs.shape()));
  }
  if (layers.empty()) return xs;
  Tensor fwd = lstm_sequence(tape, xs, layers[0].forward, false).outputs;
  Tensor bwd = lstm_sequence(tape, xs, layers[0].backward, true).outputs;
  for (std::size_t k = 1; k < layers.size(); ++k) {
    const BiLstmLayer& layer = layers[k];
    for (const LstmParams* p : {&layer.forward, &layer.backward}) {
      p->validate();
      if (fwd.cols() != bwd.cols() || 2 * fwd.cols() != p->input_dim()) {
        throw DimensionError("LSTM layer " + std::to_string(k) +
                             " expects input width " +
                             std::to_string(p->input_dim()) + ", got " +
                             std::to_string(fwd.cols()) + " + " +
                             std::to_string(bwd.cols()));
      }
    }
    Tensor next_fwd =
        run_projected(tape, project_pair(tape, fwd, bwd, layer.forward),
                      layer.forward, false)
            .outputs;
    Tensor next_bwd =
        run_projected(tape, project_pair(tape, fwd, bwd, layer.backward),
                      layer.backward, true)
            .outputs;
    fwd = next_fwd;
    bwd = next_bwd;
  }
  return ad::concat(tape, {fwd, bwd}, 1);
}

}  // namespace depner
