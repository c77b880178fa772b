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

#include "depner/graph.hpp"

#include <algorithm>
#include <string>

#include "depner/init.hpp"

namespace depner {

DependencyGraph DependencyGraph::build(const std::vector<std::size_t>& heads) {
  const std::size_t n = heads.size();
  std::size_t roots = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (heads[v] >= n) {
      throw GraphError("token " + std::to_string(v) + " has head " +
                       std::to_string(heads[v]) + " outside a sentence of " +
                       std::to_string(n) + " tokens");
    }
    if (heads[v] == v) ++roots;
  }
  if (roots != 1) {
    throw GraphError("dependency tree needs exactly one root, found " +
                     std::to_string(roots));
  }

  // Every head chain must reach the root; 0 = unvisited, 1 = on the current
  // walk, 2 = known to reach the root.
  std::vector<char> state(n, 0);
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> walk;
    std::size_t v = start;
    while (state[v] == 0 && heads[v] != v) {
      state[v] = 1;
      walk.push_back(v);
      v = heads[v];
    }
    if (state[v] == 1) {
      throw GraphError("cycle through token " + std::to_string(v));
    }
    state[v] = 2;
    for (std::size_t w : walk) state[w] = 2;
  }

  DependencyGraph g;
  g.heads_ = heads;
  g.incoming_.resize(n);
  g.outgoing_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    g.incoming_[v].push_back(v);
    g.outgoing_[v].push_back(v);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (heads[v] == v) continue;
    g.incoming_[v].push_back(heads[v]);
    g.outgoing_[heads[v]].push_back(v);
  }
  for (auto& s : g.incoming_) std::sort(s.begin(), s.end());
  for (auto& s : g.outgoing_) std::sort(s.begin(), s.end());
  return g;
}

Tensor DependencyGraph::adjacency(EdgeDirection dir) const {
  const std::size_t n = size();
  Tensor a = Tensor::zeros({n, n});
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u : neighbours(dir, v)) a.at(v, u) = 1.0;
  }
  return a;
}

DependencyGraph DependencyGraph::reversed() const {
  DependencyGraph g;
  g.incoming_ = outgoing_;
  g.outgoing_ = incoming_;
  return g;
}

std::size_t GcnParams::width() const {
  return incoming.empty() ? 0 : incoming.front().weight.rows();
}

GcnParams GcnParams::init(std::size_t width, std::size_t layers, Rng& rng) {
  GcnParams p;
  for (auto* stack : {&p.incoming, &p.outgoing}) {
    for (std::size_t k = 0; k < layers; ++k) {
      stack->push_back(
          {glorot_parameter(width, width, rng), zero_parameter({width})});
    }
  }
  return p;
}

void GcnParams::validate() const {
  if (incoming.empty() || incoming.size() != outgoing.size()) {
    throw DimensionError("GCN needs the same positive layer count per direction");
  }
  const std::size_t m = width();
  for (const auto* stack : {&incoming, &outgoing}) {
    for (const GcnLayer& layer : *stack) {
      if (layer.weight.shape() != Shape{m, m} || layer.bias.shape() != Shape{m}) {
        throw DimensionError("GCN layer has weight " +
                             shape_to_string(layer.weight.shape()) +
                             " and bias " + shape_to_string(layer.bias.shape()) +
                             ", expected width " + std::to_string(m));
      }
    }
  }
}

Tensor gcn_layer_directed(ad::Tape& tape, const Tensor& h,
                          const DependencyGraph& graph, EdgeDirection dir,
                          const Tensor& weight, const Tensor& bias) {
  if (h.rank() != 2 || h.rows() != graph.size()) {
    throw DimensionError("gcn layer: input " + shape_to_string(h.shape()) +
                         " does not have one row per node of a " +
                         std::to_string(graph.size()) + "-node graph");
  }
  const std::size_t m = h.cols();
  if (weight.shape() != Shape{m, m}) {
    throw DimensionError("gcn layer: weight " +
                         shape_to_string(weight.shape()) +
                         " is not square of size " + std::to_string(m));
  }
  // Row v of A * (H W + b) sums the affine images of v's neighbours.
  Tensor messages = ad::add_bias(tape, ad::matmul(tape, h, weight), bias);
  Tensor summed = ad::matmul(tape, graph.adjacency(dir), messages);
  return ad::relu(tape, summed);
}

Tensor gcn_stack(ad::Tape& tape, const Tensor& h0,
                 const DependencyGraph& graph, EdgeDirection dir,
                 const std::vector<GcnLayer>& layers) {
  Tensor h = h0;
  for (const GcnLayer& layer : layers) {
    h = gcn_layer_directed(tape, h, graph, dir, layer.weight, layer.bias);
  }
  return h;
}

Tensor bigcn_forward(ad::Tape& tape, const Tensor& h0,
                     const DependencyGraph& graph, const GcnParams& params) {
  params.validate();
  Tensor in = gcn_stack(tape, h0, graph, EdgeDirection::kIncoming,
                        params.incoming);
  Tensor out = gcn_stack(tape, h0, graph, EdgeDirection::kOutgoing,
                         params.outgoing);
  return ad::concat(tape, {out, in}, 1);
}

}  // namespace depner
