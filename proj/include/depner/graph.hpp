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

// Dependency graphs and directed graph convolution.
//
// Dependency arcs point from head to dependent. For every token v
//   incoming(v) = {head(v), v}     (just {v} for the root)
//   outgoing(v) = {u : head(u) = v} plus v itself
// A directed layer computes, for every node v,
//   out[v] = ReLU( sum_{u in N(v)} (H[u] W + b) )
// with no degree normalisation. Weights act on row vectors: an m x m matrix
// W maps the row H[u] to H[u] W.

#ifndef DEPNER_GRAPH_HPP_
#define DEPNER_GRAPH_HPP_

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "depner/autodiff.hpp"
#include "depner/random.hpp"

namespace depner {

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class EdgeDirection { kIncoming, kOutgoing };

class DependencyGraph {
 public:
  // heads[v] is the index of v's head; the root is its own head.
  // Throws GraphError on an out-of-range head, zero or several roots, or a
  // cycle.
  static DependencyGraph build(const std::vector<std::size_t>& heads);

  std::size_t size() const { return incoming_.size(); }
  // Empty for a reversed graph.
  const std::vector<std::size_t>& heads() const { return heads_; }

  // Sorted neighbour lists, self-loop included.
  const std::vector<std::size_t>& incoming(std::size_t v) const {
    return incoming_.at(v);
  }
  const std::vector<std::size_t>& outgoing(std::size_t v) const {
    return outgoing_.at(v);
  }
  const std::vector<std::size_t>& neighbours(EdgeDirection dir,
                                             std::size_t v) const {
    return dir == EdgeDirection::kIncoming ? incoming(v) : outgoing(v);
  }

  // n x n 0/1 matrix with A[v][u] = 1 iff u is in N_dir(v).
  Tensor adjacency(EdgeDirection dir) const;

  // Every arc flipped: incoming and outgoing neighbourhoods trade places.
  // The result is no longer a tree, so heads() is empty.
  DependencyGraph reversed() const;

 private:
  DependencyGraph() = default;

  std::vector<std::size_t> heads_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
};

inline DependencyGraph build_graph(const std::vector<std::size_t>& heads) {
  return DependencyGraph::build(heads);
}

struct GcnLayer {
  Tensor weight;  // m x m
  Tensor bias;    // m
};

// Independent layer stacks for the two edge directions.
struct GcnParams {
  std::vector<GcnLayer> incoming;
  std::vector<GcnLayer> outgoing;

  std::size_t layers() const { return incoming.size(); }
  std::size_t width() const;

  // Glorot-uniform weights, zero biases.
  static GcnParams init(std::size_t width, std::size_t layers, Rng& rng);
  void validate() const;
};

Tensor gcn_layer_directed(ad::Tape& tape, const Tensor& h,
                          const DependencyGraph& graph, EdgeDirection dir,
                          const Tensor& weight, const Tensor& bias);

// Runs the incoming and outgoing stacks from the same input and returns each
// node's outgoing-stack output followed by its incoming-stack output, so the
// result has width 2m: columns [0, m) outgoing, [m, 2m) incoming.
Tensor bigcn_forward(ad::Tape& tape, const Tensor& h0,
                     const DependencyGraph& graph, const GcnParams& params);

// One direction's stack of K layers.
Tensor gcn_stack(ad::Tape& tape, const Tensor& h0,
                 const DependencyGraph& graph, EdgeDirection dir,
                 const std::vector<GcnLayer>& layers);

}  // namespace depner

#endif  // DEPNER_GRAPH_HPP_
