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

// Linear-chain CRF output layer with a constant transition matrix.
//
// A tag path p over a sentence of T tokens scores
//   S(p) = sum_t ( A[p_{t-1}][p_t] + f[t][p_t] ),   p_{-1} = START
// where f is the T x L matrix of network scores and A the (L+1) x L matrix of
// transition scores whose last row belongs to the virtual START tag. There
// is no STOP transition. Training minimises log Z - S(gold), with Z the sum
// of exp(S) over all L^T paths.

#ifndef DEPNER_CRF_HPP_
#define DEPNER_CRF_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depner/autodiff.hpp"

namespace depner {

using TagPath = std::vector<std::size_t>;

// Entity labels plus the NONE label, in a fixed order.
class TagSet {
 public:
  static constexpr std::string_view kNone = "O";

  // Keeps the given order. Requires NONE exactly once and no duplicates.
  explicit TagSet(std::vector<std::string> labels);

  // NONE first, then the entity types in lexicographic order.
  static TagSet from_entity_types(std::vector<std::string> types);
  // The 18 OntoNotes entity types plus NONE.
  static TagSet ontonotes();

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> find(std::string_view label) const;
  // Throws std::out_of_range for a label outside the set.
  std::size_t index(std::string_view label) const;
  std::size_t none_index() const { return none_; }

  bool operator==(const TagSet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::size_t none_ = 0;
};

// Constant transition scores: smoothed log-frequencies of tag bigrams.
class TransitionMatrix {
 public:
  // scores must be (L+1) x L with finite entries.
  explicit TransitionMatrix(Tensor scores);

  // Counts consecutive gold tag pairs (plus START -> first tag) and sets
  //   A[i][j] = ln( (count(i,j) + alpha) / (sum_k count(i,k) + alpha L) ).
  // Throws std::invalid_argument if there is no sentence to count.
  static TransitionMatrix estimate(std::span<const TagPath> corpus,
                                   std::size_t num_tags, double alpha = 1.0);

  std::size_t num_tags() const { return scores_.cols(); }
  std::size_t start_row() const { return num_tags(); }
  double operator()(std::size_t from, std::size_t to) const {
    return scores_.at(from, to);
  }
  const Tensor& scores() const { return scores_; }

 private:
  Tensor scores_;
};

// S(path) accumulated left to right as s += (A + f) per position.
// Throws std::out_of_range for tags >= L and DimensionError if the path
// length differs from the rows of f.
double path_score(const Tensor& scores, std::span<const std::size_t> path,
                  const TransitionMatrix& transitions);

// log Z by the forward algorithm in log space, O(T L^2).
double log_partition(const Tensor& scores, const TransitionMatrix& transitions);

// Negative log-likelihood of the gold path, log Z - S(gold), as a scalar on
// the tape. Its gradient with respect to f is the difference between the
// per-position tag marginals and the gold indicator.
Tensor crf_loss(ad::Tape& tape, const Tensor& scores,
                std::span<const std::size_t> gold,
                const TransitionMatrix& transitions);

// Highest-scoring path. Ties go to the lower tag index, both when choosing a
// predecessor and when choosing the final tag.
TagPath viterbi(const Tensor& scores, const TransitionMatrix& transitions);

namespace oracle {

// Exhaustive enumeration limit for the brute-force oracles.
inline constexpr double kMaxPaths = 1e6;

// Enumerates every path in lexicographic order and keeps the first maximum.
// Throws std::length_error when L^T exceeds kMaxPaths.
TagPath brute_force_best_path(const Tensor& scores,
                              const TransitionMatrix& transitions);
// log of the sum of exp(S) over every path; same size guard.
double brute_force_log_partition(const Tensor& scores,
                                 const TransitionMatrix& transitions);

}  // namespace oracle
}  // namespace depner

#endif  // DEPNER_CRF_HPP_
