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

#include "depner/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace depner {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> values) {
  double peak = kNegInf;
  for (double v : values) peak = std::max(peak, v);
  if (std::isinf(peak)) return peak;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

void check_scores(const Tensor& scores, const TransitionMatrix& transitions) {
  if (scores.rank() != 2 || scores.rows() == 0) {
    throw DimensionError("CRF scores must be a non-empty T x L matrix, got " +
                         shape_to_string(scores.shape()));
  }
  if (scores.cols() != transitions.num_tags()) {
    throw DimensionError("CRF scores have " + std::to_string(scores.cols()) +
                         " tags but the transition matrix has " +
                         std::to_string(transitions.num_tags()));
  }
}

void check_path(const Tensor& scores, std::span<const std::size_t> path) {
  if (path.size() != scores.rows()) {
    throw DimensionError("path of length " + std::to_string(path.size()) +
                         " for " + std::to_string(scores.rows()) + " tokens");
  }
  for (std::size_t tag : path) {
    if (tag >= scores.cols()) {
      throw std::out_of_range("tag index " + std::to_string(tag) +
                              " outside a set of " +
                              std::to_string(scores.cols()));
    }
  }
}

// alpha[t][j] = log sum over prefixes ending in j at t of exp(S(prefix)).
std::vector<double> forward_table(const Tensor& scores,
                                  const TransitionMatrix& a) {
  const std::size_t steps = scores.rows();
  const std::size_t tags = scores.cols();
  std::vector<double> alpha(steps * tags);
  for (std::size_t j = 0; j < tags; ++j) {
    alpha[j] = 0.0 + (a(a.start_row(), j) + scores.at(0, j));
  }
  std::vector<double> terms(tags);
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t j = 0; j < tags; ++j) {
      const double local_j = scores.at(t, j);
      for (std::size_t i = 0; i < tags; ++i) {
        terms[i] = alpha[(t - 1) * tags + i] + (a(i, j) + local_j);
      }
      alpha[t * tags + j] = log_sum_exp(terms);
    }
  }
  return alpha;
}

// beta[t][i] = log sum over suffixes after t given tag i at t.
std::vector<double> backward_table(const Tensor& scores,
                                   const TransitionMatrix& a) {
  const std::size_t steps = scores.rows();
  const std::size_t tags = scores.cols();
  std::vector<double> beta(steps * tags, 0.0);
  std::vector<double> terms(tags);
  for (std::size_t t = steps - 1; t-- > 0;) {
    for (std::size_t i = 0; i < tags; ++i) {
      for (std::size_t j = 0; j < tags; ++j) {
        terms[j] = a(i, j) + scores.at(t + 1, j) + beta[(t + 1) * tags + j];
      }
      beta[t * tags + i] = log_sum_exp(terms);
    }
  }
  return beta;
}

double final_log_sum(const std::vector<double>& alpha, std::size_t steps,
                     std::size_t tags) {
  return log_sum_exp(
      std::span<const double>(alpha).subspan((steps - 1) * tags, tags));
}

double count_paths(const Tensor& scores) {
  return std::pow(static_cast<double>(scores.cols()),
                  static_cast<double>(scores.rows()));
}

// Visits every path in lexicographic order.
template <typename Visit>
void enumerate_paths(std::size_t steps, std::size_t tags, Visit visit) {
  TagPath path(steps, 0);
  while (true) {
    visit(path);
    std::size_t t = steps;
    while (t > 0) {
      --t;
      if (++path[t] < tags) break;
      path[t] = 0;
      if (t == 0) return;
    }
    if (steps == 0) return;
  }
}

void guard_size(const Tensor& scores) {
  if (count_paths(scores) > oracle::kMaxPaths) {
    throw std::length_error("brute-force CRF oracle: " +
                            std::to_string(scores.cols()) + "^" +
                            std::to_string(scores.rows()) +
                            " paths exceed the enumeration limit");
  }
}

}  // namespace

TagSet::TagSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::set<std::string_view> seen;
  std::size_t nones = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!seen.insert(labels_[i]).second) {
      throw std::invalid_argument("duplicate tag label '" + labels_[i] + "'");
    }
    if (labels_[i] == kNone) {
      none_ = i;
      ++nones;
    }
  }
  if (nones != 1) {
    throw std::invalid_argument("tag set must contain the NONE label 'O'");
  }
}

TagSet TagSet::from_entity_types(std::vector<std::string> types) {
  std::erase(types, std::string(kNone));
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  types.insert(types.begin(), std::string(kNone));
  return TagSet(std::move(types));
}

TagSet TagSet::ontonotes() {
  return from_entity_types(
      {"PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT",
       "WORK_OF_ART", "LAW", "LANGUAGE", "DATE", "TIME", "PERCENT", "MONEY",
       "QUANTITY", "ORDINAL", "CARDINAL"});
}

std::optional<std::size_t> TagSet::find(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t TagSet::index(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw std::out_of_range("unknown tag label '" + std::string(label) + "'");
}

TransitionMatrix::TransitionMatrix(Tensor scores) : scores_(std::move(scores)) {
  if (scores_.rank() != 2 || scores_.cols() == 0 ||
      scores_.rows() != scores_.cols() + 1) {
    throw DimensionError("transition matrix must be (L+1) x L, got " +
                         shape_to_string(scores_.shape()));
  }
  for (double v : scores_.data()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("transition matrix has a non-finite entry");
    }
  }
  scores_.set_requires_grad(false);
}

TransitionMatrix TransitionMatrix::estimate(std::span<const TagPath> corpus,
                                            std::size_t num_tags,
                                            double alpha) {
  if (num_tags == 0) throw std::invalid_argument("empty tag set");
  const std::size_t start = num_tags;
  std::vector<double> counts((num_tags + 1) * num_tags, 0.0);
  std::size_t sentences = 0;
  for (const TagPath& tags : corpus) {
    if (tags.empty()) continue;
    ++sentences;
    std::size_t prev = start;
    for (std::size_t tag : tags) {
      if (tag >= num_tags) {
        throw std::out_of_range("tag index " + std::to_string(tag) +
                                " outside a set of " + std::to_string(num_tags));
      }
      counts[prev * num_tags + tag] += 1.0;
      prev = tag;
    }
  }
  if (sentences == 0) {
    throw std::invalid_argument("cannot estimate transitions from an empty corpus");
  }
  Tensor scores = Tensor::zeros({num_tags + 1, num_tags});
  const double smoothing = alpha * static_cast<double>(num_tags);
  for (std::size_t i = 0; i <= num_tags; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < num_tags; ++j) total += counts[i * num_tags + j];
    for (std::size_t j = 0; j < num_tags; ++j) {
      scores.at(i, j) =
          std::log((counts[i * num_tags + j] + alpha) / (total + smoothing));
    }
  }
  return TransitionMatrix(std::move(scores));
}

double path_score(const Tensor& scores, std::span<const std::size_t> path,
                  const TransitionMatrix& transitions) {
  check_scores(scores, transitions);
  check_path(scores, path);
  double total = 0.0;
  std::size_t prev = transitions.start_row();
  for (std::size_t t = 0; t < path.size(); ++t) {
    total += transitions(prev, path[t]) + scores.at(t, path[t]);
    prev = path[t];
  }
  return total;
}

double log_partition(const Tensor& scores,
                     const TransitionMatrix& transitions) {
  check_scores(scores, transitions);
  return final_log_sum(forward_table(scores, transitions), scores.rows(),
                       scores.cols());
}

Tensor crf_loss(ad::Tape& tape, const Tensor& scores,
                std::span<const std::size_t> gold,
                const TransitionMatrix& transitions) {
  check_scores(scores, transitions);
  check_path(scores, gold);
  const std::size_t steps = scores.rows();
  const std::size_t tags = scores.cols();
  std::vector<double> alpha = forward_table(scores, transitions);
  const double log_z = final_log_sum(alpha, steps, tags);
  const double gold_score = path_score(scores, gold, transitions);

  const bool tracked = scores.requires_grad();
  Tensor loss = Tensor::scalar(log_z - gold_score, tracked);
  if (tracked) {
    TagPath gold_path(gold.begin(), gold.end());
    tape.record({scores}, loss,
                [scores = Tensor(scores), loss, transitions, alpha = std::move(alpha),
                 gold_path = std::move(gold_path), log_z, steps,
                 tags]() mutable {
                  const double g = std::as_const(loss).grad()[0];
                  if (g == 0.0) return;
                  std::vector<double> beta = backward_table(scores, transitions);
                  auto gs = scores.grad();
                  for (std::size_t t = 0; t < steps; ++t) {
                    for (std::size_t j = 0; j < tags; ++j) {
                      const double marginal = std::exp(
                          alpha[t * tags + j] + beta[t * tags + j] - log_z);
                      gs[t * tags + j] += g * marginal;
                    }
                    gs[t * tags + gold_path[t]] -= g;
                  }
                });
  }
  return loss;
}

TagPath viterbi(const Tensor& scores, const TransitionMatrix& transitions) {
  check_scores(scores, transitions);
  const std::size_t steps = scores.rows();
  const std::size_t tags = scores.cols();
  const TransitionMatrix& a = transitions;
  std::vector<double> delta(steps * tags);
  std::vector<std::size_t> back(steps * tags, 0);
  for (std::size_t j = 0; j < tags; ++j) {
    delta[j] = 0.0 + (a(a.start_row(), j) + scores.at(0, j));
  }
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t j = 0; j < tags; ++j) {
      const double local_j = scores.at(t, j);
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < tags; ++i) {
        const double v = delta[(t - 1) * tags + i] + (a(i, j) + local_j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta[t * tags + j] = best;
      back[t * tags + j] = arg;
    }
  }
  TagPath path(steps);
  double best = kNegInf;
  for (std::size_t j = 0; j < tags; ++j) {
    if (delta[(steps - 1) * tags + j] > best) {
      best = delta[(steps - 1) * tags + j];
      path[steps - 1] = j;
    }
  }
  for (std::size_t t = steps - 1; t > 0; --t) {
    path[t - 1] = back[t * tags + path[t]];
  }
  return path;
}

namespace oracle {

TagPath brute_force_best_path(const Tensor& scores,
                              const TransitionMatrix& transitions) {
  check_scores(scores, transitions);
  guard_size(scores);
  TagPath best_path;
  double best = kNegInf;
  enumerate_paths(scores.rows(), scores.cols(), [&](const TagPath& p) {
    const double s = path_score(scores, p, transitions);
    if (best_path.empty() || s > best) {
      best = s;
      best_path = p;
    }
  });
  return best_path;
}

double brute_force_log_partition(const Tensor& scores,
                                 const TransitionMatrix& transitions) {
  check_scores(scores, transitions);
  guard_size(scores);
  std::vector<double> all;
  enumerate_paths(scores.rows(), scores.cols(), [&](const TagPath& p) {
    all.push_back(path_score(scores, p, transitions));
  });
  return log_sum_exp(all);
}

}  // namespace oracle
}  // namespace depner
