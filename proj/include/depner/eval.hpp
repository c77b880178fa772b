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

// Chunk-level precision, recall and F1.
//
// A chunk is a maximal run of tokens sharing one entity label other than
// "O". A predicted chunk counts as correct only if gold holds a chunk with
// the same start, end and label. Sentences that could not be processed
// contribute every gold chunk they contain as a miss and no predictions.

#ifndef DEPNER_EVAL_HPP_
#define DEPNER_EVAL_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace depner {

using LabelSeq = std::vector<std::string>;

struct ChunkSpan {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::string label;

  auto operator<=>(const ChunkSpan&) const = default;
};

std::vector<ChunkSpan> extract_chunks(std::span<const std::string> tags,
                                      std::string_view none = "O");

struct LabelCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, LabelCounts> per_label;

  // Recomputes the ratios from the counts; each is 0 when undefined.
  void finalize();
  std::string to_text() const;
  // Single JSON object with the count and ratio fields.
  std::string to_json() const;
};

// predictions[i] is scored against golds[i]; skipped_golds are the gold
// labels of sentences that were never tagged. Throws std::invalid_argument
// when the outer sizes or any paired sentence lengths differ.
EvalReport score(std::span<const LabelSeq> predictions,
                 std::span<const LabelSeq> golds,
                 std::span<const LabelSeq> skipped_golds = {});

}  // namespace depner

#endif  // DEPNER_EVAL_HPP_
