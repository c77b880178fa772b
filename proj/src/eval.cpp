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

#include "depner/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace depner {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<ChunkSpan> extract_chunks(std::span<const std::string> tags,
                                      std::string_view none) {
  std::vector<ChunkSpan> chunks;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (tags[i] == none) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tags.size() && tags[j] == tags[i]) ++j;
    chunks.push_back({i, j, tags[i]});
    i = j;
  }
  return chunks;
}

void EvalReport::finalize() {
  precision = ratio(true_positives, true_positives + false_positives);
  recall = ratio(true_positives, true_positives + false_negatives);
  f1 = precision + recall == 0.0
           ? 0.0
           : 2.0 * precision * recall / (precision + recall);
}

std::string EvalReport::to_text() const {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf),
                "chunks: tp=%zu fp=%zu fn=%zu\nprecision: %.4f\nrecall: "
                "%.4f\nf1: %.4f\n",
                true_positives, false_positives, false_negatives, precision,
                recall, f1);
  out += buf;
  for (const auto& [label, c] : per_label) {
    std::snprintf(buf, sizeof(buf), "  %-16s tp=%zu fp=%zu fn=%zu\n",
                  label.c_str(), c.true_positives, c.false_positives,
                  c.false_negatives);
    out += buf;
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["true_positives"] = true_positives;
  j["false_positives"] = false_positives;
  j["false_negatives"] = false_negatives;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  return j.dump();
}

EvalReport score(std::span<const LabelSeq> predictions,
                 std::span<const LabelSeq> golds,
                 std::span<const LabelSeq> skipped_golds) {
  if (predictions.size() != golds.size()) {
    throw std::invalid_argument("score: " + std::to_string(predictions.size()) +
                                " predicted sentences for " +
                                std::to_string(golds.size()) + " gold ones");
  }
  EvalReport report;
  for (std::size_t s = 0; s < golds.size(); ++s) {
    if (predictions[s].size() != golds[s].size()) {
      throw std::invalid_argument(
          "score: sentence " + std::to_string(s) + " has " +
          std::to_string(predictions[s].size()) + " predicted tags for " +
          std::to_string(golds[s].size()) + " tokens");
    }
    const auto predicted = extract_chunks(predictions[s]);
    const auto gold = extract_chunks(golds[s]);
    const std::set<ChunkSpan> gold_set(gold.begin(), gold.end());
    std::set<ChunkSpan> matched;
    for (const ChunkSpan& c : predicted) {
      if (gold_set.contains(c)) {
        ++report.true_positives;
        ++report.per_label[c.label].true_positives;
        matched.insert(c);
      } else {
        ++report.false_positives;
        ++report.per_label[c.label].false_positives;
      }
    }
    for (const ChunkSpan& c : gold) {
      if (!matched.contains(c)) {
        ++report.false_negatives;
        ++report.per_label[c.label].false_negatives;
      }
    }
  }
  for (const LabelSeq& gold : skipped_golds) {
    for (const ChunkSpan& c : extract_chunks(gold)) {
      ++report.false_negatives;
      ++report.per_label[c.label].false_negatives;
    }
  }
  report.finalize();
  return report;
}

}  // namespace depner
