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

// Sentence-level training with Adam, prediction and corpus evaluation.

#ifndef DEPNER_TRAINER_HPP_
#define DEPNER_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "depner/corpus.hpp"
#include "depner/eval.hpp"
#include "depner/model.hpp"

namespace depner {

class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const Model& model);

  // One update of every parameter from its accumulated gradient.
  void step(Model& model, double learning_rate);

  std::uint64_t steps() const { return steps_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

 private:
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t steps_ = 0;
};

// Gold tag indices of a sentence. Throws std::out_of_range for a label the
// model's tag set lacks.
TagPath gold_path(const Model& model, const Sentence& sentence);

// CRF loss of one sentence, with parameter gradients left in each tensor's
// grad() slot (previous gradients are cleared first).
double compute_gradients(Model& model, const Sentence& sentence,
                         bool train_mode, Rng* dropout = nullptr);

// Forward, loss, backward and one Adam update. Returns the loss before the
// update. Throws std::invalid_argument for an invalid sentence.
double train_step(Model& model, const Sentence& sentence, AdamState& adam,
                  Rng& dropout);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::optional<double> dev_f1;
};

struct TrainOptions {
  std::size_t epochs = 30;
  std::uint64_t shuffle_seed = 1;
  // Called after each epoch; may be empty.
  std::function<void(const EpochRecord&)> on_epoch;
};

// Runs `epochs` passes over the valid sentences of `train_corpus` in a
// seeded shuffled order. Throws std::invalid_argument when no valid
// sentence remains.
std::vector<EpochRecord> train(Model& model, const Corpus& train_corpus,
                               const Corpus* dev_corpus,
                               const TrainOptions& options);

// Viterbi decoding of the inference-mode scores.
TagPath predict(const Model& model, const Sentence& sentence);
LabelSeq predict_labels(const Model& model, const Sentence& sentence);

// Scores valid sentences against their predictions; the gold chunks of
// invalid sentences count as misses.
EvalReport evaluate(const Model& model, const Corpus& corpus);

// Tag set, transitions and feature vocabularies taken from the valid
// sentences of a training corpus. config.output is set to the tag count.
Model build_model_from_corpus(ModelConfig config, const Corpus& train_corpus,
                              std::shared_ptr<const EmbeddingTable> words);

}  // namespace depner

#endif  // DEPNER_TRAINER_HPP_
