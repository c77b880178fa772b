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

#include "depner/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace depner {

AdamState::AdamState(const Model& model) {
  for (const NamedTensor& p : model.parameters()) {
    m_.push_back(Tensor::zeros(p.tensor.shape()));
    v_.push_back(Tensor::zeros(p.tensor.shape()));
  }
}

void AdamState::step(Model& model, double learning_rate) {
  std::vector<NamedTensor> params = model.parameters();
  if (params.size() != m_.size()) {
    throw std::logic_error("Adam state was built for a different model");
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k].tensor;
    if (p.shape() != m_[k].shape()) {
      throw std::logic_error("Adam state shape mismatch for " + params[k].name);
    }
    auto w = p.data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    const bool has = p.has_grad();
    std::span<const double> g;
    if (has) g = std::as_const(p).grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = has ? g[i] : 0.0;
      m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
      v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      w[i] -= learning_rate * mh / (std::sqrt(vh) + epsilon);
    }
  }
}

TagPath gold_path(const Model& model, const Sentence& sentence) {
  TagPath path;
  path.reserve(sentence.size());
  for (const Token& tok : sentence.tokens) path.push_back(model.tags.index(tok.entity));
  return path;
}

double compute_gradients(Model& model, const Sentence& sentence,
                         bool train_mode, Rng* dropout) {
  if (!sentence.valid) {
    throw std::invalid_argument("cannot train on an invalid sentence: " +
                                sentence.problem);
  }
  model.zero_grad();
  const TagPath gold = gold_path(model, sentence);
  ad::Tape tape;
  Tensor scores = sentence_scores(tape, model, sentence, train_mode, dropout);
  Tensor loss = crf_loss(tape, scores, gold, model.transitions);
  tape.backward(loss);
  return loss.item();
}

double train_step(Model& model, const Sentence& sentence, AdamState& adam,
                  Rng& dropout) {
  const double loss = compute_gradients(model, sentence, true, &dropout);
  adam.step(model, model.config.learning_rate);
  return loss;
}

std::vector<EpochRecord> train(Model& model, const Corpus& train_corpus,
                               const Corpus* dev_corpus,
                               const TrainOptions& options) {
  std::vector<const Sentence*> usable = train_corpus.valid_sentences();
  if (usable.empty()) {
    throw std::invalid_argument("training corpus has no valid sentence");
  }
  std::vector<EpochRecord> history;
  if (options.epochs == 0) return history;

  AdamState adam(model);
  Rng order(options.shuffle_seed);
  // Dropout masks draw from their own stream so that the visiting order and
  // the masks stay independent.
  Rng dropout(options.shuffle_seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    order.shuffle(usable);
    double total = 0.0;
    for (const Sentence* s : usable) total += train_step(model, *s, adam, dropout);
    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = total / static_cast<double>(usable.size());
    if (dev_corpus != nullptr && !dev_corpus->sentences.empty()) {
      record.dev_f1 = evaluate(model, *dev_corpus).f1;
    }
    if (options.on_epoch) options.on_epoch(record);
    history.push_back(record);
  }
  model.zero_grad();
  return history;
}

TagPath predict(const Model& model, const Sentence& sentence) {
  ad::Tape tape;
  Tensor scores = sentence_scores(tape, model, sentence, false);
  return viterbi(scores, model.transitions);
}

LabelSeq predict_labels(const Model& model, const Sentence& sentence) {
  LabelSeq labels;
  for (std::size_t t : predict(model, sentence)) labels.push_back(model.tags.label(t));
  return labels;
}

EvalReport evaluate(const Model& model, const Corpus& corpus) {
  std::vector<LabelSeq> predictions;
  std::vector<LabelSeq> golds;
  std::vector<LabelSeq> skipped;
  for (const Sentence& s : corpus.sentences) {
    if (s.valid) {
      predictions.push_back(predict_labels(model, s));
      golds.push_back(s.entities());
    } else {
      skipped.push_back(s.entities());
    }
  }
  return score(predictions, golds, skipped);
}

Model build_model_from_corpus(ModelConfig config, const Corpus& train_corpus,
                              std::shared_ptr<const EmbeddingTable> words) {
  std::vector<const Sentence*> usable = train_corpus.valid_sentences();
  if (usable.empty()) {
    throw std::invalid_argument("training corpus has no valid sentence");
  }
  std::vector<std::string> types;
  std::set<std::string> pos;
  std::vector<std::string> surfaces;
  for (const Sentence* s : usable) {
    for (const Token& tok : s->tokens) {
      if (tok.entity != TagSet::kNone) types.push_back(tok.entity);
      pos.insert(tok.pos);
      surfaces.push_back(tok.surface);
    }
  }
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  TagSet tags = TagSet::from_entity_types(types);

  std::vector<TagPath> paths;
  for (const Sentence* s : usable) {
    TagPath p;
    for (const Token& tok : s->tokens) p.push_back(tags.index(tok.entity));
    paths.push_back(std::move(p));
  }
  TransitionMatrix transitions = TransitionMatrix::estimate(paths, tags.size());
  config.output = tags.size();
  FeatureVocab vocab{PosVocab(pos), CharVocab::from_words(surfaces)};
  return init_model(config, std::move(tags), std::move(transitions),
                    std::move(words), std::move(vocab));
}

}  // namespace depner
