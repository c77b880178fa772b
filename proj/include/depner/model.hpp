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

// The tagging network.
//
//   input (word [+ pos [+ morphology]])
//     -> dense1 (ReLU)
//     -> 2-layer bidirectional LSTM              T x 2h
//     -> dense2 (ReLU)            [dropout]
//     -> bidirectional GCN        [dropout]      T x 2m   (use_gcn only)
//     -> dense_final (ReLU)       [dropout]               (use_gcn only)
//     -> output projection                       T x L
//     -> linear-chain CRF with constant transitions
//
// Dropout is inverted (kept units scaled by 1/keep) and applied only in
// training mode, only above the LSTM.

#ifndef DEPNER_MODEL_HPP_
#define DEPNER_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "depner/autodiff.hpp"
#include "depner/crf.hpp"
#include "depner/features.hpp"
#include "depner/graph.hpp"
#include "depner/lstm.hpp"
#include "depner/random.hpp"

namespace depner {

struct ModelConfig {
  std::size_t word_dim = 300;
  std::size_t pos_dim = 15;
  std::size_t morph_dim = 20;
  std::size_t char_dim = 15;
  std::size_t char_hidden = 20;
  std::size_t dense1 = 40;
  std::size_t lstm_hidden = 160;
  std::size_t lstm_layers = 2;
  std::size_t dense2 = 160;
  std::size_t gcn_dim = 160;
  std::size_t gcn_layers = 1;
  std::size_t dense_final = 160;
  // Number of tags, NONE included.
  std::size_t output = 19;
  double dropout_keep = 0.8;
  double learning_rate = 1e-4;
  FeatureMode feature_mode = FeatureMode::kWordPosMorph;
  bool use_gcn = true;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument on a zero width, a keep probability outside
  // (0, 1], or gcn_dim != dense2 (GCN weights are square).
  void validate() const;
  FeatureDims feature_dims() const;

  // Flat key=value form, one entry per line, keys in a fixed order. Doubles
  // are written in shortest round-trip form.
  std::map<std::string, std::string> to_map() const;
  std::string to_text() const;
  // Overrides the fields named in `entries`; throws std::invalid_argument on
  // an unknown key or a value that does not parse as the field's type.
  void apply(const std::map<std::string, std::string>& entries);
  static ModelConfig from_text(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

struct Dense {
  Tensor weight;  // in x out
  Tensor bias;    // out

  static Dense init(std::size_t in, std::size_t out, Rng& rng);
  Tensor apply(ad::Tape& tape, const Tensor& x) const;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Model {
  ModelConfig config;
  TagSet tags;
  TransitionMatrix transitions;
  FeatureExtractor features;
  Dense dense1;
  std::vector<BiLstmLayer> lstm;
  Dense dense2;
  GcnParams gcn;      // empty unless config.use_gcn
  Dense dense_final;  // undefined unless config.use_gcn
  Dense output;

  // Every trainable tensor with a stable name, in a fixed order.
  std::vector<NamedTensor> parameters() const;
  std::size_t parameter_count() const;
  void zero_grad();
};

// Vocabularies the feature layers are sized from.
struct FeatureVocab {
  PosVocab pos;
  CharVocab chars;
};

// Weights uniform in (-r, r), r = sqrt(6 / (fan_in + fan_out)); biases zero.
// Deterministic in config.seed. Throws std::invalid_argument when the config
// is inconsistent with the tag set, transitions or embeddings.
Model init_model(const ModelConfig& config, TagSet tags,
                 TransitionMatrix transitions,
                 std::shared_ptr<const EmbeddingTable> words,
                 FeatureVocab vocab);

// Network scores f (T x L) for inputs x (T x input width). In training mode
// `dropout` supplies the masks and must be non-null when keep < 1.
Tensor forward(ad::Tape& tape, const Model& model, const Tensor& inputs,
               const DependencyGraph& graph, bool train_mode,
               Rng* dropout = nullptr);

// Feature extraction plus forward() for one sentence.
Tensor sentence_scores(ad::Tape& tape, const Model& model,
                       const Sentence& sentence, bool train_mode,
                       Rng* dropout = nullptr);

}  // namespace depner

#endif  // DEPNER_MODEL_HPP_
