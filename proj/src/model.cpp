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

#include "depner/model.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

#include "depner/init.hpp"

namespace depner {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" +
                                text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument("config key '" + key + "': '" + text +
                              "' is not a boolean");
}

Tensor dropout_layer(ad::Tape& tape, const Tensor& x, double keep,
                     bool train_mode, Rng* rng) {
  if (!train_mode || keep >= 1.0) return x;
  if (rng == nullptr) {
    throw std::invalid_argument("training-mode forward needs a dropout generator");
  }
  Tensor mask = Tensor::zeros(x.shape());
  const double kept = 1.0 / keep;
  for (double& m : mask.data()) m = rng->bernoulli(keep) ? kept : 0.0;
  return ad::apply_mask(tape, x, mask);
}

void add_lstm(std::vector<NamedTensor>& out, const std::string& prefix,
              const LstmParams& p) {
  out.push_back({prefix + ".input_weight", p.input_weight});
  out.push_back({prefix + ".recurrent_weight", p.recurrent_weight});
  out.push_back({prefix + ".bias", p.bias});
}

void add_dense(std::vector<NamedTensor>& out, const std::string& prefix,
               const Dense& d) {
  out.push_back({prefix + ".weight", d.weight});
  out.push_back({prefix + ".bias", d.bias});
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelConfig

void ModelConfig::validate() const {
  const std::pair<const char*, std::size_t> widths[] = {
      {"word_dim", word_dim},       {"pos_dim", pos_dim},
      {"morph_dim", morph_dim},     {"char_dim", char_dim},
      {"char_hidden", char_hidden}, {"dense1", dense1},
      {"lstm_hidden", lstm_hidden}, {"lstm_layers", lstm_layers},
      {"dense2", dense2},           {"gcn_dim", gcn_dim},
      {"gcn_layers", gcn_layers},   {"dense_final", dense_final},
      {"output", output}};
  for (const auto& [name, value] : widths) {
    if (value == 0) {
      throw std::invalid_argument(std::string("model config: ") + name +
                                  " must be positive");
    }
  }
  if (!(dropout_keep > 0.0 && dropout_keep <= 1.0)) {
    throw std::invalid_argument("model config: dropout_keep must lie in (0, 1]");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("model config: learning_rate must be positive");
  }
  if (use_gcn && gcn_dim != dense2) {
    throw std::invalid_argument(
        "model config: gcn_dim (" + std::to_string(gcn_dim) +
        ") must equal dense2 (" + std::to_string(dense2) +
        ") because GCN weights are square");
  }
}

FeatureDims ModelConfig::feature_dims() const {
  FeatureDims d;
  d.word = word_dim;
  d.pos = pos_dim;
  d.morph = {char_dim, char_hidden, morph_dim};
  return d;
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  return {{"word_dim", std::to_string(word_dim)},
          {"pos_dim", std::to_string(pos_dim)},
          {"morph_dim", std::to_string(morph_dim)},
          {"char_dim", std::to_string(char_dim)},
          {"char_hidden", std::to_string(char_hidden)},
          {"dense1", std::to_string(dense1)},
          {"lstm_hidden", std::to_string(lstm_hidden)},
          {"lstm_layers", std::to_string(lstm_layers)},
          {"dense2", std::to_string(dense2)},
          {"gcn_dim", std::to_string(gcn_dim)},
          {"gcn_layers", std::to_string(gcn_layers)},
          {"dense_final", std::to_string(dense_final)},
          {"output", std::to_string(output)},
          {"dropout_keep", format_double(dropout_keep)},
          {"learning_rate", format_double(learning_rate)},
          {"feature_mode", feature_mode_name(feature_mode)},
          {"use_gcn", use_gcn ? "true" : "false"},
          {"seed", std::to_string(seed)}};
}

std::string ModelConfig::to_text() const {
  std::string out;
  for (const auto& [key, value] : to_map()) out += key + "=" + value + "\n";
  return out;
}

void ModelConfig::apply(const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) {
    auto size_field = [&](std::size_t& field) {
      field = parse_number<std::size_t>(key, value);
    };
    if (key == "word_dim") size_field(word_dim);
    else if (key == "pos_dim") size_field(pos_dim);
    else if (key == "morph_dim") size_field(morph_dim);
    else if (key == "char_dim") size_field(char_dim);
    else if (key == "char_hidden") size_field(char_hidden);
    else if (key == "dense1") size_field(dense1);
    else if (key == "lstm_hidden") size_field(lstm_hidden);
    else if (key == "lstm_layers") size_field(lstm_layers);
    else if (key == "dense2") size_field(dense2);
    else if (key == "gcn_dim") size_field(gcn_dim);
    else if (key == "gcn_layers") size_field(gcn_layers);
    else if (key == "dense_final") size_field(dense_final);
    else if (key == "output") size_field(output);
    else if (key == "dropout_keep") dropout_keep = parse_number<double>(key, value);
    else if (key == "learning_rate") learning_rate = parse_number<double>(key, value);
    else if (key == "feature_mode") feature_mode = parse_feature_mode(value);
    else if (key == "use_gcn") use_gcn = parse_bool(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else throw std::invalid_argument("unknown model config key '" + key + "'");
  }
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("model config line without '=': " + line);
    }
    entries[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ModelConfig config;
  config.apply(entries);
  return config;
}

// ---------------------------------------------------------------------------
// Layers and parameters

Dense Dense::init(std::size_t in, std::size_t out, Rng& rng) {
  return {glorot_parameter(in, out, rng), zero_parameter({out})};
}

Tensor Dense::apply(ad::Tape& tape, const Tensor& x) const {
  return ad::add_bias(tape, ad::matmul(tape, x, weight), bias);
}

std::vector<NamedTensor> Model::parameters() const {
  std::vector<NamedTensor> out;
  if (features.pos_table.defined()) out.push_back({"features.pos", features.pos_table});
  const MorphEncoder& m = features.morph;
  if (m.char_table.defined()) {
    out.push_back({"features.morph.chars", m.char_table});
    add_lstm(out, "features.morph.forward", m.forward);
    add_lstm(out, "features.morph.backward", m.backward);
    out.push_back({"features.morph.projection.weight", m.projection});
    out.push_back({"features.morph.projection.bias", m.projection_bias});
  }
  add_dense(out, "dense1", dense1);
  for (std::size_t k = 0; k < lstm.size(); ++k) {
    add_lstm(out, "lstm." + std::to_string(k) + ".forward", lstm[k].forward);
    add_lstm(out, "lstm." + std::to_string(k) + ".backward", lstm[k].backward);
  }
  add_dense(out, "dense2", dense2);
  for (std::size_t k = 0; k < gcn.incoming.size(); ++k) {
    const std::string s = std::to_string(k);
    out.push_back({"gcn.incoming." + s + ".weight", gcn.incoming[k].weight});
    out.push_back({"gcn.incoming." + s + ".bias", gcn.incoming[k].bias});
  }
  for (std::size_t k = 0; k < gcn.outgoing.size(); ++k) {
    const std::string s = std::to_string(k);
    out.push_back({"gcn.outgoing." + s + ".weight", gcn.outgoing[k].weight});
    out.push_back({"gcn.outgoing." + s + ".bias", gcn.outgoing[k].bias});
  }
  if (dense_final.weight.defined()) add_dense(out, "dense_final", dense_final);
  add_dense(out, "output", output);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const NamedTensor& p : parameters()) n += p.tensor.size();
  return n;
}

void Model::zero_grad() {
  for (NamedTensor& p : parameters()) p.tensor.zero_grad();
}

Model init_model(const ModelConfig& config, TagSet tags,
                 TransitionMatrix transitions,
                 std::shared_ptr<const EmbeddingTable> words,
                 FeatureVocab vocab) {
  config.validate();
  if (config.output != tags.size()) {
    throw std::invalid_argument("model config: output width " +
                                std::to_string(config.output) +
                                " differs from the tag set size " +
                                std::to_string(tags.size()));
  }
  if (transitions.num_tags() != tags.size()) {
    throw std::invalid_argument("transition matrix covers " +
                                std::to_string(transitions.num_tags()) +
                                " tags, the tag set has " +
                                std::to_string(tags.size()));
  }
  Rng rng(config.seed);
  FeatureExtractor features(config.feature_mode, config.feature_dims(),
                            std::move(words), std::move(vocab.pos),
                            std::move(vocab.chars), rng);
  Model model{config,
              std::move(tags),
              std::move(transitions),
              std::move(features),
              {},
              {},
              {},
              {},
              {},
              {}};
  model.dense1 = Dense::init(model.features.width(), config.dense1, rng);
  std::size_t in = config.dense1;
  for (std::size_t k = 0; k < config.lstm_layers; ++k) {
    BiLstmLayer layer;
    layer.forward = LstmParams::init(in, config.lstm_hidden, rng);
    layer.backward = LstmParams::init(in, config.lstm_hidden, rng);
    model.lstm.push_back(std::move(layer));
    in = 2 * config.lstm_hidden;
  }
  model.dense2 = Dense::init(in, config.dense2, rng);
  std::size_t top = config.dense2;
  if (config.use_gcn) {
    model.gcn = GcnParams::init(config.gcn_dim, config.gcn_layers, rng);
    model.dense_final = Dense::init(2 * config.gcn_dim, config.dense_final, rng);
    top = config.dense_final;
  }
  model.output = Dense::init(top, config.output, rng);
  return model;
}

Tensor forward(ad::Tape& tape, const Model& model, const Tensor& inputs,
               const DependencyGraph& graph, bool train_mode, Rng* dropout) {
  const ModelConfig& c = model.config;
  if (inputs.rank() != 2 || inputs.cols() != model.features.width()) {
    throw DimensionError("forward: inputs " + shape_to_string(inputs.shape()) +
                         " do not have width " +
                         std::to_string(model.features.width()));
  }
  if (graph.size() != inputs.rows()) {
    throw DimensionError("forward: graph has " + std::to_string(graph.size()) +
                         " nodes for " + std::to_string(inputs.rows()) +
                         " tokens");
  }
  const double keep = c.dropout_keep;
  Tensor h = ad::relu(tape, model.dense1.apply(tape, inputs));
  h = bilstm_forward(tape, h, model.lstm);
  h = ad::relu(tape, model.dense2.apply(tape, h));
  h = dropout_layer(tape, h, keep, train_mode, dropout);
  if (c.use_gcn) {
    h = bigcn_forward(tape, h, graph, model.gcn);
    h = dropout_layer(tape, h, keep, train_mode, dropout);
    h = ad::relu(tape, model.dense_final.apply(tape, h));
    h = dropout_layer(tape, h, keep, train_mode, dropout);
  }
  return model.output.apply(tape, h);
}

Tensor sentence_scores(ad::Tape& tape, const Model& model,
                       const Sentence& sentence, bool train_mode,
                       Rng* dropout) {
  Tensor inputs = model.features.sentence_matrix(tape, sentence);
  DependencyGraph graph = build_graph(sentence.heads());
  return forward(tape, model, inputs, graph, train_mode, dropout);
}

}  // namespace depner
