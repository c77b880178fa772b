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

#include "depner/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "depner/corpus.hpp"
#include "depner/eval.hpp"
#include "depner/features.hpp"
#include "depner/model_io.hpp"
#include "depner/synthetic.hpp"
#include "depner/trainer.hpp"

namespace depner::cli {
namespace {

// Run-level keys; anything else must be a ModelConfig key.
const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> keys{
      "embeddings", "train",     "dev",         "test",
      "input",      "model",     "out",         "embeddings_out",
      "format",     "epochs",    "shuffle_seed", "sentences",
      "split"};
  return keys;
}

std::string flag_help(const std::string& key, const std::string& fallback) {
  static const std::map<std::string, std::string> help{
      {"embeddings", "Word vector file, one 'token v1 ... vN' per line"},
      {"train", "Training corpus (synth: where to write the train part)"},
      {"dev", "Development corpus scored after each epoch"},
      {"test", "Gold corpus to score"},
      {"input", "Corpus to tag; '-' reads standard input"},
      {"model", "Model file"},
      {"out", "Output file; '-' is standard output"},
      {"embeddings_out", "synth: also write random vectors for the vocabulary"},
      {"format", "Report format: text or json"},
      {"epochs", "Training passes over the corpus"},
      {"shuffle_seed", "Seed for sentence order and dropout (defaults to seed)"},
      {"sentences", "synth: number of sentences"},
      {"split", "synth: train,dev,test fractions"},
      {"seed", "Seed for initialisation and synthetic data"}};
  const auto it = help.find(key);
  return it == help.end() ? fallback : it->second;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("setting '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

void parse_split(const std::string& text, RunConfig& c) {
  double parts[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = text.find(',', start);
    if ((i < 2) == (comma == std::string::npos)) {
      throw std::invalid_argument("setting 'split': expected three comma-separated "
                                  "fractions, got '" + text + "'");
    }
    parts[i] = parse_value<double>("split", trim(text.substr(start, comma - start)));
    start = comma + 1;
  }
  c.split_train = parts[0];
  c.split_dev = parts[1];
  c.split_test = parts[2];
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require(const std::string& value, const std::string& flag,
             const std::string& command) {
  if (value.empty()) {
    throw std::invalid_argument(command + " needs --" + flag);
  }
}

std::shared_ptr<const EmbeddingTable> embeddings_for(const std::string& path,
                                                     std::size_t dim) {
  return std::make_shared<const EmbeddingTable>(load_embeddings(path, dim));
}

Model load_for_inference(const RunConfig& c) {
  require(c.model, "model", c.command);
  require(c.embeddings, "embeddings", c.command);
  const std::string bytes = read_model_bytes(c.model);
  const ModelConfig stored = read_model_config(bytes);
  return deserialize_model(bytes, embeddings_for(c.embeddings, stored.word_dim));
}

Corpus read_input(const std::string& path, std::istream& in, EntityColumn column) {
  if (path.empty() || path == "-") return parse_corpus(in, column);
  return read_corpus(path, column);
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

// The first four columns of an unparseable line, padded with "_".
std::string passthrough_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (fields.size() < 4) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  while (fields.size() < 4) fields.emplace_back("_");
  for (std::string& f : fields) {
    if (f.empty()) f = "_";
  }
  return fields[0] + "\t" + fields[1] + "\t" + fields[2] + "\t" + fields[3] + "\t" +
         std::string(TagSet::kNone);
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(body.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument(origin + ":" + std::to_string(number) +
                                  ": expected 'key = value'");
    }
    out[key] = trim(body.substr(eq + 1));
  }
  return out;
}

RunConfig make_run_config(const std::string& command,
                          const std::map<std::string, std::string>& settings) {
  RunConfig c;
  c.command = command;
  std::map<std::string, std::string> model_keys;
  bool shuffle_given = false;
  for (const auto& [key, value] : settings) {
    if (key == "embeddings") c.embeddings = value;
    else if (key == "train") c.train = value;
    else if (key == "dev") c.dev = value;
    else if (key == "test") c.test = value;
    else if (key == "input") c.input = value;
    else if (key == "model") c.model = value;
    else if (key == "out") c.out = value;
    else if (key == "embeddings_out") c.embeddings_out = value;
    else if (key == "format") {
      if (value != "text" && value != "json") {
        throw std::invalid_argument("setting 'format': expected text or json, got '" +
                                    value + "'");
      }
      c.format = value;
    } else if (key == "epochs") c.epochs = parse_value<std::size_t>(key, value);
    else if (key == "shuffle_seed") {
      c.shuffle_seed = parse_value<std::uint64_t>(key, value);
      shuffle_given = true;
    } else if (key == "sentences") c.sentences = parse_value<std::size_t>(key, value);
    else if (key == "split") parse_split(value, c);
    else model_keys[key] = value;
  }
  c.model_config.apply(model_keys);
  if (!shuffle_given) c.shuffle_seed = c.model_config.seed;
  return c;
}

int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    require(c.train, "train", "train");
    require(c.embeddings, "embeddings", "train");
    const std::string model_path = c.model.empty() ? c.out : c.model;
    require(model_path, "model", "train");

    auto words = embeddings_for(c.embeddings, c.model_config.word_dim);
    const Corpus train_corpus = read_corpus(c.train);
    if (train_corpus.skipped_count > 0) {
      err << "warning: skipping " << train_corpus.skipped_count << " invalid sentence(s) in "
          << c.train << "\n";
    }
    std::optional<Corpus> dev;
    if (!c.dev.empty()) dev = read_corpus(c.dev);

    Model model = build_model_from_corpus(c.model_config, train_corpus, words);
    TrainOptions options;
    options.epochs = c.epochs;
    options.shuffle_seed = c.shuffle_seed;
    options.on_epoch = [&](const EpochRecord& r) {
      char buf[128];
      if (r.dev_f1) {
        std::snprintf(buf, sizeof(buf), "epoch %zu loss %.6f dev_f1 %.4f\n", r.epoch,
                      r.mean_loss, *r.dev_f1);
      } else {
        std::snprintf(buf, sizeof(buf), "epoch %zu loss %.6f\n", r.epoch, r.mean_loss);
      }
      out << buf << std::flush;
    };
    train(model, train_corpus, dev ? &*dev : nullptr, options);
    save_model(model_path, model);
    return 0;
  });
}

int cmd_evaluate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string path = c.test.empty() ? c.input : c.test;
    require(path, "test", "evaluate");
    const Model model = load_for_inference(c);
    const Corpus corpus = read_corpus(path);
    const EvalReport report = evaluate(model, corpus);
    out << (c.format == "json" ? report.to_json() + "\n" : report.to_text());
    return 0;
  });
}

int cmd_tag(const RunConfig& c, std::istream& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Model model = load_for_inference(c);
    const Corpus corpus = read_input(c.input, in, EntityColumn::kOptional);
    std::ostringstream buffer;
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
      const Sentence& s = corpus.sentences[i];
      if (s.valid) {
        write_sentence(buffer, s, predict_labels(model, s));
        continue;
      }
      err << "warning: sentence " << i + 1 << " passed through untagged: " << s.problem
          << "\n";
      for (const std::string& line : s.raw_lines) buffer << passthrough_line(line) << "\n";
      buffer << "\n";
    }
    if (c.out.empty() || c.out == "-") {
      out << buffer.str();
    } else {
      std::ofstream file(c.out, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot write " + c.out);
      file << buffer.str();
      if (!file.flush()) throw std::runtime_error("cannot write " + c.out);
    }
    return 0;
  });
}

int cmd_synth(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const bool split = !c.train.empty() || !c.dev.empty() || !c.test.empty();
    if (c.out.empty() && !split) {
      throw std::invalid_argument("synth needs --out or --train/--dev/--test");
    }
    const Corpus corpus = synthetic::generate(c.sentences, c.model_config.seed);
    if (!c.out.empty()) write_corpus(c.out, corpus);
    if (split) {
      const CorpusSplit parts = split_corpus(corpus, c.split_train, c.split_dev,
                                             c.split_test, c.model_config.seed);
      if (!c.train.empty()) write_corpus(c.train, parts.train);
      if (!c.dev.empty()) write_corpus(c.dev, parts.dev);
      if (!c.test.empty()) write_corpus(c.test, parts.test);
    }
    if (!c.embeddings_out.empty()) {
      write_embeddings(c.embeddings_out,
                       random_embeddings(synthetic::vocabulary(), c.model_config.word_dim,
                                         c.model_config.seed));
    }
    out << "wrote " << corpus.sentences.size() << " sentences\n";
    return 0;
  });
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Dependency-aware named entity tagger", "depner"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> flags;
  const char* const commands[][2] = {
      {"train", "Train a model and write it to --model"},
      {"evaluate", "Score a model on a gold corpus"},
      {"tag", "Fill the entity column of a corpus"},
      {"synth", "Write a synthetic corpus"}};

  const ModelConfig defaults;
  std::vector<std::string> setting_keys = run_keys();
  const std::map<std::string, std::string> model_defaults = defaults.to_map();
  for (const auto& [key, value] : model_defaults) setting_keys.push_back(key);

  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "Settings file of key = value lines");
    for (const std::string& key : setting_keys) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (sub->get_option_no_throw(flag) != nullptr) continue;
      sub->add_option_function<std::string>(
          flag, [&flags, key](const std::string& v) { flags[key] = v; },
          flag_help(key, "Model setting (default " +
                             (model_defaults.count(key) ? model_defaults.at(key) : "") + ")"));
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    std::map<std::string, std::string> settings;
    if (!config_path.empty()) {
      settings = parse_config_text(read_text_file(config_path), config_path);
    }
    for (const auto& [key, value] : flags) settings[key] = value;
    const std::string command = app.get_subcommands().front()->get_name();
    const RunConfig config = make_run_config(command, settings);
    if (command == "train") return cmd_train(config, out, err);
    if (command == "evaluate") return cmd_evaluate(config, out, err);
    if (command == "tag") return cmd_tag(config, in, out, err);
    return cmd_synth(config, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace depner::cli
