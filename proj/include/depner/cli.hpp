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

// Command-line driver: train, evaluate, tag and synth.
//
// Settings come from an optional flat "key = value" file (--config) and
// from flags; a flag always wins over the file. Keys use underscores where
// flags use dashes, so `--learning-rate` and `learning_rate` are the same
// setting.

#ifndef DEPNER_CLI_HPP_
#define DEPNER_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "depner/model.hpp"

namespace depner::cli {

struct RunConfig {
  std::string command;
  std::string embeddings;
  std::string train;
  std::string dev;
  std::string test;
  std::string input;  // "-" is standard input
  std::string model;
  std::string out;    // "-" or empty is standard output
  std::string embeddings_out;
  std::string format = "text";
  std::size_t epochs = 30;
  std::uint64_t shuffle_seed = 1;
  std::size_t sentences = 2000;
  double split_train = 0.8;
  double split_dev = 0.1;
  double split_test = 0.1;
  ModelConfig model_config;
};

// Parses "key = value" lines; '#' starts a comment. Throws
// std::invalid_argument naming the line for anything else.
std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin);

// Builds a RunConfig from merged settings. `seed` sets both the model seed
// and, unless shuffle_seed is given, the shuffle seed. Throws
// std::invalid_argument for an unknown key or a malformed value.
RunConfig make_run_config(const std::string& command,
                          const std::map<std::string, std::string>& settings);

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_tag(const RunConfig& config, std::istream& in, std::ostream& out,
            std::ostream& err);
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full entry point; args excludes the program name. Returns the exit status:
// 0 on success, 1 when a command fails, 2 on a usage error.
int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

}  // namespace depner::cli

#endif  // DEPNER_CLI_HPP_
