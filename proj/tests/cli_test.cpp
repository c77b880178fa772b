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

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "depner/cli.hpp"
#include "depner/corpus.hpp"
#include "depner/eval.hpp"
#include "depner/features.hpp"
#include "depner/synthetic.hpp"
#include "test_support.hpp"

namespace depner {
namespace {

using testing::read_text;
using testing::TempDir;
using testing::write_text;

struct Result {
  int status = 0;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  Result r;
  r.status = cli::run(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const std::vector<std::string> kTinyFlags{
    "--word-dim", "8",  "--pos-dim",     "3", "--morph-dim",   "4", "--char-dim", "3",
    "--char-hidden", "3", "--dense1",    "4", "--lstm-hidden", "6", "--dense2",   "6",
    "--gcn-dim", "6",   "--dense-final", "6"};

std::vector<std::string> with_tiny(std::vector<std::string> args) {
  args.insert(args.end(), kTinyFlags.begin(), kTinyFlags.end());
  return args;
}

// A synthetic train/test split plus matching 8-wide embeddings.
struct Workspace {
  TempDir dir;
  std::string train = dir.file("train.tsv");
  std::string test = dir.file("test.tsv");
  std::string emb = dir.file("emb.txt");
  std::string model = dir.file("model.bin");

  Workspace() {
    const Result r = run_cli({"synth", "--sentences", "40", "--seed", "3", "--train", train,
                              "--test", test, "--split", "0.5,0,0.5", "--word-dim", "8",
                              "--embeddings-out", emb});
    EXPECT_EQ(r.status, 0) << r.err;
  }

  Result train_model(const std::string& epochs) {
    return run_cli(with_tiny({"train", "--train", train, "--dev", test, "--embeddings", emb,
                              "--model", model, "--epochs", epochs}));
  }
};

std::string strip_entities(const std::string& corpus_text) {
  std::istringstream in(corpus_text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) line = line.substr(0, line.rfind('\t'));
    out << line << "\n";
  }
  return out.str();
}

TEST(ConfigText, ParsesKeyValueLines) {
  const auto m = cli::parse_config_text("# comment\n epochs = 3 \n\nseed=9 # trailing\n", "f");
  EXPECT_EQ(m.at("epochs"), "3");
  EXPECT_EQ(m.at("seed"), "9");
  EXPECT_EQ(m.size(), 2u);
  try {
    cli::parse_config_text("epochs = 3\nnonsense\n", "cfg.txt");
    FAIL() << "expected a parse error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.txt:2"), std::string::npos) << e.what();
  }
}

TEST(ConfigText, RunConfigTypesAndSeeds) {
  const cli::RunConfig c = cli::make_run_config(
      "train", {{"epochs", "4"}, {"seed", "11"}, {"dense1", "12"}, {"split", "0.6,0.2,0.2"}});
  EXPECT_EQ(c.epochs, 4u);
  EXPECT_EQ(c.model_config.seed, 11u);
  EXPECT_EQ(c.shuffle_seed, 11u);
  EXPECT_EQ(c.model_config.dense1, 12u);
  EXPECT_DOUBLE_EQ(c.split_dev, 0.2);
  EXPECT_EQ(cli::make_run_config("train", {{"seed", "11"}, {"shuffle_seed", "2"}}).shuffle_seed,
            2u);
  EXPECT_THROW(cli::make_run_config("train", {{"epochs", "-1"}}), std::invalid_argument);
  EXPECT_THROW(cli::make_run_config("train", {{"bogus", "1"}}), std::invalid_argument);
  EXPECT_THROW(cli::make_run_config("train", {{"format", "xml"}}), std::invalid_argument);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).status, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).status, 2);
  EXPECT_EQ(run_cli({"train", "--no-such-flag", "1"}).status, 2);
  EXPECT_EQ(run_cli({"train", "--dense1", "many"}).status, 2);
  EXPECT_EQ(run_cli({"train", "--config", "/nonexistent/depner.cfg"}).status, 2);
}

TEST(Synth, WritesReparseableDeterministicCorpus) {
  TempDir dir;
  ASSERT_EQ(run_cli({"synth", "--sentences", "60", "--seed", "5", "--out", dir.file("a")}).status, 0);
  ASSERT_EQ(run_cli({"synth", "--sentences", "60", "--seed", "5", "--out", dir.file("b")}).status, 0);
  EXPECT_EQ(read_text(dir.file("a")), read_text(dir.file("b")));
  const Corpus c = read_corpus(dir.file("a"));
  EXPECT_EQ(c.sentences.size(), 60u);
  EXPECT_EQ(c.skipped_count, 0u);
  for (const Sentence& s : c.sentences) {
    for (const Token& t : s.tokens) {
      EXPECT_EQ(t.entity, synthetic::label_for_head(s.tokens[t.head].surface));
    }
  }
  EXPECT_NE(run_cli({"synth", "--sentences", "5"}).status, 0);
}

TEST(Synth, FlagsOverrideConfigFile) {
  TempDir dir;
  write_text(dir.file("cfg"), "sentences = 7\nseed = 1\nout = " + dir.file("x") + "\n");
  ASSERT_EQ(run_cli({"synth", "--config", dir.file("cfg"), "--sentences", "9"}).status, 0);
  EXPECT_EQ(read_corpus(dir.file("x")).sentences.size(), 9u);
  ASSERT_EQ(run_cli({"synth", "--config", dir.file("cfg")}).status, 0);
  EXPECT_EQ(read_corpus(dir.file("x")).sentences.size(), 7u);
}

TEST(Train, ZeroEpochsWritesModel) {
  Workspace w;
  const Result r = w.train_model("0");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(read_text(w.model).empty());
}

TEST(Train, PrintsOneLinePerEpoch) {
  Workspace w;
  const Result r = w.train_model("2");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("epoch 1 loss "), std::string::npos);
  EXPECT_NE(r.out.find("epoch 2 loss "), std::string::npos);
  EXPECT_NE(r.out.find("dev_f1 "), std::string::npos);
}

TEST(Train, MissingEmbeddingsNamesThePath) {
  Workspace w;
  const std::string missing = w.dir.file("no_such_vectors.txt");
  const Result r = run_cli(with_tiny(
      {"train", "--train", w.train, "--embeddings", missing, "--model", w.model, "--epochs", "0"}));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;
  EXPECT_TRUE(read_text(w.model).empty());
}

TEST(Train, InputsAreNotModified) {
  Workspace w;
  const std::string train = read_text(w.train);
  const std::string emb = read_text(w.emb);
  ASSERT_EQ(w.train_model("1").status, 0);
  EXPECT_EQ(read_text(w.train), train);
  EXPECT_EQ(read_text(w.emb), emb);
}

TEST(Evaluate, CorruptedModelFailsWithoutOutput) {
  Workspace w;
  ASSERT_EQ(w.train_model("0").status, 0);
  std::string bytes = read_text(w.model);
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 1);
  write_text(w.model, bytes);
  const Result r = run_cli({"evaluate", "--model", w.model, "--embeddings", w.emb, "--test", w.test});
  EXPECT_NE(r.status, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Evaluate, JsonReportSatisfiesInvariants) {
  Workspace w;
  ASSERT_EQ(w.train_model("1").status, 0);
  const Result r = run_cli({"evaluate", "--model", w.model, "--embeddings", w.emb, "--test", w.test,
                            "--format", "json"});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const double tp = j.at("true_positives"), fp = j.at("false_positives"),
               fn = j.at("false_negatives");
  const double p = j.at("precision"), rc = j.at("recall"), f1 = j.at("f1");
  EXPECT_DOUBLE_EQ(p, tp + fp > 0 ? tp / (tp + fp) : 0.0);
  EXPECT_DOUBLE_EQ(rc, tp + fn > 0 ? tp / (tp + fn) : 0.0);
  EXPECT_DOUBLE_EQ(f1, p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0);
}

TEST(Tag, EmptyInputGivesEmptyOutput) {
  Workspace w;
  ASSERT_EQ(w.train_model("0").status, 0);
  const Result r = run_cli({"tag", "--model", w.model, "--embeddings", w.emb}, "");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Tag, InvalidSentencePassesThroughAsNone) {
  Workspace w;
  ASSERT_EQ(w.train_model("0").status, 0);
  const std::string input =
      "0\tthe\tDT\t1\n1\tdog\tNN\t1\n\n"
      "0\ta\tDT\t1\n1\tcycle\tNN\t0\n";
  const Result r = run_cli({"tag", "--model", w.model, "--embeddings", w.emb}, input);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_NE(r.out.find("0\ta\tDT\t1\tO\n1\tcycle\tNN\t0\tO\n"), std::string::npos) << r.out;
  const Corpus back = [&] {
    std::istringstream in(r.out);
    return parse_corpus(in);
  }();
  EXPECT_EQ(back.sentences.size(), 2u);
  EXPECT_EQ(back.sentences[0].size(), 2u);
}

TEST(Tag, TaggingThenScoringMatchesEvaluate) {
  Workspace w;
  ASSERT_EQ(w.train_model("2").status, 0);
  const std::string hidden = w.dir.file("hidden.tsv");
  const std::string tagged = w.dir.file("tagged.tsv");
  write_text(hidden, strip_entities(read_text(w.test)));
  ASSERT_EQ(run_cli({"tag", "--model", w.model, "--embeddings", w.emb, "--input", hidden,
                     "--out", tagged}).status, 0);
  const Corpus gold = read_corpus(w.test);
  const Corpus pred = read_corpus(tagged);
  ASSERT_EQ(gold.sentences.size(), pred.sentences.size());
  std::vector<LabelSeq> p, g;
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    p.push_back(pred.sentences[i].entities());
    g.push_back(gold.sentences[i].entities());
  }
  const Result r = run_cli({"evaluate", "--model", w.model, "--embeddings", w.emb, "--test",
                            w.test, "--format", "json"});
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(score(p, g).to_json() + "\n", r.out);
}

TEST(Evaluate, OverfitSentenceScoresPerfectly) {
  TempDir dir;
  write_text(dir.file("one.tsv"), "0\tJohn\tNNP\t1\tPER\n1\tvisited\tVBD\t1\tO\n2\tParis\tNNP\t1\tLOC\n");
  write_embeddings(dir.file("emb.txt"), random_embeddings({"john", "visited", "paris"}, 300, 4));
  const Result t = run_cli({"train", "--train", dir.file("one.tsv"), "--embeddings",
                            dir.file("emb.txt"), "--model", dir.file("m.bin"), "--epochs", "200"});
  ASSERT_EQ(t.status, 0) << t.err;
  const Result r = run_cli({"evaluate", "--model", dir.file("m.bin"), "--embeddings",
                            dir.file("emb.txt"), "--test", dir.file("one.tsv"), "--format", "json"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("f1").get<double>(), 1.0);
}

// The installed binary, driven through the shell.
TEST(Binary, ExitStatusAndStreams) {
  const char* exe = std::getenv("DEPNER_CLI");
  if (exe == nullptr) GTEST_SKIP() << "DEPNER_CLI not set";
  TempDir dir;
  const std::string bin = std::string("'") + exe + "'";
  auto sh = [&](const std::string& cmd) {
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(sh(bin + " synth --sentences 5 --out " + dir.file("s.tsv") + " >" + dir.file("o") +
               " 2>" + dir.file("e")), 0);
  EXPECT_EQ(read_corpus(dir.file("s.tsv")).sentences.size(), 5u);
  EXPECT_EQ(sh(bin + " evaluate --model " + dir.file("none.bin") + " --embeddings " +
               dir.file("none.txt") + " --test " + dir.file("s.tsv") + " >" + dir.file("o") +
               " 2>" + dir.file("e")), 1);
  EXPECT_TRUE(read_text(dir.file("o")).empty());
  EXPECT_FALSE(read_text(dir.file("e")).empty());
  EXPECT_EQ(sh(bin + " >" + dir.file("o") + " 2>" + dir.file("e")), 2);
}

}  // namespace
}  // namespace depner
