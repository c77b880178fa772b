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

// End-to-end acceptance runner. Prints one PASS or FAIL line per criterion
// and exits non-zero if any criterion fails. Pass a criterion number to run
// only that one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "depner/crf.hpp"
#include "depner/eval.hpp"
#include "depner/graph.hpp"
#include "depner/lstm.hpp"
#include "depner/model_io.hpp"
#include "depner/synthetic.hpp"
#include "depner/trainer.hpp"
#include "op_cases.hpp"
#include "test_support.hpp"

namespace depner {
namespace {

// Pinned thresholds.
constexpr double kOpGradTolerance = 1e-4;
constexpr double kComposedGradTolerance = 1e-3;
constexpr double kGradSeconds = 60.0;
constexpr double kCrfRelTolerance = 1e-10;
constexpr double kCrfSeconds = 30.0;
constexpr double kOverfitRatio = 0.05;
constexpr double kAblationMinF1 = 0.95;
constexpr double kAblationMinMargin = 0.10;
constexpr double kAblationSeconds = 15 * 60.0;

constexpr std::uint64_t kDataSeed = 2024;
constexpr std::uint64_t kModelSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

// 1 -------------------------------------------------------------------------

double layer_grad_error(Rng& rng) {
  using testing::random_tensor;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    // LSTM cell from a non-zero state.
    LstmParams p = LstmParams::init(3, 4, rng);
    for (double& v : p.bias.data()) v = rng.symmetric(0.5);
    Tensor x = random_tensor({1, 3}, rng);
    LstmState s{random_tensor({1, 4}, rng), random_tensor({1, 4}, rng)};
    Tensor w = random_tensor({1, 4}, rng, 1.0, false);
    std::vector<Tensor> in{x, s.hidden, s.cell, p.input_weight, p.recurrent_weight, p.bias};
    worst = std::max(worst, ad::finite_diff_check(
                                [&](ad::Tape& t) {
                                  const LstmState n = lstm_cell(t, x, s, p);
                                  return ad::add(t, testing::weighted_sum(t, n.hidden, w),
                                                 testing::weighted_sum(t, n.cell, w));
                                },
                                in));

    // Bidirectional GCN on a random tree.
    const std::size_t n = 2 + rng.below(5);
    std::vector<std::size_t> heads(n);
    heads[0] = 0;
    for (std::size_t i = 1; i < n; ++i) heads[i] = rng.below(i);
    const DependencyGraph g = DependencyGraph::build(heads);
    GcnParams gp = GcnParams::init(3, 1 + rng.below(2), rng);
    for (auto* stack : {&gp.incoming, &gp.outgoing}) {
      for (GcnLayer& l : *stack) {
        for (double& v : l.bias.data()) v = rng.symmetric(0.5);
      }
    }
    Tensor h = random_tensor({n, 3}, rng);
    Tensor wg = random_tensor({n, 6}, rng, 1.0, false);
    std::vector<Tensor> gin{h};
    for (auto* stack : {&gp.incoming, &gp.outgoing}) {
      for (GcnLayer& l : *stack) {
        gin.push_back(l.weight);
        gin.push_back(l.bias);
      }
    }
    worst = std::max(worst, ad::finite_diff_check(
                                [&](ad::Tape& t) {
                                  return testing::weighted_sum(t, bigcn_forward(t, h, g, gp), wg);
                                },
                                gin));

    // CRF loss with respect to the scores.
    const std::size_t T = 1 + rng.below(5), L = 1 + rng.below(4);
    Tensor f = random_tensor({T, L}, rng, 2.0);
    Tensor a = random_tensor({L + 1, L}, rng, 1.0, false);
    const TransitionMatrix tm(a);
    TagPath gold(T);
    for (auto& tag : gold) tag = rng.below(L);
    worst = std::max(worst, ad::finite_diff_check(
                                [&](ad::Tape& t) { return crf_loss(t, f, gold, tm); }, f));
  }
  return worst;
}

double composed_grad_error() {
  ModelConfig c = testing::tiny_config();  // word 8, dense1 4, LSTM 6, GCN 6
  c.seed = 17;
  const TagSet tags = TagSet::from_entity_types({"LOC", "ORG", "PER"});  // L = 4
  c.output = tags.size();
  Rng rng(21);
  Tensor a = Tensor::zeros({tags.size() + 1, tags.size()});
  for (double& v : a.data()) v = rng.symmetric(1.0);
  const std::vector<std::string> words{"john", "lives", "in", "paris", "today"};
  Model m = init_model(c, tags, TransitionMatrix(a), testing::tiny_embeddings(words, 8),
                       {PosVocab(std::set<std::string>{"IN", "NN", "NNP", "VBZ"}),
                        CharVocab::from_words(words)});
  const Sentence s = testing::make_sentence({"John", "lives", "in", "Paris", "today"},
                                            {"NNP", "VBZ", "IN", "NNP", "NN"},
                                            {1, 1, 1, 2, 1}, {"PER", "O", "O", "LOC", "O"});
  std::vector<Tensor> params;
  for (const NamedTensor& p : m.parameters()) params.push_back(p.tensor);
  return ad::finite_diff_check(
      [&](ad::Tape& t) {
        return crf_loss(t, sentence_scores(t, m, s, false), gold_path(m, s), m.transitions);
      },
      params);
}

Outcome gradient_correctness() {
  Stopwatch clock;
  double worst_op = 0.0;
  std::string worst_name;
  Rng rng(1);
  for (const testing::OpCase& op : testing::op_cases()) {
    for (int trial = 0; trial < 100; ++trial) {
      auto [fn, inputs] = op.make(rng);
      const double err = ad::finite_diff_check(fn, inputs);
      if (err > worst_op) {
        worst_op = err;
        worst_name = op.name;
      }
    }
  }
  const double layers = layer_grad_error(rng);
  if (layers > worst_op) {
    worst_op = layers;
    worst_name = "layers";
  }
  const double composed = composed_grad_error();
  const double secs = clock.seconds();
  return {worst_op < kOpGradTolerance && composed < kComposedGradTolerance && secs < kGradSeconds,
          "worst op " + fmt("%.2e", worst_op) + " (" + worst_name + ") < 1e-4, composed " +
              fmt("%.2e", composed) + " < 1e-3, " + fmt("%.1f", secs) + " s < 60 s"};
}

// 2 -------------------------------------------------------------------------

Outcome crf_oracle() {
  Stopwatch clock;
  Rng rng(2);
  std::size_t path_mismatch = 0;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t T = 1 + rng.below(6), L = 1 + rng.below(5);
    Tensor f = testing::random_tensor({T, L}, rng, 3.0, false);
    Tensor a = testing::random_tensor({L + 1, L}, rng, 2.0, false);
    const TransitionMatrix tm(a);
    const double best = path_score(f, oracle::brute_force_best_path(f, tm), tm);
    if (path_score(f, viterbi(f, tm), tm) != best) ++path_mismatch;
    const double exact = oracle::brute_force_log_partition(f, tm);
    worst_rel = std::max(worst_rel, std::abs(log_partition(f, tm) - exact) / std::abs(exact));
  }
  const double secs = clock.seconds();
  return {path_mismatch == 0 && worst_rel < kCrfRelTolerance && secs < kCrfSeconds,
          std::to_string(path_mismatch) + "/200 Viterbi score mismatches, logZ rel err " +
              fmt("%.2e", worst_rel) + " < 1e-10, " + fmt("%.2f", secs) + " s < 30 s"};
}

// 3 -------------------------------------------------------------------------

// Nodes whose K-hop neighbourhood along `dir` contains u, from the heads alone.
std::set<std::size_t> reachable(const std::vector<std::size_t>& heads, std::size_t u,
                                std::size_t k, EdgeDirection dir) {
  auto reads = [&](std::size_t v, std::size_t w) {
    if (v == w) return true;
    return dir == EdgeDirection::kIncoming ? heads[v] == w && heads[v] != v
                                           : heads[w] == v && heads[w] != w;
  };
  std::set<std::size_t> frontier{u};
  for (std::size_t step = 0; step < k; ++step) {
    std::set<std::size_t> next;
    for (std::size_t v = 0; v < heads.size(); ++v) {
      for (std::size_t w : frontier) {
        if (reads(v, w)) next.insert(v);
      }
    }
    frontier = next;
  }
  return frontier;
}

Outcome gcn_locality() {
  const std::vector<std::size_t> heads{0, 0, 1, 2, 3, 4};
  const DependencyGraph g = DependencyGraph::build(heads);
  Rng rng(3);
  // Positive weights, biases and inputs keep every ReLU open, so any
  // dependency shows up as a change.
  auto positive = [&](Shape shape) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data()) v = 0.1 + 0.9 * rng.uniform();
    return t;
  };
  std::size_t checks = 0, mismatches = 0;
  for (std::size_t k : {1u, 2u, 3u}) {
    for (EdgeDirection dir : {EdgeDirection::kIncoming, EdgeDirection::kOutgoing}) {
      std::vector<GcnLayer> layers;
      for (std::size_t i = 0; i < k; ++i) layers.push_back({positive({4, 4}), positive({4})});
      const Tensor h = positive({6, 4});
      ad::Tape tape;
      const Tensor base = gcn_stack(tape, h, g, dir, layers);
      for (std::size_t u = 0; u < 6; ++u) {
        Tensor moved = h.clone();
        for (std::size_t c = 0; c < 4; ++c) moved.at(u, c) += 0.5;
        const Tensor out = gcn_stack(tape, moved, g, dir, layers);
        const auto expected = reachable(heads, u, k, dir);
        for (std::size_t v = 0; v < 6; ++v) {
          bool changed = false;
          for (std::size_t c = 0; c < 4; ++c) changed |= out.at(v, c) != base.at(v, c);
          ++checks;
          if (changed != (expected.count(v) == 1)) ++mismatches;
        }
      }
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in " +
                               std::to_string(checks) + " (K, direction, u, v) checks"};
}

// 4 -------------------------------------------------------------------------

Outcome transpose_symmetry() {
  Rng rng(4);
  int failures = 0;
  const int trials = 25;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<std::size_t> order(n), heads(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    heads[order[0]] = order[0];
    for (std::size_t i = 1; i < n; ++i) heads[order[i]] = order[rng.below(i)];
    const DependencyGraph g = DependencyGraph::build(heads);
    const GcnParams params = GcnParams::init(160, 1 + rng.below(2), rng);
    GcnParams swapped;
    swapped.incoming = params.outgoing;
    swapped.outgoing = params.incoming;
    const Tensor h = testing::random_tensor({n, 160}, rng, 1.0, false);
    ad::Tape tape;
    const Tensor a = bigcn_forward(tape, h, g, params);
    const Tensor b = bigcn_forward(tape, h, g.reversed(), swapped);
    const bool ok = a.shape() == Shape{n, 320} &&
                    testing::bitwise_equal(ad::slice_cols(tape, a, 0, 160),
                                           ad::slice_cols(tape, b, 160, 320)) &&
                    testing::bitwise_equal(ad::slice_cols(tape, a, 160, 320),
                                           ad::slice_cols(tape, b, 0, 160));
    if (!ok) ++failures;
  }
  return {failures == 0, std::to_string(trials - failures) + "/" + std::to_string(trials) +
                             " random trees with bitwise-swapped 160-wide halves"};
}

// 5 -------------------------------------------------------------------------

Outcome transition_estimation() {
  // Tags O = 0, LOC = 1, PER = 2.
  //   [PER PER O]   [O LOC]   [LOC O O]
  const Corpus corpus = testing::make_corpus({
      testing::make_sentence({"Ann", "Lee", "sang"}, {"NNP", "NNP", "VBD"}, {2, 0, 2},
                             {"PER", "PER", "O"}),
      testing::make_sentence({"in", "Oslo"}, {"IN", "NNP"}, {0, 0}, {"O", "LOC"}),
      testing::make_sentence({"Rome", "is", "old"}, {"NNP", "VBZ", "JJ"}, {1, 1, 1},
                             {"LOC", "O", "O"}),
  });
  // Row START: one of each, 3 in total. Row PER: PER 1, O 1. Row O: LOC 1,
  // O 1. Row LOC: O 1. Each entry is (count + 1) / (row total + 3).
  const double hand[4][3] = {
      {std::log(2.0 / 5.0), std::log(2.0 / 5.0), std::log(1.0 / 5.0)},  // O
      {std::log(2.0 / 4.0), std::log(1.0 / 4.0), std::log(1.0 / 4.0)},  // LOC
      {std::log(2.0 / 5.0), std::log(1.0 / 5.0), std::log(2.0 / 5.0)},  // PER
      {std::log(2.0 / 6.0), std::log(2.0 / 6.0), std::log(2.0 / 6.0)},  // START
  };
  const std::vector<std::string> words{"ann", "lee", "sang", "in", "oslo", "rome", "is", "old"};
  ModelConfig cfg = testing::tiny_config();
  Model m = build_model_from_corpus(cfg, corpus, testing::tiny_embeddings(words, cfg.word_dim));
  bool exact = m.tags.labels() == std::vector<std::string>{"O", "LOC", "PER"};
  for (std::size_t i = 0; i < 4 && exact; ++i) {
    for (std::size_t j = 0; j < 3; ++j) exact &= m.transitions(i, j) == hand[i][j];
  }
  // The single-sentence example: [PER PER O] with L = 2.
  const TransitionMatrix single = TransitionMatrix::estimate(std::vector<TagPath>{{1, 1, 0}}, 2);
  exact &= single(1, 1) == std::log(2.0 / 4.0);

  const Tensor before = m.transitions.scores().clone();
  AdamState adam(m);
  Rng rng(5);
  for (int step = 0; step < 100; ++step) train_step(m, corpus.sentences[step % 3], adam, rng);
  const bool constant = testing::bitwise_equal(m.transitions.scores(), before);
  return {exact && constant, std::string(exact ? "hand-counted table matches exactly"
                                               : "hand-counted table differs") +
                                 ", " +
                                 (constant ? "bit-identical after 100 steps"
                                           : "changed during training")};
}

// 6 -------------------------------------------------------------------------

Outcome overfit() {
  const Corpus c = testing::make_corpus({testing::make_sentence(
      {"John", "visited", "Paris"}, {"NNP", "VBD", "NNP"}, {1, 1, 1}, {"PER", "O", "LOC"})});
  const ModelConfig cfg;  // reference widths, lr 1e-4
  Model m = build_model_from_corpus(
      cfg, c, testing::tiny_embeddings({"john", "visited", "paris"}, cfg.word_dim));
  const Sentence& s = c.sentences[0];
  auto loss = [&] {
    ad::Tape t;
    return crf_loss(t, sentence_scores(t, m, s, false), gold_path(m, s), m.transitions).data()[0];
  };
  const double initial = loss();
  AdamState adam(m);
  Rng rng(6);
  for (int step = 0; step < 200; ++step) train_step(m, s, adam, rng);
  const double final_loss = loss();
  const bool gold = predict_labels(m, s) == s.entities();
  return {final_loss < kOverfitRatio * initial && gold,
          "loss " + fmt("%.4f", initial) + " -> " + fmt("%.6f", final_loss) + " (" +
              fmt("%.2f", 100.0 * final_loss / initial) + "% < 5%), " +
              (gold ? "gold tags reproduced" : "gold tags NOT reproduced")};
}

// 7 and 9 -------------------------------------------------------------------

struct AblationRun {
  EvalReport gcn;
  EvalReport baseline;
  std::string gcn_bytes;
  std::string baseline_bytes;
  double seconds = 0.0;
};

AblationRun run_ablation() {
  Stopwatch clock;
  const Corpus corpus = synthetic::generate(2000, kDataSeed);
  const CorpusSplit split = split_corpus(corpus, 0.8, 0.1, 0.1, kDataSeed);
  auto words = std::make_shared<const EmbeddingTable>(
      random_embeddings(synthetic::vocabulary(), 32, kDataSeed));
  ModelConfig cfg;
  cfg.feature_mode = FeatureMode::kWord;
  cfg.word_dim = 32;
  cfg.dense1 = 32;
  cfg.lstm_hidden = 32;
  cfg.dense2 = 32;
  cfg.gcn_dim = 32;
  cfg.dense_final = 32;
  cfg.seed = kModelSeed;

  AblationRun run;
  for (bool use_gcn : {true, false}) {
    cfg.use_gcn = use_gcn;
    Model m = build_model_from_corpus(cfg, split.train, words);
    TrainOptions opts;
    opts.epochs = 30;
    opts.shuffle_seed = kModelSeed;
    opts.on_epoch = [&](const EpochRecord& r) {
      std::fprintf(stderr, "  [%s] epoch %2zu loss %.4f dev_f1 %.4f\n",
                   use_gcn ? "gcn" : "baseline", r.epoch, r.mean_loss, r.dev_f1.value_or(0.0));
    };
    train(m, split.train, &split.dev, opts);
    (use_gcn ? run.gcn : run.baseline) = evaluate(m, split.test);
    (use_gcn ? run.gcn_bytes : run.baseline_bytes) = serialize_model(m);
  }
  run.seconds = clock.seconds();
  return run;
}

AblationRun& first_ablation() {
  static AblationRun run = run_ablation();
  return run;
}

Outcome synthetic_ablation() {
  const AblationRun& r = first_ablation();
  const double margin = r.gcn.f1 - r.baseline.f1;
  return {r.gcn.f1 >= kAblationMinF1 && margin >= kAblationMinMargin &&
              r.seconds < kAblationSeconds,
          "test F1 gcn " + fmt("%.4f", r.gcn.f1) + " >= 0.95, baseline " +
              fmt("%.4f", r.baseline.f1) + ", margin " + fmt("%.1f", 100.0 * margin) +
              " points >= 10, " + fmt("%.0f", r.seconds) + " s < 900 s"};
}

Outcome determinism() {
  const AblationRun& a = first_ablation();
  const AblationRun b = run_ablation();
  const bool models = a.gcn_bytes == b.gcn_bytes && a.baseline_bytes == b.baseline_bytes;
  const bool reports = a.gcn.to_json() == b.gcn.to_json() &&
                       a.baseline.to_json() == b.baseline.to_json();
  return {models && reports, std::string(models ? "model files bit-identical"
                                                : "model files differ") +
                                 ", " + (reports ? "reports identical" : "reports differ")};
}

// 8 -------------------------------------------------------------------------

Outcome skip_rule() {
  const std::vector<LabelSeq> valid{{"PER", "O", "O"}};
  const std::vector<LabelSeq> skipped{{"LOC", "LOC", "O", "ORG"}};
  const EvalReport r = score(valid, valid, skipped);
  const bool ok = r.true_positives == 1 && r.false_positives == 0 && r.false_negatives == 2 &&
                  r.recall == 1.0 / 3.0;
  return {ok, "tp " + std::to_string(r.true_positives) + ", fp " +
                  std::to_string(r.false_positives) + ", fn " +
                  std::to_string(r.false_negatives) + ", recall " + fmt("%.17g", r.recall)};
}

// 10 ------------------------------------------------------------------------

Outcome round_trips() {
  testing::TempDir dir;
  Corpus corpus = synthetic::generate(200, 10);
  corpus.sentences.push_back(testing::make_sentence({"Zoë", "naïve", "東京"}, {"NNP", "JJ", "NNP"},
                                                    {1, 1, 1}, {"PER", "O", "LOC"}));
  corpus.reindex();
  write_corpus(dir.file("c1"), corpus);
  write_corpus(dir.file("c2"), read_corpus(dir.file("c1")));
  write_corpus(dir.file("c3"), read_corpus(dir.file("c2")));
  const std::string c1 = testing::read_text(dir.file("c1"));
  const bool corpus_ok = !c1.empty() && c1 == testing::read_text(dir.file("c2")) &&
                         testing::read_text(dir.file("c2")) == testing::read_text(dir.file("c3"));

  std::vector<std::string> vocab = synthetic::vocabulary();
  for (const char* w : {"zoë", "naïve", "東京"}) vocab.push_back(w);
  auto words = testing::tiny_embeddings(vocab, 8);
  Model m = build_model_from_corpus(testing::tiny_config(), corpus, words);
  TrainOptions opts;
  opts.epochs = 1;
  train(m, corpus, nullptr, opts);
  save_model(dir.file("m1"), m);
  save_model(dir.file("m2"), load_model(dir.file("m1"), words));
  save_model(dir.file("m3"), load_model(dir.file("m2"), words));
  const std::string m1 = testing::read_text(dir.file("m1"));
  const bool model_ok = !m1.empty() && m1 == testing::read_text(dir.file("m2")) &&
                        testing::read_text(dir.file("m2")) == testing::read_text(dir.file("m3"));
  return {corpus_ok && model_ok,
          std::string(corpus_ok ? "corpus writes identical" : "corpus writes differ") + ", " +
              (model_ok ? "model writes identical" : "model writes differ")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace depner

int main(int argc, char** argv) {
  using namespace depner;
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "CRF oracle equivalence", crf_oracle},
      {3, "GCN locality", gcn_locality},
      {4, "transpose symmetry", transpose_symmetry},
      {5, "transition estimation", transition_estimation},
      {6, "overfit sanity", overfit},
      {7, "synthetic ablation", synthetic_ablation},
      {8, "skip-rule accounting", skip_rule},
      {9, "determinism", determinism},
      {10, "round-trips", round_trips},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
