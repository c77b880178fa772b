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

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "depner/corpus.hpp"
#include "depner/random.hpp"
#include "test_support.hpp"

namespace depner {
namespace {

Corpus parse_text(const std::string& text,
                  EntityColumn entities = EntityColumn::kRequired) {
  std::istringstream in(text);
  return parse_corpus(in, entities);
}

std::string to_text(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

constexpr const char* kTwoSentences =
    "0\tJohn\tNNP\t1\tPER\n"
    "1\truns\tVBZ\t1\tO\n"
    "\n"
    "0\tin\tIN\t1\tO\n"
    "1\tParis\tNNP\t1\tLOC\n"
    "2\ttoday\tNN\t1\tO\n";

TEST(ReadCorpus, TwoWellFormedSentences) {
  const Corpus c = parse_text(kTwoSentences);
  ASSERT_EQ(c.sentences.size(), 2u);
  EXPECT_EQ(c.skipped_count, 0u);
  EXPECT_TRUE(c.sentences[0].valid);
  EXPECT_TRUE(c.sentences[1].valid);
  EXPECT_EQ(c.sentences[1].size(), 3u);
  EXPECT_EQ(c.sentences[1].tokens[1].surface, "Paris");
  EXPECT_EQ(c.sentences[1].tokens[1].pos, "NNP");
  EXPECT_EQ(c.sentences[1].heads(), (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(c.tag_inventory, (std::set<std::string>{"LOC", "O", "PER"}));
  EXPECT_EQ(c.pos_inventory, (std::set<std::string>{"IN", "NN", "NNP", "VBZ"}));
}

TEST(ReadCorpus, CycleInHeadsIsSkipped) {
  const Corpus c = parse_text(
      "0\ta\tDT\t1\tO\n"
      "1\tb\tNN\t0\tO\n");
  ASSERT_EQ(c.sentences.size(), 1u);
  EXPECT_FALSE(c.sentences[0].valid);
  EXPECT_FALSE(c.sentences[0].problem.empty());
  EXPECT_EQ(c.skipped_count, 1u);
  EXPECT_TRUE(c.valid_sentences().empty());
}

TEST(ReadCorpus, MisalignedSentencesAreSkippedNotFatal) {
  const std::string bad[] = {
      "0\ta\tDT\t0\n",                         // missing entity column
      "0\ta\tDT\t0\tO\n2\tb\tNN\t0\tO\n",      // index gap
      "0\ta\tDT\tx\tO\n",                      // non-numeric head
      "0\ta\tDT\t5\tO\n",                      // head out of range
      "0\ta\tDT\t0\tO\n1\tb\tNN\t1\tO\n",      // two roots
      "0\ta\tDT\t0\tO\textra\n",               // too many fields
  };
  for (const std::string& text : bad) {
    const Corpus c = parse_text(std::string(kTwoSentences) + "\n" + text);
    ASSERT_EQ(c.sentences.size(), 3u) << text;
    EXPECT_EQ(c.skipped_count, 1u) << text;
    EXPECT_FALSE(c.sentences[2].valid) << text;
    EXPECT_FALSE(c.sentences[2].raw_lines.empty()) << text;
  }
}

TEST(ReadCorpus, SkippedSentencesDoNotFeedInventories) {
  const Corpus c = parse_text("0\ta\tXX\t1\tMISC\n1\tb\tYY\t0\tO\n");
  EXPECT_TRUE(c.tag_inventory.empty());
  EXPECT_TRUE(c.pos_inventory.empty());
}

TEST(ReadCorpus, OptionalEntityColumn) {
  const Corpus c = parse_text("0\ta\tDT\t1\n1\tb\tNN\t1\n", EntityColumn::kOptional);
  ASSERT_EQ(c.sentences.size(), 1u);
  EXPECT_TRUE(c.sentences[0].valid);
  EXPECT_EQ(c.sentences[0].entities(), (std::vector<std::string>{"O", "O"}));
}

TEST(ReadCorpus, ToleratesCrlfAndRepeatedBlankLines) {
  const Corpus c = parse_text("\n\n0\ta\tDT\t0\tO\r\n\r\n\n\n0\tb\tNN\t0\tLOC\n\n");
  ASSERT_EQ(c.sentences.size(), 2u);
  EXPECT_EQ(c.skipped_count, 0u);
  EXPECT_EQ(c.sentences[1].tokens[0].entity, "LOC");
}

TEST(ReadCorpus, EmptyInputGivesEmptyCorpus) {
  const Corpus c = parse_text("");
  EXPECT_TRUE(c.sentences.empty());
  EXPECT_EQ(c.skipped_count, 0u);
}

TEST(ReadCorpus, MissingFileThrows) {
  EXPECT_THROW(read_corpus("/nonexistent/depner/corpus.tsv"), CorpusError);
}

TEST(ReadCorpus, TotalOverArbitraryBytes) {
  Rng rng(11);
  const char alphabet[] = {'0', '1', '2', '\t', '\n', '\n', 'a', 'O', '-', ' ', '\r', '\xff', '\0'};
  for (int trial = 0; trial < 500; ++trial) {
    std::string bytes;
    const std::size_t n = rng.below(200);
    for (std::size_t i = 0; i < n; ++i) {
      bytes.push_back(trial % 2 == 0 ? alphabet[rng.below(sizeof(alphabet))]
                                     : static_cast<char>(rng.below(256)));
    }
    Corpus c;
    ASSERT_NO_THROW(c = parse_text(bytes));
    std::size_t invalid = 0;
    for (const Sentence& s : c.sentences) {
      if (!s.valid) ++invalid;
      if (s.valid) {
        for (const Token& t : s.tokens) EXPECT_LT(t.head, s.size());
      }
    }
    EXPECT_EQ(c.skipped_count, invalid);
  }
}

TEST(WriteCorpus, RoundTripIsIdentityOnValidSentences) {
  const Corpus c = parse_text(std::string(kTwoSentences) + "\n0\ta\tDT\t1\tO\n1\tb\tNN\t0\tO\n");
  const std::string first = to_text(c);
  const Corpus back = parse_text(first);
  EXPECT_EQ(back.skipped_count, 0u);
  ASSERT_EQ(back.sentences.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const Sentence& a = c.sentences[i];
    const Sentence& b = back.sentences[i];
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_EQ(a.tokens[j].surface, b.tokens[j].surface);
      EXPECT_EQ(a.tokens[j].pos, b.tokens[j].pos);
      EXPECT_EQ(a.tokens[j].head, b.tokens[j].head);
      EXPECT_EQ(a.tokens[j].entity, b.tokens[j].entity);
    }
  }
  EXPECT_EQ(to_text(back), first);
}

TEST(WriteCorpus, FileRoundTripIsByteStable) {
  testing::TempDir dir;
  const Corpus c = parse_text(kTwoSentences);
  write_corpus(dir.file("a.tsv"), c);
  write_corpus(dir.file("b.tsv"), read_corpus(dir.file("a.tsv")));
  write_corpus(dir.file("c.tsv"), read_corpus(dir.file("b.tsv")));
  EXPECT_EQ(testing::read_text(dir.file("b.tsv")), testing::read_text(dir.file("c.tsv")));
  EXPECT_EQ(testing::read_text(dir.file("a.tsv")), testing::read_text(dir.file("b.tsv")));
}

TEST(WriteSentence, UsesGivenEntities) {
  const Corpus c = parse_text(kTwoSentences);
  std::ostringstream out;
  write_sentence(out, c.sentences[0], {"O", "LOC"});
  EXPECT_EQ(out.str(), "0\tJohn\tNNP\t1\tO\n1\truns\tVBZ\t1\tLOC\n\n");
}

Corpus numbered_corpus(std::size_t n) {
  std::vector<Sentence> sentences;
  for (std::size_t i = 0; i < n; ++i) {
    sentences.push_back(testing::make_sentence({"w" + std::to_string(i)}, {"NN"}, {0}, {"O"}));
  }
  return testing::make_corpus(std::move(sentences));
}

std::multiset<std::string> surfaces(const Corpus& c) {
  std::multiset<std::string> out;
  for (const Sentence& s : c.sentences) out.insert(s.tokens[0].surface);
  return out;
}

TEST(SplitCorpus, EverythingToTrain) {
  const Corpus c = numbered_corpus(17);
  const CorpusSplit split = split_corpus(c, 1.0, 0.0, 0.0, 3);
  EXPECT_EQ(split.train.sentences.size(), 17u);
  EXPECT_TRUE(split.dev.sentences.empty());
  EXPECT_TRUE(split.test.sentences.empty());
}

TEST(SplitCorpus, DisjointExhaustiveAndNearProportional) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rng.below(300);
    const double a = rng.uniform();
    const double b = (1.0 - a) * rng.uniform();
    const double fr[3] = {a, b, 1.0 - a - b};
    const Corpus c = numbered_corpus(n);
    const CorpusSplit split = split_corpus(c, fr[0], fr[1], fr[2], trial);
    const Corpus* parts[3] = {&split.train, &split.dev, &split.test};
    std::multiset<std::string> all;
    for (int k = 0; k < 3; ++k) {
      EXPECT_LE(std::abs(static_cast<double>(parts[k]->sentences.size()) - fr[k] * n), 1.0);
      const auto s = surfaces(*parts[k]);
      all.insert(s.begin(), s.end());
    }
    EXPECT_EQ(all, surfaces(c));
    EXPECT_EQ(std::set<std::string>(all.begin(), all.end()).size(), n);
  }
}

TEST(SplitCorpus, SeedDeterministic) {
  const Corpus c = numbered_corpus(40);
  const CorpusSplit a = split_corpus(c, 0.8, 0.1, 0.1, 9);
  const CorpusSplit b = split_corpus(c, 0.8, 0.1, 0.1, 9);
  const CorpusSplit other = split_corpus(c, 0.8, 0.1, 0.1, 10);
  EXPECT_EQ(to_text(a.train), to_text(b.train));
  EXPECT_EQ(to_text(a.test), to_text(b.test));
  EXPECT_NE(to_text(a.train), to_text(other.train));
}

TEST(SplitCorpus, RejectsDegenerateFractions) {
  const Corpus c = numbered_corpus(5);
  EXPECT_THROW(split_corpus(c, 0.5, 0.5, 0.5, 1), std::invalid_argument);
  EXPECT_THROW(split_corpus(c, 1.2, -0.2, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(split_corpus(c, NAN, 0.5, 0.5, 1), std::invalid_argument);
}

}  // namespace
}  // namespace depner
