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

// Column corpus format.
//
// UTF-8 text, one token per line with five tab-separated fields
//
//   index <TAB> surface <TAB> pos <TAB> head <TAB> entity
//
// Indices are 0-based and consecutive within a sentence. The root token is
// its own head. The entity field is a bare label with no BIO prefix; "O"
// marks tokens outside any entity. Sentences are separated by blank lines.
// For tagging, the entity column may be absent.
//
// Reading never fails on content. A sentence whose columns do not line up
// (wrong field count, index gap, non-numeric or out-of-range head) or whose
// heads do not form a tree is kept with valid = false and counted as
// skipped.

#ifndef DEPNER_CORPUS_HPP_
#define DEPNER_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace depner {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Token {
  std::string surface;
  std::string pos;
  std::size_t head = 0;
  std::string entity = "O";
};

struct Sentence {
  std::vector<Token> tokens;
  bool valid = true;
  // Why the sentence was rejected; empty when valid.
  std::string problem;
  // The sentence's lines as read, for passing invalid input through.
  std::vector<std::string> raw_lines;

  std::size_t size() const { return tokens.size(); }
  std::vector<std::size_t> heads() const;
  std::vector<std::string> entities() const;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::size_t skipped_count = 0;
  // Labels and PoS tags observed in valid sentences.
  std::set<std::string> tag_inventory;
  std::set<std::string> pos_inventory;

  // Recomputes skipped_count and both inventories from the sentences.
  void reindex();
  std::vector<const Sentence*> valid_sentences() const;
};

enum class EntityColumn { kRequired, kOptional };

Corpus parse_corpus(std::istream& in,
                    EntityColumn entities = EntityColumn::kRequired);
// Throws CorpusError if the file cannot be opened.
Corpus read_corpus(const std::string& path,
                   EntityColumn entities = EntityColumn::kRequired);

// Writes valid sentences in the column format; invalid ones are omitted.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus(const std::string& path, const Corpus& corpus);
// One sentence, with the entity column taken from `entities`.
void write_sentence(std::ostream& out, const Sentence& sentence,
                    const std::vector<std::string>& entities);

// Deterministic sentence-level partition into train/dev/test. Part sizes are
// floor(f_i * n) with the remainder handed out one sentence at a time to the
// parts with the largest fractional shares, so each size is within one of
// its exact proportion. Throws std::invalid_argument unless the fractions
// are non-negative and sum to 1.
struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};
CorpusSplit split_corpus(const Corpus& corpus, double train_fraction,
                         double dev_fraction, double test_fraction,
                         std::uint64_t seed);

}  // namespace depner

#endif  // DEPNER_CORPUS_HPP_
