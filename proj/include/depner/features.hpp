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

// Per-token input vectors.
//
// A token's input is the concatenation, in this order, of
//   word       pretrained embedding row, frozen
//   pos        trainable PoS-tag embedding            (WORD_POS and up)
//   morphology character Bi-LSTM summary, projected    (WORD_POS_MORPH)

#ifndef DEPNER_FEATURES_HPP_
#define DEPNER_FEATURES_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depner/autodiff.hpp"
#include "depner/corpus.hpp"
#include "depner/lstm.hpp"
#include "depner/random.hpp"

namespace depner {

class EmbeddingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pretrained word vectors. Immutable after construction.
class EmbeddingTable {
 public:
  static constexpr std::string_view kFallbackToken = "entity";

  // Duplicate tokens keep their first row. Throws EmbeddingError when the
  // fallback token is missing or a row has the wrong width.
  EmbeddingTable(std::vector<std::string> tokens,
                 std::vector<std::vector<double>> rows);

  std::size_t size() const { return tokens_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool contains(std::string_view token) const;

  // Row of the lowercased token, or of "entity" when it is not in the table.
  std::span<const double> lookup(std::string_view token) const;
  std::size_t row_index(std::string_view token) const;
  // The full V x dim matrix; it never requires a gradient.
  const Tensor& vectors() const { return vectors_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  Tensor vectors_;
  std::size_t dim_ = 0;
  std::size_t fallback_ = 0;
};

// Reads whitespace-separated "token v1 ... v_dim" lines. Blank lines are
// ignored. Throws EmbeddingError naming the 1-based line of a malformed row,
// or when the file is unreadable or lacks "entity".
EmbeddingTable load_embeddings(const std::string& path, std::size_t dim = 300);
void write_embeddings(const std::string& path, const EmbeddingTable& table);

// Random vectors, uniform in (-1, 1), for the given words plus "entity".
EmbeddingTable random_embeddings(const std::vector<std::string>& words,
                                 std::size_t dim, std::uint64_t seed);

std::string ascii_lowercase(std::string_view text);
// Decodes UTF-8; each byte of a malformed sequence becomes U+FFFD.
std::vector<char32_t> decode_utf8(std::string_view text);

enum class FeatureMode { kWord, kWordPos, kWordPosMorph };

// Accepts "word", "word+pos", "word+pos+morph" (and the upper-case enum
// spellings WORD, WORD_POS, WORD_POS_MORPH). Throws std::invalid_argument.
FeatureMode parse_feature_mode(std::string_view text);
std::string feature_mode_name(FeatureMode mode);

// PoS tag -> row; row 0 is reserved for tags never seen in training.
class PosVocab {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  PosVocab() : tags_{std::string(kUnknown)} {}
  explicit PosVocab(const std::set<std::string>& observed);
  // Restores a saved vocabulary; tags[0] must be the unknown marker.
  static PosVocab from_ordered(std::vector<std::string> tags);

  std::size_t size() const { return tags_.size(); }
  std::size_t index(std::string_view tag) const;
  const std::vector<std::string>& tags() const { return tags_; }

 private:
  std::vector<std::string> tags_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Character -> row; row 0 is the unknown character.
class CharVocab {
 public:
  CharVocab() = default;
  // Collects every character of the given words.
  static CharVocab from_words(const std::vector<std::string>& words);
  static CharVocab from_ordered(std::vector<char32_t> chars);

  std::size_t size() const { return chars_.size() + 1; }
  std::size_t index(char32_t c) const;
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::vector<char32_t> chars_;
  std::map<char32_t, std::size_t> index_;
};

struct MorphDims {
  std::size_t char_dim = 15;
  std::size_t char_hidden = 20;
  std::size_t output = 20;
};

// Character-level bidirectional LSTM summary of a word's first
// kMaxChars characters: final forward state and final backward state,
// concatenated, then a linear projection.
class MorphEncoder {
 public:
  static constexpr std::size_t kMaxChars = 12;

  MorphEncoder() = default;
  MorphEncoder(CharVocab vocab, MorphDims dims, Rng& rng);

  // 1 x dims.output row on the tape.
  Tensor encode(ad::Tape& tape, std::string_view word) const;
  // The character indices encode() reads: at most kMaxChars, never empty.
  std::vector<std::size_t> char_indices(std::string_view word) const;

  const CharVocab& vocab() const { return vocab_; }
  const MorphDims& dims() const { return dims_; }

  // Named trainable tensors, for persistence and the optimiser.
  Tensor char_table;
  LstmParams forward;
  LstmParams backward;
  Tensor projection;       // 2*char_hidden x output
  Tensor projection_bias;  // output

 private:
  CharVocab vocab_;
  MorphDims dims_;
};

struct FeatureDims {
  std::size_t word = 300;
  std::size_t pos = 15;
  MorphDims morph;
};

std::size_t input_width(FeatureMode mode, const FeatureDims& dims);

// Builds input rows for tokens. Holds the frozen word table by shared
// pointer and owns the trainable PoS table and morphology encoder.
class FeatureExtractor {
 public:
  FeatureExtractor() = default;
  FeatureExtractor(FeatureMode mode, FeatureDims dims,
                   std::shared_ptr<const EmbeddingTable> words, PosVocab pos,
                   CharVocab chars, Rng& rng);

  FeatureMode mode() const { return mode_; }
  std::size_t width() const { return input_width(mode_, dims_); }
  const FeatureDims& dims() const { return dims_; }

  // 1 x width() row for a single token. Total over any strings.
  Tensor token_vector(ad::Tape& tape, std::string_view word,
                      std::string_view pos) const;
  // T x width() matrix for a sentence, one row per token.
  Tensor sentence_matrix(ad::Tape& tape, const Sentence& sentence) const;

  const EmbeddingTable& words() const { return *words_; }
  void set_words(std::shared_ptr<const EmbeddingTable> words);
  const PosVocab& pos_vocab() const { return pos_vocab_; }

  Tensor pos_table;  // pos_vocab.size() x dims.pos
  MorphEncoder morph;

 private:
  Tensor word_rows(std::span<const std::string_view> words) const;

  FeatureMode mode_ = FeatureMode::kWord;
  FeatureDims dims_;
  std::shared_ptr<const EmbeddingTable> words_;
  PosVocab pos_vocab_;
};

}  // namespace depner

#endif  // DEPNER_FEATURES_HPP_
