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

#include "depner/features.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "depner/init.hpp"

namespace depner {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string ascii_lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(kReplacement);
      ++i;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens,
                               std::vector<std::vector<double>> rows) {
  if (tokens.size() != rows.size()) {
    throw EmbeddingError("embedding table has " + std::to_string(tokens.size()) +
                         " tokens but " + std::to_string(rows.size()) + " rows");
  }
  dim_ = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (rows[i].size() != dim_) {
      throw EmbeddingError("embedding for '" + tokens[i] + "' has " +
                           std::to_string(rows[i].size()) +
                           " values, expected " + std::to_string(dim_));
    }
    if (!index_.emplace(tokens[i], tokens_.size()).second) continue;
    tokens_.push_back(std::move(tokens[i]));
    values.insert(values.end(), rows[i].begin(), rows[i].end());
  }
  auto it = index_.find(std::string(kFallbackToken));
  if (it == index_.end()) {
    throw EmbeddingError("embedding table lacks the fallback token 'entity'");
  }
  fallback_ = it->second;
  vectors_ = Tensor::from({tokens_.size(), dim_}, std::move(values));
}

bool EmbeddingTable::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::size_t EmbeddingTable::row_index(std::string_view token) const {
  auto it = index_.find(ascii_lowercase(token));
  return it == index_.end() ? fallback_ : it->second;
}

std::span<const double> EmbeddingTable::lookup(std::string_view token) const {
  return vectors_.data().subspan(row_index(token) * dim_, dim_);
}

EmbeddingTable load_embeddings(const std::string& path, std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmbeddingError("cannot open embeddings file '" + path + "'");
  std::vector<std::string> tokens;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw EmbeddingError(path + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(dim + 1) + " fields, found " +
                           std::to_string(fields.size()));
    }
    std::vector<double> row(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const std::string_view f = fields[k + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[k]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw EmbeddingError(path + ":" + std::to_string(line_no) +
                             ": malformed number '" + std::string(f) + "'");
      }
    }
    tokens.emplace_back(fields[0]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw EmbeddingError("embeddings file '" + path + "' has no vectors");
  }
  return EmbeddingTable(std::move(tokens), std::move(rows));
}

void write_embeddings(const std::string& path, const EmbeddingTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EmbeddingError("cannot write embeddings file '" + path + "'");
  const auto& tokens = table.tokens();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out << tokens[i];
    for (double v : table.vectors().data().subspan(i * table.dim(), table.dim())) {
      out << ' ' << format_double(v);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw EmbeddingError("failed writing embeddings file '" + path + "'");
}

EmbeddingTable random_embeddings(const std::vector<std::string>& words,
                                 std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> tokens{std::string(EmbeddingTable::kFallbackToken)};
  tokens.insert(tokens.end(), words.begin(), words.end());
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::vector<double> row(dim);
    for (double& v : row) v = rng.symmetric(1.0);
    rows.push_back(std::move(row));
  }
  return EmbeddingTable(std::move(tokens), std::move(rows));
}

// ---------------------------------------------------------------------------
// Modes and vocabularies

FeatureMode parse_feature_mode(std::string_view text) {
  const std::string t = ascii_lowercase(text);
  if (t == "word") return FeatureMode::kWord;
  if (t == "word+pos" || t == "word_pos") return FeatureMode::kWordPos;
  if (t == "word+pos+morph" || t == "word_pos_morph") {
    return FeatureMode::kWordPosMorph;
  }
  throw std::invalid_argument("unknown feature mode '" + std::string(text) +
                              "' (expected word, word+pos or word+pos+morph)");
}

std::string feature_mode_name(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kWord:
      return "word";
    case FeatureMode::kWordPos:
      return "word+pos";
    case FeatureMode::kWordPosMorph:
      return "word+pos+morph";
  }
  throw std::invalid_argument("unknown feature mode");
}

std::size_t input_width(FeatureMode mode, const FeatureDims& dims) {
  switch (mode) {
    case FeatureMode::kWord:
      return dims.word;
    case FeatureMode::kWordPos:
      return dims.word + dims.pos;
    case FeatureMode::kWordPosMorph:
      return dims.word + dims.pos + dims.morph.output;
  }
  throw std::invalid_argument("unknown feature mode");
}

PosVocab::PosVocab(const std::set<std::string>& observed) : PosVocab() {
  for (const std::string& tag : observed) {
    if (tag == kUnknown) continue;
    index_.emplace(tag, tags_.size());
    tags_.push_back(tag);
  }
}

PosVocab PosVocab::from_ordered(std::vector<std::string> tags) {
  if (tags.empty() || tags.front() != kUnknown) {
    throw std::invalid_argument("PoS vocabulary must start with " +
                                std::string(kUnknown));
  }
  PosVocab v;
  v.tags_ = std::move(tags);
  for (std::size_t i = 1; i < v.tags_.size(); ++i) {
    if (!v.index_.emplace(v.tags_[i], i).second) {
      throw std::invalid_argument("duplicate PoS tag '" + v.tags_[i] + "'");
    }
  }
  return v;
}

std::size_t PosVocab::index(std::string_view tag) const {
  auto it = index_.find(tag);
  return it == index_.end() ? 0 : it->second;
}

CharVocab CharVocab::from_words(const std::vector<std::string>& words) {
  std::set<char32_t> seen;
  for (const std::string& w : words) {
    for (char32_t c : decode_utf8(w)) seen.insert(c);
  }
  return from_ordered({seen.begin(), seen.end()});
}

CharVocab CharVocab::from_ordered(std::vector<char32_t> chars) {
  CharVocab v;
  v.chars_ = std::move(chars);
  for (std::size_t i = 0; i < v.chars_.size(); ++i) {
    if (!v.index_.emplace(v.chars_[i], i + 1).second) {
      throw std::invalid_argument("duplicate character in vocabulary");
    }
  }
  return v;
}

std::size_t CharVocab::index(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// MorphEncoder

MorphEncoder::MorphEncoder(CharVocab vocab, MorphDims dims, Rng& rng)
    : vocab_(std::move(vocab)), dims_(dims) {
  char_table = glorot_parameter(vocab_.size(), dims_.char_dim, rng);
  forward = LstmParams::init(dims_.char_dim, dims_.char_hidden, rng);
  backward = LstmParams::init(dims_.char_dim, dims_.char_hidden, rng);
  projection = glorot_parameter(2 * dims_.char_hidden, dims_.output, rng);
  projection_bias = zero_parameter({dims_.output});
}

std::vector<std::size_t> MorphEncoder::char_indices(
    std::string_view word) const {
  std::vector<char32_t> chars = decode_utf8(word);
  if (chars.size() > kMaxChars) chars.resize(kMaxChars);
  std::vector<std::size_t> idx;
  idx.reserve(std::max<std::size_t>(chars.size(), 1));
  for (char32_t c : chars) idx.push_back(vocab_.index(c));
  if (idx.empty()) idx.push_back(0);
  return idx;
}

Tensor MorphEncoder::encode(ad::Tape& tape, std::string_view word) const {
  const std::vector<std::size_t> idx = char_indices(word);
  Tensor chars = ad::gather_rows(tape, char_table, idx);
  LstmState fwd = lstm_sequence(tape, chars, forward, false).last;
  LstmState bwd = lstm_sequence(tape, chars, backward, true).last;
  Tensor ends = ad::concat(tape, {fwd.hidden, bwd.hidden}, 1);
  return ad::add_bias(tape, ad::matmul(tape, ends, projection),
                      projection_bias);
}

// ---------------------------------------------------------------------------
// FeatureExtractor

FeatureExtractor::FeatureExtractor(FeatureMode mode, FeatureDims dims,
                                   std::shared_ptr<const EmbeddingTable> words,
                                   PosVocab pos, CharVocab chars, Rng& rng)
    : mode_(mode), dims_(dims), pos_vocab_(std::move(pos)) {
  set_words(std::move(words));
  if (mode_ != FeatureMode::kWord) {
    pos_table = glorot_parameter(pos_vocab_.size(), dims_.pos, rng);
  }
  if (mode_ == FeatureMode::kWordPosMorph) {
    morph = MorphEncoder(std::move(chars), dims_.morph, rng);
  }
}

void FeatureExtractor::set_words(std::shared_ptr<const EmbeddingTable> words) {
  if (!words) throw EmbeddingError("no word embeddings supplied");
  if (words->dim() != dims_.word) {
    throw EmbeddingError("word embeddings have " + std::to_string(words->dim()) +
                         " dimensions, the model expects " +
                         std::to_string(dims_.word));
  }
  words_ = std::move(words);
}

Tensor FeatureExtractor::word_rows(
    std::span<const std::string_view> words) const {
  const std::size_t dim = dims_.word;
  Tensor out = Tensor::zeros({words.size(), dim});
  auto od = out.data();
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto row = words_->lookup(words[i]);
    std::copy(row.begin(), row.end(), od.begin() + i * dim);
  }
  return out;
}

Tensor FeatureExtractor::token_vector(ad::Tape& tape, std::string_view word,
                                      std::string_view pos) const {
  Sentence s;
  s.tokens.push_back({std::string(word), std::string(pos), 0, "O"});
  return sentence_matrix(tape, s);
}

Tensor FeatureExtractor::sentence_matrix(ad::Tape& tape,
                                         const Sentence& sentence) const {
  std::vector<std::string_view> words;
  for (const Token& t : sentence.tokens) words.push_back(t.surface);
  std::vector<Tensor> parts{word_rows(words)};
  if (mode_ != FeatureMode::kWord) {
    std::vector<std::size_t> pos_idx;
    for (const Token& t : sentence.tokens) pos_idx.push_back(pos_vocab_.index(t.pos));
    parts.push_back(ad::gather_rows(tape, pos_table, pos_idx));
  }
  if (mode_ == FeatureMode::kWordPosMorph) {
    std::vector<Tensor> rows;
    for (const Token& t : sentence.tokens) rows.push_back(morph.encode(tape, t.surface));
    parts.push_back(ad::concat(tape, rows, 0));
  }
  return parts.size() == 1 ? parts.front() : ad::concat(tape, parts, 1);
}

}  // namespace depner
