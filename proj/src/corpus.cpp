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

#include "depner/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "depner/graph.hpp"
#include "depner/random.hpp"

namespace depner {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  });
}

bool parse_index(const std::string& text, std::size_t& value) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

Sentence build_sentence(std::vector<std::string> lines, EntityColumn entities) {
  Sentence s;
  s.raw_lines = std::move(lines);
  const std::size_t n = s.raw_lines.size();
  auto reject = [&s](std::string why) {
    if (s.valid) {
      s.valid = false;
      s.problem = std::move(why);
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::string> f = split_tabs(s.raw_lines[i]);
    const std::string where = "line " + std::to_string(i + 1) + " of sentence";
    Token tok;
    if (f.size() > 1) tok.surface = f[1];
    if (f.size() > 2) tok.pos = f[2];
    if (f.size() > 4) tok.entity = f[4];

    const bool width_ok =
        f.size() == 5 || (entities == EntityColumn::kOptional && f.size() == 4);
    if (!width_ok) {
      reject(where + ": expected " +
             std::string(entities == EntityColumn::kOptional ? "4 or 5" : "5") +
             " tab-separated fields, found " + std::to_string(f.size()));
    }
    std::size_t index = 0;
    if (f.empty() || !parse_index(f[0], index) || index != i) {
      reject(where + ": token index does not match its position " +
             std::to_string(i));
    }
    std::size_t head = 0;
    if (f.size() < 4 || !parse_index(f[3], head) || head >= n) {
      reject(where + ": head is missing, non-numeric, or out of range");
    } else {
      tok.head = head;
    }
    if (tok.surface.empty() || tok.pos.empty() || tok.entity.empty()) {
      reject(where + ": empty field");
    }
    s.tokens.push_back(std::move(tok));
  }
  if (s.valid) {
    try {
      DependencyGraph::build(s.heads());
    } catch (const GraphError& e) {
      reject(std::string("heads do not form a tree: ") + e.what());
    }
  }
  return s;
}

}  // namespace

std::vector<std::size_t> Sentence::heads() const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.head);
  return out;
}

std::vector<std::string> Sentence::entities() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.entity);
  return out;
}

void Corpus::reindex() {
  skipped_count = 0;
  tag_inventory.clear();
  pos_inventory.clear();
  for (const Sentence& s : sentences) {
    if (!s.valid) {
      ++skipped_count;
      continue;
    }
    for (const Token& t : s.tokens) {
      tag_inventory.insert(t.entity);
      pos_inventory.insert(t.pos);
    }
  }
}

std::vector<const Sentence*> Corpus::valid_sentences() const {
  std::vector<const Sentence*> out;
  for (const Sentence& s : sentences) {
    if (s.valid) out.push_back(&s);
  }
  return out;
}

Corpus parse_corpus(std::istream& in, EntityColumn entities) {
  Corpus corpus;
  std::vector<std::string> pending;
  std::string line;
  auto flush = [&]() {
    if (pending.empty()) return;
    corpus.sentences.push_back(build_sentence(std::move(pending), entities));
    pending.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) {
      flush();
    } else {
      pending.push_back(line);
    }
  }
  flush();
  corpus.reindex();
  return corpus;
}

Corpus read_corpus(const std::string& path, EntityColumn entities) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
  return parse_corpus(in, entities);
}

void write_sentence(std::ostream& out, const Sentence& sentence,
                    const std::vector<std::string>& entities) {
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& t = sentence.tokens[i];
    out << i << '\t' << t.surface << '\t' << t.pos << '\t' << t.head << '\t'
        << entities.at(i) << '\n';
  }
  out << '\n';
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const Sentence& s : corpus.sentences) {
    if (s.valid) write_sentence(out, s, s.entities());
  }
}

void write_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file '" + path + "'");
  write_corpus(out, corpus);
  out.flush();
  if (!out) throw CorpusError("failed writing corpus file '" + path + "'");
}

CorpusSplit split_corpus(const Corpus& corpus, double train_fraction,
                         double dev_fraction, double test_fraction,
                         std::uint64_t seed) {
  const double fractions[3] = {train_fraction, dev_fraction, test_fraction};
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("split fractions must lie in [0, 1]");
    }
  }
  if (std::abs(train_fraction + dev_fraction + test_fraction - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }

  const std::size_t n = corpus.sentences.size();
  std::size_t sizes[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainders[i] > remainders[best]) best = i;
    }
    ++sizes[best];
    remainders[best] = -1.0;
    ++assigned;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  CorpusSplit out;
  Corpus* parts[3] = {&out.train, &out.dev, &out.test};
  std::size_t offset = 0;
  for (int i = 0; i < 3; ++i) {
    std::vector<std::size_t> chosen(order.begin() + offset,
                                    order.begin() + offset + sizes[i]);
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t idx : chosen) {
      parts[i]->sentences.push_back(corpus.sentences[idx]);
    }
    parts[i]->reindex();
    offset += sizes[i];
  }
  return out;
}

}  // namespace depner
