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

#include "depner/synthetic.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "depner/random.hpp"

namespace depner::synthetic {
namespace {

constexpr std::size_t kRoots = 10;
constexpr std::size_t kTriggers = 40;
constexpr std::size_t kNames = 60;
constexpr std::size_t kFillers = 80;

constexpr std::size_t kMinLength = 12;
constexpr std::size_t kMaxLength = 20;
constexpr std::int64_t kMinDistance = 3;
constexpr std::int64_t kMaxDistance = 8;

const char* const kFillerPos[] = {"DT", "NN", "JJ", "IN"};

std::string word(char prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%02zu", prefix, i);
  return buf;
}

enum class Role { kFree, kRoot, kTrigger, kName };

}  // namespace

const std::vector<std::string>& entity_types() {
  static const std::vector<std::string> types{"PER", "ORG", "LOC", "MISC"};
  return types;
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < kRoots; ++i) v.push_back(word('v', i));
    for (std::size_t i = 0; i < kTriggers; ++i) v.push_back(word('t', i));
    for (std::size_t i = 0; i < kNames; ++i) v.push_back(word('n', i));
    for (std::size_t i = 0; i < kFillers; ++i) v.push_back(word('f', i));
    return v;
  }();
  return vocab;
}

std::string label_for_head(std::string_view head_surface) {
  if (head_surface.size() == 3 && head_surface[0] == 't') {
    std::size_t id = 0;
    auto [ptr, ec] = std::from_chars(head_surface.data() + 1,
                                     head_surface.data() + 3, id);
    if (ec == std::errc() && ptr == head_surface.data() + 3 && id < kTriggers) {
      return entity_types()[id % entity_types().size()];
    }
  }
  return "O";
}

Corpus generate(std::size_t n_sentences, std::uint64_t seed) {
  if (n_sentences == 0) {
    throw std::invalid_argument("synthetic corpus needs at least one sentence");
  }
  Rng rng(seed);
  Corpus corpus;
  while (corpus.sentences.size() < n_sentences) {
    const auto n = static_cast<std::size_t>(rng.between(kMinLength, kMaxLength));
    std::vector<Role> role(n, Role::kFree);
    std::vector<std::size_t> head(n, 0);

    const std::size_t root = rng.below(n);
    role[root] = Role::kRoot;
    head[root] = root;

    std::vector<std::size_t> triggers;
    const auto n_triggers = static_cast<std::size_t>(rng.between(2, 3));
    while (triggers.size() < n_triggers) {
      const std::size_t p = rng.below(n);
      if (role[p] != Role::kFree) continue;
      role[p] = Role::kTrigger;
      head[p] = root;
      triggers.push_back(p);
    }

    const auto n_names = static_cast<std::size_t>(rng.between(1, 4));
    std::size_t placed = 0;
    for (int attempt = 0; attempt < 200 && placed < n_names; ++attempt) {
      const std::size_t trigger = triggers[rng.below(triggers.size())];
      std::int64_t offset = rng.between(kMinDistance, kMaxDistance);
      if (rng.bernoulli(0.5)) offset = -offset;
      const std::int64_t p = static_cast<std::int64_t>(trigger) + offset;
      if (p < 0 || p >= static_cast<std::int64_t>(n)) continue;
      const auto pos = static_cast<std::size_t>(p);
      if (role[pos] != Role::kFree) continue;
      role[pos] = Role::kName;
      head[pos] = trigger;
      ++placed;
    }
    if (placed == 0) continue;

    Sentence s;
    for (std::size_t i = 0; i < n; ++i) {
      Token tok;
      tok.head = role[i] == Role::kFree ? root : head[i];
      switch (role[i]) {
        case Role::kRoot:
          tok.surface = word('v', rng.below(kRoots));
          tok.pos = "VBD";
          break;
        case Role::kTrigger:
          tok.surface = word('t', rng.below(kTriggers));
          tok.pos = "VB";
          break;
        case Role::kName:
          tok.surface = word('n', rng.below(kNames));
          tok.pos = "NNP";
          break;
        case Role::kFree: {
          const std::size_t f = rng.below(kFillers);
          tok.surface = word('f', f);
          tok.pos = kFillerPos[f % 4];
          break;
        }
      }
      s.tokens.push_back(std::move(tok));
    }
    for (Token& tok : s.tokens) {
      tok.entity = label_for_head(s.tokens[tok.head].surface);
    }
    s.raw_lines.clear();
    corpus.sentences.push_back(std::move(s));
  }
  corpus.reindex();
  return corpus;
}

}  // namespace depner::synthetic
