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

// Synthetic tagging task whose labels are carried by dependency arcs.
//
// Every sentence has one root verb, two or three trigger words attached to
// the root, one to four name words, and filler words attached to the root.
// Each name word attaches to a trigger 3 to 8 tokens away, picked at random
// among the triggers that fit, and is labelled with that trigger's entity
// type. Everything else is "O". A token's label is therefore a function of
// its head's surface form alone, while word order says little about which
// trigger a name belongs to.

#ifndef DEPNER_SYNTHETIC_HPP_
#define DEPNER_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depner/corpus.hpp"

namespace depner::synthetic {

// PER, ORG, LOC, MISC.
const std::vector<std::string>& entity_types();
// Every surface form the generator can emit (fewer than 200).
const std::vector<std::string>& vocabulary();

// The label a dependent of `head_surface` receives.
std::string label_for_head(std::string_view head_surface);

// Throws std::invalid_argument for n_sentences == 0.
Corpus generate(std::size_t n_sentences, std::uint64_t seed);

}  // namespace depner::synthetic

#endif  // DEPNER_SYNTHETIC_HPP_
