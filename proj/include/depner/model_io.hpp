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

// Model files.
//
// Little-endian binary layout:
//
//   "DEPNERMD"                      magic, 8 bytes
//   u32 version                     kModelFormatVersion
//   str config                      ModelConfig::to_text()
//   u32 n, n x str                  tag labels in index order
//   u32 n, n x str                  PoS vocabulary rows
//   u32 n, n x u32                  character vocabulary (code points)
//   tensor                          transition matrix
//   u32 n, n x (str name, tensor)   parameters in Model::parameters() order
//   u64 checksum                    FNV-1a over every preceding byte
//
//   str    = u32 byte length, bytes
//   tensor = u32 rank, rank x u64 dims, row-major f64 values
//
// Word embeddings are not stored; the table is supplied again on load.

#ifndef DEPNER_MODEL_IO_HPP_
#define DEPNER_MODEL_IO_HPP_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "depner/model.hpp"

namespace depner {

inline constexpr std::uint32_t kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_model(const Model& model);
// The stored config alone, for sizing the embedding table before a full
// load. Checks magic, version and checksum like deserialize_model.
ModelConfig read_model_config(const std::string& bytes);
// Throws ModelFormatError on a bad magic, an unsupported version, a
// checksum mismatch, truncation, or parameters that do not match the config.
Model deserialize_model(const std::string& bytes,
                        std::shared_ptr<const EmbeddingTable> words);

// File wrappers. save_model writes to a temporary sibling and renames it,
// so a failed save never leaves a partial file behind.
void save_model(const std::string& path, const Model& model);
std::string read_model_bytes(const std::string& path);
Model load_model(const std::string& path,
                 std::shared_ptr<const EmbeddingTable> words);

}  // namespace depner

#endif  // DEPNER_MODEL_IO_HPP_
