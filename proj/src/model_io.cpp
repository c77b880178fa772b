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

#include "depner/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace depner {
namespace {

constexpr char kMagic[8] = {'D', 'E', 'P', 'N', 'E', 'R', 'M', 'D'};
// Upper bound on any length field, to fail fast on garbage.
constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void tensor(const Tensor& t) {
    u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) u64(d);
    for (double v : t.data()) f64(v);
  }
  std::string& bytes() { return out_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  Tensor tensor() {
    const std::uint32_t rank = u32();
    if (rank > 4) fail("tensor rank " + std::to_string(rank));
    Shape shape;
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint64_t d = u64();
      if (d > kMaxCount) fail("tensor dimension too large");
      total *= d;
      if (total > kMaxCount) fail("tensor too large");
      shape.push_back(static_cast<std::size_t>(d));
    }
    need(total * 8);
    Tensor t = Tensor::zeros(shape);
    for (double& v : t.data()) v = f64();
    return t;
  }
  std::uint32_t count() {
    const std::uint32_t n = u32();
    // Every counted item occupies at least 4 bytes.
    need(std::uint64_t{n} * 4);
    return n;
  }
  void magic() {
    need(sizeof(kMagic));
    if (std::memcmp(in_.data() + pos_, kMagic, sizeof(kMagic)) != 0) {
      fail("not a depner model file");
    }
    pos_ += sizeof(kMagic);
  }
  bool at_end() const { return pos_ == in_.size(); }

  [[noreturn]] static void fail(const std::string& what) {
    throw ModelFormatError("model file: " + what);
  }

 private:
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) fail("truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const Model& model) {
  Writer w;
  w.bytes().append(kMagic, sizeof(kMagic));
  w.u32(kModelFormatVersion);
  w.str(model.config.to_text());
  const auto& labels = model.tags.labels();
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (const std::string& l : labels) w.str(l);
  const auto& pos = model.features.pos_vocab().tags();
  w.u32(static_cast<std::uint32_t>(pos.size()));
  for (const std::string& p : pos) w.str(p);
  const auto& chars = model.features.morph.vocab().chars();
  w.u32(static_cast<std::uint32_t>(chars.size()));
  for (char32_t c : chars) w.u32(static_cast<std::uint32_t>(c));
  w.tensor(model.transitions.scores());
  const std::vector<NamedTensor> params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const NamedTensor& p : params) {
    w.str(p.name);
    w.tensor(p.tensor);
  }
  const std::uint64_t sum = fnv1a(w.bytes());
  w.u64(sum);
  return std::move(w.bytes());
}

namespace {

// Checks magic, version and checksum; returns the body without the trailer.
std::string_view checked_body(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 12) Reader::fail("truncated");
  Reader r(bytes);
  r.magic();
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    Reader::fail("format version " + std::to_string(version) +
                 " is not supported (expected " +
                 std::to_string(kModelFormatVersion) + ")");
  }
  const std::string_view body(bytes.data(), bytes.size() - 8);
  Reader trailer(std::string_view(bytes).substr(bytes.size() - 8));
  if (fnv1a(body) != trailer.u64()) Reader::fail("checksum mismatch");
  return body;
}

}  // namespace

ModelConfig read_model_config(const std::string& bytes) {
  Reader in(checked_body(bytes));
  in.magic();
  in.u32();
  try {
    return ModelConfig::from_text(in.str());
  } catch (const ModelFormatError&) {
    throw;
  } catch (const std::exception& e) {
    Reader::fail(e.what());
  }
}

Model deserialize_model(const std::string& bytes,
                        std::shared_ptr<const EmbeddingTable> words) {
  Reader in(checked_body(bytes));
  in.magic();
  in.u32();
  try {
    const ModelConfig config = ModelConfig::from_text(in.str());
    std::vector<std::string> labels(in.count());
    for (std::string& l : labels) l = in.str();
    std::vector<std::string> pos(in.count());
    for (std::string& p : pos) p = in.str();
    std::vector<char32_t> chars(in.count());
    for (char32_t& c : chars) c = static_cast<char32_t>(in.u32());
    TransitionMatrix transitions(in.tensor());

    FeatureVocab vocab{PosVocab::from_ordered(std::move(pos)),
                       CharVocab::from_ordered(std::move(chars))};
    Model model = init_model(config, TagSet(std::move(labels)),
                             std::move(transitions), std::move(words),
                             std::move(vocab));
    std::vector<NamedTensor> params = model.parameters();
    const std::uint32_t n = in.count();
    if (n != params.size()) {
      Reader::fail("holds " + std::to_string(n) + " parameters, the config implies " +
                   std::to_string(params.size()));
    }
    for (NamedTensor& p : params) {
      const std::string name = in.str();
      Tensor t = in.tensor();
      if (name != p.name) Reader::fail("expected parameter " + p.name + ", found " + name);
      if (t.shape() != p.tensor.shape()) {
        Reader::fail("parameter " + name + " has shape " + shape_to_string(t.shape()) +
                     ", expected " + shape_to_string(p.tensor.shape()));
      }
      std::copy(t.data().begin(), t.data().end(), p.tensor.data().begin());
    }
    if (!in.at_end()) Reader::fail("trailing bytes");
    return model;
  } catch (const ModelFormatError&) {
    throw;
  } catch (const EmbeddingError&) {
    throw;
  } catch (const std::exception& e) {
    Reader::fail(e.what());
  }
}

void save_model(const std::string& path, const Model& model) {
  const std::string bytes = serialize_model(model);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write model file " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      std::remove(tmp.c_str());
      throw std::runtime_error("cannot write model file " + path);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot write model file " + path + ": " + ec.message());
  }
}

std::string read_model_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

Model load_model(const std::string& path,
                 std::shared_ptr<const EmbeddingTable> words) {
  return deserialize_model(read_model_bytes(path), std::move(words));
}

}  // namespace depner
