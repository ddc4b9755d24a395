// Copyright 2026 The tweetlm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tweetlm/checkpoint.h"

#include <bit>
#include <fstream>
#include <string>

#include "tweetlm/error.h"

namespace tweetlm {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'T', 'W', 'L', 'M', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::ios_base::failure("cannot open " + path.string());
  }
  template <typename T>
  void Pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void Bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void Finish(const std::filesystem::path& path) {
    out_.flush();
    if (!out_) throw std::ios_base::failure("failed to write " + path.string());
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::ios_base::failure("cannot open " + path.string());
  }
  template <typename T>
  T Pod(const char* what) {
    T v{};
    Bytes(&v, sizeof(T), what);
    return v;
  }
  void Bytes(void* p, size_t n, const char* what) {
    if (!in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n))) {
      throw DataError(std::string("checkpoint truncated while reading ") + what);
    }
  }
  bool AtEnd() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
};

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelParams<float>& params) {
  Writer w(path);
  const TransformerConfig& c = params.config;
  w.Bytes(kMagic, sizeof(kMagic));
  w.Pod(kVersion);
  for (uint64_t v : {c.n_layers, c.hidden_dim, c.n_heads, c.ffn_dim, c.max_len,
                     c.vocab_size}) {
    w.Pod(v);
  }
  w.Pod(c.dropout_rate);
  w.Pod(c.layer_norm_eps);
  w.Pod(static_cast<uint8_t>(params.head.kind));
  w.Pod(static_cast<uint64_t>(params.head.n_classes));
  w.Pod(static_cast<uint64_t>(params.tensors.size()));
  for (size_t i = 0; i < params.tensors.size(); ++i) {
    const std::string& name = params.tensors.name(i);
    const Tensor<float>& t = params.tensors.tensor(i);
    w.Pod(static_cast<uint32_t>(name.size()));
    w.Bytes(name.data(), name.size());
    w.Pod(static_cast<uint32_t>(t.rank()));
    for (size_t d : t.shape()) w.Pod(static_cast<uint64_t>(d));
    w.Bytes(t.data().data(), t.size() * sizeof(float));
  }
  w.Finish(path);
}

ModelParams<float> LoadCheckpoint(const std::filesystem::path& path,
                                  const std::optional<TransformerConfig>& expected) {
  Reader r(path);
  char magic[sizeof(kMagic)];
  r.Bytes(magic, sizeof(magic), "magic");
  if (!std::equal(magic, magic + sizeof(magic), kMagic)) {
    throw DataError(path.string() + " is not a tweetlm checkpoint");
  }
  const auto version = r.Pod<uint32_t>("version");
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelParams<float> params;
  TransformerConfig& c = params.config;
  c.n_layers = r.Pod<uint64_t>("config");
  c.hidden_dim = r.Pod<uint64_t>("config");
  c.n_heads = r.Pod<uint64_t>("config");
  c.ffn_dim = r.Pod<uint64_t>("config");
  c.max_len = r.Pod<uint64_t>("config");
  c.vocab_size = r.Pod<uint64_t>("config");
  c.dropout_rate = r.Pod<double>("config");
  c.layer_norm_eps = r.Pod<double>("config");
  const auto kind = r.Pod<uint8_t>("head kind");
  if (kind > static_cast<uint8_t>(HeadKind::kTokenCls)) {
    throw DataError("unknown head kind " + std::to_string(kind));
  }
  params.head.kind = static_cast<HeadKind>(kind);
  params.head.n_classes = r.Pod<uint64_t>("head classes");
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint config invalid: ") + e.what());
  }
  if (expected && !(*expected == c)) {
    throw DataError("checkpoint config does not match the requested model config");
  }

  std::vector<ParamSpec> layout;
  try {
    layout = ParamLayout(c, params.head);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint head invalid: ") + e.what());
  }
  const auto n_tensors = r.Pod<uint64_t>("tensor count");
  if (n_tensors != layout.size()) {
    throw DataError("checkpoint holds " + std::to_string(n_tensors) +
                    " tensors, config implies " + std::to_string(layout.size()));
  }
  for (const ParamSpec& spec : layout) {
    const auto name_len = r.Pod<uint32_t>("tensor name");
    if (name_len > 4096) throw DataError("implausible tensor name length");
    std::string name(name_len, '\0');
    r.Bytes(name.data(), name_len, "tensor name");
    if (name != spec.name) {
      throw DataError("expected tensor " + spec.name + ", found " + name);
    }
    const auto rank = r.Pod<uint32_t>("tensor rank");
    std::vector<size_t> shape(rank);
    for (size_t& d : shape) d = r.Pod<uint64_t>("tensor shape");
    if (shape != spec.shape) {
      throw DataError("tensor " + name + " has shape " + ShapeString(shape) +
                      ", expected " + ShapeString(spec.shape));
    }
    Tensor<float> t(shape);
    r.Bytes(t.data().data(), t.size() * sizeof(float), name.c_str());
    params.tensors.Add(name, std::move(t));
  }
  if (!r.AtEnd()) throw DataError("trailing bytes in checkpoint");
  return params;
}

}  // namespace tweetlm
