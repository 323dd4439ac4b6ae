// Copyright 2026 The dpsteer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsteer/checkpoint.h"

#include <bit>
#include <cstring>
#include <vector>

#include "dpsteer/error.h"
#include "dpsteer/hash.h"

namespace dpsteer {

namespace {

constexpr char kMagic[8] = {'D', 'P', 'S', 'T', 'C', 'K', 'P', 'T'};

template <typename T>
void PutLe(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xff));
    if constexpr (sizeof(T) > 1) u >>= 8;
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T GetLe() {
    Need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<U>(static_cast<unsigned char>(bytes_[at_ + i]))
           << (8 * i);
    }
    at_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::string GetBytes(size_t n) {
    Need(n);
    std::string s = bytes_.substr(at_, n);
    at_ += n;
    return s;
  }

  size_t offset() const { return at_; }

 private:
  void Need(size_t n) const {
    if (at_ + n > bytes_.size()) {
      throw Error(ErrorKind::kInput, "truncated checkpoint");
    }
  }

  const std::string& bytes_;
  size_t at_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const Model& model) {
  const ModelConfig& c = model.config();
  std::string out(kMagic, sizeof(kMagic));
  PutLe<uint32_t>(out, kCheckpointFormatVersion);
  PutLe<int32_t>(out, c.vocab_size);
  PutLe<int32_t>(out, c.num_layers);
  PutLe<int32_t>(out, c.hidden_dim);
  PutLe<int32_t>(out, c.num_heads);
  PutLe<int32_t>(out, c.context_len);
  PutLe<uint64_t>(out, c.seed);
  PutLe<int32_t>(out, model.embed_layer());
  const std::string& alphabet = model.tokenizer().alphabet();
  PutLe<uint32_t>(out, static_cast<uint32_t>(alphabet.size()));
  out += alphabet;
  const auto params = model.parameters();
  PutLe<uint64_t>(out, params.size());
  for (double p : params) PutLe<uint64_t>(out, std::bit_cast<uint64_t>(p));
  PutLe<uint64_t>(out, ContentHasher().Update(out).digest());
  return out;
}

Model DeserializeCheckpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.GetBytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
    throw Error(ErrorKind::kInput, "not a dpsteer checkpoint (bad magic)");
  }
  const uint32_t version = r.GetLe<uint32_t>();
  if (version != kCheckpointFormatVersion) {
    throw Error(ErrorKind::kInput, "unsupported checkpoint format version " +
                                       std::to_string(version));
  }
  ModelConfig c;
  c.vocab_size = r.GetLe<int32_t>();
  c.num_layers = r.GetLe<int32_t>();
  c.hidden_dim = r.GetLe<int32_t>();
  c.num_heads = r.GetLe<int32_t>();
  c.context_len = r.GetLe<int32_t>();
  c.seed = r.GetLe<uint64_t>();
  const int embed_layer = r.GetLe<int32_t>();
  const uint32_t alphabet_len = r.GetLe<uint32_t>();
  Tokenizer tok(r.GetBytes(alphabet_len));
  const uint64_t count = r.GetLe<uint64_t>();
  if (count > bytes.size() / sizeof(double)) {
    throw Error(ErrorKind::kInput, "checkpoint parameter count is corrupt");
  }
  std::vector<double> params(count);
  for (auto& p : params) p = std::bit_cast<double>(r.GetLe<uint64_t>());
  const size_t body_len = r.offset();
  const uint64_t digest = r.GetLe<uint64_t>();
  if (digest != ContentHasher()
                    .Update(std::string_view(bytes).substr(0, body_len))
                    .digest()) {
    throw Error(ErrorKind::kInput, "checkpoint checksum mismatch");
  }
  if (r.offset() != bytes.size()) {
    throw Error(ErrorKind::kInput, "trailing bytes after checkpoint");
  }
  Model model(c, std::move(tok), std::move(params));
  model.set_embed_layer(embed_layer);
  return model;
}

void SaveCheckpoint(const Model& model, const std::string& path) {
  WriteFile(path, SerializeCheckpoint(model));
}

Model LoadCheckpoint(const std::string& path,
                     const FileAccessObserver& on_open) {
  return DeserializeCheckpoint(ReadFile(path, on_open));
}

}  // namespace dpsteer
