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

#ifndef DPSTEER_HASH_H_
#define DPSTEER_HASH_H_

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>

namespace dpsteer {

// Incremental 64-bit FNV-1a. Used for artifact identity, not security.
class ContentHasher {
 public:
  ContentHasher& Update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  ContentHasher& UpdateValue(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    return Update(std::string_view(buf, sizeof(T)));
  }

  // Length-prefixed so that ("ab","c") and ("a","bc") differ.
  ContentHasher& UpdateField(std::string_view bytes) {
    UpdateValue<uint64_t>(bytes.size());
    return Update(bytes);
  }

  uint64_t digest() const { return state_; }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(state_));
    return buf;
  }

 private:
  uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string HashHex(std::string_view bytes) {
  return ContentHasher().Update(bytes).hex();
}

}  // namespace dpsteer

#endif  // DPSTEER_HASH_H_
