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

#ifndef DPSTEER_CHECKPOINT_H_
#define DPSTEER_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "dpsteer/model.h"
#include "dpsteer/records.h"

namespace dpsteer {

// Binary checkpoint container; byte layout in docs/checkpoint_format.md.
inline constexpr uint32_t kCheckpointFormatVersion = 1;

std::string SerializeCheckpoint(const Model& model);
Model DeserializeCheckpoint(const std::string& bytes);

void SaveCheckpoint(const Model& model, const std::string& path);
Model LoadCheckpoint(const std::string& path,
                     const FileAccessObserver& on_open = {});

}  // namespace dpsteer

#endif  // DPSTEER_CHECKPOINT_H_
