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

#ifndef DPSTEER_RECORDS_H_
#define DPSTEER_RECORDS_H_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace dpsteer {

// One labelled text sample; the unit of privacy.
struct Record {
  std::string text;
  std::string label;

  friend bool operator==(const Record&, const Record&) = default;
};

// Invoked with the path of every file opened for reading.
using FileAccessObserver = std::function<void(const std::string& path)>;

struct JsonlReadOptions {
  size_t max_record_bytes = 64 * 1024;
  FileAccessObserver on_open;
};

// Streams {"text": ..., "label": ...} lines. Blank lines are skipped.
// Throws kInput naming the path (and line) when the file is missing, a line
// is not a JSON object with string fields, or a line exceeds the size cap.
std::vector<Record> ReadJsonl(const std::string& path,
                              const JsonlReadOptions& options = {});

std::string RecordsToJsonl(const std::vector<Record>& records);
void WriteJsonl(const std::string& path, const std::vector<Record>& records);

std::vector<std::string> TextsWithLabel(const std::vector<Record>& records,
                                        const std::string& label);

// Reads a whole file; throws kInput when it cannot be opened.
std::string ReadFile(const std::string& path,
                     const FileAccessObserver& on_open = {});
void WriteFile(const std::string& path, const std::string& contents);

}  // namespace dpsteer

#endif  // DPSTEER_RECORDS_H_
