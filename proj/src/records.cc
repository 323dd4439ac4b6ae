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

#include "dpsteer/records.h"

#include <fstream>
#include <sstream>

#include "dpsteer/error.h"
#include "json.hpp"

namespace dpsteer {

std::vector<Record> ReadJsonl(const std::string& path,
                              const JsonlReadOptions& options) {
  if (options.on_open) options.on_open(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInput, "cannot open " + path);
  std::vector<Record> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path + ":" + std::to_string(line_no);
    if (line.size() > options.max_record_bytes) {
      throw Error(ErrorKind::kInput,
                  where + ": record exceeds " +
                      std::to_string(options.max_record_bytes) + " bytes");
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") ||
        !j["text"].is_string() || !j.contains("label") ||
        !j["label"].is_string()) {
      throw Error(ErrorKind::kInput,
                  where + ": expected {\"text\": string, \"label\": string}");
    }
    out.push_back(
        {j["text"].get<std::string>(), j["label"].get<std::string>()});
  }
  return out;
}

std::string RecordsToJsonl(const std::vector<Record>& records) {
  std::string body;
  for (const auto& r : records) {
    body += nlohmann::json{{"text", r.text}, {"label", r.label}}.dump();
    body += '\n';
  }
  return body;
}

void WriteJsonl(const std::string& path, const std::vector<Record>& records) {
  WriteFile(path, RecordsToJsonl(records));
}

std::vector<std::string> TextsWithLabel(const std::vector<Record>& records,
                                        const std::string& label) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (r.label == label) out.push_back(r.text);
  }
  return out;
}

std::string ReadFile(const std::string& path,
                     const FileAccessObserver& on_open) {
  if (on_open) on_open(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kInput, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kInput, "cannot write " + path);
  out << contents;
  if (!out) throw Error(ErrorKind::kInput, "short write to " + path);
}

}  // namespace dpsteer
