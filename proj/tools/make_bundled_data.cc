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

// Writes the bundled JSONL corpora into a data directory. The bundled
// checkpoint is produced by `dpsteer train --seed 1` with default settings.

#include <filesystem>
#include <iostream>
#include <string>

#include "dpsteer/corpus.h"
#include "dpsteer/records.h"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);
  using dpsteer::CorpusStyle;
  dpsteer::WriteJsonl(dir + "/private.jsonl", dpsteer::GenerateBundledCorpus(
                                                  CorpusStyle::kReal, 250, 11));
  dpsteer::WriteJsonl(dir + "/heldout.jsonl", dpsteer::GenerateBundledCorpus(
                                                  CorpusStyle::kReal, 250, 12));
  dpsteer::WriteJsonl(
      dir + "/reference.jsonl",
      dpsteer::GenerateBundledCorpus(CorpusStyle::kReference, 250, 13));
  std::cout << "wrote corpora to " << dir << "\n";
  return 0;
}
