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

#ifndef DPSTEER_CLI_H_
#define DPSTEER_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "dpsteer/eval.h"
#include "dpsteer/pipeline.h"
#include "dpsteer/records.h"
#include "json.hpp"

namespace dpsteer {

struct TrainSettings {
  int steps = 1500;
  double learning_rate = 4e-3;
  int batch_size = 8;
  int model_layers = 4;
  int model_hidden_dim = 64;
  int model_heads = 2;
  int model_context = 128;
};

struct RunConfig {
  std::string private_data = "data/private.jsonl";
  std::string model = "data/bundled_model.ckpt";
  std::string output_dir = "out";
  std::string corpus;  // empty: bundled training corpus
  std::string real_data = "data/heldout.jsonl";
  std::string synthetic_data;    // empty: <output_dir>/synthetic.jsonl
  std::string fixed_shots_file;  // empty: <output_dir>/fixed_shots.json
  std::string vectors_file;      // empty: <output_dir>/vectors.json
  PipelineConfig pipeline;
  MauveConfig eval;
  TrainSettings train;

  RunConfig() { pipeline.label = "pos"; }
};

// Flat JSON form; every key is also a long flag with '_' spelled '-'.
nlohmann::json RunConfigToJson(const RunConfig& config);
// Keys absent from `j` keep their defaults. Throws kInput on unknown keys
// or mistyped values.
RunConfig RunConfigFromJson(const nlohmann::json& j);

struct CliContext {
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
  // Called with every input path before it is opened.
  FileAccessObserver on_open;
};

// Runs one invocation; args exclude the program name. Returns the exit
// code: 0 success, 2 input, 3 stale artifact, 4 budget, 5 numerical.
int RunCli(const std::vector<std::string>& args, const CliContext& context);

}  // namespace dpsteer

#endif  // DPSTEER_CLI_H_
