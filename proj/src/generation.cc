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

#include "dpsteer/generation.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "dpsteer/error.h"

namespace dpsteer {

Vector Inject(std::span<const double> state, const DatasetVector& vector,
              double beta) {
  if (state.size() != vector.direction.size()) {
    throw Error(ErrorKind::kInput,
                "state has dimension " + std::to_string(state.size()) +
                    ", vector has " + std::to_string(vector.direction.size()));
  }
  Vector out(state.size());
  for (size_t i = 0; i < state.size(); ++i) {
    out[i] = state[i] + beta * vector.direction[i];
  }
  return out;
}

SteeringSpec SteeringSpec::FromVectors(
    const std::vector<DatasetVector>& vectors, double beta) {
  SteeringSpec spec;
  for (const auto& v : vectors) spec.entries.push_back({v.layer, beta, v});
  return spec;
}

void SteeringSpec::Validate(const Model& model) const {
  std::set<int> seen;
  for (const auto& e : entries) {
    if (e.layer < 1 || e.layer > model.config().num_layers) {
      throw Error(ErrorKind::kIndex,
                  "steering layer " + std::to_string(e.layer) +
                      " outside [1, " +
                      std::to_string(model.config().num_layers) + "]");
    }
    if (!seen.insert(e.layer).second) {
      throw Error(ErrorKind::kInput,
                  "layer " + std::to_string(e.layer) + " steered twice");
    }
    if (static_cast<int>(e.vector.direction.size()) !=
        model.config().hidden_dim) {
      throw Error(ErrorKind::kInput, "steering vector dimension mismatch");
    }
    if (std::fabs(Norm2(e.vector.direction) - 1.0) > 1e-9) {
      throw Error(ErrorKind::kInput, "steering vector is not unit norm");
    }
  }
}

std::vector<ResidualShift> SteeringSpec::ToShifts() const {
  std::vector<ResidualShift> shifts;
  for (const auto& e : entries) {
    shifts.push_back({e.layer, e.beta, e.vector.direction});
  }
  return shifts;
}

std::string GenerateSteered(const Model& model, const Scaffold& scaffold,
                            const SteeringSpec& steering,
                            const SamplingOptions& options, Rng& rng) {
  if (!(options.temperature > 0.0)) {
    throw Error(ErrorKind::kParameter, "temperature must be > 0");
  }
  if (options.max_tokens < 1) {
    throw Error(ErrorKind::kParameter, "max_tokens must be >= 1");
  }
  steering.Validate(model);
  const TokenSequence prompt = scaffold.Encode(model.tokenizer());
  const int prompt_len = static_cast<int>(prompt.size());
  if (prompt_len + options.max_tokens > model.config().context_len) {
    throw Error(ErrorKind::kLength,
                "scaffold of " + std::to_string(prompt_len) + " tokens plus " +
                    std::to_string(options.max_tokens) +
                    " new tokens exceeds context " +
                    std::to_string(model.config().context_len));
  }
  DecodeSession session(model, steering.ToShifts(),
                        options.steer_prompt ? 0 : prompt_len);
  Matrix logits = session.Append(prompt);
  TokenSequence generated;
  for (int step = 0; step < options.max_tokens; ++step) {
    const int next = SampleNextToken(logits.row_span(logits.rows - 1),
                                     options.temperature, rng);
    if (next == Tokenizer::kEnd) break;
    generated.push_back(next);
    if (step + 1 < options.max_tokens) {
      const int one[1] = {next};
      logits = session.Append(one);
    }
  }
  return model.tokenizer().Decode(generated);
}

std::vector<std::string> BuildNegativeSet(const Model& model,
                                          const Scaffold& scaffold, int n,
                                          uint64_t seed,
                                          const SamplingOptions& options) {
  if (n < 1) throw Error(ErrorKind::kParameter, "negative set needs n >= 1");
  GenerationConfig config;
  config.label = scaffold.label;
  config.scaffold = scaffold;
  config.sampling = options;
  config.count = n;
  config.seed = seed;
  std::vector<std::string> out;
  for (auto& r : GenerateDataset(model, config, SteeringSpec{}).records) {
    out.push_back(std::move(r.text));
  }
  return out;
}

double RuleBasedQualityScore(const std::string& text) {
  if (text.empty()) return 1.0;
  const double len = static_cast<double>(text.size());
  double length_score = 1.0;
  if (len < 12) length_score = len / 12.0;
  if (len > 48) length_score = std::max(0.0, 1.0 - (len - 48) / 48.0);

  std::istringstream ss(text);
  std::string word;
  int words = 0, wordlike = 0, repeats = 0;
  std::string prev;
  while (ss >> word) {
    ++words;
    std::string core = word;
    while (!core.empty() &&
           std::ispunct(static_cast<unsigned char>(core.back()))) {
      core.pop_back();
    }
    const bool letters =
        core.size() >= 2 && core.size() <= 12 &&
        std::all_of(core.begin(), core.end(), [](unsigned char c) {
          return std::isalpha(c) || std::isdigit(c) || c == '/';
        });
    if (letters) ++wordlike;
    if (word == prev) ++repeats;
    prev = word;
  }
  const double coverage = words ? static_cast<double>(wordlike) / words : 0.0;

  int max_run = 1, run = 1;
  for (size_t i = 1; i < text.size(); ++i) {
    run = text[i] == text[i - 1] ? run + 1 : 1;
    max_run = std::max(max_run, run);
  }
  double repetition = (max_run >= 3 ? 0.5 : 0.0) +
                      (words ? static_cast<double>(repeats) / words : 0.0);
  repetition = std::min(1.0, repetition);

  return 1.0 +
         9.0 * (0.3 * length_score + 0.4 * coverage + 0.3 * (1.0 - repetition));
}

std::vector<std::string> RejectionFilter(
    const std::vector<std::string>& samples, const QualityScorer& scorer,
    double threshold) {
  std::vector<std::string> kept;
  for (const auto& s : samples) {
    if (scorer(s) >= threshold) kept.push_back(s);
  }
  return kept;
}

QualityScorer ScorerByName(const std::string& name) {
  if (name == "rule-based") return RuleBasedQualityScore;
  throw Error(ErrorKind::kInput, "unknown quality scorer '" + name + "'");
}

SyntheticDataset GenerateDataset(const Model& model,
                                 const GenerationConfig& config,
                                 const SteeringSpec& steering) {
  if (config.count < 1)
    throw Error(ErrorKind::kParameter, "count must be >= 1");
  if (config.label != config.scaffold.label) {
    throw Error(ErrorKind::kInput, "scaffold label does not match attribute");
  }
  steering.Validate(model);
  QualityScorer scorer;
  if (config.rejection) scorer = ScorerByName(config.rejection->scorer);
  const long limit =
      static_cast<long>(config.count) * std::max(1, config.max_attempt_factor);
  const int threads = std::max(1, config.threads);

  SyntheticDataset out;
  long next = 0;
  while (static_cast<int>(out.records.size()) < config.count) {
    if (next >= limit) {
      throw Error(ErrorKind::kNumerical,
                  "kept only " + std::to_string(out.records.size()) + " of " +
                      std::to_string(config.count) + " samples after " +
                      std::to_string(limit) + " attempts");
    }
    // Draw a batch of attempts, then accept them in index order.
    const long needed = config.count - static_cast<long>(out.records.size());
    const long batch = std::min(
        limit - next, threads > 1 ? std::max<long>(needed, 4L * threads) : 1L);
    std::vector<std::string> texts(batch);
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](int worker) {
      try {
        for (long j = worker; j < batch; j += threads) {
          Rng rng(DeriveSeed(config.seed, static_cast<uint64_t>(next + j)));
          texts[j] = GenerateSteered(model, config.scaffold, steering,
                                     config.sampling, rng);
        }
      } catch (...) {
        errors[worker] = std::current_exception();
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (long j = 0; j < batch; ++j) {
      if (static_cast<int>(out.records.size()) == config.count) break;
      out.attempts = static_cast<int>(next + j + 1);
      std::string& text = texts[j];
      if (text.empty()) continue;
      if (config.rejection && scorer(text) < config.rejection->threshold) {
        continue;
      }
      out.records.push_back({std::move(text), config.label});
      out.sample_seeds.push_back(
          DeriveSeed(config.seed, static_cast<uint64_t>(next + j)));
    }
    next += batch;
  }
  return out;
}

}  // namespace dpsteer
