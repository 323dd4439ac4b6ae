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

#include "dpsteer/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dpsteer/artifacts.h"
#include "dpsteer/checkpoint.h"
#include "dpsteer/corpus.h"
#include "dpsteer/error.h"
#include "dpsteer/hash.h"
#include "dpsteer/trainer.h"

namespace dpsteer {
namespace {

using nlohmann::json;

struct FieldSpec {
  const char* key;
  const char* help;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <typename T>
T As(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::kInput, std::string("config key '") + key +
                                       "' has the wrong type: " + j.dump());
  }
}

#define DPSTEER_FIELD(KEY, HELP, MEMBER, TYPE)                           \
  FieldSpec {                                                            \
    KEY, HELP, [](const RunConfig& c) { return json(c.MEMBER); },        \
        [](RunConfig& c, const json& j) { c.MEMBER = As<TYPE>(j, KEY); } \
  }

#define DPSTEER_REAL(KEY, HELP, MEMBER)                                \
  FieldSpec {                                                          \
    KEY, HELP, [](const RunConfig& c) { return JsonValue(c.MEMBER); }, \
        [](RunConfig& c, const json& j) {                              \
          try {                                                        \
            c.MEMBER = DoubleFromJson(j);                              \
          } catch (const Error&) {                                     \
            throw Error(ErrorKind::kInput,                             \
                        std::string("config key '") + KEY +            \
                            "' expects a number: " + j.dump());        \
          }                                                            \
        }                                                              \
  }

const std::vector<FieldSpec>& Fields() {
  static const std::vector<FieldSpec> fields = {
      DPSTEER_FIELD("private_data", "private JSONL {text, label}", private_data,
                    std::string),
      DPSTEER_FIELD("model", "model checkpoint", model, std::string),
      DPSTEER_FIELD("output_dir", "directory for artifacts", output_dir,
                    std::string),
      DPSTEER_FIELD("corpus", "training JSONL (empty: bundled corpus)", corpus,
                    std::string),
      DPSTEER_FIELD("real_data", "reference real JSONL for evaluate", real_data,
                    std::string),
      DPSTEER_FIELD("synthetic_data", "synthetic JSONL for evaluate",
                    synthetic_data, std::string),
      DPSTEER_FIELD("fixed_shots_file", "fixed-shot artifact", fixed_shots_file,
                    std::string),
      DPSTEER_FIELD("vectors_file", "vector artifact", vectors_file,
                    std::string),
      DPSTEER_FIELD("label", "attribute label", pipeline.label, std::string),
      DPSTEER_REAL("epsilon_total", "total epsilon",
                   pipeline.budget.total.epsilon),
      DPSTEER_REAL("delta_total", "total delta", pipeline.budget.total.delta),
      DPSTEER_REAL("epsilon_fs", "fixed-shot epsilon",
                   pipeline.budget.epsilon_fs),
      DPSTEER_REAL("delta_fs_share", "share of delta for fixed shots",
                   pipeline.budget.delta_fs_share),
      DPSTEER_REAL("q", "subsampling fraction", pipeline.budget.q),
      DPSTEER_FIELD("noiseless", "release without noise", pipeline.noiseless,
                    bool),
      DPSTEER_FIELD("layers", "injection layers", pipeline.layers,
                    std::vector<int>),
      DPSTEER_REAL("clip", "clip threshold C", pipeline.clip),
      DPSTEER_REAL("beta", "steering coefficient", pipeline.beta),
      DPSTEER_FIELD("num_candidates", "candidate pool size N",
                    pipeline.num_candidates, int),
      DPSTEER_FIELD("k", "number of fixed shots", pipeline.k, int),
      DPSTEER_FIELD("candidate_max_tokens", "max tokens per candidate",
                    pipeline.candidate_max_tokens, int),
      DPSTEER_REAL("temperature", "sampling temperature",
                   pipeline.sampling.temperature),
      DPSTEER_FIELD("max_tokens", "max tokens per sample",
                    pipeline.sampling.max_tokens, int),
      DPSTEER_FIELD("steer_prompt", "also steer scaffold positions",
                    pipeline.sampling.steer_prompt, bool),
      DPSTEER_FIELD("count", "synthetic records M", pipeline.count, int),
      FieldSpec{"rejection_threshold",
                "quality threshold (negative disables filtering)",
                [](const RunConfig& c) {
                  return json(c.pipeline.rejection
                                  ? c.pipeline.rejection->threshold
                                  : -1.0);
                },
                [](RunConfig& c, const json& j) {
                  const double t = As<double>(j, "rejection_threshold");
                  if (t < 0) {
                    c.pipeline.rejection.reset();
                  } else {
                    if (!c.pipeline.rejection) c.pipeline.rejection.emplace();
                    c.pipeline.rejection->threshold = t;
                  }
                }},
      DPSTEER_FIELD("seed", "run seed", pipeline.seed, uint64_t),
      DPSTEER_FIELD("threads", "worker threads", pipeline.threads, int),
      DPSTEER_FIELD("num_bins", "quantization bins (0: automatic)",
                    eval.num_bins, int),
      DPSTEER_REAL("scaling_factor", "divergence scaling factor c",
                   eval.scaling_factor),
      DPSTEER_FIELD("lambda_grid_size", "mixture weights incl. endpoints",
                    eval.lambda_grid_size, int),
      DPSTEER_FIELD("train_steps", "training steps", train.steps, int),
      DPSTEER_REAL("train_learning_rate", "initial learning rate",
                   train.learning_rate),
      DPSTEER_FIELD("train_batch_size", "sequences per step", train.batch_size,
                    int),
      DPSTEER_FIELD("model_layers", "transformer blocks", train.model_layers,
                    int),
      DPSTEER_FIELD("model_hidden_dim", "hidden width", train.model_hidden_dim,
                    int),
      DPSTEER_FIELD("model_heads", "attention heads", train.model_heads, int),
      DPSTEER_FIELD("model_context", "context length", train.model_context,
                    int),
  };
  return fields;
}

#undef DPSTEER_FIELD
#undef DPSTEER_REAL

std::string FlagName(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

// Converts flag text to JSON shaped like the field's default value.
json FlagValue(const json& like, const std::string& text,
               const std::string& key) {
  try {
    if (like.is_string() && key != "epsilon_total" && key != "epsilon_fs") {
      return text;
    }
    if (like.is_array()) return json::parse("[" + text + "]");
    if (text == "inf" || text == "-inf") return text;
    return json::parse(text);
  } catch (const json::exception&) {
    throw Error(ErrorKind::kInput,
                "cannot parse " + FlagName(key) + " value '" + text + "'");
  }
}

std::vector<double> ParseEpsilonList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(DoubleFromJson(FlagValue(json(0.0), item, "sweep")));
  }
  if (out.empty()) throw Error(ErrorKind::kInput, "empty epsilon list");
  return out;
}

class Command {
 public:
  Command(const RunConfig& config, const CliContext& context)
      : c_(config), ctx_(context) {}

  int Train();
  int FixedShots();
  int Vectors();
  int Generate(bool pipeline, bool dry_run);
  int Evaluate(const std::optional<std::string>& sweep);
  int Budget(std::optional<double> epsilon_vec, std::optional<double> delta_vec,
             std::optional<int> num_private,
             const std::optional<std::string>& sweep);

 private:
  std::ostream& out() const { return *ctx_.out; }
  std::ostream& err() const { return *ctx_.err; }
  std::string OutPath(const std::string& name) const {
    return (std::filesystem::path(c_.output_dir) / name).string();
  }
  std::string OrDefault(const std::string& path,
                        const std::string& name) const {
    return path.empty() ? OutPath(name) : path;
  }
  void Write(const std::string& name, const std::string& contents) const {
    std::filesystem::create_directories(c_.output_dir);
    WriteFile(OutPath(name), contents);
    err() << "wrote " << OutPath(name) << "\n";
  }
  Model LoadModel() const { return LoadCheckpoint(c_.model, ctx_.on_open); }
  json ReadArtifact(const std::string& path) const {
    return ParseJson(ReadFile(path, ctx_.on_open), path);
  }
  std::vector<Record> ReadRecords(const std::string& path) const {
    JsonlReadOptions opts;
    opts.on_open = ctx_.on_open;
    return ReadJsonl(path, opts);
  }
  std::vector<std::string> ReadPrivateTexts() const {
    auto texts =
        TextsWithLabel(ReadRecords(c_.private_data), c_.pipeline.label);
    if (texts.empty()) {
      throw Error(ErrorKind::kInput, "no records with label '" +
                                         c_.pipeline.label + "' in " +
                                         c_.private_data);
    }
    return texts;
  }
  // Validates the run and plans the budget; runs before any private read.
  BudgetReport Prepare(const Model& model) const {
    c_.pipeline.Validate(model);
    return PlanPipelineBudget(c_.pipeline);
  }
  json BudgetJson(const BudgetReport& b, const std::string& model_hash) const {
    json j = BudgetReportToJson(b);
    j["format_version"] = kArtifactFormatVersion;
    j["config_hash"] = c_.pipeline.StageHash(PipelineStage::kVectors);
    j["model_hash"] = model_hash;
    return j;
  }
  void WriteSynthetic(const Model& model, const SyntheticDataset& syn,
                      const json& budget, const std::string& fs_hash,
                      const std::string& vec_hash, int num_private,
                      int num_subsampled) const;

  RunConfig c_;
  CliContext ctx_;
};

int Command::Train() {
  Tokenizer tok = BundledTokenizer();
  std::vector<TokenSequence> corpus;
  const uint64_t seed = c_.pipeline.seed;
  if (c_.corpus.empty()) {
    TrainingCorpusOptions opts;
    opts.seed = seed + 1;
    corpus = BuildTrainingCorpus(tok, opts);
  } else {
    const auto records = ReadRecords(c_.corpus);
    if (records.empty())
      throw Error(ErrorKind::kInput, c_.corpus + " is empty");
    std::vector<std::string> texts = {":"};
    for (const auto& r : records) {
      texts.push_back(r.text);
      texts.push_back(r.label);
    }
    tok = Tokenizer::FromTexts(texts);
    corpus = EncodeRecords(tok, records);
  }
  ModelConfig mc;
  mc.vocab_size = tok.vocab_size();
  mc.num_layers = c_.train.model_layers;
  mc.hidden_dim = c_.train.model_hidden_dim;
  mc.num_heads = c_.train.model_heads;
  mc.context_len = c_.train.model_context;
  mc.seed = seed;
  TrainOptions to;
  to.steps = c_.train.steps;
  to.learning_rate = c_.train.learning_rate;
  to.batch_size = c_.train.batch_size;
  to.seed = seed + 2;
  const TrainResult result = TrainToyLm(mc, tok, corpus, to);

  std::ostringstream log;
  log.precision(17);
  log << "step,loss\n";
  for (size_t i = 0; i < result.losses.size(); ++i) {
    log << i << ',' << result.losses[i] << '\n';
  }
  Write("model.ckpt", SerializeCheckpoint(result.model));
  Write("train_loss.csv", log.str());
  out() << "final loss " << result.losses.back() << ", model "
        << result.model.Hash() << "\n";
  return 0;
}

int Command::FixedShots() {
  const Model model = LoadModel();
  const BudgetReport budget = Prepare(model);
  const auto private_texts = ReadPrivateTexts();
  const FixedShotSet shots =
      RunFixedShotStage(model, c_.pipeline, budget, private_texts);
  Write("fixed_shots.json",
        DumpJson(FixedShotsToJson(
            shots, model.Hash(),
            c_.pipeline.StageHash(PipelineStage::kFixedShots))));
  return 0;
}

int Command::Vectors() {
  const Model model = LoadModel();
  BudgetReport budget = Prepare(model);
  const std::string fs_path =
      OrDefault(c_.fixed_shots_file, "fixed_shots.json");
  const json fs = ReadArtifact(fs_path);
  ExpectArtifactField(fs, "model_hash", model.Hash(), fs_path);
  ExpectArtifactField(fs, "config_hash",
                      c_.pipeline.StageHash(PipelineStage::kFixedShots),
                      fs_path);
  const FixedShotSet shots = FixedShotsFromJson(fs);
  const auto private_texts = ReadPrivateTexts();
  const VectorStageResult vec = RunVectorStage(
      model, c_.pipeline, shots.ToScaffold(), private_texts, budget);
  Write("vectors.json",
        DumpJson(VectorsToJson(vec.vectors, c_.pipeline, model.Hash(),
                               JsonHash(fs), budget)));
  Write("budget.json", DumpJson(BudgetJson(budget, model.Hash())));
  return 0;
}

void Command::WriteSynthetic(const Model& model, const SyntheticDataset& syn,
                             const json& budget, const std::string& fs_hash,
                             const std::string& vec_hash, int num_private,
                             int num_subsampled) const {
  const std::string body = RecordsToJsonl(syn.records);
  Write("synthetic.jsonl", body);
  ManifestInputs m;
  m.config = &c_.pipeline;
  m.model_hash = model.Hash();
  m.budget = budget;
  m.fixed_shots_hash = fs_hash;
  m.vectors_hash = vec_hash;
  m.synthetic_hash = HashHex(body);
  m.synthetic = &syn;
  m.num_private = num_private;
  m.num_subsampled = num_subsampled;
  Write("manifest.json", DumpJson(ManifestToJson(m)));
}

int Command::Generate(bool pipeline, bool dry_run) {
  const Model model = LoadModel();
  const BudgetReport budget = Prepare(model);
  if (dry_run) {
    json plan = {{"stages",
                  {"candidate pool", "fixed shots", "subsample", "negative set",
                   "vectors", "steered sampling"}},
                 {"config", c_.pipeline.ToJson()},
                 {"config_hash", c_.pipeline.Hash()},
                 {"model_hash", model.Hash()},
                 {"private_data", c_.private_data},
                 {"budget", BudgetReportToJson(budget)}};
    out() << DumpJson(plan);
    return 0;
  }
  if (pipeline) {
    const auto private_texts = ReadPrivateTexts();
    std::vector<Record> records;
    for (const auto& t : private_texts)
      records.push_back({t, c_.pipeline.label});
    const PipelineResult r =
        RunPipeline(model, c_.pipeline, [&] { return records; });
    const json fs =
        FixedShotsToJson(r.fixed_shots, model.Hash(),
                         c_.pipeline.StageHash(PipelineStage::kFixedShots));
    const json vec = VectorsToJson(r.vectors, c_.pipeline, model.Hash(),
                                   JsonHash(fs), r.budget);
    Write("fixed_shots.json", DumpJson(fs));
    Write("vectors.json", DumpJson(vec));
    const json b = BudgetJson(r.budget, model.Hash());
    Write("budget.json", DumpJson(b));
    WriteSynthetic(model, r.synthetic, b, JsonHash(fs), JsonHash(vec),
                   r.num_private, r.num_subsampled);
    return 0;
  }
  const std::string fs_path =
      OrDefault(c_.fixed_shots_file, "fixed_shots.json");
  const std::string vec_path = OrDefault(c_.vectors_file, "vectors.json");
  const json fs = ReadArtifact(fs_path);
  const json vec = ReadArtifact(vec_path);
  ExpectArtifactField(fs, "model_hash", model.Hash(), fs_path);
  ExpectArtifactField(fs, "config_hash",
                      c_.pipeline.StageHash(PipelineStage::kFixedShots),
                      fs_path);
  ExpectArtifactField(vec, "model_hash", model.Hash(), vec_path);
  ExpectArtifactField(vec, "config_hash",
                      c_.pipeline.StageHash(PipelineStage::kVectors), vec_path);
  ExpectArtifactField(vec, "fixed_shots_hash", JsonHash(fs), vec_path);
  const FixedShotSet shots = FixedShotsFromJson(fs);
  const auto vectors = VectorsFromJson(vec);
  const SyntheticDataset syn =
      RunGenerationStage(model, c_.pipeline, shots.ToScaffold(), vectors);
  json b = vec.at("budget");
  b["format_version"] = kArtifactFormatVersion;
  b["config_hash"] = vec.at("config_hash");
  b["model_hash"] = model.Hash();
  WriteSynthetic(model, syn, b, JsonHash(fs), JsonHash(vec), -1, -1);
  return 0;
}

int Command::Evaluate(const std::optional<std::string>& sweep) {
  const Model model = LoadModel();
  MauveConfig mc = c_.eval;
  mc.seed = StreamSeed(c_.pipeline.seed, SeedStream::kQuantize);
  auto pick = [&](const std::vector<Record>& records) {
    std::vector<std::string> texts;
    for (const auto& r : records) {
      if (c_.pipeline.label.empty() || r.label == c_.pipeline.label) {
        texts.push_back(r.text);
      }
    }
    return texts;
  };
  const auto real = pick(ReadRecords(c_.real_data));
  if (sweep) {
    const auto epsilons = ParseEpsilonList(*sweep);
    Prepare(model);
    for (double e : epsilons) {
      PipelineConfig probe = c_.pipeline;
      if (std::isfinite(e)) probe.budget.total.epsilon = e;
      PlanPipelineBudget(probe);
    }
    const auto private_data = ReadRecords(c_.private_data);
    const auto points =
        RunPrivacySweep(model, c_.pipeline, epsilons, private_data, real, mc);
    json report = SweepReportToJson(points);
    report["format_version"] = kArtifactFormatVersion;
    report["config_hash"] = c_.pipeline.Hash();
    report["model_hash"] = model.Hash();
    Write("sweep_report.json", DumpJson(report));
    return 0;
  }
  const std::string syn_path = OrDefault(c_.synthetic_data, "synthetic.jsonl");
  const auto syn = pick(ReadRecords(syn_path));
  const FidelityReport report = EvaluateFidelity(real, syn, model, mc);
  json j = report.ToJson();
  j["format_version"] = kArtifactFormatVersion;
  j["model_hash"] = model.Hash();
  j["label"] = c_.pipeline.label;
  j["seeds"]["run"] = c_.pipeline.seed;
  j["config_hash"] = HashHex(json{
      {"label", c_.pipeline.label},
      {"num_bins", mc.num_bins},
      {"scaling_factor", mc.scaling_factor},
      {"lambda_grid_size", mc.lambda_grid_size},
      {"seed", c_.pipeline.seed}}.dump());
  Write("eval_report.json", DumpJson(j));
  Write("divergence_curve.csv", report.curve.ToCsv());
  out() << "mauve " << report.mauve << "\n";
  return 0;
}

int Command::Budget(std::optional<double> epsilon_vec,
                    std::optional<double> delta_vec,
                    std::optional<int> num_private,
                    const std::optional<std::string>& sweep) {
  if (sweep) {
    if (!num_private) {
      throw Error(ErrorKind::kInput, "--sweep needs --num-private");
    }
    const auto epsilons = ParseEpsilonList(*sweep);
    json report = SweepReportToJson(
        PlanPrivacySweep(c_.pipeline, epsilons, *num_private));
    report["format_version"] = kArtifactFormatVersion;
    report["config_hash"] = c_.pipeline.StageHash(PipelineStage::kVectors);
    Write("sweep_report.json", DumpJson(report));
    out() << DumpJson(report);
    return 0;
  }
  BudgetReport report;
  if (epsilon_vec) {
    // Forward composition of explicitly given components.
    const BudgetRequest& req = c_.pipeline.budget;
    report.q = req.q;
    report.fixed_shots = {req.epsilon_fs, req.total.delta * req.delta_fs_share};
    report.fixed_shots.Validate();
    const PrivacyBudget vec{
        *epsilon_vec,
        delta_vec ? *delta_vec : req.total.delta * (1 - req.delta_fs_share)};
    vec.Validate();
    const PrivacyBudget share =
        AllocatePerLayer(vec, c_.pipeline.layers.size());
    std::vector<PrivacyBudget> copies(c_.pipeline.layers.size(), share);
    report.vectors = ComposeBasic(copies);
    report.total = TotalPipelineBudget(report.fixed_shots, report.vectors,
                                       SubsampleSpec{req.q});
    for (int l : c_.pipeline.layers) report.per_layer.push_back({l, share});
  } else {
    report = PlanPipelineBudget(c_.pipeline);
  }
  if (num_private) {
    const int m = static_cast<int>(
        SubsampleIndices(*num_private, c_.pipeline.budget.q, 0).size());
    CalibrateLayers(report, c_.pipeline.clip, m,
                    EffectiveCalibrator(c_.pipeline));
  }
  json j = BudgetReportToJson(report);
  j["format_version"] = kArtifactFormatVersion;
  Write("budget.json", DumpJson(j));
  out() << DumpJson(j);
  return 0;
}

void ApplyEnvironment(json& config) {
  if (const char* dir = std::getenv("DPSTEER_OUTPUT_DIR"); dir && *dir) {
    config["output_dir"] = dir;
  }
  if (const char* t = std::getenv("DPSTEER_THREADS"); t && *t) {
    config["threads"] = FlagValue(json(1), t, "threads");
  }
}

}  // namespace

json RunConfigToJson(const RunConfig& config) {
  json j = json::object();
  for (const auto& f : Fields()) j[f.key] = f.get(config);
  return j;
}

RunConfig RunConfigFromJson(const json& j) {
  if (!j.is_object())
    throw Error(ErrorKind::kInput, "config must be an object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto& fields = Fields();
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const FieldSpec& f) { return key == f.key; });
    if (it == fields.end()) {
      throw Error(ErrorKind::kInput, "unknown config key '" + key + "'");
    }
    it->set(c, value);
  }
  return c;
}

int RunCli(const std::vector<std::string>& args, const CliContext& context) {
  CliContext ctx = context;
  std::ostringstream sink;
  if (!ctx.out) ctx.out = &sink;
  if (!ctx.err) ctx.err = &sink;

  CLI::App app{"Differentially private synthetic text via steered decoding",
               "dpsteer"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");
  const RunConfig defaults;
  const json default_json = RunConfigToJson(defaults);
  std::map<std::string, std::string> flag_values;
  for (const auto& f : Fields()) {
    app.add_option(FlagName(f.key), flag_values[f.key], f.help);
  }

  auto* train = app.add_subcommand("train", "train the toy language model");
  auto* fixedshots =
      app.add_subcommand("fixedshots", "select private fixed shots");
  auto* vectors =
      app.add_subcommand("vectors", "extract private steering vectors");
  auto* generate =
      app.add_subcommand("generate", "sample steered synthetic data");
  auto* evaluate =
      app.add_subcommand("evaluate", "score synthetic against real data");
  auto* budget =
      app.add_subcommand("budget", "print the privacy budget report");
  bool pipeline = false, dry_run = false;
  generate->add_flag("--pipeline", pipeline, "run every stage end to end");
  generate->add_flag("--dry-run", dry_run,
                     "print the plan; read no private data");
  std::optional<std::string> eval_sweep, budget_sweep;
  evaluate->add_option(
      "--sweep", eval_sweep,
      "comma-separated total epsilons; runs the pipeline at each");
  std::optional<double> epsilon_vec, delta_vec;
  std::optional<int> num_private;
  budget->add_option("--epsilon-vec", epsilon_vec,
                     "vector epsilon (forward mode)");
  budget->add_option("--delta-vec", delta_vec, "vector delta (forward mode)");
  budget->add_option("--num-private", num_private,
                     "private record count for sigma");
  budget->add_option("--sweep", budget_sweep, "comma-separated total epsilons");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, *ctx.out, *ctx.err);
    return code == 0 ? 0 : 2;
  }

  try {
    json merged = default_json;
    if (!config_path.empty()) {
      const json file =
          ParseJson(ReadFile(config_path, ctx.on_open), config_path);
      if (!file.is_object()) {
        throw Error(ErrorKind::kInput, config_path + " is not a JSON object");
      }
      for (const auto& [k, v] : file.items()) merged[k] = v;
    }
    ApplyEnvironment(merged);
    for (const auto& f : Fields()) {
      if (app.count(FlagName(f.key)) > 0) {
        merged[f.key] =
            FlagValue(default_json.at(f.key), flag_values[f.key], f.key);
      }
    }
    Command cmd(RunConfigFromJson(merged), ctx);
    if (*train) return cmd.Train();
    if (*fixedshots) return cmd.FixedShots();
    if (*vectors) return cmd.Vectors();
    if (*generate) return cmd.Generate(pipeline, dry_run);
    if (*evaluate) return cmd.Evaluate(eval_sweep);
    if (*budget)
      return cmd.Budget(epsilon_vec, delta_vec, num_private, budget_sweep);
    return 2;
  } catch (const Error& e) {
    *ctx.err << "error (" << ErrorKindName(e.kind()) << "): " << e.what()
             << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    *ctx.err << "error (input): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    *ctx.err << "internal error: " << e.what() << "\n";
    return 5;
  }
}

}  // namespace dpsteer
