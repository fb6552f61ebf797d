// Copyright 2026 The zs-apa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// zs-apa: zero-shot pronunciation scoring from masked-token recovery.
//
//   zs-apa score            --wav FILE (--model DIR | --mock) [strategy flags]
//   zs-apa evaluate         --manifest FILE (--model DIR | --mock) --out FILE [--seeds ..] [--workers N]
//   zs-apa sweep            --param P --values CSV --manifest FILE (--model DIR | --mock) [--out FILE]
//   zs-apa convert-manifest --scores FILE --wav-dir DIR --out FILE
//
// Exit status: 0 success, 1 usage error, 2 I/O or model error.

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zsapa/audio.hpp"
#include "zsapa/backend.hpp"
#include "zsapa/error.hpp"
#include "zsapa/harness.hpp"
#include "zsapa/mock_backend.hpp"
#include "zsapa/onnx_backend.hpp"
#include "zsapa/scoring.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string model_dir;
  bool mock = false;
  std::string strategy = "random";
  double mask_prob = 0.2;
  int mask_len = 5;
  int reps = 50;
  int slices = 20;
  int layer = 7;
  std::uint64_t seed = 13;
  std::string seeds = "13,21,100";
  bool normalize = false;
  bool literal_start_fraction = false;
  int workers = 0;  // 0: $ZS_APA_WORKERS or 1
  bool skip_missing = false;

  std::string wav;
  std::string manifest;
  std::string out;
  std::string param;
  std::string values;
  std::string scores;
  std::string wav_dir;
};

void AddBackendFlags(CLI::App* sub, CliConfig& c) {
  sub->add_option("--model", c.model_dir, "Model bundle directory");
  sub->add_flag("--mock", c.mock, "Use the built-in closed-form mock backend");
}

void AddStrategyFlags(CLI::App* sub, CliConfig& c) {
  sub->add_option("--strategy", c.strategy, "Masking strategy: random or regular");
  sub->add_option("--mask-prob", c.mask_prob, "Random masking: fraction of frames masked (0, 1]");
  sub->add_option("--mask-len", c.mask_len, "Random masking: span length in frames");
  sub->add_option("--reps", c.reps, "Random masking: repetitions k");
  sub->add_option("--slices", c.slices, "Regular masking: slice count");
  sub->add_option("--layer", c.layer, "Transformer layer (1-based) whose features are quantized");
  sub->add_flag("--normalize", c.normalize, "Divide aMRT by the mean masked-set size");
  sub->add_flag("--literal-start-fraction", c.literal_start_fraction,
                "Random masking: mask-prob is the share of frames used as span starts");
}

void AddEvalFlags(CLI::App* sub, CliConfig& c) {
  sub->add_option("--manifest", c.manifest, "JSON-lines manifest")->required();
  sub->add_option("--seeds", c.seeds, "Comma-separated seeds for random masking");
  sub->add_option("--workers", c.workers, "Parallel workers (default $ZS_APA_WORKERS or 1)");
  sub->add_flag("--skip-missing", c.skip_missing, "Skip manifest entries whose wav is absent");
}

zsapa::ScoreConfig ToScoreConfig(const CliConfig& c) {
  zsapa::ScoreConfig s;
  try {
    s.strategy = zsapa::ParseMaskStrategy(c.strategy);
  } catch (const zsapa::Error&) {
    throw UsageError("--strategy must be 'random' or 'regular'");
  }
  s.mask_prob = c.mask_prob;
  s.mask_len = c.mask_len;
  s.reps = c.reps;
  s.slices = c.slices;
  s.layer = c.layer;
  s.seed = c.seed;
  s.normalize = c.normalize;
  s.literal_start_fraction = c.literal_start_fraction;
  try {
    s.Validate();
  } catch (const zsapa::Error& e) {
    throw UsageError(e.what());
  }
  return s;
}

void RequireBackendChoice(const CliConfig& c) {
  if (!c.mock && c.model_dir.empty()) throw UsageError("either --model DIR or --mock is required");
  if (c.mock && !c.model_dir.empty()) throw UsageError("--model and --mock are mutually exclusive");
}

std::vector<std::string> SplitCsv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw UsageError("empty entry in list '" + s + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : SplitCsv(s)) {
    std::size_t used = 0;
    try {
      if (item.front() == '-') throw std::invalid_argument(item);
      seeds.push_back(std::stoull(item, &used));
    } catch (const std::exception&) {
      throw UsageError("invalid seed '" + item + "'");
    }
    if (used != item.size()) throw UsageError("invalid seed '" + item + "'");
  }
  return seeds;
}

std::vector<double> ParseValues(const std::string& s) {
  std::vector<double> values;
  for (const std::string& item : SplitCsv(s)) {
    std::size_t used = 0;
    try {
      values.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      throw UsageError("invalid value '" + item + "'");
    }
    if (used != item.size()) throw UsageError("invalid value '" + item + "'");
  }
  return values;
}

int ResolveWorkers(int flag) {
  if (flag > 0) return flag;
  if (flag < 0) throw UsageError("--workers must be positive");
  if (const char* env = std::getenv("ZS_APA_WORKERS"); env != nullptr && *env != '\0') {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw UsageError("ZS_APA_WORKERS must be a positive integer");
  }
  return 1;
}

zsapa::BackendFactory MakeFactory(const CliConfig& c, int workers) {
  if (c.mock) {
    return [] { return std::unique_ptr<zsapa::Backend>(std::make_unique<zsapa::MockBackend>()); };
  }
  auto bundle = std::make_shared<const zsapa::ModelBundle>(zsapa::LoadBundle(c.model_dir));
  for (const std::string& w : zsapa::BundleWarnings(*bundle)) std::cerr << "warning: " << w << "\n";
  zsapa::OnnxOptions options;
  options.intra_op_threads = workers == 1 ? omp_get_max_threads() : 1;
  return zsapa::MakeOnnxBackendFactory(std::move(bundle), options);
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw zsapa::Error(zsapa::ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) throw zsapa::Error(zsapa::ErrorCode::kIoError, "short write to " + path);
}

int RunScore(const CliConfig& c) {
  RequireBackendChoice(c);
  const zsapa::ScoreConfig config = ToScoreConfig(c);
  auto backend = MakeFactory(c, 1)();
  const zsapa::AudioClip clip = zsapa::LoadAudio(c.wav);
  const zsapa::ScoreReport report = zsapa::Score(*backend, clip, config, clip.source_id);
  std::cout << zsapa::ReportToJson(report).dump(2) << "\n";
  return 0;
}

int RunEvaluate(const CliConfig& c) {
  RequireBackendChoice(c);
  const zsapa::ScoreConfig config = ToScoreConfig(c);
  zsapa::EvalOptions options;
  options.seeds = ParseSeeds(c.seeds);
  options.workers = ResolveWorkers(c.workers);
  options.skip_missing = c.skip_missing;
  const auto manifest = zsapa::ReadManifest(c.manifest);
  const auto factory = MakeFactory(c, options.workers);
  const zsapa::EvalResult result = zsapa::Evaluate(manifest, factory, config, options);
  for (const std::string& s : result.skipped) std::cerr << "skipped: " << s << "\n";
  WriteText(c.out, zsapa::EvalResultToJson(result).dump(2) + "\n");
  std::cout << "PCC " << zsapa::FormatNumber(result.pcc_mean) << " ± " << zsapa::FormatNumber(result.pcc_std)
            << " over " << result.pcc_per_run.size() << " run(s), " << result.per_utterance.size()
            << " utterances\n";
  return 0;
}

int RunSweep(CliConfig c, bool strategy_given) {
  RequireBackendChoice(c);
  zsapa::SweepParam param;
  try {
    param = zsapa::ParseSweepParam(c.param);
  } catch (const zsapa::Error&) {
    throw UsageError("--param must be one of mask-prob, mask-len, layer, slices");
  }
  const bool wants_regular = param == zsapa::SweepParam::kSlices;
  const bool wants_random = param == zsapa::SweepParam::kMaskProb || param == zsapa::SweepParam::kMaskLen;
  if (strategy_given && ((wants_regular && c.strategy != "regular") || (wants_random && c.strategy != "random"))) {
    throw UsageError("--param " + c.param + " does not apply to --strategy " + c.strategy);
  }
  if (wants_regular) c.strategy = "regular";
  const zsapa::ScoreConfig base = ToScoreConfig(c);
  const std::vector<double> values = ParseValues(c.values);
  for (double v : values) {
    try {
      zsapa::ApplySweepValue(base, param, v);
    } catch (const zsapa::Error& e) {
      throw UsageError(e.what());
    }
  }
  zsapa::EvalOptions options;
  options.seeds = ParseSeeds(c.seeds);
  options.workers = ResolveWorkers(c.workers);
  options.skip_missing = c.skip_missing;
  const auto manifest = zsapa::ReadManifest(c.manifest);
  const auto factory = MakeFactory(c, options.workers);
  const auto rows = zsapa::Sweep(manifest, factory, base, param, values, options);
  const std::string csv = zsapa::SweepToCsv(rows);
  if (c.out.empty()) {
    std::cout << csv;
  } else {
    WriteText(c.out, csv);
  }
  return 0;
}

int RunConvert(const CliConfig& c) {
  const auto entries = zsapa::ConvertScores(c.scores, c.wav_dir);
  zsapa::WriteManifest(c.out, entries);
  std::cout << entries.size() << " utterances written to " << c.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot, ASR-free pronunciation scoring by masked-token recovery"};
  app.require_subcommand(1);
  CliConfig c;

  auto* score = app.add_subcommand("score", "Score one WAV file and print a JSON report");
  score->add_option("--wav", c.wav, "Input WAV file")->required();
  AddBackendFlags(score, c);
  AddStrategyFlags(score, c);
  score->add_option("--seed", c.seed, "Random masking seed");

  auto* evaluate = app.add_subcommand("evaluate", "Score a manifest and correlate with human scores");
  AddBackendFlags(evaluate, c);
  AddStrategyFlags(evaluate, c);
  AddEvalFlags(evaluate, c);
  evaluate->add_option("--out", c.out, "EvalResult JSON output")->required();

  auto* sweep = app.add_subcommand("sweep", "Evaluate over a range of one hyperparameter; emits CSV");
  AddBackendFlags(sweep, c);
  AddStrategyFlags(sweep, c);
  AddEvalFlags(sweep, c);
  sweep->add_option("--param", c.param, "mask-prob, mask-len, layer or slices")->required();
  sweep->add_option("--values", c.values, "Comma-separated values")->required();
  sweep->add_option("--out", c.out, "CSV output (default stdout)");

  auto* convert = app.add_subcommand("convert-manifest", "Build a manifest from a scores JSON and a WAV directory");
  convert->add_option("--scores", c.scores, "Scores JSON keyed by utterance id")->required();
  convert->add_option("--wav-dir", c.wav_dir, "Directory holding the WAV files (or a wav.scp)")->required();
  convert->add_option("--out", c.out, "Manifest output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*score) return RunScore(c);
    if (*evaluate) return RunEvaluate(c);
    if (*sweep) return RunSweep(c, sweep->count("--strategy") > 0);
    if (*convert) return RunConvert(c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const zsapa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
