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

#include "zsapa/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_set>

#include "zsapa/audio.hpp"
#include "zsapa/error.hpp"

namespace zsapa {

namespace {

std::string Lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Run {
  std::string key;
  ScoreConfig config;
};

std::vector<Run> PlanRuns(const ScoreConfig& config, const EvalOptions& options) {
  std::vector<Run> runs;
  if (config.strategy == MaskStrategy::kRegular) {
    runs.push_back({"regular", config});
    return runs;
  }
  if (options.seeds.empty()) throw Error(ErrorCode::kInvalidParams, "at least one seed is required");
  for (std::uint64_t seed : options.seeds) {
    ScoreConfig c = config;
    c.seed = seed;
    runs.push_back({std::to_string(seed), c});
  }
  return runs;
}

// Scores one utterance under every run; the clean pass is shared.
void ScoreUtterance(Backend& backend, const ManifestEntry& entry, std::span<const Run> runs, UtteranceResult& out) {
  const AudioClip clip = LoadAudio(entry.wav);
  const PreparedUtterance prep = PrepareUtterance(backend, clip, runs.front().config.layer, entry.utt_id);
  out.utt_id = entry.utt_id;
  out.human_score = entry.human_score;
  out.run_scores.clear();
  out.run_amrt.clear();
  for (const Run& run : runs) {
    const ScoreReport r = ScorePrepared(backend, prep, run.config);
    out.run_scores.push_back(r.score);
    out.run_amrt.push_back(r.amrt);
  }
  double s = 0.0;
  double a = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    s += out.run_scores[i];
    a += out.run_amrt[i];
  }
  out.score = s / static_cast<double>(runs.size());
  out.amrt = a / static_cast<double>(runs.size());
}

[[noreturn]] void RethrowWithContext(const std::exception_ptr& ep, const std::string& utt_id) {
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    throw Error(e.code(), "utterance " + utt_id + ": " + e.detail());
  }
}

}  // namespace

std::vector<ManifestEntry> ParseManifest(std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fail = [&](const std::string& why) {
      return Error(ErrorCode::kInvalidManifest, "line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw fail("not valid JSON");
    }
    if (!j.is_object()) throw fail("expected a JSON object");
    if (!j.contains("utt_id") || !j["utt_id"].is_string()) throw fail("missing string field 'utt_id'");
    if (!j.contains("wav") || !j["wav"].is_string()) throw fail("missing string field 'wav'");
    if (!j.contains("score") || !j["score"].is_number()) throw fail("missing numeric field 'score'");

    ManifestEntry e;
    e.utt_id = j["utt_id"].get<std::string>();
    if (e.utt_id.empty()) throw fail("empty utt_id");
    std::filesystem::path wav = j["wav"].get<std::string>();
    e.wav = wav.is_relative() && !base_dir.empty() ? base_dir / wav : wav;
    e.human_score = j["score"].get<double>();
    if (!(e.human_score >= kMinHumanScore && e.human_score <= kMaxHumanScore)) {
      throw fail("score " + FormatNumber(e.human_score) + " outside [0, 10]");
    }
    if (!seen.insert(e.utt_id).second) throw fail("duplicate utt_id '" + e.utt_id + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  try {
    return ParseManifest(in, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void WriteManifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const ManifestEntry& e : entries) {
    nlohmann::ordered_json j;
    j["utt_id"] = e.utt_id;
    j["wav"] = e.wav.string();
    j["score"] = e.human_score;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(xs.size()) + " vs " + std::to_string(ys.size()) + " values");
  }
  if (xs.size() < 2) throw Error(ErrorCode::kLengthMismatch, "need at least two pairs");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kDegenerateInput, "zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

EvalResult Evaluate(std::span<const ManifestEntry> manifest, const BackendFactory& factory,
                    const ScoreConfig& config, const EvalOptions& options) {
  config.Validate();
  if (manifest.empty()) throw Error(ErrorCode::kInvalidManifest, "manifest is empty");
  const std::vector<Run> runs = PlanRuns(config, options);

  EvalResult result;
  result.config = config;
  if (config.strategy == MaskStrategy::kRandom) result.seeds = options.seeds;

  std::vector<ManifestEntry> entries;
  std::vector<std::string> missing;
  for (const ManifestEntry& e : manifest) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(e.wav, ec)) {
      entries.push_back(e);
    } else {
      missing.push_back(e.utt_id + " (" + e.wav.string() + ")");
    }
  }
  if (!missing.empty() && !options.skip_missing) {
    std::string list;
    for (const auto& m : missing) list += "\n  " + m;
    throw Error(ErrorCode::kMissingAudio, std::to_string(missing.size()) + " listed wav file(s) absent:" + list);
  }
  result.skipped = missing;
  std::ranges::sort(entries, {}, &ManifestEntry::utt_id);
  if (entries.size() < 2) throw Error(ErrorCode::kInvalidManifest, "need at least two utterances with audio");

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(entries.size())));
  std::vector<std::unique_ptr<Backend>> backends;
  backends.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) backends.push_back(factory());

  result.per_utterance.resize(entries.size());
  std::vector<std::exception_ptr> errors(entries.size());
  const auto n = static_cast<std::ptrdiff_t>(entries.size());
  if (workers == 1) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      try {
        ScoreUtterance(*backends[0], entries[u], runs, result.per_utterance[u]);
      } catch (...) {
        errors[u] = std::current_exception();
      }
    }
  } else {
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      Backend& backend = *backends[static_cast<std::size_t>(omp_get_thread_num())];
      try {
        ScoreUtterance(backend, entries[u], runs, result.per_utterance[u]);
      } catch (...) {
        errors[u] = std::current_exception();
      }
    }
  }
  for (std::size_t u = 0; u < entries.size(); ++u) {
    if (errors[u]) RethrowWithContext(errors[u], entries[u].utt_id);
  }

  std::vector<double> human;
  human.reserve(entries.size());
  for (const auto& r : result.per_utterance) human.push_back(r.human_score);
  std::vector<double> engine(entries.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t u = 0; u < entries.size(); ++u) engine[u] = result.per_utterance[u].run_scores[r];
    result.pcc_per_run.emplace_back(runs[r].key, Pearson(engine, human));
  }

  double mean = 0.0;
  for (const auto& [key, pcc] : result.pcc_per_run) mean += pcc;
  mean /= static_cast<double>(result.pcc_per_run.size());
  double var = 0.0;
  for (const auto& [key, pcc] : result.pcc_per_run) var += (pcc - mean) * (pcc - mean);
  var /= static_cast<double>(result.pcc_per_run.size());
  result.pcc_mean = mean;
  result.pcc_std = std::sqrt(var);
  return result;
}

nlohmann::ordered_json EvalResultToJson(const EvalResult& result) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& u : result.per_utterance) {
    nlohmann::ordered_json e;
    e["utt_id"] = u.utt_id;
    e["human_score"] = u.human_score;
    e["score"] = u.score;
    e["amrt"] = u.amrt;
    e["run_scores"] = u.run_scores;
    per.push_back(std::move(e));
  }
  j["per_utterance"] = std::move(per);
  nlohmann::ordered_json pcc = nlohmann::ordered_json::object();
  for (const auto& [key, value] : result.pcc_per_run) pcc[key] = value;
  j["pcc_per_seed"] = std::move(pcc);
  j["pcc_mean"] = result.pcc_mean;
  j["pcc_std"] = result.pcc_std;
  nlohmann::ordered_json config = ConfigToJson(result.config);
  if (result.config.strategy == MaskStrategy::kRandom) {
    config.erase("seed");
    config["seeds"] = result.seeds;
  }
  j["config"] = std::move(config);
  j["skipped"] = result.skipped;
  return j;
}

SweepParam ParseSweepParam(std::string_view name) {
  std::string n(name);
  std::ranges::replace(n, '-', '_');
  if (n == "mask_prob") return SweepParam::kMaskProb;
  if (n == "mask_len") return SweepParam::kMaskLen;
  if (n == "layer") return SweepParam::kLayer;
  if (n == "slices") return SweepParam::kSlices;
  throw Error(ErrorCode::kInvalidParams, "unknown sweep parameter '" + std::string(name) + "'");
}

std::string_view SweepParamName(SweepParam p) {
  switch (p) {
    case SweepParam::kMaskProb: return "mask_prob";
    case SweepParam::kMaskLen: return "mask_len";
    case SweepParam::kLayer: return "layer";
    case SweepParam::kSlices: return "slices";
  }
  return "?";
}

ScoreConfig ApplySweepValue(const ScoreConfig& base, SweepParam param, double value) {
  const auto as_int = [&](const char* what) {
    if (!std::isfinite(value) || value != std::floor(value) || value < 1.0 || value > 1e9) {
      throw Error(ErrorCode::kInvalidParams, std::string(what) + " must be a positive integer, got " +
                                                 FormatNumber(value));
    }
    return static_cast<int>(value);
  };
  ScoreConfig c = base;
  switch (param) {
    case SweepParam::kMaskProb:
      c.strategy = MaskStrategy::kRandom;
      c.mask_prob = value;
      break;
    case SweepParam::kMaskLen:
      c.strategy = MaskStrategy::kRandom;
      c.mask_len = as_int("mask length");
      break;
    case SweepParam::kLayer:
      c.layer = as_int("layer");
      break;
    case SweepParam::kSlices:
      c.strategy = MaskStrategy::kRegular;
      c.slices = as_int("slices");
      break;
  }
  c.Validate();
  return c;
}

std::vector<SweepRow> Sweep(std::span<const ManifestEntry> manifest, const BackendFactory& factory,
                            const ScoreConfig& base, SweepParam param, std::span<const double> values,
                            const EvalOptions& options) {
  if (values.empty()) throw Error(ErrorCode::kInvalidParams, "sweep needs at least one value");
  std::vector<ScoreConfig> configs;
  for (double v : values) configs.push_back(ApplySweepValue(base, param, v));
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const EvalResult r = Evaluate(manifest, factory, configs[i], options);
    rows.push_back({param, values[i], r.pcc_mean, r.pcc_std});
  }
  return rows;
}

std::string FormatNumber(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string SweepToCsv(std::span<const SweepRow> rows) {
  std::string out = "param,value,pcc_mean,pcc_std\n";
  for (const SweepRow& r : rows) {
    out += std::string(SweepParamName(r.param)) + "," + FormatNumber(r.value) + "," + FormatNumber(r.pcc_mean) +
           "," + FormatNumber(r.pcc_std) + "\n";
  }
  return out;
}

std::vector<ManifestEntry> ConvertScores(const std::filesystem::path& scores_path,
                                         const std::filesystem::path& wav_dir) {
  std::ifstream in(scores_path);
  if (!in) throw Error(ErrorCode::kFileNotFound, scores_path.string());
  std::stringstream text;
  text << in.rdbuf();
  if (text.str().find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::kInvalidManifest, scores_path.string() + ": empty scores file");
  }
  nlohmann::json scores;
  try {
    scores = nlohmann::json::parse(text.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidManifest, scores_path.string() + ": " + e.what());
  }
  if (!scores.is_object() || scores.empty()) {
    throw Error(ErrorCode::kInvalidManifest, scores_path.string() + ": expected a non-empty object keyed by utterance");
  }
  std::error_code ec;
  if (!std::filesystem::is_directory(wav_dir, ec)) throw Error(ErrorCode::kFileNotFound, wav_dir.string());

  // utt_id -> audio path
  std::map<std::string, std::filesystem::path> audio;
  std::set<std::string> wanted;
  const auto scp = wav_dir / "wav.scp";
  const bool use_scp = std::filesystem::is_regular_file(scp, ec);
  if (use_scp) {
    std::ifstream s(scp);
    std::string line;
    while (std::getline(s, line)) {
      std::istringstream ls(line);
      std::string utt;
      std::string rel;
      if (!(ls >> utt >> rel)) continue;
      std::filesystem::path p = rel;
      if (p.is_relative()) {
        p = std::filesystem::exists(wav_dir / p, ec) ? wav_dir / p : wav_dir.parent_path() / p;
      }
      wanted.insert(utt);
      audio[utt] = p;
    }
  } else {
    for (const auto& f : std::filesystem::recursive_directory_iterator(wav_dir, ec)) {
      if (!f.is_regular_file()) continue;
      if (Lower(f.path().extension().string()) != ".wav") continue;
      audio.emplace(f.path().stem().string(), f.path());
    }
  }

  std::vector<ManifestEntry> entries;
  std::vector<std::string> missing;
  for (const auto& [utt, obj] : scores.items()) {
    if (use_scp && !wanted.contains(utt)) continue;
    if (!obj.is_object() || !obj.contains("total") || !obj["total"].is_number()) {
      throw Error(ErrorCode::kInvalidManifest, scores_path.string() + ": utterance " + utt +
                                                   " has no numeric sentence-level 'total'");
    }
    const double total = obj["total"].get<double>();
    if (!(total >= kMinHumanScore && total <= kMaxHumanScore)) {
      throw Error(ErrorCode::kInvalidManifest, scores_path.string() + ": utterance " + utt + " total " +
                                                   FormatNumber(total) + " outside [0, 10]");
    }
    const auto it = audio.find(utt);
    if (it == audio.end() || !std::filesystem::is_regular_file(it->second, ec)) {
      missing.push_back(utt);
      continue;
    }
    entries.push_back({utt, it->second, total});
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += "\n  " + m;
    throw Error(ErrorCode::kMissingAudio, std::to_string(missing.size()) + " utterance(s) without audio:" + list);
  }
  if (entries.empty()) throw Error(ErrorCode::kInvalidManifest, "no utterances selected");
  std::ranges::sort(entries, {}, &ManifestEntry::utt_id);
  return entries;
}

}  // namespace zsapa
