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

// Acceptance runner: one PASS / FAIL / SKIP line per criterion.
//
// The hermetic checks use only the mock backend. The reproduction checks
// need a real exported bundle and a manifest:
//   ZS_APA_BUNDLE=<bundle dir> ZS_APA_MANIFEST=<manifest.jsonl> acceptance
// and otherwise print SKIP. ZS_APA_WORKERS sets their parallelism.

#include <omp.h>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "../test_support.hpp"
#include "zsapa/error.hpp"
#include "zsapa/harness.hpp"
#include "zsapa/masking.hpp"
#include "zsapa/mock_backend.hpp"
#include "zsapa/onnx_backend.hpp"
#include "zsapa/quantizer.hpp"
#include "zsapa/scoring.hpp"

namespace zsapa {
namespace {

using testing::TempDir;

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome = Outcome::kPass;
  std::string detail;
};

Verdict Pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Verdict Fail(std::string d) { return {Outcome::kFail, std::move(d)}; }
Verdict Skip(std::string d) { return {Outcome::kSkip, std::move(d)}; }

std::string Fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

BackendFactory MockFactory() {
  return [] { return std::unique_ptr<Backend>(std::make_unique<MockBackend>()); };
}

// ---- hermetic -------------------------------------------------------------

bool IsUnionOfSpans(const IndexSet& set, std::size_t l) {
  std::size_t run = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i > 0 && set[i] <= set[i - 1]) return false;
    run = (i > 0 && set[i] == set[i - 1] + 1) ? run + 1 : 1;
    const bool ends = i + 1 == set.size() || set[i + 1] != set[i] + 1;
    if (ends && run % l != 0) return false;
  }
  return true;
}

Verdict MaskPlanInvariants() {
  struct Case {
    std::size_t T;
    RandomMaskParams p;
    std::uint64_t seed;
  };
  std::mt19937_64 rng(1000);
  std::vector<Case> cases;
  for (int i = 0; i < 1000; ++i) {
    Case c;
    c.T = 1 + rng() % 500;
    c.p.percent = 1.0 + static_cast<double>(rng() % 9900) / 100.0;
    c.p.span = 1 + static_cast<int>(rng() % 15);
    c.p.repetitions = 1 + static_cast<int>(rng() % 10);
    c.p.literal_start_fraction = rng() % 4 == 0;
    c.seed = rng();
    cases.push_back(c);
  }
  std::vector<std::vector<IndexSet>> first(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const MaskPlan plan = PlanRandomMasks(c.T, c.p, c.seed, "acc");
    const auto l = static_cast<std::size_t>(c.p.span);
    const std::size_t n = TargetSpanCount(c.T, c.p);
    for (const IndexSet& rep : plan.repetitions) {
      if (c.T < l) {
        if (rep.size() != c.T) return Fail("T < l fallback did not mask every frame");
        continue;
      }
      if (!IsUnionOfSpans(rep, l)) return Fail("overlapping or partial span at tuple " + std::to_string(i));
      if (rep.size() < l || rep.size() > n * l || rep.back() >= c.T) {
        return Fail("budget bound violated at tuple " + std::to_string(i));
      }
    }
    first[i] = plan.repetitions;
    if (PlanRandomMasks(c.T, c.p, c.seed, "acc").repetitions != first[i]) return Fail("re-execution differs");
  }
  std::vector<std::vector<IndexSet>> parallel(cases.size());
  const auto n = static_cast<std::ptrdiff_t>(cases.size());
#pragma omp parallel for num_threads(8) schedule(dynamic)
  for (std::ptrdiff_t i = n - 1; i >= 0; --i) {
    const Case& c = cases[static_cast<std::size_t>(i)];
    parallel[static_cast<std::size_t>(i)] = PlanRandomMasks(c.T, c.p, c.seed, "acc").repetitions;
  }
  if (parallel != first) return Fail("8-way parallel planning differs from serial");

  for (int i = 0; i < 1000; ++i) {
    const std::size_t T = 1 + rng() % 500;
    const int slices = 1 + static_cast<int>(rng() % T);
    std::size_t next = 0;
    for (const IndexSet& rep : PlanRegularMasks(T, slices).repetitions) {
      for (std::size_t t : rep) {
        if (t != next++) return Fail("regular plan is not an in-order partition");
      }
    }
    if (next != T) return Fail("regular plan does not cover [0, T)");
  }
  return Pass("1000 random tuples: disjoint spans, budget bounds, re-run and 8-thread determinism; 1000 regular "
              "partitions exact");
}

Verdict AmrtOracle() {
  std::mt19937 rng(77);
  for (int n = 0; n < 500; ++n) {
    const std::size_t T = 1 + rng() % 30;
    const Token C = 2 + rng() % 7;
    const int k = 1 + static_cast<int>(rng() % 5);
    std::vector<Token> ref(T);
    for (auto& z : ref) z = rng() % C;
    MaskPlan plan;
    if (rng() % 2 == 0 && static_cast<std::size_t>(k) <= T) {
      plan = PlanRegularMasks(T, k);
    } else {
      RandomMaskParams p;
      p.percent = 5.0 + static_cast<double>(rng() % 96);
      p.span = 1 + static_cast<int>(rng() % 6);
      p.repetitions = k;
      plan = PlanRandomMasks(T, p, rng());
    }
    std::bernoulli_distribution coin(static_cast<double>(rng() % 101) / 100.0);
    std::vector<std::vector<Token>> full;
    for (std::size_t j = 0; j < plan.k(); ++j) {
      auto f = ref;
      for (auto& z : f) {
        if (coin(rng)) z = rng() % C;
      }
      full.push_back(f);
    }
    auto restrict = [&](const std::vector<std::vector<Token>>& fs) {
      std::vector<TokenSequence> out;
      for (std::size_t j = 0; j < plan.k(); ++j) {
        TokenSequence s;
        for (std::size_t i : plan.repetitions[j]) s.tokens.push_back(fs[j][i]);
        s.positions = plan.repetitions[j];
        out.push_back(s);
      }
      return out;
    };
    const auto oracle = testing::BruteForceAmrt(ref, plan.repetitions, full);
    const AmrtResult r = ComputeAmrt({ref, std::nullopt}, restrict(full), plan);
    if (r.total_mismatches != oracle.numerator || plan.k() != oracle.denominator ||
        r.amrt != static_cast<double>(oracle.numerator) / static_cast<double>(oracle.denominator)) {
      return Fail("instance " + std::to_string(n) + " differs from brute force");
    }
    if ((r.amrt == 0.0) != (oracle.numerator == 0)) return Fail("amrt = 0 does not coincide with all-match");
    for (std::size_t j = 0; j < plan.k(); ++j) {
      for (std::size_t i : plan.repetitions[j]) {
        if (full[j][i] != ref[i]) continue;
        auto flipped = full;
        flipped[j][i] = ref[i] + 1;
        const AmrtResult f = ComputeAmrt({ref, std::nullopt}, restrict(flipped), plan);
        if (f.amrt != static_cast<double>(oracle.numerator + 1) / static_cast<double>(plan.k())) {
          return Fail("flip did not add exactly 1/k");
        }
        break;
      }
    }
  }
  return Pass("500 instances (T <= 30, C <= 8, k <= 5) equal the brute-force rational; zero iff all-match; +1/k "
              "per flip");
}

Verdict TokenizerOracle() {
  std::mt19937 rng(55);
  auto grid = [&](int lo, int hi, int denom) {
    return static_cast<float>(std::uniform_int_distribution<int>(lo, hi)(rng)) / static_cast<float>(denom);
  };
  std::size_t ties = 0;
  for (int n = 0; n < 500; ++n) {
    const std::size_t C = 2 + rng() % 7;
    const std::size_t dim = 1 + rng() % 6;
    const std::size_t T = 1 + rng() % 30;
    const bool coarse = n % 2 == 0;
    auto draw = [&] { return coarse ? grid(-2, 2, 1) : grid(-128, 128, 64); };
    std::vector<float> c(C * dim);
    std::vector<float> f(T * dim);
    for (auto& x : c) x = draw();
    for (auto& x : f) x = draw();
    if (n % 3 == 0) {
      const std::size_t a = rng() % C;
      const std::size_t b = (a + 1 + rng() % (C - 1)) % C;
      for (std::size_t d = 0; d < dim; ++d) {
        const float delta = grid(-4, 4, 4);
        f[d] = grid(-8, 8, 4);
        c[a * dim + d] = f[d] + delta;
        c[b * dim + d] = f[d] - delta;
      }
    }
    const Codebook cb{Matrix(C, dim, c), 7};
    const LayerFeatures feat{7, Matrix(T, dim, f)};
    const auto expected = testing::BruteForceTokens(feat.features, cb.centroids);
    if (Tokenize(feat, cb).tokens != expected || TokenizeSerial(feat, cb).tokens != expected) {
      return Fail("instance " + std::to_string(n) + " differs from exhaustive scan");
    }
    for (std::size_t t = 0; t < T; ++t) {
      double best = 1e300;
      std::size_t eq = 0;
      for (std::size_t k = 0; k < C; ++k) best = std::min(best, SquaredDistance(feat.features.row(t), cb.centroids.row(k)));
      for (std::size_t k = 0; k < C; ++k) eq += SquaredDistance(feat.features.row(t), cb.centroids.row(k)) == best;
      ties += eq > 1;
    }
  }
  if (ties == 0) return Fail("no ties were exercised");
  return Pass("500 instances match the exhaustive scan; " + std::to_string(ties) + " tied rows resolved to lowest index");
}

Verdict PccChecks() {
  const double r08 = Pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4});
  if (std::abs(r08 - 0.8) > 1e-12) return Fail("pcc([1,2,3,4],[1,3,2,4]) = " + Fmt(r08, 15));
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 50;
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = 0.5 * x[i] + g(rng);
    }
    const double r = Pearson(x, y);
    if (r != Pearson(y, x)) return Fail("not symmetric");
    const double a = 0.01 + std::abs(g(rng)) * 50;
    const double b = g(rng) * 20;
    std::vector<double> xa(n);
    for (std::size_t i = 0; i < n; ++i) xa[i] = a * x[i] + b;
    worst = std::max(worst, std::abs(Pearson(xa, y) - r));
    worst = std::max(worst, std::abs(r - static_cast<double>(testing::DirectPearson(x, y))));
  }
  if (worst > 1e-12) return Fail("affine invariance error " + Fmt(worst, 15));
  try {
    Pearson(std::vector<double>{3, 3, 3}, std::vector<double>{1, 2, 3});
    return Fail("constant input accepted");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateInput) return Fail("constant input raised the wrong error");
  }
  char err[32];
  std::snprintf(err, sizeof(err), "%.1e", worst);
  return Pass("0.8 exact to 1e-12; symmetric; affine error " + std::string(err) +
              " <= 1e-12; DegenerateInput on constant input");
}

Verdict EndToEndMock() {
  MockBackend backend;
  ScoreConfig regular;
  regular.strategy = MaskStrategy::kRegular;
  for (const ScoreConfig& c : {ScoreConfig{}, regular}) {
    const ScoreReport r = Score(backend, testing::ConstantClip(0.37f, 150), c);
    if (r.amrt != 0.0) return Fail("constant clip amrt " + Fmt(r.amrt) + " under " +
                                   std::string(MaskStrategyName(c.strategy)));
  }
  const auto smooth = testing::ClipFromWindowMeans(testing::SmoothMeans(150), "smooth");
  const auto rough = testing::ClipFromWindowMeans(testing::RoughMeans(150, 1.0, 77), "rough");
  const double s = Score(backend, smooth, ScoreConfig{}).amrt;
  const double r = Score(backend, rough, ScoreConfig{}).amrt;
  if (!(r > s)) return Fail("rough amrt " + Fmt(r) + " not above smooth " + Fmt(s));

  TempDir dir("acc_e2e");
  const auto entries = testing::WriteRoughnessManifest(dir.path(), 20);
  const EvalResult e = Evaluate(entries, MockFactory(), ScoreConfig{}, EvalOptions{});
  if (!(e.pcc_mean > 0.9)) return Fail("20-utterance PCC " + Fmt(e.pcc_mean));
  return Pass("constant clip amrt 0 (random, regular); rough " + Fmt(r, 2) + " > smooth " + Fmt(s, 2) +
              "; 20-utterance PCC " + Fmt(e.pcc_mean));
}

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult RunCli(const std::string& args) {
  const std::string cmd = std::string("'") + ZSAPA_CLI_PATH + "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof(buf), p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict CliByteStable() {
  TempDir dir("acc_cli");
  WriteManifest(dir / "m.jsonl", testing::WriteRoughnessManifest(dir.path(), 8, 80));
  const std::string q = "'" + dir.path().string() + "/";
  const std::string score = "score --mock --wav " + q + "utt005.wav' --seed 21";
  const CliResult s1 = RunCli(score);
  const CliResult s2 = RunCli(score);
  if (s1.code != 0 || s1.out.empty() || s1.out != s2.out) return Fail("score output not byte-stable");

  const std::string eval = "evaluate --mock --manifest " + q + "m.jsonl' --seeds 13,21 --out " + q;
  if (RunCli(eval + "e1.json'").code != 0 || RunCli(eval + "e2.json' --workers 3").code != 0) {
    return Fail("evaluate failed");
  }
  if (Slurp(dir / "e1.json").empty() || Slurp(dir / "e1.json") != Slurp(dir / "e2.json")) {
    return Fail("evaluate JSON not byte-stable");
  }
  const std::string sweep = "sweep --mock --manifest " + q + "m.jsonl' --param mask-len --values 2,4 --seeds 13";
  const CliResult w1 = RunCli(sweep);
  const CliResult w2 = RunCli(sweep);
  if (w1.code != 0 || w1.out.empty() || w1.out != w2.out) return Fail("sweep CSV not byte-stable");
  return Pass("score JSON, evaluate JSON (1 vs 3 workers) and sweep CSV identical across runs");
}

// ---- opt-in reproduction --------------------------------------------------

struct Reproduction {
  bool available = false;
  std::string why;
  std::vector<ManifestEntry> manifest;
  BackendFactory factory;
  EvalOptions options;
};

Reproduction& Repro() {
  static Reproduction r = [] {
    Reproduction out;
    const char* bundle = std::getenv("ZS_APA_BUNDLE");
    const char* manifest = std::getenv("ZS_APA_MANIFEST");
    if (bundle == nullptr || manifest == nullptr) {
      out.why = "set ZS_APA_BUNDLE and ZS_APA_MANIFEST to run";
      return out;
    }
    try {
      auto b = std::make_shared<ModelBundle>(LoadBundle(bundle));
      out.manifest = ReadManifest(manifest);
      const char* w = std::getenv("ZS_APA_WORKERS");
      out.options.workers = w != nullptr ? std::max(1, std::atoi(w)) : 1;
      OnnxOptions o;
      o.intra_op_threads = out.options.workers == 1 ? omp_get_max_threads() : 1;
      out.factory = MakeOnnxBackendFactory(b, o);
      out.available = true;
    } catch (const std::exception& e) {
      out.why = e.what();
    }
    return out;
  }();
  return r;
}

const EvalResult& RandomDefaults() {
  static const EvalResult r = Evaluate(Repro().manifest, Repro().factory, ScoreConfig{}, Repro().options);
  return r;
}

const EvalResult& RegularDefaults() {
  static const EvalResult r = [] {
    ScoreConfig c;
    c.strategy = MaskStrategy::kRegular;
    c.slices = 20;
    return Evaluate(Repro().manifest, Repro().factory, c, Repro().options);
  }();
  return r;
}

Verdict ReproRandom() {
  if (!Repro().available) return Skip(Repro().why);
  const EvalResult& r = RandomDefaults();
  const std::string d = "pcc_mean " + Fmt(r.pcc_mean) + " (target 0.595 +/- 0.03), pcc_std " + Fmt(r.pcc_std);
  return std::abs(r.pcc_mean - 0.595) <= 0.03 && r.pcc_std <= 0.01 ? Pass(d) : Fail(d);
}

Verdict ReproRegular() {
  if (!Repro().available) return Skip(Repro().why);
  const double reg = RegularDefaults().pcc_mean;
  const double rnd = RandomDefaults().pcc_mean;
  const std::string d = "regular " + Fmt(reg) + " (target 0.581 +/- 0.03), random " + Fmt(rnd);
  return std::abs(reg - 0.581) <= 0.03 && rnd > reg ? Pass(d) : Fail(d);
}

Verdict ReproHeadline() {
  if (!Repro().available) return Skip(Repro().why);
  const double rnd = RandomDefaults().pcc_mean;
  const std::string d = "pcc_mean " + Fmt(rnd) + " vs 0.57 baseline";
  return rnd > 0.57 ? Pass(d) : Fail(d);
}

Verdict ReproSweeps() {
  if (!Repro().available) return Skip(Repro().why);
  const auto run = [](SweepParam p, std::vector<double> values) {
    return Sweep(Repro().manifest, Repro().factory, ScoreConfig{}, p, values, Repro().options);
  };
  const auto best = [](const std::vector<SweepRow>& rows) {
    return std::ranges::max_element(rows, {}, &SweepRow::pcc_mean)->value;
  };
  const auto prob = run(SweepParam::kMaskProb, {0.1, 0.2, 0.3, 0.4, 0.5});
  const auto len = run(SweepParam::kMaskLen, {2, 4, 6, 8, 10});
  const auto layer = run(SweepParam::kLayer, {7, 8, 9, 10, 11, 12});
  bool non_increasing = true;
  for (std::size_t i = 1; i < len.size(); ++i) non_increasing = non_increasing && len[i].pcc_mean <= len[i - 1].pcc_mean + 0.01;
  const std::string d = "best mask_prob " + FormatNumber(best(prob)) + " (want 0.3), mask_len non-increasing " +
                        (non_increasing ? "yes" : "no") + ", best layer " + FormatNumber(best(layer)) + " (want 9)";
  return best(prob) == 0.3 && non_increasing && best(layer) == 9 ? Pass(d) : Fail(d);
}

int Main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> hermetic{
      {"hermetic.mask_plan_invariants", MaskPlanInvariants},
      {"hermetic.amrt_oracle", AmrtOracle},
      {"hermetic.tokenizer_oracle", TokenizerOracle},
      {"hermetic.pcc", PccChecks},
      {"hermetic.end_to_end_mock", EndToEndMock},
      {"hermetic.cli_byte_stable", CliByteStable},
  };
  const std::vector<Criterion> reproduction{
      {"reproduction.random_masking_pcc", ReproRandom},
      {"reproduction.regular_masking_pcc", ReproRegular},
      {"reproduction.headline_above_baseline", ReproHeadline},
      {"reproduction.sweep_trends", ReproSweeps},
  };

  int failures = 0;
  const auto report = [&](const Criterion& c) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = Fail(std::string("exception: ") + e.what());
    }
    const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    failures += v.outcome == Outcome::kFail;
    std::cout << tag << "  " << c.name << "  " << v.detail << std::endl;
  };

  const auto start = std::chrono::steady_clock::now();
  for (const auto& c : hermetic) report(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report({"hermetic.runtime_under_60s", [secs] {
            const std::string d = "hermetic checks took " + Fmt(secs, 2) + " s";
            return secs < 60.0 ? Pass(d) : Fail(d);
          }});
  for (const auto& c : reproduction) report(c);
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace zsapa

int main() { return zsapa::Main(); }
