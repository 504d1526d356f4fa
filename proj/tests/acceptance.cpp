// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fsd/detectors.hpp"
#include "fsd/eval.hpp"
#include "fsd/lsh.hpp"
#include "fsd/pipeline.hpp"
#include "fsd/synthetic.hpp"
#include "fsd/term_stats.hpp"
#include "oracle.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using testing_support::as_stream;

// ---- 1: worked example --------------------------------------------------------

Outcome worked_example() {
  const double raw = 1.0 - 0.3871;
  const double factor = fsd::distance_bias(raw, 10067, 286, {0.036, 0.61});
  const double novelty = 1.0 - raw * factor;
  return {std::abs(novelty - 0.365) <= 0.0005, fmt::format("biased novelty {:.5f} (factor {:.5f})", novelty, factor)};
}

// ---- 2: oracle equivalence ----------------------------------------------------

Outcome oracle_equivalence() {
  std::mt19937_64 gen(2024);
  const fsd::BiasParams bias{0.3, 0.3};
  const std::int64_t window = 6;
  std::int64_t docs_checked = 0;
  std::int64_t pairs_checked = 0;
  std::vector<std::string> failures;

  const auto same = [&](const fsd::NoveltyRecord& got, const oracle::Score& want, const std::string& what) {
    const bool ok = got.nearest_position == want.nearest && std::abs(got.novelty - want.novelty) <= 1e-9 &&
                    std::abs(got.raw_similarity - want.raw) <= 1e-9 && std::abs(got.bias_factor - want.factor) <= 1e-9;
    if (!ok && failures.size() < 5) failures.push_back(what);
  };

  for (int stream = 0; stream < 50; ++stream) {
    const auto lists = testing_support::random_token_lists(gen, 60);
    const auto docs = as_stream(lists);
    const oracle::Stream ref(lists);

    fsd::TermStatistics stats;
    std::vector<fsd::DocumentVector> vecs;
    fsd::ExhaustiveDetector fresh(fsd::NormPolicy::fresh);
    fsd::ExhaustiveDetector frozen(fsd::NormPolicy::frozen);
    fsd::ExhaustiveDetector biased(fsd::NormPolicy::fresh, bias);
    fsd::RecencyDetector recency(window);
    for (const auto& d : docs) {
      stats.update(d);
      auto v = fsd::make_vector(d, stats);
      const auto n = d.position;
      const auto tag = [&](const char* name) { return fmt::format("stream {} doc {} {}", stream, n, name); };

      // Every pairwise score.
      for (const auto& old : vecs) {
        for (const bool use_frozen : {false, true}) {
          const auto want = ref.cosine(n, old.position, use_frozen);
          const auto policy = use_frozen ? fsd::NormPolicy::frozen : fsd::NormPolicy::fresh;
          ++pairs_checked;
          if (!want) {
            try {
              fsd::cosine(v, old, stats, policy);
              if (failures.size() < 5) failures.push_back(tag("zero pair accepted"));
            } catch (const fsd::ZeroVectorError&) {
            }
          } else if (std::abs(fsd::cosine(v, old, stats, policy) - *want) > 1e-9) {
            if (failures.size() < 5) failures.push_back(tag("pair cosine"));
          }
        }
      }

      const std::span<const fsd::DocumentVector> history(vecs);
      const auto w_lo = vecs.size() > static_cast<std::size_t>(window) ? vecs.size() - window : 0;
      const auto in_window = history.subspan(w_lo);
      const auto want_fresh = ref.exhaustive(n, false);
      const auto want_frozen = ref.exhaustive(n, true);
      const auto want_recency = ref.recency(n, window);
      const auto want_biased = ref.optimized(n, bias.delta, bias.gamma);

      same(fsd::exhaustive_novelty(v, history, stats, fsd::NormPolicy::fresh), want_fresh, tag("exhaustive fresh"));
      same(fsd::exhaustive_novelty(v, history, stats, fsd::NormPolicy::frozen), want_frozen, tag("exhaustive frozen"));
      same(fsd::recency_novelty(v, in_window, window, stats), want_recency, tag("recency"));
      same(fsd::optimized_novelty(v, history, stats, bias), want_biased, tag("optimized"));
      same(fresh.score(v, stats), want_fresh, tag("indexed fresh"));
      same(frozen.score(v, stats), want_frozen, tag("indexed frozen"));
      same(recency.score(v, stats), want_recency, tag("indexed recency"));
      same(biased.score(v, stats), want_biased, tag("indexed optimized"));
      ++docs_checked;

      fresh.insert(v);
      frozen.insert(v);
      biased.insert(v);
      recency.insert(v);
      vecs.push_back(std::move(v));
    }
  }
  std::string detail = fmt::format("50 streams, {} documents, {} pairs", docs_checked, pairs_checked);
  for (const auto& f : failures) detail += "; mismatch: " + f;
  return {failures.empty(), detail};
}

// ---- 3: LSH degeneracy ----------------------------------------------------------

Outcome lsh_degeneracy() {
  std::mt19937_64 gen(77);
  int matching = 0;
  int recall_failures = 0;
  std::int64_t docs_checked = 0;
  constexpr int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const auto lists = testing_support::random_token_lists(gen, 50);
    const auto docs = as_stream(lists);
    const oracle::Stream ref(lists);
    bool trial_matches = true;
    int trial_recall_failures = 0;
    for (const auto policy : {fsd::NormPolicy::fresh, fsd::NormPolicy::frozen}) {
      fsd::LshConfig cfg;
      cfg.hyperplanes_per_table = 1;
      cfg.tables = 8;
      cfg.window_size = 4;  // small, so older documents come back through the tables
      cfg.early_stop = false;
      cfg.rng_seed = static_cast<std::uint64_t>(trial);
      fsd::LshDetector lsh(cfg, policy);
      fsd::ExhaustiveDetector exact(policy);
      fsd::TermStatistics stats;
      for (const auto& d : docs) {
        stats.update(d);
        auto v = fsd::make_vector(d, stats);
        fsd::LshTrace trace;
        const auto got = lsh.score(v, stats, &trace);
        const auto want = exact.score(v, stats);
        ++docs_checked;
        const bool equal = std::abs(got.novelty - want.novelty) <= 1e-9;
        if (!equal) {
          trial_matches = false;
        } else if (want.nearest_position && want.raw_similarity > 0.0) {
          // Every position reaching the best score counts as a true nearest neighbour.
          const bool frozen = policy == fsd::NormPolicy::frozen;
          std::set<std::int64_t> best;
          for (std::int64_t i = 1; i < d.position; ++i) {
            const auto c = ref.cosine(d.position, i, frozen);
            if (c && std::abs(*c - want.raw_similarity) <= 1e-12) best.insert(i);
          }
          const bool found = std::any_of(trace.candidates.begin(), trace.candidates.end(),
                                         [&](std::int64_t p) { return best.contains(p); });
          if (!found) ++trial_recall_failures;
        }
        lsh.insert(v);
        exact.insert(std::move(v));
      }
    }
    if (trial_matches) {
      ++matching;
      recall_failures += trial_recall_failures;
    }
  }
  const bool pass = matching * 100 >= 95 * trials && recall_failures == 0;
  return {pass, fmt::format("{}/{} trials equal to exhaustive (both policies, {} documents); "
                            "true neighbour missing from the candidate set in {} matching cases",
                            matching, trials, docs_checked, recall_failures)};
}

// ---- 4: collision law -----------------------------------------------------------

Outcome collision_law() {
  constexpr int pairs = 10000;
  constexpr int dims = 8;
  constexpr int bits = 64;
  constexpr int bins = 10;
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  // Every pair uses its own term ids and therefore its own hyperplanes.
  fsd::HyperplaneBank bank(bits, 1, 99);
  std::vector<double> rate_sum(bins, 0.0);
  std::vector<double> theta_sum(bins, 0.0);
  std::vector<int> count(bins, 0);
  double total_rate = 0.0;
  double total_theta = 0.0;
  const auto make = [](const std::vector<double>& x, fsd::TermId base) {
    fsd::DocumentVector v;
    double sq = 0.0;
    for (int k = 0; k < dims; ++k) {
      v.components.push_back({base + static_cast<fsd::TermId>(k), 1, 1.0, x[static_cast<std::size_t>(k)]});
      sq += x[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];
    }
    v.frozen_norm = std::sqrt(sq);
    return v;
  };
  for (int p = 0; p < pairs; ++p) {
    std::vector<double> a(dims);
    std::vector<double> b(dims);
    for (auto& x : a) x = normal(gen);
    // Mix a into b with a random weight so angles cover (0, pi).
    const double mix = std::uniform_real_distribution<double>(-3.0, 3.0)(gen);
    for (int k = 0; k < dims; ++k) b[static_cast<std::size_t>(k)] = mix * a[static_cast<std::size_t>(k)] + normal(gen);
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    for (int k = 0; k < dims; ++k) {
      ab += a[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)];
      aa += a[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(k)];
      bb += b[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)];
    }
    const double theta = std::acos(std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0));
    const auto base = static_cast<fsd::TermId>(p * dims);
    const auto sa = bank.signature(make(a, base), 0);
    const auto sb = bank.signature(make(b, base), 0);
    const double rate = std::popcount(sa ^ sb) / static_cast<double>(bits);
    const int bin = std::min(bins - 1, static_cast<int>(theta / std::numbers::pi * bins));
    rate_sum[static_cast<std::size_t>(bin)] += rate;
    theta_sum[static_cast<std::size_t>(bin)] += theta / std::numbers::pi;
    ++count[static_cast<std::size_t>(bin)];
    total_rate += rate;
    total_theta += theta / std::numbers::pi;
  }
  double worst = std::abs(total_rate - total_theta) / pairs;
  int used_bins = 0;
  for (int k = 0; k < bins; ++k) {
    if (count[static_cast<std::size_t>(k)] < 50) continue;
    ++used_bins;
    worst = std::max(worst, std::abs(rate_sum[static_cast<std::size_t>(k)] - theta_sum[static_cast<std::size_t>(k)]) /
                                count[static_cast<std::size_t>(k)]);
  }
  return {worst <= 0.03, fmt::format("{} pairs x {} bits, {} angle bins; max |rate - theta/pi| = {:.4f}", pairs,
                                     bits, used_bins, worst)};
}

// ---- 5: mean idf trend ------------------------------------------------------------

Outcome idf_trend() {
  const auto docs = fsd::synthetic::zipf_stream({});
  const auto trace = fsd::trace_mean_idf(docs, 100);
  bool monotone = true;
  std::int64_t first_drop = 0;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k].mean_idf < trace[k - 1].mean_idf) {
      monotone = false;
      first_drop = trace[k].position;
      break;
    }
  }
  const double ratio = trace.back().mean_idf / trace.front().mean_idf;
  std::string detail = fmt::format("{} samples, mean idf {:.4f} at {} -> {:.4f} at {} (x{:.3f})", trace.size(),
                                   trace.front().mean_idf, trace.front().position, trace.back().mean_idf,
                                   trace.back().position, ratio);
  if (!monotone) detail += fmt::format("; first decrease at {}", first_drop);
  return {monotone && ratio >= 1.2, detail};
}

// ---- 6: directional bias effect ---------------------------------------------------

double c_min_for(const fsd::synthetic::PlantedCorpus& corpus, const fsd::DetectorConfig& cfg) {
  return fsd::score_run(fsd::run_detector(corpus.documents, cfg), corpus.truth).c_min;
}

Outcome bias_direction() {
  constexpr int instances = 20;
  fsd::DetectorConfig fresh;
  fsd::DetectorConfig frozen;
  frozen.norms = fsd::NormPolicy::frozen;
  fsd::DetectorConfig optimized;
  optimized.bias = fsd::BiasParams{};
  std::vector<double> c_fresh;
  std::vector<double> c_frozen;
  std::vector<double> c_optimized;
  for (int k = 0; k < instances; ++k) {
    fsd::synthetic::PlantedCorpusOptions opts;
    opts.seed = static_cast<std::uint64_t>(k) + 1;
    const auto corpus = fsd::synthetic::planted_topic_corpus(opts);
    c_fresh.push_back(c_min_for(corpus, fresh));
    c_frozen.push_back(c_min_for(corpus, frozen));
    c_optimized.push_back(c_min_for(corpus, optimized));
  }
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  const double p = fsd::paired_randomization_test(c_frozen, c_fresh, 10000, 0);
  const double m_fresh = mean(c_fresh);
  const double m_frozen = mean(c_frozen);
  const double m_optimized = mean(c_optimized);
  const bool pass = m_frozen < m_fresh && m_optimized <= m_frozen && p < 0.05;
  return {pass, fmt::format("{} corpora, mean c_min fresh {:.4f}, frozen {:.4f}, optimized {:.4f}; "
                            "frozen {} fresh, paired p = {:.4g}",
                            instances, m_fresh, m_frozen, m_optimized, m_frozen < m_fresh ? "below" : "NOT below", p)};
}

// ---- 7: cost identities ---------------------------------------------------------

Outcome cost_identities() {
  fsd::synthetic::PlantedCorpusOptions opts;
  opts.documents = 1500;
  opts.topics = 8;
  opts.min_follow_up_gap = 300;
  opts.first_story_begin = 100;
  opts.first_story_end = 600;
  const auto corpus = fsd::synthetic::planted_topic_corpus(opts);
  auto recs = fsd::run_detector(corpus.documents, {});

  auto never = recs;
  for (auto& r : never) r.novelty = 0.0;
  // With every score equal the best a threshold can do is fire nothing.
  const double c_never = fsd::score_run(never, corpus.truth).sweep.back().cost;

  auto perfect = recs;
  for (auto& r : perfect) r.novelty = 0.0;
  for (const auto& [_, positions] : corpus.truth.topics) perfect[static_cast<std::size_t>(positions[0] - 1)].novelty = 1.0;
  const double c_perfect = fsd::score_run(perfect, corpus.truth).c_min;

  const double base = fsd::score_run(recs, corpus.truth).c_min;
  const std::vector<std::function<double(double)>> transforms{
      [](double x) { return std::exp(5.0 * x); }, [](double x) { return 3.0 * x * x * x - 2.0; },
      [](double x) { return std::log1p(x + 1.0) / 7.0; }};
  bool invariant = true;
  for (const auto& f : transforms) {
    auto moved = recs;
    for (auto& r : moved) r.novelty = f(r.novelty);
    invariant = invariant && fsd::score_run(moved, corpus.truth).c_min == base;
  }
  return {c_never == 1.0 && c_perfect == 0.0 && invariant,
          fmt::format("never-fire {}, perfect {}, c_min {:.6f} {} under 3 monotone transforms", c_never, c_perfect,
                      base, invariant ? "unchanged" : "CHANGED")};
}

// ---- 8: efficiency ------------------------------------------------------------------

Outcome efficiency() {
  fsd::synthetic::ZipfStreamOptions opts;
  opts.documents = 20000;
  opts.vocabulary_size = 20000;
  opts.fresh_terms_per_document = 1;
  const auto docs = fsd::synthetic::zipf_stream(opts);
  const auto time_run = [&](fsd::NormPolicy policy) {
    fsd::DetectorConfig cfg;
    cfg.norms = policy;
    const auto start = std::chrono::steady_clock::now();
    const auto recs = fsd::run_detector(docs, cfg);
    const auto stop = std::chrono::steady_clock::now();
    if (recs.size() != docs.size()) throw std::logic_error("record count");
    return std::chrono::duration<double>(stop - start).count();
  };
  // Interleave and keep the best of two to damp scheduler noise.
  double fresh = time_run(fsd::NormPolicy::fresh);
  double frozen = time_run(fsd::NormPolicy::frozen);
  fresh = std::min(fresh, time_run(fsd::NormPolicy::fresh));
  frozen = std::min(frozen, time_run(fsd::NormPolicy::frozen));
  return {frozen < fresh, fmt::format("20000 documents: fresh {:.2f}s, frozen {:.2f}s ({:.0f}% faster)", fresh, frozen,
                                      100.0 * (fresh - frozen) / fresh)};
}

// ---- 9: determinism -------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative path -> bytes for every file under `root`.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

Outcome determinism() {
  const fs::path cli = FSD_CLI_PATH;
  const fs::path base = fs::temp_directory_path() / "fsd_acceptance_determinism";
  fs::remove_all(base);

  // Commands use {run} for the per-run directory and {data} for shared inputs.
  const std::vector<std::pair<std::string, std::string>> steps{
      {"synth", "synth --kind planted --seed 3 --out {run}/synth"},
      {"synth-zipf", "synth --kind zipf --seed 3 --documents 800 --out {run}/zipf"},
      {"detect-exhaustive", "detect --input {data}/corpus.jsonl --norms frozen --out {run}/exh"},
      {"detect-optimized", "detect --input {data}/corpus.jsonl --bias optimized --out {run}/opt"},
      {"detect-recency", "detect --input {data}/corpus.jsonl --detector recency --window 200 --out {run}/rec"},
      {"detect-lsh",
       "detect --input {data}/corpus.jsonl --detector lsh --window 100 --lsh-bits 8 --lsh-tables 6 --seed 11 "
       "--out {run}/lsh"},
      {"eval", "eval --novelty {data}/fresh/novelty.csv --truth {data}/truth.jsonl --skip-rounds 2 --out {run}/eval"},
      {"trace-idf", "trace-idf --input {data}/corpus.jsonl --every 100 --out {run}/trace.csv"},
      {"tune",
       "tune --input {data}/corpus.jsonl --truth {data}/truth.jsonl --grid \"delta=0,0.036;gamma=0.5,0.61\" "
       "--threads 3 --out {run}/grid.csv"},
      {"compare", "compare --a {data}/eval_fresh/report.json --b {data}/eval_frozen/report.json --seed 5"},
      {"matrix",
       "matrix --input {data}/corpus.jsonl --truth {data}/truth.jsonl --window 150 --lsh-bits 8 --lsh-tables 6 "
       "--skip-rounds 1 --out {run}/matrix"},
  };

  const auto sh = [&](const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2> /dev/null", cli.string(), args, stdout_file.string());
    return std::system(cmd.c_str());
  };
  const auto expand = [](std::string s, const fs::path& run, const fs::path& data) {
    for (const auto& [key, value] : {std::pair<std::string, std::string>{"{run}", run.string()},
                                     std::pair<std::string, std::string>{"{data}", data.string()}}) {
      for (auto at = s.find(key); at != std::string::npos; at = s.find(key)) s.replace(at, key.size(), value);
    }
    return s;
  };

  // Shared inputs for the downstream subcommands.
  const fs::path data = base / "data";
  fs::create_directories(data);
  const std::vector<std::string> setup{
      "synth --kind planted --seed 3 --out {data}",
      "detect --input {data}/corpus.jsonl --out {data}/fresh",
      "detect --input {data}/corpus.jsonl --norms frozen --out {data}/frozen",
      "eval --novelty {data}/fresh/novelty.csv --truth {data}/truth.jsonl --out {data}/eval_fresh",
      "eval --novelty {data}/frozen/novelty.csv --truth {data}/truth.jsonl --out {data}/eval_frozen",
  };
  for (const auto& s : setup) {
    if (sh(expand(s, data, data), data / "setup.out") != 0) return {false, "setup failed: " + s};
  }

  std::vector<std::string> differing;
  int checked_files = 0;
  for (const auto& [name, args] : steps) {
    std::map<std::string, std::string> runs[2];
    for (int r = 0; r < 2; ++r) {
      const fs::path run = base / fmt::format("{}_{}", name, r);
      fs::create_directories(run);
      if (sh(expand(args, run, data), run / "stdout.txt") != 0) return {false, name + " exited non-zero"};
      runs[r] = snapshot(run);
    }
    const bool produced = std::any_of(runs[0].begin(), runs[0].end(), [](const auto& kv) { return !kv.second.empty(); });
    if (runs[0] != runs[1] || !produced) differing.push_back(name);
    checked_files += static_cast<int>(runs[0].size());
  }
  fs::remove_all(base);
  std::string detail = fmt::format("{} subcommand runs, {} artifacts compared byte for byte", steps.size(), checked_files);
  if (!differing.empty()) {
    detail += "; differing:";
    for (const auto& d : differing) detail += " " + d;
  }
  return {differing.empty(), detail};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"worked example", worked_example},
      {"brute-force oracle equivalence", oracle_equivalence},
      {"lsh degeneracy", lsh_degeneracy},
      {"lsh collision law", collision_law},
      {"mean idf trend", idf_trend},
      {"directional bias effect", bias_direction},
      {"cost normalization identities", cost_identities},
      {"frozen norms are faster", efficiency},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << fmt::format("[{}] {}. {}: {} ({:.1f}s)", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                             o.detail, secs)
              << std::endl;
  }
  std::cout << fmt::format("{}/{} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
