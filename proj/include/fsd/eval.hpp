#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fsd/corpus.hpp"
#include "fsd/detectors.hpp"

namespace fsd {

/// On-topic positions per topic, in stream order. The first position of
/// each list is the topic's detection target; the rest are follow-ups.
struct GroundTruth {
  std::map<std::string, std::vector<std::int64_t>> topics;

  /// Lists non-empty, strictly increasing, >= 1 and pairwise disjoint.
  void validate() const;
  bool empty() const noexcept { return topics.empty(); }
};

/// Topic labels of a labeled stream turned into ground truth.
GroundTruth truth_from_documents(std::span<const Document> docs);

/// Detection cost model. Defaults are the standard TDT constants.
struct CostConstants {
  double c_miss = 1.0;
  double c_fa = 0.1;
  double p_target = 0.02;

  double normalizer() const;
  /// Normalized cost for the given miss and false-alarm probabilities.
  double cost(double p_miss, double p_fa) const;
};

struct SweepPoint {
  double threshold = 0.0;  // "new" fires when novelty >= threshold
  double p_miss = 0.0;
  double p_fa = 0.0;
  double cost = 0.0;
};

struct TopicOutcome {
  bool miss = false;
  std::int64_t fa_count = 0;
  std::int64_t non_targets = 0;
  double fa_rate = 0.0;
  /// This topic's normalized cost at the run's argmin threshold.
  double cost = 0.0;
};

struct DetectionCostReport {
  std::vector<SweepPoint> sweep;  // ascending threshold
  double c_min = 1.0;
  double argmin_threshold = 0.0;
  double p_miss_at_min = 1.0;
  double p_fa_at_min = 0.0;
  std::map<std::string, TopicOutcome> per_topic;
  CostConstants constants;
};

/// Threshold sweep over the novelty values of the on-topic documents,
/// topic-weighted miss/false-alarm rates and the normalized minimum cost.
/// Topics without follow-ups contribute to the miss rate only.
DetectionCostReport score_run(std::span<const NoveltyRecord> records, const GroundTruth& truth,
                              const CostConstants& constants = {});

/// Drops every topic's current target so its first follow-up becomes the
/// new target. Topics left with no documents are dropped with a warning.
GroundTruth skip_round(const GroundTruth& truth);

struct SkipEvaluation {
  std::vector<DetectionCostReport> rounds;  // round 0 first
  double mean_c_min = 0.0;
};

/// Scores rounds 0..rounds independently; stops early once every topic
/// has been exhausted.
SkipEvaluation skip_evaluate(std::span<const NoveltyRecord> records, const GroundTruth& truth, int rounds,
                             const CostConstants& constants = {});

/// Two-sided paired sign-flip test on the mean difference. Enumerates all
/// 2^n flips when that is no more than `permutations`, otherwise samples
/// `permutations` flips from a generator seeded with `seed`.
double paired_randomization_test(std::span<const double> a, std::span<const double> b,
                                 int permutations = 10000, std::uint64_t seed = 0);

/// Per-topic cost contributions keyed by "round/topic", for pairing runs.
std::map<std::string, double> cost_contributions(const SkipEvaluation& evaluation);

/// Pairs two evaluations on the (round, topic) units both contain.
double paired_significance(const std::map<std::string, double>& run_a, const std::map<std::string, double>& run_b,
                           int permutations = 10000, std::uint64_t seed = 0);

}  // namespace fsd
