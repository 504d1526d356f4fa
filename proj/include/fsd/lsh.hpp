#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "fsd/detectors.hpp"

namespace fsd {

struct LshConfig {
  int hyperplanes_per_table = 13;  // signature bits k, at most 64
  int tables = 70;
  std::int64_t window_size = 2000;
  /// Scanning stops once a candidate reaches this raw similarity.
  double closeness_threshold = 0.6;
  /// Disables the early stop entirely (every candidate is scored).
  bool early_stop = true;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Random Gaussian hyperplanes, one per (table, bit). Components for a term
/// id are drawn on first use from a generator seeded by (seed, term), so
/// the planes do not depend on the order in which terms show up.
class HyperplaneBank {
 public:
  HyperplaneBank(int bits, int tables, std::uint64_t seed);

  /// Bit j is 1 when the dot product with hyperplane (table, j) is >= 0.
  std::uint64_t signature(const DocumentVector& vec, int table);
  std::vector<std::uint64_t> signatures(const DocumentVector& vec);

  int bits() const noexcept { return bits_; }
  int tables() const noexcept { return tables_; }

 private:
  const float* planes_for(TermId term);

  int bits_;
  int tables_;
  std::uint64_t seed_;
  // planes_[term] holds tables*bits components, table-major.
  std::vector<std::vector<float>> planes_;
};

/// Instrumentation for one lsh scoring call.
struct LshTrace {
  std::vector<std::int64_t> candidates;  // positions scored, in scan order
  bool consulted_tables = false;
};

/// Recency window with a back-off to approximate search over hashed
/// history. Signatures come from arrival weights and are never rehashed;
/// the norm policy applies to the exact scoring of candidates only.
class LshDetector final : public Detector {
 public:
  LshDetector(const LshConfig& config, NormPolicy policy, std::optional<BiasParams> bias = std::nullopt,
              BiasForm form = BiasForm::normalized_log);

  NoveltyRecord score(const DocumentVector& vec, const TermStatistics& stats) override;
  NoveltyRecord score(const DocumentVector& vec, const TermStatistics& stats, LshTrace* trace);
  void insert(DocumentVector vec) override;

  std::size_t size() const noexcept { return docs_.size(); }

 private:
  const std::vector<std::uint64_t>& signatures_for(const DocumentVector& vec);

  LshConfig config_;
  NormPolicy policy_;
  std::optional<BiasParams> bias_;
  BiasForm form_;
  HyperplaneBank bank_;
  std::vector<DocumentVector> docs_;
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> buckets_;
  std::vector<std::uint32_t> seen_stamp_;
  std::uint32_t stamp_ = 0;
  std::int64_t cached_position_ = -1;
  std::vector<std::uint64_t> cached_signatures_;
};

}  // namespace fsd
