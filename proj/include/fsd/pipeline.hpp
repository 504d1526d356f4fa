#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fsd/corpus.hpp"
#include "fsd/detectors.hpp"
#include "fsd/lsh.hpp"
#include "fsd/vectorize.hpp"

namespace fsd {

enum class DetectorKind { exhaustive, recency, lsh };

DetectorKind parse_detector_kind(std::string_view name);
std::string_view to_string(DetectorKind kind);

struct DetectorConfig {
  DetectorKind kind = DetectorKind::exhaustive;
  NormPolicy norms = NormPolicy::fresh;
  /// Set for the explicit distance bias; nullopt means no bias.
  std::optional<BiasParams> bias;
  BiasForm bias_form = BiasForm::normalized_log;
  /// Window for the recency detector; the lsh window lives in `lsh`.
  std::int64_t recency_window = 2000;
  LshConfig lsh;
  VectorizeOptions vectorize;
  double log_base = std::exp(1.0);

  /// Rejects combinations that have no defined meaning: a bias over frozen
  /// norms, and the recency window with frozen norms or an extra bias.
  void validate() const;
};

std::unique_ptr<Detector> make_detector(const DetectorConfig& config);

/// update statistics -> build vector -> score -> insert, once per document.
std::vector<NoveltyRecord> run_detector(std::span<const Document> stream, const DetectorConfig& config);

}  // namespace fsd
