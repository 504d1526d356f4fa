#include "fsd/pipeline.hpp"

#include <fmt/format.h>

namespace fsd {

DetectorKind parse_detector_kind(std::string_view name) {
  if (name == "exhaustive") return DetectorKind::exhaustive;
  if (name == "recency") return DetectorKind::recency;
  if (name == "lsh") return DetectorKind::lsh;
  throw std::invalid_argument(fmt::format("unknown detector '{}'", name));
}

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::exhaustive:
      return "exhaustive";
    case DetectorKind::recency:
      return "recency";
    case DetectorKind::lsh:
      return "lsh";
  }
  return "?";
}

void DetectorConfig::validate() const {
  if (bias) {
    bias->validate();
    if (norms == NormPolicy::frozen) {
      throw std::invalid_argument("--bias optimized cannot be combined with --norms frozen");
    }
  }
  if (kind == DetectorKind::recency) {
    if (norms == NormPolicy::frozen) throw std::invalid_argument("the recency detector uses fresh norms only");
    if (bias) throw std::invalid_argument("the recency detector cannot be combined with --bias optimized");
    if (recency_window < 1) throw std::invalid_argument("window must be >= 1");
  }
  if (kind == DetectorKind::lsh) lsh.validate();
}

std::unique_ptr<Detector> make_detector(const DetectorConfig& config) {
  config.validate();
  switch (config.kind) {
    case DetectorKind::exhaustive:
      return std::make_unique<ExhaustiveDetector>(config.norms, config.bias, config.bias_form);
    case DetectorKind::recency:
      return std::make_unique<RecencyDetector>(config.recency_window);
    case DetectorKind::lsh:
      return std::make_unique<LshDetector>(config.lsh, config.norms, config.bias, config.bias_form);
  }
  throw std::logic_error("unhandled detector kind");
}

std::vector<NoveltyRecord> run_detector(std::span<const Document> stream, const DetectorConfig& config) {
  auto detector = make_detector(config);
  TermStatistics stats(config.log_base);
  std::vector<NoveltyRecord> records;
  records.reserve(stream.size());
  for (const auto& doc : stream) {
    stats.update(doc);
    auto vec = make_vector(doc, stats, config.vectorize);
    records.push_back(detector->score(vec, stats));
    detector->insert(std::move(vec));
  }
  return records;
}

}  // namespace fsd
