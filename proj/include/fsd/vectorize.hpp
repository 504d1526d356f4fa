#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsd/corpus.hpp"
#include "fsd/term_stats.hpp"

namespace fsd {

/// Length policy for the older side of a cosine comparison.
///   fresh  - recompute the old vector's length from current statistics.
///   frozen - keep the length computed when the old document arrived.
enum class NormPolicy { fresh, frozen };

NormPolicy parse_norm_policy(std::string_view name);
std::string_view to_string(NormPolicy policy);

class ZeroVectorError : public std::domain_error {
 public:
  ZeroVectorError() : std::domain_error("zero vector") {}
};

struct VectorizeOptions {
  /// 1 + ln(tf) instead of raw counts.
  bool sublinear_tf = false;
};

struct VectorComponent {
  TermId term = 0;
  std::uint32_t tf = 0;
  double tf_weight = 0.0;  // tf after the optional sublinear transform
  double weight = 0.0;     // tf_weight * idf at arrival
};

/// TF.IDF vector snapshotted at arrival. Components are sorted by term id.
/// `frozen_norm` is the Euclidean length of the arrival weights and is
/// never refreshed; `tf`/`tf_weight` are kept so current weights can be
/// recomputed against later statistics.
struct DocumentVector {
  std::string doc_id;
  std::int64_t position = 0;
  std::vector<VectorComponent> components;
  double frozen_norm = 0.0;

  bool is_zero() const noexcept { return frozen_norm == 0.0; }
  /// Arrival weight of `term`, 0 when absent.
  double weight(TermId term) const noexcept;
};

using SparseWeights = std::vector<std::pair<TermId, double>>;

/// Builds the arrival vector. Every token of `doc` must already be applied
/// to `stats`. Zero-length results are returned as is; callers decide.
DocumentVector make_vector(const Document& doc, const TermStatistics& stats,
                           const VectorizeOptions& options = {});

/// As make_vector but rejects empty documents and zero vectors.
DocumentVector build_vector(const Document& doc, const TermStatistics& stats,
                            const VectorizeOptions& options = {});

/// tf * idf recomputed with the current statistics.
SparseWeights fresh_weights(const DocumentVector& vec, const TermStatistics& stats);
double fresh_norm(const DocumentVector& vec, const TermStatistics& stats);

/// new.weights . fresh_weights(old); both sides use current statistics.
double fresh_dot(const DocumentVector& new_vec, const DocumentVector& old_vec,
                 const TermStatistics& stats);

/// Cosine between an arriving vector and an older one. Under the frozen
/// policy the old length is the arrival-time length, so the result can
/// exceed 1; fresh results are clamped to 1 against rounding. Throws
/// ZeroVectorError if either length is zero.
double cosine(const DocumentVector& new_vec, const DocumentVector& old_vec,
              const TermStatistics& stats, NormPolicy policy);

}  // namespace fsd
