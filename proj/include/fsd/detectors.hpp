#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsd/term_stats.hpp"
#include "fsd/vectorize.hpp"

namespace fsd {

struct NoveltyRecord {
  std::string doc_id;
  std::int64_t position = 0;
  double novelty = 1.0;
  std::optional<std::string> nearest_id;
  std::optional<std::int64_t> nearest_position;
  double raw_similarity = 0.0;  // before the bias factor
  double bias_factor = 1.0;
  bool early_stop = false;
  bool zero_vector = false;  // arriving vector had zero length; novelty 0 unless the history is empty
};

/// Weights of the distance bias: `delta` scales the boost, `gamma` is the
/// similarity at which it switches on.
struct BiasParams {
  double delta = 0.036;
  double gamma = 0.61;

  void validate() const;
};

/// How the log distance enters the boost.
///   normalized_log: 1 + delta * ln(n - i) / ln(n)   (bounded by 1 + delta)
///   literal_log:    1 + delta * ln(n - i)
enum class BiasForm { normalized_log, literal_log };

BiasForm parse_bias_form(std::string_view name);
std::string_view to_string(BiasForm form);

/// Multiplier for the similarity between the document at stream position `n`
/// and an earlier one at `i`. 1 below the `gamma` threshold.
double distance_bias(double similarity, std::int64_t n, std::int64_t i, const BiasParams& params,
                     BiasForm form = BiasForm::normalized_log);

/// Record for an arriving zero-length vector: novelty 0 by convention.
NoveltyRecord zero_vector_record(const DocumentVector& vec);

/// Record for a document with nothing before it: novelty 1, even when its
/// own vector is zero (always the case for the first document of a stream).
NoveltyRecord empty_history_record(const DocumentVector& vec);

// Direct scans over an explicit history. These are the reference forms of
// each scoring rule; the detectors below compute the same values with an
// inverted index.

NoveltyRecord exhaustive_novelty(const DocumentVector& new_vec, std::span<const DocumentVector> history,
                                 const TermStatistics& stats, NormPolicy policy);

/// `window` holds at most `window_size` vectors, oldest first. Slot indices
/// count back from the newest, which is always slot `window_size`, so a
/// partially filled window leaves its low slots empty.
NoveltyRecord recency_novelty(const DocumentVector& new_vec, std::span<const DocumentVector> window,
                              std::int64_t window_size, const TermStatistics& stats);

NoveltyRecord optimized_novelty(const DocumentVector& new_vec, std::span<const DocumentVector> history,
                                const TermStatistics& stats, const BiasParams& params,
                                BiasForm form = BiasForm::normalized_log);

/// Incremental scorer over the documents seen so far. `score` must be called
/// with statistics that already include the arriving document; `insert`
/// then adds it to the history.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual NoveltyRecord score(const DocumentVector& vec, const TermStatistics& stats) = 0;
  virtual void insert(DocumentVector vec) = 0;
};

/// Exact 1-NN over the whole history, with an optional distance bias
/// applied to each candidate before taking the max.
class ExhaustiveDetector final : public Detector {
 public:
  explicit ExhaustiveDetector(NormPolicy policy, std::optional<BiasParams> bias = std::nullopt,
                              BiasForm form = BiasForm::normalized_log);

  NoveltyRecord score(const DocumentVector& vec, const TermStatistics& stats) override;
  void insert(DocumentVector vec) override;

  std::size_t size() const noexcept { return docs_.size(); }

 private:
  struct Posting {
    std::uint32_t doc;
    double tf_weight;
  };

  double candidate_norm(std::uint32_t doc, const TermStatistics& stats) const;

  NormPolicy policy_;
  std::optional<BiasParams> bias_;
  BiasForm form_;
  std::vector<DocumentVector> docs_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<double> dots_;
  std::vector<std::uint32_t> touched_;
  std::vector<char> marked_;
  std::optional<std::uint32_t> first_nonzero_frozen_;
};

/// Sliding window of the most recent documents with linear damping by slot.
class RecencyDetector final : public Detector {
 public:
  explicit RecencyDetector(std::int64_t window_size);

  NoveltyRecord score(const DocumentVector& vec, const TermStatistics& stats) override;
  void insert(DocumentVector vec) override;

 private:
  std::int64_t window_size_;
  std::vector<DocumentVector> window_;
};

}  // namespace fsd
