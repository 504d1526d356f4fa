#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fsd/corpus.hpp"

namespace fsd {

using TermId = std::uint32_t;

class EmptyCollectionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Incremental collection statistics: |C| and per-term document frequency,
/// advanced once per arriving document.
///
/// Terms are interned on first sight; ids are dense and assigned in order of
/// first appearance, so they are reproducible for a fixed stream.
class TermStatistics {
 public:
  /// `log_base` scales every idf by 1/ln(base). Natural log by default.
  explicit TermStatistics(double log_base = std::exp(1.0));

  /// Applies one document. Each distinct term counts once.
  void update(std::span<const std::string> tokens);
  void update(const Document& doc) { update(doc.tokens); }

  std::int64_t collection_size() const noexcept { return collection_size_; }
  std::int64_t version() const noexcept { return version_; }
  std::size_t vocabulary_size() const noexcept { return terms_.size(); }

  std::optional<TermId> find(std::string_view term) const;
  /// Interns without touching frequencies; used when a vector is built for
  /// tokens that have not been applied yet.
  TermId intern(std::string_view term);
  const std::string& term(TermId id) const { return terms_.at(id); }

  /// 0 for terms never applied.
  std::int64_t doc_frequency(TermId id) const noexcept {
    return id < doc_freq_.size() ? doc_freq_[id] : 0;
  }
  std::int64_t doc_frequency(std::string_view term) const;

  /// log(|C| / df). Unseen terms use df = 0.5. Throws on an empty collection.
  double idf(std::string_view term) const;
  double idf(TermId id) const;

  /// Unchecked idf for hot loops; requires a non-empty collection and a
  /// term id returned by this instance.
  double idf_unchecked(TermId id) const noexcept {
    const double log_df = doc_freq_[id] > 0 ? log_doc_freq_[id] : kLogUnseen;
    return (log_collection_size_ - log_df) * inv_log_base_;
  }

  /// Macro average of idf over all terms with df >= 1.
  double mean_idf() const;

  double log_base() const noexcept { return log_base_; }

 private:
  double log_base_;
  double inv_log_base_;
  std::int64_t collection_size_ = 0;
  std::int64_t version_ = 0;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> ids_;
  std::vector<std::int64_t> doc_freq_;
  std::vector<double> log_doc_freq_;
  double log_collection_size_ = 0.0;
  static inline const double kLogUnseen = std::log(0.5);
  std::vector<std::uint64_t> last_seen_;  // dedup stamp per term, keyed by version
};

struct IdfTracePoint {
  std::int64_t position = 0;
  double mean_idf = 0.0;
};

/// Streams `docs` through fresh statistics and samples mean_idf after every
/// `every`-th document (and after the last one if it is not a multiple).
std::vector<IdfTracePoint> trace_mean_idf(std::span<const Document> docs, std::int64_t every,
                                          double log_base = std::exp(1.0));

}  // namespace fsd
