#include "fsd/term_stats.hpp"

#include <fmt/format.h>

namespace fsd {

TermStatistics::TermStatistics(double log_base) : log_base_(log_base) {
  if (!(log_base > 0.0) || log_base == 1.0 || !std::isfinite(log_base)) {
    throw std::invalid_argument(fmt::format("invalid log base {}", log_base));
  }
  inv_log_base_ = log_base == std::exp(1.0) ? 1.0 : 1.0 / std::log(log_base);
}

TermId TermStatistics::intern(std::string_view term) {
  if (auto it = ids_.find(std::string(term)); it != ids_.end()) return it->second;
  const auto id = static_cast<TermId>(terms_.size());
  terms_.emplace_back(term);
  ids_.emplace(terms_.back(), id);
  doc_freq_.push_back(0);
  log_doc_freq_.push_back(0.0);
  last_seen_.push_back(0);
  return id;
}

void TermStatistics::update(std::span<const std::string> tokens) {
  ++collection_size_;
  ++version_;
  const auto stamp = static_cast<std::uint64_t>(version_);
  for (const auto& tok : tokens) {
    const TermId id = intern(tok);
    if (last_seen_[id] != stamp) {
      last_seen_[id] = stamp;
      ++doc_freq_[id];
      log_doc_freq_[id] = std::log(static_cast<double>(doc_freq_[id]));
    }
  }
  log_collection_size_ = std::log(static_cast<double>(collection_size_));
}

std::optional<TermId> TermStatistics::find(std::string_view term) const {
  if (auto it = ids_.find(std::string(term)); it != ids_.end()) return it->second;
  return std::nullopt;
}

std::int64_t TermStatistics::doc_frequency(std::string_view term) const {
  const auto id = find(term);
  return id ? doc_frequency(*id) : 0;
}

double TermStatistics::idf(TermId id) const {
  if (collection_size_ == 0) throw EmptyCollectionError("empty collection");
  if (id >= doc_freq_.size()) throw std::out_of_range(fmt::format("unknown term id {}", id));
  return idf_unchecked(id);
}

double TermStatistics::idf(std::string_view term) const {
  if (collection_size_ == 0) throw EmptyCollectionError("empty collection");
  const auto id = find(term);
  if (!id) return (log_collection_size_ - kLogUnseen) * inv_log_base_;
  return idf(*id);
}

double TermStatistics::mean_idf() const {
  if (collection_size_ == 0) throw EmptyCollectionError("empty collection");
  double sum = 0.0;
  std::size_t count = 0;
  for (TermId id = 0; id < doc_freq_.size(); ++id) {
    if (doc_freq_[id] == 0) continue;
    sum += idf(id);
    ++count;
  }
  if (count == 0) throw EmptyCollectionError("empty dictionary");
  return sum / static_cast<double>(count);
}

std::vector<IdfTracePoint> trace_mean_idf(std::span<const Document> docs, std::int64_t every,
                                          double log_base) {
  if (every < 1) throw std::invalid_argument("sampling interval must be >= 1");
  TermStatistics stats(log_base);
  std::vector<IdfTracePoint> trace;
  for (const auto& doc : docs) {
    stats.update(doc);
    if (stats.collection_size() % every == 0) trace.push_back({stats.collection_size(), stats.mean_idf()});
  }
  if (!docs.empty() && stats.collection_size() % every != 0) {
    trace.push_back({stats.collection_size(), stats.mean_idf()});
  }
  return trace;
}

}  // namespace fsd
