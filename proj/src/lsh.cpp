#include "fsd/lsh.hpp"

#include "best_candidate.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace fsd {

using detail::BestCandidate;
using detail::clamp_fresh;

void LshConfig::validate() const {
  if (hyperplanes_per_table < 1 || hyperplanes_per_table > 64) {
    throw std::invalid_argument(
        fmt::format("hyperplanes per table must lie in [1, 64], got {}", hyperplanes_per_table));
  }
  if (tables < 1) throw std::invalid_argument(fmt::format("tables must be >= 1, got {}", tables));
  if (window_size < 1) throw std::invalid_argument(fmt::format("window size must be >= 1, got {}", window_size));
  if (!(closeness_threshold >= 0.0 && closeness_threshold <= 1.0)) {
    throw std::invalid_argument(
        fmt::format("closeness threshold must lie in [0, 1], got {}", closeness_threshold));
  }
}

HyperplaneBank::HyperplaneBank(int bits, int tables, std::uint64_t seed)
    : bits_(bits), tables_(tables), seed_(seed) {
  if (bits < 1 || bits > 64) throw std::invalid_argument("signature bits must lie in [1, 64]");
  if (tables < 1) throw std::invalid_argument("at least one table is required");
}

const float* HyperplaneBank::planes_for(TermId term) {
  if (term >= planes_.size()) planes_.resize(static_cast<std::size_t>(term) + 1);
  auto& planes = planes_[term];
  if (planes.empty()) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(term)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    planes.resize(static_cast<std::size_t>(tables_) * static_cast<std::size_t>(bits_));
    for (auto& x : planes) x = normal(gen);
  }
  return planes.data();
}

std::uint64_t HyperplaneBank::signature(const DocumentVector& vec, int table) {
  if (table < 0 || table >= tables_) throw std::out_of_range(fmt::format("no table {}", table));
  std::vector<double> dots(static_cast<std::size_t>(bits_), 0.0);
  const auto offset = static_cast<std::size_t>(table) * static_cast<std::size_t>(bits_);
  for (const auto& c : vec.components) {
    const float* plane = planes_for(c.term) + offset;
    for (int j = 0; j < bits_; ++j) dots[static_cast<std::size_t>(j)] += c.weight * plane[j];
  }
  std::uint64_t sig = 0;
  for (int j = 0; j < bits_; ++j) {
    if (dots[static_cast<std::size_t>(j)] >= 0.0) sig |= std::uint64_t{1} << j;
  }
  return sig;
}

std::vector<std::uint64_t> HyperplaneBank::signatures(const DocumentVector& vec) {
  const auto total = static_cast<std::size_t>(tables_) * static_cast<std::size_t>(bits_);
  std::vector<double> dots(total, 0.0);
  for (const auto& c : vec.components) {
    const float* plane = planes_for(c.term);
    for (std::size_t j = 0; j < total; ++j) dots[j] += c.weight * plane[j];
  }
  std::vector<std::uint64_t> sigs(static_cast<std::size_t>(tables_), 0);
  for (int t = 0; t < tables_; ++t) {
    for (int j = 0; j < bits_; ++j) {
      if (dots[static_cast<std::size_t>(t * bits_ + j)] >= 0.0) {
        sigs[static_cast<std::size_t>(t)] |= std::uint64_t{1} << j;
      }
    }
  }
  return sigs;
}

LshDetector::LshDetector(const LshConfig& config, NormPolicy policy, std::optional<BiasParams> bias,
                         BiasForm form)
    : config_(config),
      policy_(policy),
      bias_(bias),
      form_(form),
      bank_(config.hyperplanes_per_table, config.tables, config.rng_seed),
      buckets_(static_cast<std::size_t>(config.tables)) {
  config_.validate();
  if (bias_) {
    bias_->validate();
    if (policy_ != NormPolicy::fresh) throw std::invalid_argument("the distance bias is defined over fresh norms");
  }
}

const std::vector<std::uint64_t>& LshDetector::signatures_for(const DocumentVector& vec) {
  if (cached_position_ != vec.position) {
    cached_signatures_ = bank_.signatures(vec);
    cached_position_ = vec.position;
  }
  return cached_signatures_;
}

NoveltyRecord LshDetector::score(const DocumentVector& vec, const TermStatistics& stats) {
  return score(vec, stats, nullptr);
}

NoveltyRecord LshDetector::score(const DocumentVector& vec, const TermStatistics& stats, LshTrace* trace) {
  if (trace) *trace = {};
  if (docs_.empty()) return empty_history_record(vec);
  if (vec.is_zero()) return zero_vector_record(vec);

  if (++stamp_ == 0) {
    std::fill(seen_stamp_.begin(), seen_stamp_.end(), 0);
    stamp_ = 1;
  }

  BestCandidate best;
  bool stopped = false;
  const auto consider = [&](std::uint32_t d) {
    seen_stamp_[d] = stamp_;
    const auto& old = docs_[d];
    if (trace) trace->candidates.push_back(old.position);
    const double norm = policy_ == NormPolicy::fresh ? fresh_norm(old, stats) : old.frozen_norm;
    if (norm == 0.0) return false;
    const double cos = clamp_fresh(fresh_dot(vec, old, stats) / (vec.frozen_norm * norm), policy_);
    const double factor = bias_ ? distance_bias(cos, vec.position, old.position, *bias_, form_) : 1.0;
    best.offer(cos * factor, cos, factor, old.position, old.doc_id);
    if (config_.early_stop && cos >= config_.closeness_threshold) {
      stopped = true;
      return true;
    }
    return false;
  };

  // Exact pass over the window, newest first.
  const auto n_docs = docs_.size();
  const auto window = static_cast<std::size_t>(config_.window_size);
  const std::size_t window_begin = n_docs > window ? n_docs - window : 0;
  for (std::size_t d = n_docs; d-- > window_begin;) {
    if (consider(static_cast<std::uint32_t>(d))) break;
  }

  // Back off to the hash tables for everything older than the window.
  if (!stopped && window_begin > 0) {
    if (trace) trace->consulted_tables = true;
    const auto& sigs = signatures_for(vec);
    std::vector<std::uint32_t> candidates;
    for (std::size_t t = 0; t < buckets_.size(); ++t) {
      const auto it = buckets_[t].find(sigs[t]);
      if (it == buckets_[t].end()) continue;
      for (const auto d : it->second) {
        if (d >= window_begin || seen_stamp_[d] == stamp_) continue;
        seen_stamp_[d] = stamp_;
        candidates.push_back(d);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    for (const auto d : candidates) {
      if (consider(d)) break;
    }
  }

  auto rec = best.to_record(vec);
  rec.early_stop = stopped;
  return rec;
}

void LshDetector::insert(DocumentVector vec) {
  const auto idx = static_cast<std::uint32_t>(docs_.size());
  const auto& sigs = signatures_for(vec);
  for (std::size_t t = 0; t < buckets_.size(); ++t) buckets_[t][sigs[t]].push_back(idx);
  docs_.push_back(std::move(vec));
  seen_stamp_.push_back(0);
}

}  // namespace fsd
