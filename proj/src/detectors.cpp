#include "fsd/detectors.hpp"

#include "best_candidate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace fsd {

using detail::BestCandidate;
using detail::clamp_fresh;

void BiasParams::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument(fmt::format("bias delta must be >= 0, got {}", delta));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument(fmt::format("bias gamma must lie in [0, 1], got {}", gamma));
  }
}

BiasForm parse_bias_form(std::string_view name) {
  if (name == "normalized") return BiasForm::normalized_log;
  if (name == "literal") return BiasForm::literal_log;
  throw std::invalid_argument(fmt::format("unknown bias form '{}'", name));
}

std::string_view to_string(BiasForm form) {
  return form == BiasForm::normalized_log ? "normalized" : "literal";
}

double distance_bias(double similarity, std::int64_t n, std::int64_t i, const BiasParams& params,
                     BiasForm form) {
  if (n == i) throw std::invalid_argument("distance bias needs two distinct positions");
  if (i < 1 || i > n) {
    throw std::invalid_argument(fmt::format("distance bias needs n > i >= 1, got n={} i={}", n, i));
  }
  if (similarity < params.gamma) return 1.0;
  const double log_gap = std::log(static_cast<double>(n - i));
  if (form == BiasForm::literal_log) return 1.0 + params.delta * log_gap;
  return 1.0 + params.delta * (log_gap / std::log(static_cast<double>(n)));
}

NoveltyRecord zero_vector_record(const DocumentVector& vec) {
  NoveltyRecord rec;
  rec.doc_id = vec.doc_id;
  rec.position = vec.position;
  rec.novelty = 0.0;
  rec.zero_vector = true;
  return rec;
}

NoveltyRecord empty_history_record(const DocumentVector& vec) {
  NoveltyRecord rec;
  rec.doc_id = vec.doc_id;
  rec.position = vec.position;
  rec.zero_vector = vec.is_zero();
  return rec;
}

NoveltyRecord exhaustive_novelty(const DocumentVector& new_vec, std::span<const DocumentVector> history,
                                 const TermStatistics& stats, NormPolicy policy) {
  if (history.empty()) return empty_history_record(new_vec);
  if (new_vec.is_zero()) return zero_vector_record(new_vec);
  BestCandidate best;
  for (const auto& old : history) {
    const double old_norm = policy == NormPolicy::fresh ? fresh_norm(old, stats) : old.frozen_norm;
    if (old_norm == 0.0) continue;
    const double cos = clamp_fresh(fresh_dot(new_vec, old, stats) / (new_vec.frozen_norm * old_norm), policy);
    best.offer(cos, cos, 1.0, old.position, old.doc_id);
  }
  return best.to_record(new_vec);
}

NoveltyRecord recency_novelty(const DocumentVector& new_vec, std::span<const DocumentVector> window,
                              std::int64_t window_size, const TermStatistics& stats) {
  if (window_size < 1) throw std::invalid_argument("window size must be >= 1");
  if (static_cast<std::int64_t>(window.size()) > window_size) {
    throw std::invalid_argument("window holds more documents than its size");
  }
  if (window.empty()) return empty_history_record(new_vec);
  if (new_vec.is_zero()) return zero_vector_record(new_vec);
  BestCandidate best;
  const auto m = static_cast<std::int64_t>(window.size());
  for (std::int64_t k = 0; k < m; ++k) {
    const auto& old = window[static_cast<std::size_t>(k)];
    const double old_norm = fresh_norm(old, stats);
    if (old_norm == 0.0) continue;
    const double cos = std::min(fresh_dot(new_vec, old, stats) / (new_vec.frozen_norm * old_norm), 1.0);
    const std::int64_t slot = window_size - (m - 1 - k);
    const double factor = static_cast<double>(slot) / static_cast<double>(window_size);
    best.offer(cos * factor, cos, factor, old.position, old.doc_id);
  }
  return best.to_record(new_vec);
}

NoveltyRecord optimized_novelty(const DocumentVector& new_vec, std::span<const DocumentVector> history,
                                const TermStatistics& stats, const BiasParams& params, BiasForm form) {
  if (history.empty()) return empty_history_record(new_vec);
  if (new_vec.is_zero()) return zero_vector_record(new_vec);
  BestCandidate best;
  for (const auto& old : history) {
    const double old_norm = fresh_norm(old, stats);
    if (old_norm == 0.0) continue;
    const double cos = std::min(fresh_dot(new_vec, old, stats) / (new_vec.frozen_norm * old_norm), 1.0);
    const double factor = distance_bias(cos, new_vec.position, old.position, params, form);
    best.offer(cos * factor, cos, factor, old.position, old.doc_id);
  }
  return best.to_record(new_vec);
}

ExhaustiveDetector::ExhaustiveDetector(NormPolicy policy, std::optional<BiasParams> bias, BiasForm form)
    : policy_(policy), bias_(bias), form_(form) {
  if (bias_) {
    bias_->validate();
    if (policy_ != NormPolicy::fresh) {
      throw std::invalid_argument("the distance bias is defined over fresh norms");
    }
  }
}

double ExhaustiveDetector::candidate_norm(std::uint32_t doc, const TermStatistics& stats) const {
  const auto& vec = docs_[doc];
  if (policy_ == NormPolicy::frozen) return vec.frozen_norm;
  double sq = 0.0;
  for (const auto& c : vec.components) {
    const double w = c.tf_weight * stats.idf_unchecked(c.term);
    sq += w * w;
  }
  return std::sqrt(sq);
}

NoveltyRecord ExhaustiveDetector::score(const DocumentVector& vec, const TermStatistics& stats) {
  if (docs_.empty()) return empty_history_record(vec);
  if (vec.is_zero()) return zero_vector_record(vec);

  // Accumulate dot products against every document sharing a term.
  for (const auto& c : vec.components) {
    if (c.term >= postings_.size()) continue;
    const double idf = stats.idf_unchecked(c.term);
    for (const auto& p : postings_[c.term]) {
      if (!marked_[p.doc]) {
        marked_[p.doc] = 1;
        touched_.push_back(p.doc);
      }
      dots_[p.doc] += c.weight * p.tf_weight * idf;
    }
  }

  BestCandidate best;
  const auto factor_for = [&](double cos, std::int64_t old_pos) {
    return bias_ ? distance_bias(cos, vec.position, old_pos, *bias_, form_) : 1.0;
  };
  for (const auto doc : touched_) {
    const double dot = dots_[doc];
    if (dot <= 0.0) continue;
    const double norm = candidate_norm(doc, stats);
    if (norm == 0.0) continue;
    const double cos = clamp_fresh(dot / (vec.frozen_norm * norm), policy_);
    const double factor = factor_for(cos, docs_[doc].position);
    best.offer(cos * factor, cos, factor, docs_[doc].position, docs_[doc].doc_id);
  }
  for (const auto doc : touched_) {
    dots_[doc] = 0.0;
    marked_[doc] = 0;
  }
  touched_.clear();

  if (!best.found) {
    // Nothing overlaps: the argmax is the earliest document with a usable norm.
    std::optional<std::uint32_t> first;
    if (policy_ == NormPolicy::frozen) {
      first = first_nonzero_frozen_;
    } else {
      for (std::uint32_t d = 0; d < docs_.size(); ++d) {
        if (candidate_norm(d, stats) > 0.0) {
          first = d;
          break;
        }
      }
    }
    if (first) {
      const auto& old = docs_[*first];
      const double factor = factor_for(0.0, old.position);
      best.offer(0.0, 0.0, factor, old.position, old.doc_id);
    }
  }
  return best.to_record(vec);
}

void ExhaustiveDetector::insert(DocumentVector vec) {
  const auto idx = static_cast<std::uint32_t>(docs_.size());
  for (const auto& c : vec.components) {
    if (c.term >= postings_.size()) postings_.resize(c.term + 1);
    postings_[c.term].push_back({idx, c.tf_weight});
  }
  if (!first_nonzero_frozen_ && !vec.is_zero()) first_nonzero_frozen_ = idx;
  docs_.push_back(std::move(vec));
  dots_.push_back(0.0);
  marked_.push_back(0);
}

RecencyDetector::RecencyDetector(std::int64_t window_size) : window_size_(window_size) {
  if (window_size < 1) throw std::invalid_argument("window size must be >= 1");
}

NoveltyRecord RecencyDetector::score(const DocumentVector& vec, const TermStatistics& stats) {
  return recency_novelty(vec, window_, window_size_, stats);
}

void RecencyDetector::insert(DocumentVector vec) {
  window_.push_back(std::move(vec));
  if (static_cast<std::int64_t>(window_.size()) > window_size_) window_.erase(window_.begin());
}

}  // namespace fsd
