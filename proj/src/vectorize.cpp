#include "fsd/vectorize.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace fsd {

NormPolicy parse_norm_policy(std::string_view name) {
  if (name == "fresh") return NormPolicy::fresh;
  if (name == "frozen") return NormPolicy::frozen;
  throw std::invalid_argument(fmt::format("unknown norm policy '{}'", name));
}

std::string_view to_string(NormPolicy policy) {
  return policy == NormPolicy::fresh ? "fresh" : "frozen";
}

double DocumentVector::weight(TermId term) const noexcept {
  auto it = std::lower_bound(components.begin(), components.end(), term,
                             [](const VectorComponent& c, TermId t) { return c.term < t; });
  return it != components.end() && it->term == term ? it->weight : 0.0;
}

DocumentVector make_vector(const Document& doc, const TermStatistics& stats,
                           const VectorizeOptions& options) {
  DocumentVector vec;
  vec.doc_id = doc.id;
  vec.position = doc.position;

  std::vector<TermId> ids;
  ids.reserve(doc.tokens.size());
  for (const auto& tok : doc.tokens) {
    const auto id = stats.find(tok);
    if (!id || stats.doc_frequency(*id) == 0) {
      throw std::logic_error(
          fmt::format("term '{}' of document '{}' has not been applied to the statistics", tok, doc.id));
    }
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());

  double sq = 0.0;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    VectorComponent c;
    c.term = ids[i];
    c.tf = static_cast<std::uint32_t>(j - i);
    c.tf_weight = options.sublinear_tf ? 1.0 + std::log(static_cast<double>(c.tf)) : static_cast<double>(c.tf);
    c.weight = c.tf_weight * stats.idf(c.term);
    sq += c.weight * c.weight;
    vec.components.push_back(c);
    i = j;
  }
  vec.frozen_norm = std::sqrt(sq);
  return vec;
}

DocumentVector build_vector(const Document& doc, const TermStatistics& stats,
                            const VectorizeOptions& options) {
  if (doc.tokens.empty()) throw std::invalid_argument(fmt::format("document '{}' has no tokens", doc.id));
  auto vec = make_vector(doc, stats, options);
  if (vec.is_zero()) throw ZeroVectorError();
  return vec;
}

SparseWeights fresh_weights(const DocumentVector& vec, const TermStatistics& stats) {
  SparseWeights out;
  out.reserve(vec.components.size());
  for (const auto& c : vec.components) out.emplace_back(c.term, c.tf_weight * stats.idf(c.term));
  return out;
}

double fresh_norm(const DocumentVector& vec, const TermStatistics& stats) {
  double sq = 0.0;
  for (const auto& c : vec.components) {
    const double w = c.tf_weight * stats.idf(c.term);
    sq += w * w;
  }
  return std::sqrt(sq);
}

double fresh_dot(const DocumentVector& new_vec, const DocumentVector& old_vec,
                 const TermStatistics& stats) {
  const auto& a = new_vec.components;
  const auto& b = old_vec.components;
  double dot = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].term < b[j].term) {
      ++i;
    } else if (b[j].term < a[i].term) {
      ++j;
    } else {
      dot += a[i].weight * b[j].tf_weight * stats.idf(b[j].term);
      ++i;
      ++j;
    }
  }
  return dot;
}

double cosine(const DocumentVector& new_vec, const DocumentVector& old_vec,
              const TermStatistics& stats, NormPolicy policy) {
  const double new_norm = new_vec.frozen_norm;
  const double old_norm = policy == NormPolicy::fresh ? fresh_norm(old_vec, stats) : old_vec.frozen_norm;
  if (new_norm == 0.0 || old_norm == 0.0) throw ZeroVectorError();
  const double cos = fresh_dot(new_vec, old_vec, stats) / (new_norm * old_norm);
  return policy == NormPolicy::fresh ? std::min(cos, 1.0) : cos;
}

}  // namespace fsd
