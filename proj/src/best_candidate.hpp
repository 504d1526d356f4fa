#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "fsd/detectors.hpp"

namespace fsd::detail {

// Running argmax over candidates; ties go to the lowest stream position.
struct BestCandidate {
  bool found = false;
  double score = 0.0;
  double raw = 0.0;
  double factor = 1.0;
  std::int64_t position = 0;
  const std::string* id = nullptr;

  void offer(double s, double r, double f, std::int64_t pos, const std::string& doc_id) {
    if (!found || s > score || (s == score && pos < position)) {
      found = true;
      score = s;
      raw = r;
      factor = f;
      position = pos;
      id = &doc_id;
    }
  }

  NoveltyRecord to_record(const DocumentVector& vec) const {
    NoveltyRecord rec;
    rec.doc_id = vec.doc_id;
    rec.position = vec.position;
    if (found) {
      rec.novelty = 1.0 - score;
      rec.nearest_id = *id;
      rec.nearest_position = position;
      rec.raw_similarity = raw;
      rec.bias_factor = factor;
    }
    return rec;
  }
};

inline double clamp_fresh(double cos, NormPolicy policy) {
  return policy == NormPolicy::fresh ? std::min(cos, 1.0) : cos;
}

}  // namespace fsd::detail
