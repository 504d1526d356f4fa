#pragma once

#include <cstdint>
#include <vector>

#include "fsd/corpus.hpp"
#include "fsd/eval.hpp"

namespace fsd::synthetic {

struct ZipfStreamOptions {
  std::int64_t documents = 10000;
  int tokens_per_document = 12;
  int vocabulary_size = 50000;
  double exponent = 1.1;
  /// Unique never-repeated terms appended to each document.
  int fresh_terms_per_document = 0;
  std::uint64_t seed = 1;
};

/// Documents whose tokens are drawn from a Zipf law over a fixed vocabulary.
/// Rare ranks keep appearing for the first time, so the dictionary grows.
std::vector<Document> zipf_stream(const ZipfStreamOptions& options);

struct PlantedCorpusOptions {
  std::int64_t documents = 3000;
  int topics = 20;
  int follow_ups_per_topic = 5;
  /// Minimum distance between a first story and each of its follow-ups.
  std::int64_t min_follow_up_gap = 1000;
  /// First stories are placed in [first_story_begin, first_story_end].
  std::int64_t first_story_begin = 200;
  std::int64_t first_story_end = 800;

  int background_vocabulary = 4000;
  double background_exponent = 1.0;
  int background_tokens = 8;
  int fresh_terms_per_document = 2;

  int keywords_per_topic = 10;
  int first_story_keywords = 6;
  int follow_up_keywords_min = 2;
  int follow_up_keywords_max = 6;

  std::uint64_t seed = 1;
};

struct PlantedCorpus {
  std::vector<Document> documents;
  GroundTruth truth;
};

/// Noise stream with planted topics: each topic has a first story early in
/// the stream and follow-ups that arrive at least `min_follow_up_gap`
/// positions later, sharing part of the topic's keywords.
PlantedCorpus planted_topic_corpus(const PlantedCorpusOptions& options);

}  // namespace fsd::synthetic
