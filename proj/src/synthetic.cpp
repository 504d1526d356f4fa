#include "fsd/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

namespace fsd::synthetic {

namespace {

std::discrete_distribution<int> zipf_law(int size, double exponent) {
  std::vector<double> weights(static_cast<std::size_t>(size));
  for (int r = 0; r < size; ++r) weights[static_cast<std::size_t>(r)] = 1.0 / std::pow(r + 1.0, exponent);
  return {weights.begin(), weights.end()};
}

// k distinct values from [lo, hi] not already in `taken`, ascending.
std::vector<std::int64_t> draw_positions(std::mt19937_64& gen, std::int64_t lo, std::int64_t hi, int k,
                                         std::set<std::int64_t>& taken) {
  std::vector<std::int64_t> free;
  for (std::int64_t p = lo; p <= hi; ++p) {
    if (!taken.contains(p)) free.push_back(p);
  }
  if (static_cast<std::int64_t>(free.size()) < k) {
    throw std::invalid_argument(fmt::format("cannot place {} documents in [{}, {}]", k, lo, hi));
  }
  std::vector<std::int64_t> picked;
  std::sample(free.begin(), free.end(), std::back_inserter(picked), k, gen);
  for (const auto p : picked) taken.insert(p);
  return picked;
}

}  // namespace

std::vector<Document> zipf_stream(const ZipfStreamOptions& options) {
  if (options.documents < 0 || options.tokens_per_document < 1 || options.vocabulary_size < 1) {
    throw std::invalid_argument("invalid zipf stream options");
  }
  std::mt19937_64 gen(options.seed);
  auto law = zipf_law(options.vocabulary_size, options.exponent);
  std::vector<Document> docs;
  docs.reserve(static_cast<std::size_t>(options.documents));
  for (std::int64_t pos = 1; pos <= options.documents; ++pos) {
    Document doc;
    doc.id = fmt::format("z{}", pos);
    doc.position = pos;
    doc.timestamp = pos * 1000;
    for (int t = 0; t < options.tokens_per_document; ++t) doc.tokens.push_back(fmt::format("w{}", law(gen)));
    for (int f = 0; f < options.fresh_terms_per_document; ++f) doc.tokens.push_back(fmt::format("u{}x{}", pos, f));
    docs.push_back(std::move(doc));
  }
  return docs;
}

PlantedCorpus planted_topic_corpus(const PlantedCorpusOptions& o) {
  if (o.topics < 1 || o.follow_ups_per_topic < 0 || o.keywords_per_topic < 1 ||
      o.first_story_keywords > o.keywords_per_topic || o.follow_up_keywords_max > o.keywords_per_topic ||
      o.follow_up_keywords_min > o.follow_up_keywords_max || o.follow_up_keywords_min < 0 ||
      o.first_story_begin < 1 || o.first_story_end < o.first_story_begin || o.first_story_end > o.documents) {
    throw std::invalid_argument("invalid planted corpus options");
  }
  std::mt19937_64 gen(o.seed);
  auto background = zipf_law(o.background_vocabulary, o.background_exponent);

  // topic index per position, and whether it is the first story.
  std::vector<int> topic_at(static_cast<std::size_t>(o.documents) + 1, -1);
  std::vector<char> is_first(static_cast<std::size_t>(o.documents) + 1, 0);
  std::set<std::int64_t> taken;
  const auto firsts = draw_positions(gen, o.first_story_begin, o.first_story_end, o.topics, taken);
  // Shuffle so topic ids are not ordered by arrival.
  std::vector<std::int64_t> first_of(firsts);
  std::shuffle(first_of.begin(), first_of.end(), gen);

  PlantedCorpus corpus;
  for (int t = 0; t < o.topics; ++t) {
    const auto first = first_of[static_cast<std::size_t>(t)];
    topic_at[static_cast<std::size_t>(first)] = t;
    is_first[static_cast<std::size_t>(first)] = 1;
    const auto follow = draw_positions(gen, first + o.min_follow_up_gap, o.documents, o.follow_ups_per_topic, taken);
    auto& positions = corpus.truth.topics[fmt::format("topic{:02}", t)];
    positions.push_back(first);
    for (const auto p : follow) {
      topic_at[static_cast<std::size_t>(p)] = t;
      positions.push_back(p);
    }
    std::sort(positions.begin(), positions.end());
  }

  std::vector<int> keyword_order(static_cast<std::size_t>(o.keywords_per_topic));
  std::uniform_int_distribution<int> follow_count(o.follow_up_keywords_min, o.follow_up_keywords_max);
  corpus.documents.reserve(static_cast<std::size_t>(o.documents));
  for (std::int64_t pos = 1; pos <= o.documents; ++pos) {
    Document doc;
    doc.id = fmt::format("d{}", pos);
    doc.position = pos;
    doc.timestamp = pos * 1000;
    for (int k = 0; k < o.background_tokens; ++k) doc.tokens.push_back(fmt::format("b{}", background(gen)));
    for (int f = 0; f < o.fresh_terms_per_document; ++f) doc.tokens.push_back(fmt::format("n{}x{}", pos, f));
    const int topic = topic_at[static_cast<std::size_t>(pos)];
    if (topic >= 0) {
      const int count = is_first[static_cast<std::size_t>(pos)] ? o.first_story_keywords : follow_count(gen);
      std::iota(keyword_order.begin(), keyword_order.end(), 0);
      std::shuffle(keyword_order.begin(), keyword_order.end(), gen);
      for (int k = 0; k < count; ++k) {
        doc.tokens.push_back(fmt::format("t{}k{}", topic, keyword_order[static_cast<std::size_t>(k)]));
      }
      doc.topic = fmt::format("topic{:02}", topic);
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace fsd::synthetic
