#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fsd/corpus.hpp"

namespace testing_support {

using Tokens = std::vector<std::string>;

inline std::vector<fsd::Document> as_stream(const std::vector<Tokens>& token_lists) {
  std::vector<fsd::Document> docs;
  for (std::size_t k = 0; k < token_lists.size(); ++k) {
    fsd::Document d;
    d.position = static_cast<std::int64_t>(k) + 1;
    d.id = "doc" + std::to_string(d.position);
    d.timestamp = d.position;
    d.tokens = token_lists[k];
    docs.push_back(std::move(d));
  }
  return docs;
}

/// Small random streams with a skewed vocabulary, some repeated tokens,
/// occasional near-duplicates of an earlier document and a slowly growing
/// word pool so later documents bring new terms.
inline std::vector<Tokens> random_token_lists(std::mt19937_64& gen, int max_docs) {
  std::uniform_int_distribution<int> n_docs(2, max_docs);
  std::uniform_int_distribution<int> length(1, 9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int docs = n_docs(gen);
  std::vector<Tokens> out;
  for (int d = 0; d < docs; ++d) {
    if (!out.empty() && unit(gen) < 0.15) {
      std::uniform_int_distribution<std::size_t> pick(0, out.size() - 1);
      auto copy = out[pick(gen)];
      if (unit(gen) < 0.5) copy.push_back("x" + std::to_string(d));
      out.push_back(std::move(copy));
      continue;
    }
    const int pool = 6 + d;
    std::uniform_int_distribution<int> word(0, pool - 1);
    Tokens t;
    const int len = length(gen);
    for (int k = 0; k < len; ++k) {
      // Squaring skews draws toward low ids.
      const int w = static_cast<int>(pool * unit(gen) * unit(gen));
      t.push_back("w" + std::to_string(unit(gen) < 0.8 ? w : word(gen)));
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace testing_support
