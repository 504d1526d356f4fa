#include "fsd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace fsd {

void GroundTruth::validate() const {
  std::unordered_set<std::int64_t> seen;
  for (const auto& [topic, positions] : topics) {
    if (positions.empty()) throw std::invalid_argument(fmt::format("topic '{}' has no documents", topic));
    for (std::size_t k = 0; k < positions.size(); ++k) {
      if (positions[k] < 1) throw std::invalid_argument(fmt::format("topic '{}': position {} < 1", topic, positions[k]));
      if (k > 0 && positions[k] <= positions[k - 1]) {
        throw std::invalid_argument(fmt::format("topic '{}': positions are not strictly increasing", topic));
      }
      if (!seen.insert(positions[k]).second) {
        throw std::invalid_argument(fmt::format("position {} belongs to more than one topic", positions[k]));
      }
    }
  }
}

GroundTruth truth_from_documents(std::span<const Document> docs) {
  GroundTruth truth;
  for (const auto& doc : docs) {
    if (doc.topic) truth.topics[*doc.topic].push_back(doc.position);
  }
  return truth;
}

double CostConstants::normalizer() const { return std::min(c_miss * p_target, c_fa * (1.0 - p_target)); }

double CostConstants::cost(double p_miss, double p_fa) const {
  return (c_miss * p_miss * p_target + c_fa * p_fa * (1.0 - p_target)) / normalizer();
}

namespace {

struct Scored {
  double novelty;
  std::size_t topic;
  bool target;
};

struct TopicCounts {
  bool target_fired = false;
  std::int64_t fired_non_targets = 0;
  std::int64_t non_targets = 0;
};

SweepPoint evaluate_point(double threshold, const std::vector<TopicCounts>& counts, const CostConstants& constants) {
  std::int64_t misses = 0;
  double fa_sum = 0.0;
  std::int64_t fa_topics = 0;
  for (const auto& c : counts) {
    if (!c.target_fired) ++misses;
    if (c.non_targets > 0) {
      fa_sum += static_cast<double>(c.fired_non_targets) / static_cast<double>(c.non_targets);
      ++fa_topics;
    }
  }
  SweepPoint p;
  p.threshold = threshold;
  p.p_miss = static_cast<double>(misses) / static_cast<double>(counts.size());
  p.p_fa = fa_topics > 0 ? fa_sum / static_cast<double>(fa_topics) : 0.0;
  p.cost = constants.cost(p.p_miss, p.p_fa);
  return p;
}

}  // namespace

DetectionCostReport score_run(std::span<const NoveltyRecord> records, const GroundTruth& truth,
                              const CostConstants& constants) {
  if (truth.empty()) throw std::invalid_argument("empty ground truth");
  truth.validate();

  std::unordered_map<std::int64_t, double> novelty_by_position;
  novelty_by_position.reserve(records.size());
  for (const auto& rec : records) novelty_by_position[rec.position] = rec.novelty;

  std::vector<std::string> names;
  std::vector<Scored> items;
  std::vector<TopicCounts> counts;
  for (const auto& [topic, positions] : truth.topics) {
    const std::size_t t = names.size();
    names.push_back(topic);
    TopicCounts c;
    c.non_targets = static_cast<std::int64_t>(positions.size()) - 1;
    counts.push_back(c);
    for (std::size_t k = 0; k < positions.size(); ++k) {
      const auto it = novelty_by_position.find(positions[k]);
      if (it == novelty_by_position.end()) {
        throw std::invalid_argument(fmt::format("no novelty record for position {} (topic '{}')", positions[k], topic));
      }
      items.push_back({it->second, t, k == 0});
    }
  }

  // Descending novelty: lowering the threshold fires items in this order.
  std::sort(items.begin(), items.end(), [](const Scored& a, const Scored& b) { return a.novelty > b.novelty; });

  DetectionCostReport report;
  report.constants = constants;
  const double above_max = std::nextafter(items.front().novelty, std::numeric_limits<double>::infinity());
  report.sweep.push_back(evaluate_point(above_max, counts, constants));
  for (std::size_t i = 0; i < items.size();) {
    const double value = items[i].novelty;
    for (; i < items.size() && items[i].novelty == value; ++i) {
      auto& c = counts[items[i].topic];
      if (items[i].target) {
        c.target_fired = true;
      } else {
        ++c.fired_non_targets;
      }
    }
    report.sweep.push_back(evaluate_point(value, counts, constants));
  }
  std::reverse(report.sweep.begin(), report.sweep.end());

  // First minimum in ascending threshold order.
  std::size_t best = 0;
  for (std::size_t k = 1; k < report.sweep.size(); ++k) {
    if (report.sweep[k].cost < report.sweep[best].cost) best = k;
  }
  const auto& at_min = report.sweep[best];
  report.c_min = at_min.cost;
  report.argmin_threshold = at_min.threshold;
  report.p_miss_at_min = at_min.p_miss;
  report.p_fa_at_min = at_min.p_fa;

  const double norm = constants.normalizer();
  for (const auto& [topic, positions] : truth.topics) {
    TopicOutcome out;
    out.miss = novelty_by_position.at(positions.front()) < at_min.threshold;
    out.non_targets = static_cast<std::int64_t>(positions.size()) - 1;
    for (std::size_t k = 1; k < positions.size(); ++k) {
      if (novelty_by_position.at(positions[k]) >= at_min.threshold) ++out.fa_count;
    }
    out.fa_rate = out.non_targets > 0 ? static_cast<double>(out.fa_count) / static_cast<double>(out.non_targets) : 0.0;
    out.cost = (constants.c_miss * (out.miss ? 1.0 : 0.0) * constants.p_target +
                constants.c_fa * out.fa_rate * (1.0 - constants.p_target)) /
               norm;
    report.per_topic.emplace(topic, out);
  }
  return report;
}

GroundTruth skip_round(const GroundTruth& truth) {
  GroundTruth next;
  for (const auto& [topic, positions] : truth.topics) {
    if (positions.size() <= 1) {
      spdlog::warn("skip evaluation: topic '{}' has no follow-up left and is dropped", topic);
      continue;
    }
    next.topics.emplace(topic, std::vector<std::int64_t>(positions.begin() + 1, positions.end()));
  }
  return next;
}

SkipEvaluation skip_evaluate(std::span<const NoveltyRecord> records, const GroundTruth& truth, int rounds,
                             const CostConstants& constants) {
  if (rounds < 0) throw std::invalid_argument("skip rounds must be >= 0");
  SkipEvaluation out;
  GroundTruth current = truth;
  for (int r = 0; r <= rounds; ++r) {
    if (r > 0) current = skip_round(current);
    if (current.empty()) {
      spdlog::warn("skip evaluation: all topics exhausted after {} round(s)", r);
      break;
    }
    out.rounds.push_back(score_run(records, current, constants));
  }
  if (out.rounds.empty()) throw std::invalid_argument("empty ground truth");
  double sum = 0.0;
  for (const auto& rep : out.rounds) sum += rep.c_min;
  out.mean_c_min = sum / static_cast<double>(out.rounds.size());
  return out;
}

double paired_randomization_test(std::span<const double> a, std::span<const double> b, int permutations,
                                 std::uint64_t seed) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  if (a.size() < 2) throw std::invalid_argument("paired test needs at least 2 pairs");
  if (permutations < 1) throw std::invalid_argument("permutations must be >= 1");

  std::vector<double> diff(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
  const auto n = static_cast<double>(diff.size());
  double total = 0.0;
  double scale = 0.0;
  for (const double d : diff) {
    total += d;
    scale += std::abs(d);
  }
  const double observed = std::abs(total) / n;
  // Flipped sums are formed in a different order; allow for rounding.
  const double tolerance = 1e-12 * (scale / n) + 1e-300;

  const auto statistic = [&](auto&& sign_of) {
    double s = 0.0;
    for (std::size_t k = 0; k < diff.size(); ++k) s += sign_of(k) ? -diff[k] : diff[k];
    return std::abs(s) / n;
  };

  if (diff.size() < 63 && (std::uint64_t{1} << diff.size()) <= static_cast<std::uint64_t>(permutations)) {
    const std::uint64_t total_flips = std::uint64_t{1} << diff.size();
    std::uint64_t extreme = 0;
    for (std::uint64_t mask = 0; mask < total_flips; ++mask) {
      if (statistic([mask](std::size_t k) { return ((mask >> k) & 1U) != 0; }) >= observed - tolerance) ++extreme;
    }
    return static_cast<double>(extreme) / static_cast<double>(total_flips);
  }

  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<char> flips(diff.size());
  std::int64_t extreme = 0;
  for (int p = 0; p < permutations; ++p) {
    for (auto& f : flips) f = coin(gen) ? 1 : 0;
    if (statistic([&flips](std::size_t k) { return flips[k] != 0; }) >= observed - tolerance) ++extreme;
  }
  return static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
}

std::map<std::string, double> cost_contributions(const SkipEvaluation& evaluation) {
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < evaluation.rounds.size(); ++r) {
    for (const auto& [topic, outcome] : evaluation.rounds[r].per_topic) {
      out.emplace(fmt::format("{}/{}", r, topic), outcome.cost);
    }
  }
  return out;
}

double paired_significance(const std::map<std::string, double>& run_a, const std::map<std::string, double>& run_b,
                           int permutations, std::uint64_t seed) {
  std::vector<double> a;
  std::vector<double> b;
  for (const auto& [key, value] : run_a) {
    const auto it = run_b.find(key);
    if (it == run_b.end()) continue;
    a.push_back(value);
    b.push_back(it->second);
  }
  if (a.size() < 2) throw std::invalid_argument("fewer than 2 shared topics to pair");
  return paired_randomization_test(a, b, permutations, seed);
}

}  // namespace fsd
