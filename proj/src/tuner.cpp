#include "fsd/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <limits>
#include <thread>

#include <fmt/format.h>

namespace fsd {

TuneObjective parse_tune_objective(std::string_view name) {
  if (name == "c_min_round0") return TuneObjective::c_min_round0;
  if (name == "c_min_skip_mean") return TuneObjective::c_min_skip_mean;
  throw std::invalid_argument(fmt::format("unknown objective '{}'", name));
}

std::string_view to_string(TuneObjective objective) {
  return objective == TuneObjective::c_min_round0 ? "c_min_round0" : "c_min_skip_mean";
}

void GridSpec::validate() const {
  const auto check = [](const std::vector<double>& values, const char* name, double lo, double hi) {
    if (values.empty()) throw std::invalid_argument(fmt::format("grid: no {} values", name));
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (!(values[k] >= lo && values[k] <= hi)) {
        throw std::invalid_argument(fmt::format("grid: {} value {} out of range", name, values[k]));
      }
      if (k > 0 && values[k] <= values[k - 1]) {
        throw std::invalid_argument(fmt::format("grid: {} values must be strictly increasing", name));
      }
    }
  };
  check(delta_values, "delta", 0.0, std::numeric_limits<double>::max());
  check(gamma_values, "gamma", 0.0, 1.0);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<double> parse_values(std::string_view list) {
  std::vector<double> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto item = trim(list.substr(0, comma));
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
      throw std::invalid_argument(fmt::format("grid: invalid number '{}'", item));
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

GridSpec parse_grid_spec(std::string_view text) {
  GridSpec spec;
  while (!text.empty()) {
    const auto semi = text.find(';');
    const auto clause = trim(text.substr(0, semi));
    if (!clause.empty()) {
      const auto eq = clause.find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument(fmt::format("grid: malformed clause '{}'", clause));
      const auto key = trim(clause.substr(0, eq));
      const auto value = trim(clause.substr(eq + 1));
      if (key == "delta") {
        spec.delta_values = parse_values(value);
      } else if (key == "gamma") {
        spec.gamma_values = parse_values(value);
      } else if (key == "objective") {
        spec.objective = parse_tune_objective(value);
      } else {
        throw std::invalid_argument(fmt::format("grid: unknown key '{}'", key));
      }
    }
    if (semi == std::string_view::npos) break;
    text.remove_prefix(semi + 1);
  }
  spec.validate();
  return spec;
}

TuneResult grid_search(std::span<const Document> stream, const GroundTruth& truth, const GridSpec& grid,
                       const TuneOptions& options) {
  grid.validate();
  truth.validate();

  TuneResult result;
  for (const double d : grid.delta_values) {
    for (const double g : grid.gamma_values) result.table.push_back({BiasParams{d, g}, 0.0});
  }
  // Validate the detector once up front so configuration errors surface here.
  {
    auto probe = options.detector;
    probe.bias = result.table.front().params;
    probe.validate();
  }

  const auto evaluate = [&](GridCell& cell) {
    auto config = options.detector;
    config.bias = cell.params;
    const auto records = run_detector(stream, config);
    if (grid.objective == TuneObjective::c_min_round0) {
      cell.objective = score_run(records, truth, options.constants).c_min;
    } else {
      cell.objective = skip_evaluate(records, truth, options.skip_rounds, options.constants).mean_c_min;
    }
  };

  unsigned workers = options.threads != 0 ? options.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(result.table.size()));
  if (workers <= 1) {
    for (auto& cell : result.table) evaluate(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = next++; k < result.table.size(); k = next++) evaluate(result.table[k]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Table is delta-major and ascending, so the first strict minimum wins ties.
  std::size_t best = 0;
  for (std::size_t k = 1; k < result.table.size(); ++k) {
    if (result.table[k].objective < result.table[best].objective) best = k;
  }
  result.best = result.table[best].params;
  result.objective = result.table[best].objective;
  return result;
}

}  // namespace fsd
