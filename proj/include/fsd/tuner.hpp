#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsd/corpus.hpp"
#include "fsd/detectors.hpp"
#include "fsd/eval.hpp"
#include "fsd/pipeline.hpp"

namespace fsd {

enum class TuneObjective { c_min_round0, c_min_skip_mean };

TuneObjective parse_tune_objective(std::string_view name);
std::string_view to_string(TuneObjective objective);

struct GridSpec {
  std::vector<double> delta_values;
  std::vector<double> gamma_values;
  TuneObjective objective = TuneObjective::c_min_round0;

  void validate() const;
};

/// Parses "delta=0,0.018,0.036;gamma=0.5,0.61;objective=c_min_skip_mean".
/// The objective clause is optional.
GridSpec parse_grid_spec(std::string_view text);

struct GridCell {
  BiasParams params;
  double objective = 0.0;
};

struct TuneResult {
  BiasParams best;
  double objective = 0.0;
  std::vector<GridCell> table;  // delta-major, both ascending
};

struct TuneOptions {
  /// Detector the bias is applied to; its `bias` field is overwritten per cell.
  DetectorConfig detector;
  int skip_rounds = 3;  // used by c_min_skip_mean
  CostConstants constants;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Scores every (delta, gamma) cell and returns the lowest objective.
/// Ties go to the smaller delta, then the smaller gamma.
TuneResult grid_search(std::span<const Document> stream, const GroundTruth& truth, const GridSpec& grid,
                       const TuneOptions& options = {});

}  // namespace fsd
