#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsd/detectors.hpp"
#include "fsd/eval.hpp"
#include "fsd/term_stats.hpp"
#include "fsd/tuner.hpp"

namespace fsd::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::vector<std::string> split_csv_line(std::string_view line);

// Novelty CSV: position,doc_id,novelty,nearest_id,raw_similarity,bias_factor,early_stop
void write_novelty_csv(std::ostream& out, std::span<const NoveltyRecord> records);
std::vector<NoveltyRecord> read_novelty_csv(std::istream& in);
std::vector<NoveltyRecord> read_novelty_csv(const std::filesystem::path& path);

// Truth JSONL: one {"topic": ..., "positions": [...]} object per line.
GroundTruth read_truth_jsonl(std::istream& in);
GroundTruth read_truth_jsonl(const std::filesystem::path& path);
void write_truth_jsonl(std::ostream& out, const GroundTruth& truth);

void write_idf_trace_csv(std::ostream& out, std::span<const IdfTracePoint> trace);
void write_grid_csv(std::ostream& out, std::span<const GridCell> table);

nlohmann::json report_to_json(const DetectionCostReport& report);
nlohmann::json evaluation_to_json(const SkipEvaluation& evaluation);
/// Per-(round, topic) cost contributions from an evaluation report file.
std::map<std::string, double> contributions_from_json(const nlohmann::json& report);

// summary: round,c_min,threshold,p_miss,p_fa   det: p_fa,p_miss
void write_summary_csv(std::ostream& out, const SkipEvaluation& evaluation);
void write_det_csv(std::ostream& out, const DetectionCostReport& report);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace fsd::io
