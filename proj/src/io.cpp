#include "fsd/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace fsd::io {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), ptr);
}

namespace {

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line_no, fmt::format("invalid number '{}'", field));
  }
  return v;
}

std::int64_t parse_int(std::string_view field, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line_no, fmt::format("invalid integer '{}'", field));
  }
  return v;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

void write_novelty_csv(std::ostream& out, std::span<const NoveltyRecord> records) {
  out << "position,doc_id,novelty,nearest_id,raw_similarity,bias_factor,early_stop\n";
  for (const auto& r : records) {
    out << r.position << ',' << csv_field(r.doc_id) << ',' << format_double(r.novelty) << ','
        << (r.nearest_id ? csv_field(*r.nearest_id) : std::string()) << ',' << format_double(r.raw_similarity)
        << ',' << format_double(r.bias_factor) << ',' << (r.early_stop ? 1 : 0) << '\n';
  }
}

std::vector<NoveltyRecord> read_novelty_csv(std::istream& in) {
  std::vector<NoveltyRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line.rfind("position,", 0) != 0) throw ParseError(1, "missing novelty CSV header");
      continue;
    }
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw ParseError(line_no, fmt::format("expected 7 columns, found {}", f.size()));
    NoveltyRecord r;
    r.position = parse_int(f[0], line_no);
    r.doc_id = f[1];
    r.novelty = parse_double(f[2], line_no);
    if (!f[3].empty()) r.nearest_id = f[3];
    r.raw_similarity = parse_double(f[4], line_no);
    r.bias_factor = parse_double(f[5], line_no);
    if (f[6] != "0" && f[6] != "1") throw ParseError(line_no, "early_stop must be 0 or 1");
    r.early_stop = f[6] == "1";
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<NoveltyRecord> read_novelty_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_novelty_csv(in);
}

GroundTruth read_truth_jsonl(std::istream& in) {
  GroundTruth truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, fmt::format("invalid JSON: {}", e.what()));
    }
    if (!obj.is_object() || !obj.contains("topic") || !obj.contains("positions")) {
      throw ParseError(line_no, "expected an object with 'topic' and 'positions'");
    }
    if (!obj["topic"].is_string() || !obj["positions"].is_array()) {
      throw ParseError(line_no, "'topic' must be a string and 'positions' an array");
    }
    const auto topic = obj["topic"].get<std::string>();
    if (truth.topics.contains(topic)) throw ParseError(line_no, fmt::format("duplicate topic '{}'", topic));
    std::vector<std::int64_t> positions;
    for (const auto& p : obj["positions"]) {
      if (!p.is_number_integer()) throw ParseError(line_no, "positions must be integers");
      positions.push_back(p.get<std::int64_t>());
    }
    truth.topics.emplace(topic, std::move(positions));
  }
  truth.validate();
  return truth;
}

GroundTruth read_truth_jsonl(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_truth_jsonl(in);
}

void write_truth_jsonl(std::ostream& out, const GroundTruth& truth) {
  for (const auto& [topic, positions] : truth.topics) {
    out << nlohmann::json{{"topic", topic}, {"positions", positions}}.dump() << '\n';
  }
}

void write_idf_trace_csv(std::ostream& out, std::span<const IdfTracePoint> trace) {
  out << "position,mean_idf\n";
  for (const auto& p : trace) out << p.position << ',' << format_double(p.mean_idf) << '\n';
}

void write_grid_csv(std::ostream& out, std::span<const GridCell> table) {
  out << "delta,gamma,c_min\n";
  for (const auto& c : table) {
    out << format_double(c.params.delta) << ',' << format_double(c.params.gamma) << ','
        << format_double(c.objective) << '\n';
  }
}

nlohmann::json report_to_json(const DetectionCostReport& report) {
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& p : report.sweep) {
    sweep.push_back({{"threshold", p.threshold}, {"p_miss", p.p_miss}, {"p_fa", p.p_fa}, {"cost", p.cost}});
  }
  nlohmann::json topics = nlohmann::json::object();
  for (const auto& [topic, o] : report.per_topic) {
    topics[topic] = {{"miss", o.miss ? 1 : 0},
                     {"fa_count", o.fa_count},
                     {"non_targets", o.non_targets},
                     {"fa_rate", o.fa_rate},
                     {"cost", o.cost}};
  }
  return {{"c_min", report.c_min},
          {"argmin_threshold", report.argmin_threshold},
          {"p_miss", report.p_miss_at_min},
          {"p_fa", report.p_fa_at_min},
          {"constants",
           {{"c_miss", report.constants.c_miss}, {"c_fa", report.constants.c_fa}, {"p_target", report.constants.p_target}}},
          {"per_topic", topics},
          {"sweep", sweep}};
}

nlohmann::json evaluation_to_json(const SkipEvaluation& evaluation) {
  nlohmann::json rounds = nlohmann::json::array();
  for (std::size_t r = 0; r < evaluation.rounds.size(); ++r) {
    auto j = report_to_json(evaluation.rounds[r]);
    j["round"] = r;
    rounds.push_back(std::move(j));
  }
  return {{"rounds", rounds}, {"mean_c_min", evaluation.mean_c_min}};
}

std::map<std::string, double> contributions_from_json(const nlohmann::json& report) {
  std::map<std::string, double> out;
  if (!report.contains("rounds") || !report["rounds"].is_array()) {
    throw std::runtime_error("report has no 'rounds' array");
  }
  for (const auto& round : report["rounds"]) {
    const auto r = round.at("round").get<std::int64_t>();
    for (const auto& [topic, o] : round.at("per_topic").items()) {
      out.emplace(fmt::format("{}/{}", r, topic), o.at("cost").get<double>());
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, const SkipEvaluation& evaluation) {
  out << "round,c_min,threshold,p_miss,p_fa\n";
  for (std::size_t r = 0; r < evaluation.rounds.size(); ++r) {
    const auto& rep = evaluation.rounds[r];
    out << r << ',' << format_double(rep.c_min) << ',' << format_double(rep.argmin_threshold) << ','
        << format_double(rep.p_miss_at_min) << ',' << format_double(rep.p_fa_at_min) << '\n';
  }
}

void write_det_csv(std::ostream& out, const DetectionCostReport& report) {
  out << "p_fa,p_miss\n";
  for (const auto& p : report.sweep) out << format_double(p.p_fa) << ',' << format_double(p.p_miss) << '\n';
}

std::string sha256_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got)) != 1) {
      throw std::runtime_error("sha256 update failed");
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) throw std::runtime_error("sha256 finalisation failed");
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace fsd::io
