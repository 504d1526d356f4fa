// fsd: first story detection experiments from the command line.
//
//   fsd synth     --kind planted --seed 7 --out data/
//   fsd detect    --input data/corpus.jsonl --detector exhaustive --norms frozen --out run/
//   fsd eval      --novelty run/novelty.csv --truth data/truth.jsonl --out run/eval/
//   fsd compare   --a run_a/eval/report.json --b run_b/eval/report.json
//   fsd trace-idf --input data/corpus.jsonl --every 1000 --out idf.csv
//   fsd tune      --input data/corpus.jsonl --truth data/truth.jsonl --grid "delta=0,0.036;gamma=0.61" --out grid.csv
//   fsd matrix    --input data/corpus.jsonl --truth data/truth.jsonl --out matrix/
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fsd/corpus.hpp"
#include "fsd/eval.hpp"
#include "fsd/io.hpp"
#include "fsd/pipeline.hpp"
#include "fsd/synthetic.hpp"
#include "fsd/term_stats.hpp"
#include "fsd/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StreamArgs {
  std::string input;
  std::string format = "jsonl";
  std::string ordering = "by_timestamp";
  std::string stopwords;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--input", input, "Document stream (jsonl or tsv)")->required();
    cmd.add_option("--format", format, "Stream format")->check(CLI::IsMember({"jsonl", "tsv"}));
    cmd.add_option("--ordering", ordering, "Stream ordering")->check(CLI::IsMember({"as_is", "by_timestamp"}));
    cmd.add_option("--stopwords", stopwords, "File with one stopword per line (default: none)");
  }

  std::vector<fsd::Document> load() const {
    fsd::StreamSource source;
    source.path = input;
    source.format = fsd::parse_stream_format(format);
    source.ordering = ordering == "as_is" ? fsd::StreamOrdering::as_is : fsd::StreamOrdering::by_timestamp;
    fsd::TokenizerOptions options;
    if (!stopwords.empty()) {
      std::ifstream in(stopwords);
      if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", stopwords));
      std::string word;
      while (in >> word) {
        for (auto& tok : fsd::tokenize(word)) options.stopwords.insert(tok);
      }
    }
    return fsd::read_stream(source, options);
  }

  json manifest_inputs() const {
    json inputs = json::array();
    inputs.push_back({{"role", "stream"}, {"path", input}, {"sha256", fsd::io::sha256_file(input)}});
    if (!stopwords.empty()) {
      inputs.push_back({{"role", "stopwords"}, {"path", stopwords}, {"sha256", fsd::io::sha256_file(stopwords)}});
    }
    return inputs;
  }

  json to_json() const {
    return {{"input", input}, {"format", format}, {"ordering", ordering}, {"stopwords", stopwords}};
  }
};

struct DetectorArgs {
  std::string detector = "exhaustive";
  std::string norms = "fresh";
  std::string bias = "none";
  std::string bias_form = "normalized";
  double delta = 0.036;
  double gamma = 0.61;
  std::int64_t window = 2000;
  int lsh_bits = 13;
  int lsh_tables = 70;
  double lsh_threshold = 0.6;
  bool no_early_stop = false;
  std::uint64_t seed = 0;
  bool sublinear_tf = false;

  void add_to(CLI::App& cmd, bool with_bias) {
    cmd.add_option("--detector", detector, "exhaustive | recency | lsh")
        ->check(CLI::IsMember({"exhaustive", "recency", "lsh"}));
    cmd.add_option("--norms", norms, "fresh | frozen")->check(CLI::IsMember({"fresh", "frozen"}));
    if (with_bias) {
      cmd.add_option("--bias", bias, "none | optimized")->check(CLI::IsMember({"none", "optimized"}));
      cmd.add_option("--delta", delta, "Distance bias weight");
      cmd.add_option("--gamma", gamma, "Distance bias similarity threshold");
    }
    cmd.add_option("--bias-form", bias_form, "normalized | literal")->check(CLI::IsMember({"normalized", "literal"}));
    cmd.add_option("--window", window, "Window size for recency and lsh detectors");
    cmd.add_option("--lsh-bits", lsh_bits, "Signature bits per table");
    cmd.add_option("--lsh-tables", lsh_tables, "Number of hash tables");
    cmd.add_option("--lsh-threshold", lsh_threshold, "Similarity that ends the candidate scan");
    cmd.add_flag("--no-early-stop", no_early_stop, "Score every lsh candidate");
    cmd.add_option("--seed", seed, "Hyperplane seed");
    cmd.add_flag("--sublinear-tf", sublinear_tf, "Use 1 + ln(tf)");
  }

  fsd::DetectorConfig config() const {
    fsd::DetectorConfig c;
    c.kind = fsd::parse_detector_kind(detector);
    c.norms = fsd::parse_norm_policy(norms);
    if (bias == "optimized") c.bias = fsd::BiasParams{delta, gamma};
    c.bias_form = fsd::parse_bias_form(bias_form);
    c.recency_window = window;
    c.lsh.window_size = window;
    c.lsh.hyperplanes_per_table = lsh_bits;
    c.lsh.tables = lsh_tables;
    c.lsh.closeness_threshold = lsh_threshold;
    c.lsh.early_stop = !no_early_stop;
    c.lsh.rng_seed = seed;
    c.vectorize.sublinear_tf = sublinear_tf;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }

  json to_json() const {
    return {{"detector", detector},   {"norms", norms},           {"bias", bias},
            {"bias_form", bias_form}, {"delta", delta},           {"gamma", gamma},
            {"window", window},       {"lsh_bits", lsh_bits},     {"lsh_tables", lsh_tables},
            {"lsh_threshold", lsh_threshold}, {"early_stop", !no_early_stop}, {"seed", seed},
            {"sublinear_tf", sublinear_tf}};
  }
};

struct CostArgs {
  fsd::CostConstants constants;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--c-miss", constants.c_miss, "Cost of a miss");
    cmd.add_option("--c-fa", constants.c_fa, "Cost of a false alarm");
    cmd.add_option("--p-target", constants.p_target, "Prior probability of a target");
  }

  json to_json() const {
    return {{"c_miss", constants.c_miss}, {"c_fa", constants.c_fa}, {"p_target", constants.p_target}};
  }
};

void write_manifest(const fs::path& path, const std::string& command, json config, json inputs) {
  json manifest = {{"tool", "fsd"}, {"version", kVersion}, {"command", command},
                   {"config", std::move(config)}, {"inputs", std::move(inputs)}};
  fsd::io::write_file(path, manifest.dump(2) + "\n");
}

json truth_input(const std::string& path) {
  return {{"role", "truth"}, {"path", path}, {"sha256", fsd::io::sha256_file(path)}};
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

// ---- detect -----------------------------------------------------------------

struct DetectCommand {
  StreamArgs stream;
  DetectorArgs detector;
  std::string out;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("detect", "Score every document of a stream for novelty");
    stream.add_to(*cmd);
    detector.add_to(*cmd, true);
    cmd->add_option("--out", out, "Output directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto config = detector.config();
    const auto docs = stream.load();
    const auto records = fsd::run_detector(docs, config);
    const fs::path dir(out);
    fsd::io::write_file(dir / "novelty.csv", render([&](std::ostream& o) { fsd::io::write_novelty_csv(o, records); }));
    json cfg = detector.to_json();
    cfg["stream"] = stream.to_json();
    cfg["documents"] = docs.size();
    write_manifest(dir / "manifest.json", "detect", cfg, stream.manifest_inputs());
    spdlog::info("scored {} documents -> {}", records.size(), (dir / "novelty.csv").string());
  }
};

// ---- eval -------------------------------------------------------------------

struct EvalCommand {
  std::string novelty;
  std::string truth;
  int skip_rounds = 3;
  CostArgs costs;
  std::string out;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Detection cost of a novelty run, with skip evaluation");
    cmd->add_option("--novelty", novelty, "Novelty CSV written by detect")->required();
    cmd->add_option("--truth", truth, "Ground truth JSONL")->required();
    cmd->add_option("--skip-rounds", skip_rounds, "Skip evaluation rounds after round 0")->check(CLI::NonNegativeNumber);
    costs.add_to(*cmd);
    cmd->add_option("--out", out, "Output directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto records = fsd::io::read_novelty_csv(fs::path(novelty));
    const auto gt = fsd::io::read_truth_jsonl(fs::path(truth));
    const auto evaluation = fsd::skip_evaluate(records, gt, skip_rounds, costs.constants);
    const fs::path dir(out);
    fsd::io::write_file(dir / "report.json", fsd::io::evaluation_to_json(evaluation).dump(2) + "\n");
    fsd::io::write_file(dir / "summary.csv", render([&](std::ostream& o) { fsd::io::write_summary_csv(o, evaluation); }));
    for (std::size_t r = 0; r < evaluation.rounds.size(); ++r) {
      fsd::io::write_file(dir / fmt::format("det_round{}.csv", r),
                          render([&](std::ostream& o) { fsd::io::write_det_csv(o, evaluation.rounds[r]); }));
    }
    json cfg = {{"skip_rounds", skip_rounds}, {"costs", costs.to_json()}};
    json inputs = json::array({json{{"role", "novelty"}, {"path", novelty}, {"sha256", fsd::io::sha256_file(novelty)}},
                               truth_input(truth)});
    write_manifest(dir / "manifest.json", "eval", cfg, inputs);
    for (std::size_t r = 0; r < evaluation.rounds.size(); ++r) {
      std::cout << fmt::format("round {}: c_min={:.4f}\n", r, evaluation.rounds[r].c_min);
    }
    std::cout << fmt::format("mean c_min={:.4f}\n", evaluation.mean_c_min);
  }
};

// ---- trace-idf --------------------------------------------------------------

struct TraceIdfCommand {
  StreamArgs stream;
  std::int64_t every = 1000;
  std::string out;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("trace-idf", "Mean idf of the dictionary as the stream grows");
    stream.add_to(*cmd);
    cmd->add_option("--every", every, "Sampling interval in documents")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "Output CSV")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto docs = stream.load();
    const auto trace = fsd::trace_mean_idf(docs, every);
    fsd::io::write_file(out, render([&](std::ostream& o) { fsd::io::write_idf_trace_csv(o, trace); }));
    json cfg = {{"every", every}, {"stream", stream.to_json()}, {"documents", docs.size()}};
    write_manifest(out + ".manifest.json", "trace-idf", cfg, stream.manifest_inputs());
  }
};

// ---- tune -------------------------------------------------------------------

struct TuneCommand {
  StreamArgs stream;
  DetectorArgs detector;
  std::string truth;
  std::string grid = "delta=0,0.012,0.024,0.036,0.048;gamma=0.5,0.55,0.61,0.7";
  int skip_rounds = 3;
  unsigned threads = 0;
  CostArgs costs;
  std::string out;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("tune", "Grid search over the distance bias weights");
    stream.add_to(*cmd);
    detector.add_to(*cmd, false);
    cmd->add_option("--truth", truth, "Ground truth JSONL")->required();
    cmd->add_option("--grid", grid, "delta=v1,v2,...;gamma=v1,...[;objective=c_min_round0|c_min_skip_mean]");
    cmd->add_option("--skip-rounds", skip_rounds, "Rounds for the c_min_skip_mean objective")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    costs.add_to(*cmd);
    cmd->add_option("--out", out, "Output CSV (delta,gamma,c_min)")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    fsd::GridSpec spec;
    try {
      spec = fsd::parse_grid_spec(grid);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    auto base = detector;
    base.bias = "optimized";
    fsd::TuneOptions options;
    options.detector = base.config();
    options.skip_rounds = skip_rounds;
    options.constants = costs.constants;
    options.threads = threads;

    const auto docs = stream.load();
    const auto gt = fsd::io::read_truth_jsonl(fs::path(truth));
    const auto result = fsd::grid_search(docs, gt, spec, options);
    fsd::io::write_file(out, render([&](std::ostream& o) { fsd::io::write_grid_csv(o, result.table); }));
    json cfg = detector.to_json();
    cfg.erase("bias");
    cfg.erase("delta");
    cfg.erase("gamma");
    cfg["grid"] = grid;
    cfg["objective"] = fsd::to_string(spec.objective);
    cfg["skip_rounds"] = skip_rounds;
    cfg["costs"] = costs.to_json();
    cfg["stream"] = stream.to_json();
    auto inputs = stream.manifest_inputs();
    inputs.push_back(truth_input(truth));
    write_manifest(out + ".manifest.json", "tune", cfg, inputs);
    std::cout << fmt::format("best delta={} gamma={} objective={:.4f}\n", fsd::io::format_double(result.best.delta),
                             fsd::io::format_double(result.best.gamma), result.objective);
  }
};

// ---- compare ----------------------------------------------------------------

struct CompareCommand {
  std::string a;
  std::string b;
  int permutations = 10000;
  std::uint64_t seed = 0;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("compare", "Paired randomization test between two eval reports");
    cmd->add_option("--a", a, "report.json of run A")->required();
    cmd->add_option("--b", b, "report.json of run B")->required();
    cmd->add_option("--permutations", permutations, "Sign flips to sample")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Seed for the sign flips");
    cmd->callback([this] { run(); });
  }

  static json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    return json::parse(in);
  }

  void run() const {
    const auto ra = load(a);
    const auto rb = load(b);
    const auto ca = fsd::io::contributions_from_json(ra);
    const auto cb = fsd::io::contributions_from_json(rb);
    const double p = fsd::paired_significance(ca, cb, permutations, seed);
    std::cout << fmt::format("mean_c_min a={:.6f} b={:.6f}\n", ra.at("mean_c_min").get<double>(),
                             rb.at("mean_c_min").get<double>());
    std::cout << "p_value=" << fsd::io::format_double(p) << "\n";
  }
};

// ---- synth ------------------------------------------------------------------

struct SynthCommand {
  std::string kind = "planted";
  std::uint64_t seed = 1;
  std::int64_t documents = 0;
  std::string out;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "Write a synthetic corpus (and truth) for experiments");
    cmd->add_option("--kind", kind, "planted | zipf")->check(CLI::IsMember({"planted", "zipf"}));
    cmd->add_option("--seed", seed, "Generator seed");
    cmd->add_option("--documents", documents, "Stream length (0 = generator default)");
    cmd->add_option("--out", out, "Output directory")->required();
    cmd->callback([this] { run(); });
  }

  static void write_corpus(const fs::path& path, const std::vector<fsd::Document>& docs) {
    fsd::io::write_file(path, render([&](std::ostream& o) {
                          for (const auto& d : docs) {
                            std::string text;
                            for (const auto& t : d.tokens) {
                              if (!text.empty()) text += ' ';
                              text += t;
                            }
                            json rec = {{"id", d.id}, {"timestamp", d.timestamp}, {"text", text}};
                            if (d.topic) rec["topic"] = *d.topic;
                            o << rec.dump() << '\n';
                          }
                        }));
  }

  void run() const {
    const fs::path dir(out);
    json cfg = {{"kind", kind}, {"seed", seed}};
    if (kind == "planted") {
      fsd::synthetic::PlantedCorpusOptions options;
      options.seed = seed;
      if (documents > 0) options.documents = documents;
      const auto corpus = fsd::synthetic::planted_topic_corpus(options);
      write_corpus(dir / "corpus.jsonl", corpus.documents);
      fsd::io::write_file(dir / "truth.jsonl", render([&](std::ostream& o) { fsd::io::write_truth_jsonl(o, corpus.truth); }));
      cfg["documents"] = options.documents;
    } else {
      fsd::synthetic::ZipfStreamOptions options;
      options.seed = seed;
      if (documents > 0) options.documents = documents;
      write_corpus(dir / "corpus.jsonl", fsd::synthetic::zipf_stream(options));
      cfg["documents"] = options.documents;
    }
    write_manifest(dir / "manifest.json", "synth", cfg, json::array());
  }
};

// ---- matrix -----------------------------------------------------------------

struct MatrixCommand {
  StreamArgs stream;
  DetectorArgs detector;
  std::string truth;
  int skip_rounds = 3;
  CostArgs costs;
  std::string out;

  void add_to(CLI::App& app) {
    auto* cmd = app.add_subcommand("matrix", "Temporal bias comparison: no TB / recency / distance / optimized");
    stream.add_to(*cmd);
    detector.add_to(*cmd, true);
    cmd->add_option("--truth", truth, "Ground truth JSONL")->required();
    cmd->add_option("--skip-rounds", skip_rounds, "Skip evaluation rounds")->check(CLI::NonNegativeNumber);
    costs.add_to(*cmd);
    cmd->add_option("--out", out, "Output directory")->required();
    cmd->callback([this] { run(); });
  }

  void run() const {
    const auto docs = stream.load();
    const auto gt = fsd::io::read_truth_jsonl(fs::path(truth));
    const fs::path dir(out);

    struct Mode {
      std::string name;
      fsd::DetectorConfig config;
    };
    std::ostringstream table;
    table << "system,mode,c_min,mean_c_min,diff_pct,p_value\n";
    for (const std::string system : {"exhaustive", "lsh"}) {
      auto base = detector;
      base.detector = system;
      base.norms = "fresh";
      base.bias = "none";
      std::vector<Mode> modes;
      modes.push_back({"no_tb", base.config()});
      {
        auto m = base;
        m.detector = "recency";
        modes.push_back({"tb_recency", m.config()});
      }
      {
        auto m = base;
        m.norms = "frozen";
        modes.push_back({"tb_distance", m.config()});
      }
      {
        auto m = base;
        m.bias = "optimized";
        modes.push_back({"tb_optimized", m.config()});
      }

      std::map<std::string, double> baseline;
      double baseline_mean = 0.0;
      for (const auto& mode : modes) {
        const auto records = fsd::run_detector(docs, mode.config);
        const auto evaluation = fsd::skip_evaluate(records, gt, skip_rounds, costs.constants);
        const auto sub = dir / system / mode.name;
        fsd::io::write_file(sub / "novelty.csv", render([&](std::ostream& o) { fsd::io::write_novelty_csv(o, records); }));
        fsd::io::write_file(sub / "report.json", fsd::io::evaluation_to_json(evaluation).dump(2) + "\n");
        const auto contributions = fsd::cost_contributions(evaluation);
        std::string diff = "";
        std::string p = "";
        if (mode.name == "no_tb") {
          baseline = contributions;
          baseline_mean = evaluation.mean_c_min;
        } else {
          diff = fmt::format("{:.2f}", 100.0 * (evaluation.mean_c_min - baseline_mean) / baseline_mean);
          try {
            p = fsd::io::format_double(fsd::paired_significance(contributions, baseline));
          } catch (const std::invalid_argument&) {
            p = "";
          }
        }
        table << system << ',' << mode.name << ',' << fsd::io::format_double(evaluation.rounds.front().c_min) << ','
              << fsd::io::format_double(evaluation.mean_c_min) << ',' << diff << ',' << p << '\n';
      }
    }
    fsd::io::write_file(dir / "matrix.csv", table.str());
    json cfg = detector.to_json();
    cfg["skip_rounds"] = skip_rounds;
    cfg["costs"] = costs.to_json();
    cfg["stream"] = stream.to_json();
    auto inputs = stream.manifest_inputs();
    inputs.push_back(truth_input(truth));
    write_manifest(dir / "manifest.json", "matrix", cfg, inputs);
    std::cout << table.str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("fsd"));
  spdlog::set_pattern("%^%l%$: %v");

  CLI::App app{"First story detection with temporal bias strategies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  DetectCommand detect;
  EvalCommand eval;
  TraceIdfCommand trace;
  TuneCommand tune;
  CompareCommand compare;
  SynthCommand synth;
  MatrixCommand matrix;
  detect.add_to(app);
  eval.add_to(app);
  trace.add_to(app);
  tune.add_to(app);
  compare.add_to(app);
  synth.add_to(app);
  matrix.add_to(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
