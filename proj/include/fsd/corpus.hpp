#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace fsd {

/// One item of the document stream. `position` is the 1-based arrival
/// index assigned after ordering; it is what every detector and the
/// evaluator key on.
struct Document {
  std::string id;
  std::int64_t position = 0;
  std::int64_t timestamp = 0;
  std::vector<std::string> tokens;
  std::optional<std::string> topic;
};

enum class StreamFormat { jsonl, tsv };
enum class StreamOrdering { as_is, by_timestamp };

struct StreamSource {
  StreamFormat format = StreamFormat::jsonl;
  std::filesystem::path path;
  StreamOrdering ordering = StreamOrdering::by_timestamp;
};

struct TokenizerOptions {
  // Empty by default: no stopword removal.
  std::unordered_set<std::string> stopwords;
};

/// Raised for malformed input records. `line()` is 1-based, 0 when the error
/// is not tied to a single line (e.g. a duplicate id detected after sorting).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Lowercases and splits on anything that is not a letter or digit.
/// Non-ASCII code points count as letters unless they fall in a Unicode
/// whitespace or punctuation block. Duplicates are kept.
std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {});

/// A raw record before tokenization and position assignment.
struct RawRecord {
  std::size_t line = 0;
  std::string id;
  std::int64_t timestamp = 0;
  std::string text;
  std::optional<std::string> topic;
};

/// Pull-based reader over a jsonl/tsv file. Blank lines are ignored.
class RecordReader {
 public:
  RecordReader(const std::filesystem::path& path, StreamFormat format);

  /// Next record in file order, or nullopt at end of file.
  std::optional<RawRecord> next();

 private:
  std::ifstream in_;
  StreamFormat format_;
  std::size_t line_ = 0;
};

RawRecord parse_jsonl_record(std::string_view line, std::size_t line_no);
RawRecord parse_tsv_record(std::string_view line, std::size_t line_no);

/// Orders, tokenizes and numbers raw records. Records whose tokenization is
/// empty are dropped with a warning and do not consume a position.
std::vector<Document> assemble_stream(std::vector<RawRecord> records, StreamOrdering ordering,
                                      const TokenizerOptions& options = {});

std::vector<Document> read_stream(const StreamSource& source, const TokenizerOptions& options = {});

StreamFormat parse_stream_format(std::string_view name);

}  // namespace fsd
