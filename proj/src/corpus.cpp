#include "fsd/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace fsd {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, what) : what), line_(line) {}

namespace {

// Decodes one UTF-8 sequence starting at text[i]; advances i. Invalid bytes
// decode to U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view text, std::size_t& i) {
  const auto lead = static_cast<unsigned char>(text[i]);
  if (lead < 0x80) {
    ++i;
    return lead;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + len > text.size()) {
    ++i;
    return 0xFFFD;
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto cont = static_cast<unsigned char>(text[i + k]);
    if ((cont & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_separator(char32_t cp) {
  if (cp < 0x80) {
    return !((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9'));
  }
  // Latin-1 punctuation and symbols, multiplication/division signs.
  if (cp <= 0xBF || cp == 0xD7 || cp == 0xF7) return true;
  // General Punctuation, Supplemental Punctuation, CJK Symbols and Punctuation.
  if ((cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x2E00 && cp <= 0x2E7F) ||
      (cp >= 0x3000 && cp <= 0x303F))
    return true;
  // Fullwidth ASCII punctuation.
  if ((cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
      (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65))
    return true;
  return cp == 0x1680 || cp == 0xFEFF || cp == 0xFFFD;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  // Latin-1 uppercase block (À..Þ minus ×).
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Greek and Cyrillic basic uppercase ranges.
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

std::int64_t parse_timestamp(std::string_view field, std::size_t line_no) {
  std::int64_t value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(line_no, fmt::format("invalid timestamp '{}'", field));
  }
  return value;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (!options.stopwords.contains(current)) tokens.push_back(std::move(current));
      current.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = decode_utf8(text, i);
    if (is_separator(cp)) {
      flush();
    } else {
      append_utf8(current, to_lower(cp));
    }
  }
  flush();
  return tokens;
}

RawRecord parse_jsonl_record(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, fmt::format("invalid JSON: {}", e.what()));
  }
  if (!obj.is_object()) throw ParseError(line_no, "record is not a JSON object");

  RawRecord rec;
  rec.line = line_no;
  const auto id = obj.find("id");
  if (id == obj.end()) throw ParseError(line_no, "missing required field 'id'");
  if (id->is_string()) {
    rec.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    rec.id = std::to_string(id->get<std::int64_t>());
  } else {
    throw ParseError(line_no, "field 'id' must be a string or integer");
  }

  const auto ts = obj.find("timestamp");
  if (ts == obj.end()) throw ParseError(line_no, "missing required field 'timestamp'");
  if (ts->is_number_integer()) {
    rec.timestamp = ts->get<std::int64_t>();
  } else if (ts->is_string()) {
    rec.timestamp = parse_timestamp(ts->get_ref<const std::string&>(), line_no);
  } else {
    throw ParseError(line_no, "field 'timestamp' must be an integer");
  }

  const auto text = obj.find("text");
  if (text == obj.end()) throw ParseError(line_no, "missing required field 'text'");
  if (!text->is_string()) throw ParseError(line_no, "field 'text' must be a string");
  rec.text = text->get<std::string>();

  const auto topic = obj.find("topic");
  if (topic != obj.end() && !topic->is_null()) {
    if (!topic->is_string()) throw ParseError(line_no, "field 'topic' must be a string");
    if (!topic->get_ref<const std::string&>().empty()) rec.topic = topic->get<std::string>();
  }
  return rec;
}

RawRecord parse_tsv_record(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  // The text column is last and may itself contain tabs.
  while (cols.size() < 3) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) break;
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (cols.size() < 3) {
    throw ParseError(line_no, fmt::format("expected 4 tab-separated columns, found {}", cols.size() + 1));
  }
  cols.push_back(line.substr(start));

  RawRecord rec;
  rec.line = line_no;
  if (cols[0].empty()) throw ParseError(line_no, "empty id column");
  rec.id = std::string(cols[0]);
  rec.timestamp = parse_timestamp(cols[1], line_no);
  if (!cols[2].empty()) rec.topic = std::string(cols[2]);
  rec.text = std::string(cols[3]);
  return rec;
}

RecordReader::RecordReader(const std::filesystem::path& path, StreamFormat format)
    : in_(path), format_(format) {
  if (!in_) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
}

std::optional<RawRecord> RecordReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    const bool blank = std::all_of(line.begin(), line.end(), [](char c) {
      return c == ' ' || c == '\t' || c == '\r';
    });
    if (blank) continue;
    return format_ == StreamFormat::jsonl ? parse_jsonl_record(line, line_) : parse_tsv_record(line, line_);
  }
  return std::nullopt;
}

std::vector<Document> assemble_stream(std::vector<RawRecord> records, StreamOrdering ordering,
                                      const TokenizerOptions& options) {
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    if (!seen.insert(rec.id).second) {
      throw ParseError(rec.line, fmt::format("duplicate document id '{}'", rec.id));
    }
  }

  if (ordering == StreamOrdering::by_timestamp) {
    std::stable_sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.id < b.id;
    });
  }

  std::vector<Document> docs;
  docs.reserve(records.size());
  for (auto& rec : records) {
    auto tokens = tokenize(rec.text, options);
    if (tokens.empty()) {
      spdlog::warn("skipping document '{}' (line {}): no tokens after tokenization", rec.id, rec.line);
      continue;
    }
    Document doc;
    doc.id = std::move(rec.id);
    doc.position = static_cast<std::int64_t>(docs.size()) + 1;
    doc.timestamp = rec.timestamp;
    doc.tokens = std::move(tokens);
    doc.topic = std::move(rec.topic);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> read_stream(const StreamSource& source, const TokenizerOptions& options) {
  RecordReader reader(source.path, source.format);
  std::vector<RawRecord> records;
  while (auto rec = reader.next()) records.push_back(std::move(*rec));
  return assemble_stream(std::move(records), source.ordering, options);
}

StreamFormat parse_stream_format(std::string_view name) {
  if (name == "jsonl") return StreamFormat::jsonl;
  if (name == "tsv") return StreamFormat::tsv;
  throw std::invalid_argument(fmt::format("unknown stream format '{}'", name));
}

}  // namespace fsd
