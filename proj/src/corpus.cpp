#include "veritext/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "veritext/rng.hpp"
#include "veritext/stopwords.hpp"

namespace veritext {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  // UTF-8 BOM from spreadsheet exports
  if (text.size() >= 3 && text[0] == '\xef' && text[1] == '\xbb' &&
      text[2] == '\xbf') {
    text.erase(0, 3);
  }
  return text;
}

// One parsed record plus the 1-based line number of its first physical line.
struct Record {
  std::vector<std::string> fields;
  size_t line = 0;
};

// RFC-4180-style CSV: quoted fields may contain commas, quotes ("" escape)
// and raw newlines. Tweets contain all three.
std::vector<Record> parse_csv(const std::string& text, const std::string& path) {
  std::vector<Record> records;
  Record rec;
  rec.line = 1;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  size_t line = 1;
  size_t i = 0;
  const size_t n = text.size();
  bool any = false;

  auto end_field = [&]() {
    rec.fields.push_back(field);
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&]() {
    bool blank = rec.fields.empty() && field.empty() && !any && !field_was_quoted;
    end_field();
    if (!blank) records.push_back(std::move(rec));
    rec = Record{};
    rec.line = line;
    any = false;
  };

  while (i < n) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
        ++i;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_was_quoted) {
          in_quotes = true;
          field_was_quoted = true;
        } else {
          field += c;  // stray quote inside an unquoted field
        }
        ++i;
        break;
      case ',':
        end_field();
        any = true;
        ++i;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') {
          ++i;
        } else {
          ++i;
          ++line;
          end_record();
        }
        break;
      case '\n':
        ++i;
        ++line;
        end_record();
        break;
      default:
        field += c;
        any = true;
        ++i;
    }
  }
  if (in_quotes) throw ParseError(path + ": unterminated quoted field");
  if (any || !field.empty() || !rec.fields.empty()) end_record();
  return records;
}

std::vector<Record> parse_tsv(const std::string& text, const std::string&) {
  std::vector<Record> records;
  size_t line = 0;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    Record rec;
    rec.line = line;
    size_t start = 0;
    while (true) {
      size_t tab = raw.find('\t', start);
      if (tab == std::string::npos) {
        rec.fields.push_back(raw.substr(start));
        break;
      }
      rec.fields.push_back(raw.substr(start, tab - start));
      start = tab + 1;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Record> parse_table(const std::string& path, FileFormat format) {
  std::string text = read_file(path);
  return format == FileFormat::Csv ? parse_csv(text, path)
                                   : parse_tsv(text, path);
}

struct Columns {
  int id = -1;
  int text = -1;
  int label = -1;
  size_t width = 0;
};

Columns find_columns(const Record& header, const std::string& path,
                     bool need_label) {
  Columns cols;
  cols.width = header.fields.size();
  for (size_t j = 0; j < header.fields.size(); ++j) {
    std::string name = lower_ascii(trim(header.fields[j]));
    if (name == "id") cols.id = static_cast<int>(j);
    else if (name == "tweet") cols.text = static_cast<int>(j);
    else if (name == "label") cols.label = static_cast<int>(j);
  }
  if (cols.id < 0 || cols.text < 0)
    throw ParseError(path + ": header must name `id` and `tweet` columns");
  if (need_label && cols.label < 0)
    throw ParseError(path + ": header must name a `label` column");
  return cols;
}

}  // namespace

const char* to_string(Label label) {
  return label == Label::Fake ? "fake" : "real";
}

const char* to_string(Pipeline pipeline) {
  return pipeline == Pipeline::Classic ? "classic" : "raw";
}

Label parse_label(const std::string& value) {
  std::string v = lower_ascii(trim(value));
  if (v == "fake") return Label::Fake;
  if (v == "real") return Label::Real;
  throw LabelError("unknown label value: '" + value + "'");
}

Pipeline parse_pipeline(const std::string& value) {
  std::string v = lower_ascii(trim(value));
  if (v == "classic") return Pipeline::Classic;
  if (v == "raw") return Pipeline::Raw;
  throw ConfigError("unknown pipeline: '" + value + "' (expected raw|classic)");
}

size_t Corpus::count(Label label) const {
  size_t n = 0;
  for (const LabeledPost& p : posts) {
    if (p.label == label) ++n;
  }
  return n;
}

FileFormat format_from_path(const std::string& path) {
  if (path.size() >= 4) {
    std::string ext = lower_ascii(path.substr(path.size() - 4));
    if (ext == ".tsv") return FileFormat::Tsv;
  }
  return FileFormat::Csv;
}

Corpus load_dataset(const std::string& path, FileFormat format,
                    const std::string& split_name) {
  std::vector<Record> records = parse_table(path, format);
  if (records.empty()) throw ParseError(path + ": missing header row");
  Columns cols = find_columns(records[0], path, /*need_label=*/true);

  Corpus corpus;
  corpus.name = split_name;
  std::unordered_set<std::string> seen;
  for (size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    if (rec.fields.size() != cols.width) {
      throw ParseError(path + ": line " + std::to_string(rec.line) + ": expected " +
                       std::to_string(cols.width) + " fields, got " +
                       std::to_string(rec.fields.size()));
    }
    LabeledPost post;
    post.id = trim(rec.fields[cols.id]);
    post.text = rec.fields[cols.text];
    post.label = parse_label(rec.fields[cols.label]);
    if (trim(post.text).empty()) {
      throw ParseError(path + ": line " + std::to_string(rec.line) +
                       ": empty text");
    }
    if (!seen.insert(post.id).second) {
      throw ParseError(path + ": line " + std::to_string(rec.line) +
                       ": duplicate id '" + post.id + "'");
    }
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

std::vector<RawRow> load_posts(const std::string& path, FileFormat format) {
  std::vector<Record> records = parse_table(path, format);
  if (records.empty()) throw ParseError(path + ": missing header row");
  Columns cols = find_columns(records[0], path, /*need_label=*/false);

  std::vector<RawRow> rows;
  for (size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    if (rec.fields.size() != cols.width) {
      throw ParseError(path + ": line " + std::to_string(rec.line) + ": expected " +
                       std::to_string(cols.width) + " fields, got " +
                       std::to_string(rec.fields.size()));
    }
    rows.push_back({trim(rec.fields[cols.id]), rec.fields[cols.text]});
  }
  return rows;
}

TokenSequence preprocess(const std::string& text, Pipeline pipeline) {
  TokenSequence seq;
  seq.pipeline = pipeline;
  if (pipeline == Pipeline::Raw) {
    std::string token;
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!token.empty()) {
          seq.tokens.push_back(std::move(token));
          token.clear();
        }
      } else {
        token += c;
      }
    }
    if (!token.empty()) seq.tokens.push_back(std::move(token));
    return seq;
  }

  // CLASSIC: lowercase, then every byte outside [a-z0-9#@'] becomes a space.
  // Multi-byte UTF-8 sequences fall outside the retained alphabet and vanish.
  std::string token;
  auto flush = [&]() {
    if (!token.empty() && !is_stopword(token)) seq.tokens.push_back(token);
    token.clear();
  };
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    bool keep = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '#' ||
                c == '@' || c == '\'';
    if (keep) {
      token += c;
    } else {
      flush();
    }
  }
  flush();
  return seq;
}

CorpusStats corpus_stats(const Corpus& corpus, Pipeline pipeline) {
  if (corpus.posts.empty())
    throw DomainError("corpus_stats: corpus '" + corpus.name + "' is empty");
  CorpusStats stats;
  stats.sample_count = corpus.posts.size();
  stats.fake_count = corpus.count(Label::Fake);
  stats.real_count = corpus.count(Label::Real);
  size_t total = 0;
  stats.min_words = static_cast<size_t>(-1);
  for (const LabeledPost& post : corpus.posts) {
    size_t words = preprocess(post.text, pipeline).tokens.size();
    total += words;
    stats.max_words = std::max(stats.max_words, words);
    stats.min_words = std::min(stats.min_words, words);
  }
  stats.avg_words =
      static_cast<double>(total) / static_cast<double>(stats.sample_count);
  return stats;
}

std::pair<Corpus, Corpus> combine_and_split(const Corpus& train,
                                            const Corpus& validation,
                                            const SplitSpec& spec) {
  if (!(spec.ratio > 0.0 && spec.ratio < 1.0))
    throw DomainError("split ratio must be strictly between 0 and 1");

  std::vector<LabeledPost> pooled;
  pooled.reserve(train.size() + validation.size());
  std::unordered_set<std::string> seen;
  for (const Corpus* src : {&train, &validation}) {
    for (const LabeledPost& p : src->posts) {
      LabeledPost q = p;
      q.id = src->name + ":" + p.id;
      if (!seen.insert(q.id).second)
        throw DomainError("combine_and_split: duplicate id after namespacing: " +
                          q.id);
      pooled.push_back(std::move(q));
    }
  }

  Corpus head, tail;
  head.name = "train";
  tail.name = "validation";
  for (Label label : {Label::Fake, Label::Real}) {
    std::vector<LabeledPost> group;
    for (const LabeledPost& p : pooled) {
      if (p.label == label) group.push_back(p);
    }
    Rng rng(mix_seed(spec.seed, static_cast<uint64_t>(label)));
    rng.shuffle(group);
    size_t take = static_cast<size_t>(
        std::floor(spec.ratio * static_cast<double>(group.size())));
    if (take == 0 || take == group.size()) {
      throw DomainError(std::string("combine_and_split: ratio leaves an empty "
                                    "side for label ") +
                        to_string(label));
    }
    for (size_t i = 0; i < group.size(); ++i) {
      (i < take ? head : tail).posts.push_back(std::move(group[i]));
    }
  }
  return {std::move(head), std::move(tail)};
}

}  // namespace veritext
