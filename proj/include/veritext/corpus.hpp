#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "veritext/errors.hpp"

namespace veritext {

// FAKE is the positive class everywhere in this project.
enum class Label : uint8_t { Fake = 0, Real = 1 };

enum class Pipeline : uint8_t { Classic = 0, Raw = 1 };

const char* to_string(Label label);
const char* to_string(Pipeline pipeline);

/// Case-insensitive "fake"/"real" (surrounding whitespace ignored).
/// Throws LabelError on anything else.
Label parse_label(const std::string& value);

/// "classic" or "raw"; throws ConfigError otherwise.
Pipeline parse_pipeline(const std::string& value);

struct LabeledPost {
  std::string id;
  std::string text;  // raw UTF-8, non-empty after trimming
  Label label = Label::Real;
};

struct Corpus {
  std::string name;  // split tag: train / validation / test
  std::vector<LabeledPost> posts;

  size_t size() const { return posts.size(); }
  size_t count(Label label) const;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  Pipeline pipeline = Pipeline::Raw;
};

struct CorpusStats {
  size_t sample_count = 0;
  size_t fake_count = 0;
  size_t real_count = 0;
  double avg_words = 0.0;
  size_t max_words = 0;
  size_t min_words = 0;
};

struct SplitSpec {
  double ratio = 0.9;   // fraction of each label sent to the first output
  uint64_t seed = 42;
};

enum class FileFormat : uint8_t { Tsv, Csv };

/// ".tsv" -> Tsv, anything else -> Csv.
FileFormat format_from_path(const std::string& path);

/// Load a labeled dataset. The header row must name `id`, `tweet` and `label`
/// columns (case-insensitive; extra columns are ignored). Row order is
/// preserved. Throws IoError if the file cannot be read, ParseError on a row
/// with the wrong field count, duplicate id or empty text, LabelError on an
/// unknown label value.
Corpus load_dataset(const std::string& path, FileFormat format,
                    const std::string& split_name = "");

/// Prediction input: `id` and `tweet` columns required, `label` optional and
/// ignored. Empty text is legal here (each model has a degenerate-input rule).
struct RawRow {
  std::string id;
  std::string text;
};
std::vector<RawRow> load_posts(const std::string& path, FileFormat format);

/// CLASSIC: lowercase, replace every byte outside [a-z0-9#@'] with a space,
/// split on whitespace, drop stopwords from the shipped list.
/// RAW: split on whitespace only, no case folding.
TokenSequence preprocess(const std::string& text, Pipeline pipeline);

/// Per-post word counts under the given pipeline. Throws DomainError on an
/// empty corpus.
CorpusStats corpus_stats(const Corpus& corpus, Pipeline pipeline);

/// Pool two corpora and re-split stratified by label. Ids are namespaced as
/// "<source-name>:<id>" so the pooled id set is disjoint; a collision after
/// namespacing throws DomainError. Per label, posts are shuffled with a
/// generator seeded from (spec.seed, label) and the first floor(ratio * n)
/// go to the first output, the rest to the second; output order is FAKE
/// posts then REAL posts. Throws DomainError if either side would receive
/// zero posts for some label.
std::pair<Corpus, Corpus> combine_and_split(const Corpus& train,
                                            const Corpus& validation,
                                            const SplitSpec& spec);

}  // namespace veritext
