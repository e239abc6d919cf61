#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "veritext/encoder.hpp"
#include "veritext/features.hpp"
#include "veritext/linear.hpp"
#include "veritext/trees.hpp"

namespace veritext {

constexpr int kArtifactVersion = 1;

/// Everything needed to turn raw text into model input.
struct FeaturePipeline {
  std::string features;  // tfidf | word2vec | tokens
  Pipeline pipeline = Pipeline::Classic;
  uint64_t stopword_hash = 0;
  TfidfModel tfidf;          // features == tfidf (nb consumes the count stage)
  EmbeddingTable embeddings; // features == word2vec; input vectors only
  Vocabulary token_vocab;    // features == tokens
};

/// Self-contained, versioned model file contents. load(save(m)) reproduces
/// predictions bit-exactly.
struct ModelArtifact {
  int version = kArtifactVersion;
  std::string kind;  // nb | logreg | svm | forest | boost | encoder
  FeaturePipeline feature;
  std::variant<NaiveBayesModel, LinearModel, ForestModel, BoostedModel,
               EncoderModel>
      model;
  std::string config_snapshot;
  uint64_t seed = 0;
};

/// Text header (format line, kind, feature tags, config snapshot, vocabulary)
/// followed by a length-prefixed little-endian binary parameter section.
void save_artifact(const ModelArtifact& artifact, const std::string& path);

/// Throws ArtifactError on unreadable files or a version mismatch.
ModelArtifact load_artifact(const std::string& path);

/// Full pipeline: preprocess raw text with the stored pipeline tag, featurize,
/// predict. Total over any input (degenerate inputs follow each model's rule).
std::vector<Label> artifact_predict(const ModelArtifact& artifact,
                                    const std::vector<std::string>& texts);

/// Positive-class score per text (posterior, sigma(margin) or vote fraction),
/// alongside the labels; used by evaluate reporting.
std::vector<double> artifact_scores(const ModelArtifact& artifact,
                                    const std::vector<std::string>& texts);

}  // namespace veritext
