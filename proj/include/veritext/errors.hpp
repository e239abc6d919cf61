#pragma once

#include <stdexcept>
#include <string>

namespace veritext {

// Error classes map onto the CLI exit codes (see tools/veritext.cpp):
//   IoError / ParseError / ConfigError -> 2
//   InvalidPairError                   -> 3
//   TrainError                         -> 4
//   ArtifactError                      -> 5

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unknown label string in a dataset file.
struct LabelError : ParseError {
  using ParseError::ParseError;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precondition violations on in-memory data (empty corpus, bad alpha, ...).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A (model, features) combination outside the supported grid.
struct InvalidPairError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss or other divergence; message names the epoch/step.
struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable or version-incompatible model file.
struct ArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace veritext
