#pragma once

#include <stdexcept>
#include <string>

namespace tgnn {

/// Operand shapes do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A computation produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (TSV, config, edge list).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ingestion left no interactions.
class EmptyDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary artifact has the wrong magic, version or layout.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tgnn
