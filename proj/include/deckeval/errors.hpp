#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace deckeval {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input too small or empty for the operation to mean anything.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// The metric cannot be computed on this input (e.g. no image-bearing slides).
class InapplicableMetricError : public Error {
 public:
  using Error::Error;
};

class MalformedInputError : public Error {
 public:
  using Error::Error;
};

class NumericDomainError : public Error {
 public:
  using Error::Error;
};

/// Heading paths that do not form a single rooted tree.
class StructureError : public Error {
 public:
  StructureError(const std::string& msg, std::string orphan_path)
      : Error(msg), orphan_path_(std::move(orphan_path)) {}
  const std::string& orphan_path() const noexcept { return orphan_path_; }

 private:
  std::string orphan_path_;
};

/// Raised while turning extraction responses into the data model.
class IngestError : public Error {
 public:
  IngestError(const std::string& msg, std::string offending, bool retryable = false)
      : Error(msg), offending_(std::move(offending)), retryable_(retryable) {}
  const std::string& offending_text() const noexcept { return offending_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  std::string offending_;
  bool retryable_;
};

/// A model response could not be parsed into the expected shape.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::string raw) : Error(msg), raw_(std::move(raw)) {}
  const std::string& raw_response() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class CassetteMissError : public Error {
 public:
  explicit CassetteMissError(std::string digest)
      : Error("cassette miss for request digest " + digest), digest_(std::move(digest)) {}
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

/// Network or endpoint failure; the gateway retries these.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Endpoint answered, but with something that violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ScorerError : public Error {
 public:
  using Error::Error;
};

/// Correlation undefined, e.g. one of the series is constant.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace deckeval
