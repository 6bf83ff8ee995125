#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cartcredit {

enum class ErrorKind {
  MissingFile,
  HeaderMismatch,
  RaggedRow,
  UnknownLabel,
  EmptyResult,
  EmptyDataset,
  EmptyDistribution,
  EmptyInput,
  Singular,
  ZeroVariance,
  DomainError,
  SchemaMismatch,
  MalformedDocument,
  VersionMismatch,
  DegenerateClass,
  ScoreOutOfRange,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so front ends can map it
// onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cartcredit
