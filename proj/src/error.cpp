#include "cartcredit/error.hpp"

namespace cartcredit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::HeaderMismatch: return "HeaderMismatch";
    case ErrorKind::RaggedRow: return "RaggedRow";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::EmptyResult: return "EmptyResult";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyDistribution: return "EmptyDistribution";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::MalformedDocument: return "MalformedDocument";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::DegenerateClass: return "DegenerateClass";
    case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace cartcredit
