#include "docleak/errors.hpp"

namespace docleak {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::malformed_annotation: return "MalformedAnnotation";
    case ErrorKind::unknown_label: return "UnknownLabel";
    case ErrorKind::malformed_ocr_line: return "MalformedOcrLine";
    case ErrorKind::missing_pair: return "MissingPair";
    case ErrorKind::duplicate_doc_id: return "DuplicateDocId";
    case ErrorKind::io_error: return "IoError";
    case ErrorKind::invalid_parameter: return "InvalidParameter";
    case ErrorKind::unknown_doc_id: return "UnknownDocId";
    case ErrorKind::unassigned_document: return "UnassignedDocument";
    case ErrorKind::infeasible_ratios: return "InfeasibleRatios";
  }
  return "Unknown";
}

}  // namespace docleak
