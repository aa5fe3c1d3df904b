#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace docleak {

enum class ErrorKind {
  malformed_annotation,
  unknown_label,
  malformed_ocr_line,
  missing_pair,
  duplicate_doc_id,
  io_error,
  invalid_parameter,
  unknown_doc_id,
  unassigned_document,
  infeasible_ratios,
};

std::string_view to_string(ErrorKind kind) noexcept;

// All library failures surface as this one exception type; callers switch on
// kind() when they need to map failures to exit codes or report entries.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace docleak
