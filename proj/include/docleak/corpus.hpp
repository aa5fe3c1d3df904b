#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "docleak/types.hpp"
#include "json.hpp"

namespace docleak {

struct ParseStats {
  std::size_t dropped_lines = 0;  // blank OCR lines, empty-text words
};

// Parses one FUNSD annotation object ({"form": [...]}) into a Document.
// Throws Error(malformed_annotation | unknown_label).
Document parse_funsd_document(std::string_view raw, std::string doc_id,
                              OriginSplit origin_split,
                              ParseStats* stats = nullptr,
                              Dataset dataset = Dataset::funsd);

// Parses one SROIE receipt: the OCR box file plus its entity object.
// Throws Error(malformed_ocr_line | malformed_annotation).
Document parse_sroie_document(std::string_view ocr_raw,
                              std::string_view entities_raw,
                              std::string doc_id, OriginSplit origin_split,
                              ParseStats* stats = nullptr);

struct LoadError {
  std::string path;
  std::string kind;
  std::string detail;
};

struct LoadReport {
  std::size_t documents = 0;
  std::size_t dropped_lines = 0;
  std::vector<LoadError> errors;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const LoadReport& report);

// Dumps with invalid UTF-8 replaced; OCR text is not guaranteed clean.
std::string dump_json(const nlohmann::json& j);

struct LoadResult {
  Corpus corpus;
  LoadReport report;
};

// Reads <root>/{training_data,testing_data}/... (also accepts train/ and
// test/). Split membership comes from the directory only. Files are parsed
// in parallel; the result is sorted by doc_id. Per-file failures land in the
// report and the file is skipped.
// Throws Error(io_error) when root is unreadable and
// Error(duplicate_doc_id) when two files map to the same id.
LoadResult load_corpus(const std::filesystem::path& root, Dataset dataset,
                       Execution execution = Execution::parallel);

enum class IssueKind {
  empty_doc_id,
  invalid_box,
  empty_token_text,
  unknown_label,
  duplicate_entity_id,
  dangling_token,
};

std::string_view to_string(IssueKind kind) noexcept;

struct Issue {
  IssueKind kind;
  std::string detail;
};

std::vector<Issue> validate_document(const Document& doc);

// Canonical document form used in reports; document_from_json inverts it.
nlohmann::json to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);

}  // namespace docleak
