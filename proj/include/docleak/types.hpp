#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace docleak {

enum class Dataset { funsd, sroie, generic };
enum class OriginSplit { train, test, unassigned };

// Selects the OpenMP kernel or its serial reference.
enum class Execution { serial, parallel };

std::string_view to_string(Dataset d) noexcept;
std::string_view to_string(OriginSplit s) noexcept;
// Both throw Error(invalid_parameter) on unrecognised names.
Dataset parse_dataset(std::string_view name);
OriginSplit parse_origin_split(std::string_view name);

// Closed label vocabulary per dataset. Generic corpora use the form labels.
std::span<const std::string_view> label_set(Dataset d) noexcept;
bool is_known_label(Dataset d, std::string_view label) noexcept;

struct BoundingBox {
  std::int64_t x0 = 0;
  std::int64_t y0 = 0;
  std::int64_t x1 = 0;
  std::int64_t y1 = 0;

  bool valid() const noexcept {
    return x0 >= 0 && y0 >= 0 && x0 <= x1 && y0 <= y1;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Token {
  std::string text;
  BoundingBox box;
  friend bool operator==(const Token&, const Token&) = default;
};

struct Entity {
  std::int64_t entity_id = 0;
  std::string label;
  std::string text;
  std::vector<Token> tokens;
  // FUNSD "linking" pairs; kept for fidelity, unused downstream.
  std::vector<std::pair<std::int64_t, std::int64_t>> links;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct Document {
  std::string doc_id;
  Dataset dataset = Dataset::generic;
  OriginSplit origin_split = OriginSplit::unassigned;
  std::vector<Entity> entities;
  std::vector<Token> tokens;
  friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
  Dataset dataset = Dataset::generic;
  // Sorted by doc_id, ids pairwise distinct.
  std::vector<Document> documents;

  std::size_t size() const noexcept { return documents.size(); }
  // Binary search over the sorted documents; nullptr when absent.
  const Document* find(std::string_view doc_id) const noexcept;
};

}  // namespace docleak
