#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "docleak/types.hpp"

namespace docleak::testing {

// Form with one single-word token per entity.
Document make_form(const std::string& doc_id, OriginSplit split,
                   const std::vector<std::string>& questions,
                   const std::vector<std::string>& answers = {});

Document make_receipt(const std::string& doc_id, OriginSplit split,
                      const std::string& company, const std::string& address,
                      const std::string& date = "01/01/2019",
                      const std::string& total = "1.00");

// Sorts by doc_id; dataset taken from the first document.
Corpus make_corpus(std::vector<Document> docs);

// Random forms drawing 0..max_questions questions from a vocabulary of
// vocab_size strings q0..q{n-1}; origin split ~ 20% test.
Corpus random_form_corpus(std::mt19937_64& rng, std::size_t n_docs,
                          std::size_t vocab_size, std::size_t max_questions);

// n_templates x copies forms; every copy of a template carries identical
// questions and answers. doc ids "t<template>_c<copy>".
Corpus template_corpus(std::size_t n_templates, std::size_t copies);

// FUNSD annotation JSON for a document (inverse of the parser).
std::string funsd_json(const Document& doc);

// Writes <root>/{training_data,testing_data}/annotations/<id>.json.
void write_funsd_tree(const std::filesystem::path& root, const Corpus& corpus);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& p, const std::string& content);
std::string read_text(const std::filesystem::path& p);

}  // namespace docleak::testing
