#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "json.hpp"

namespace docleak::testing {

namespace fs = std::filesystem;
using nlohmann::json;

Document make_form(const std::string& doc_id, OriginSplit split,
                   const std::vector<std::string>& questions,
                   const std::vector<std::string>& answers) {
  Document doc;
  doc.doc_id = doc_id;
  doc.dataset = Dataset::funsd;
  doc.origin_split = split;
  std::int64_t id = 0;
  std::int64_t y = 10;
  auto add = [&](const std::string& label, const std::string& text) {
    Entity e;
    e.entity_id = id++;
    e.label = label;
    e.text = text;
    Token t{text, {10, y, 100, y + 12}};
    y += 20;
    e.tokens.push_back(t);
    doc.tokens.push_back(t);
    doc.entities.push_back(std::move(e));
  };
  for (const auto& q : questions) add("question", q);
  for (const auto& a : answers) add("answer", a);
  return doc;
}

Document make_receipt(const std::string& doc_id, OriginSplit split,
                      const std::string& company, const std::string& address,
                      const std::string& date, const std::string& total) {
  Document doc;
  doc.doc_id = doc_id;
  doc.dataset = Dataset::sroie;
  doc.origin_split = split;
  std::int64_t id = 0;
  auto add = [&](const char* label, const std::string& text) {
    if (text.empty()) return;
    doc.tokens.push_back({text, {0, 20 * id, 200, 20 * id + 15}});
    doc.entities.push_back({id++, label, text, {}, {}});
  };
  add("company", company);
  add("date", date);
  add("address", address);
  add("total", total);
  return doc;
}

Corpus make_corpus(std::vector<Document> docs) {
  Corpus c;
  if (!docs.empty()) c.dataset = docs.front().dataset;
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  c.documents = std::move(docs);
  return c;
}

Corpus random_form_corpus(std::mt19937_64& rng, std::size_t n_docs,
                          std::size_t vocab_size, std::size_t max_questions) {
  std::vector<Document> docs;
  std::uniform_int_distribution<std::size_t> count(0, max_questions);
  std::uniform_int_distribution<std::size_t> word(0, vocab_size - 1);
  std::bernoulli_distribution is_test(0.2);
  for (std::size_t i = 0; i < n_docs; ++i) {
    std::vector<std::string> qs;
    const std::size_t n = count(rng);
    for (std::size_t j = 0; j < n; ++j) qs.push_back("Q" + std::to_string(word(rng)) + ":");
    char id[32];
    std::snprintf(id, sizeof id, "d%04zu", i);
    docs.push_back(make_form(id, is_test(rng) ? OriginSplit::test : OriginSplit::train, qs,
                             {"a" + std::to_string(i)}));
  }
  return make_corpus(std::move(docs));
}

Corpus template_corpus(std::size_t n_templates, std::size_t copies) {
  std::vector<Document> docs;
  for (std::size_t t = 0; t < n_templates; ++t) {
    std::vector<std::string> qs;
    std::vector<std::string> as;
    for (int k = 0; k < 3; ++k) {
      qs.push_back("template " + std::to_string(t) + " field " + std::to_string(k) + ":");
      as.push_back("value " + std::to_string(t) + "-" + std::to_string(k));
    }
    for (std::size_t c = 0; c < copies; ++c) {
      docs.push_back(make_form("t" + std::to_string(t) + "_c" + std::to_string(c),
                               OriginSplit::train, qs, as));
    }
  }
  return make_corpus(std::move(docs));
}

std::string funsd_json(const Document& doc) {
  json form = json::array();
  for (const auto& e : doc.entities) {
    json words = json::array();
    BoundingBox hull{0, 0, 0, 0};
    for (const auto& t : e.tokens) {
      words.push_back({{"text", t.text}, {"box", {t.box.x0, t.box.y0, t.box.x1, t.box.y1}}});
      hull = t.box;
    }
    json links = json::array();
    for (const auto& [a, b] : e.links) links.push_back({a, b});
    form.push_back({{"id", e.entity_id},
                    {"text", e.text},
                    {"box", {hull.x0, hull.y0, hull.x1, hull.y1}},
                    {"label", e.label},
                    {"words", std::move(words)},
                    {"linking", std::move(links)}});
  }
  return json{{"form", std::move(form)}}.dump(1);
}

void write_funsd_tree(const fs::path& root, const Corpus& corpus) {
  fs::create_directories(root / "training_data" / "annotations");
  fs::create_directories(root / "testing_data" / "annotations");
  for (const auto& doc : corpus.documents) {
    const char* split = doc.origin_split == OriginSplit::test ? "testing_data" : "training_data";
    write_text(root / split / "annotations" / (doc.doc_id + ".json"), funsd_json(doc));
  }
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("docleak_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << content;
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace docleak::testing
