#include "docleak/corpus.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "docleak/errors.hpp"

namespace docleak {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 4> kFormLabels = {"question", "answer",
                                                         "header", "other"};
constexpr std::array<std::string_view, 4> kReceiptLabels = {
    "company", "date", "address", "total"};

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorKind::malformed_annotation, what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) malformed(where + ": missing key \"" + key + "\"");
  return *it;
}

std::int64_t require_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) malformed(where + ": expected integer");
  return v.get<std::int64_t>();
}

BoundingBox parse_box(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) {
    malformed(where + ": box must hold exactly 4 integers");
  }
  BoundingBox box{require_int(v[0], where), require_int(v[1], where),
                  require_int(v[2], where), require_int(v[3], where)};
  if (!box.valid()) {
    malformed(where + ": box [" + std::to_string(box.x0) + "," +
              std::to_string(box.y0) + "," + std::to_string(box.x1) + "," +
              std::to_string(box.y1) + "] violates x0<=x1, y0<=y1, >=0");
  }
  return box;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::io_error, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<std::int64_t> parse_coordinate(std::string_view field) {
  field = trim(field);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    return std::nullopt;
  }
  return v;
}

}  // namespace

std::string_view to_string(Dataset d) noexcept {
  switch (d) {
    case Dataset::funsd: return "funsd";
    case Dataset::sroie: return "sroie";
    case Dataset::generic: return "generic";
  }
  return "generic";
}

std::string_view to_string(OriginSplit s) noexcept {
  switch (s) {
    case OriginSplit::train: return "train";
    case OriginSplit::test: return "test";
    case OriginSplit::unassigned: return "unassigned";
  }
  return "unassigned";
}

Dataset parse_dataset(std::string_view name) {
  if (name == "funsd") return Dataset::funsd;
  if (name == "sroie") return Dataset::sroie;
  if (name == "generic") return Dataset::generic;
  throw Error(ErrorKind::invalid_parameter,
              "unknown dataset '" + std::string(name) + "'");
}

OriginSplit parse_origin_split(std::string_view name) {
  if (name == "train") return OriginSplit::train;
  if (name == "test") return OriginSplit::test;
  if (name == "unassigned") return OriginSplit::unassigned;
  throw Error(ErrorKind::invalid_parameter,
              "unknown origin split '" + std::string(name) + "'");
}

std::span<const std::string_view> label_set(Dataset d) noexcept {
  if (d == Dataset::sroie) return kReceiptLabels;
  return kFormLabels;
}

bool is_known_label(Dataset d, std::string_view label) noexcept {
  auto labels = label_set(d);
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

const Document* Corpus::find(std::string_view doc_id) const noexcept {
  auto it = std::lower_bound(
      documents.begin(), documents.end(), doc_id,
      [](const Document& d, std::string_view id) { return d.doc_id < id; });
  if (it == documents.end() || it->doc_id != doc_id) return nullptr;
  return &*it;
}

Document parse_funsd_document(std::string_view raw, std::string doc_id,
                              OriginSplit origin_split, ParseStats* stats,
                              Dataset dataset) {
  json root;
  try {
    root = json::parse(raw);
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) malformed("top level is not an object");
  const json& form = require(root, "form", "document");
  if (!form.is_array()) malformed("\"form\" is not a list");

  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.dataset = dataset;
  doc.origin_split = origin_split;
  doc.entities.reserve(form.size());

  std::size_t dropped = 0;
  for (std::size_t i = 0; i < form.size(); ++i) {
    const json& item = form[i];
    const std::string where = "form[" + std::to_string(i) + "]";
    if (!item.is_object()) malformed(where + ": not an object");

    Entity entity;
    entity.entity_id = require_int(require(item, "id", where), where + ".id");

    const json& text = require(item, "text", where);
    if (!text.is_string()) malformed(where + ".text: expected string");
    entity.text = text.get<std::string>();

    parse_box(require(item, "box", where), where + ".box");

    const json& label = require(item, "label", where);
    if (!label.is_string()) malformed(where + ".label: expected string");
    entity.label = label.get<std::string>();
    if (!is_known_label(dataset, entity.label)) {
      throw Error(ErrorKind::unknown_label,
                  where + ": label '" + entity.label + "' not in label set");
    }

    const json& words = require(item, "words", where);
    if (!words.is_array()) malformed(where + ".words: expected list");
    for (std::size_t w = 0; w < words.size(); ++w) {
      const std::string wwhere = where + ".words[" + std::to_string(w) + "]";
      const json& word = words[w];
      if (!word.is_object()) malformed(wwhere + ": not an object");
      const json& wtext = require(word, "text", wwhere);
      if (!wtext.is_string()) malformed(wwhere + ".text: expected string");
      Token token{wtext.get<std::string>(),
                  parse_box(require(word, "box", wwhere), wwhere + ".box")};
      if (token.text.empty()) {
        ++dropped;
        continue;
      }
      entity.tokens.push_back(token);
      doc.tokens.push_back(std::move(token));
    }

    const json& linking = require(item, "linking", where);
    if (!linking.is_array()) malformed(where + ".linking: expected list");
    for (const json& link : linking) {
      if (!link.is_array() || link.size() != 2) {
        malformed(where + ".linking: each link must be a pair");
      }
      entity.links.emplace_back(require_int(link[0], where + ".linking"),
                                require_int(link[1], where + ".linking"));
    }
    doc.entities.push_back(std::move(entity));
  }
  if (stats) stats->dropped_lines += dropped;
  return doc;
}

Document parse_sroie_document(std::string_view ocr_raw,
                              std::string_view entities_raw,
                              std::string doc_id, OriginSplit origin_split,
                              ParseStats* stats) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.dataset = Dataset::sroie;
  doc.origin_split = origin_split;

  std::size_t dropped = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= ocr_raw.size()) {
    auto nl = ocr_raw.find('\n', pos);
    std::string_view line = ocr_raw.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? ocr_raw.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      // A trailing newline yields one empty tail; it is not a dropped line.
      if (pos <= ocr_raw.size() || !line.empty()) ++dropped;
      continue;
    }

    std::array<std::int64_t, 8> coords{};
    std::size_t cursor = 0;
    for (std::size_t f = 0; f < 8; ++f) {
      auto comma = line.find(',', cursor);
      std::string_view field = line.substr(
          cursor, comma == std::string_view::npos ? std::string_view::npos
                                                  : comma - cursor);
      auto v = parse_coordinate(field);
      if (!v || *v < 0 || (comma == std::string_view::npos && f < 7)) {
        throw Error(ErrorKind::malformed_ocr_line,
                    "line " + std::to_string(line_no) +
                        ": expected 8 leading non-negative integer fields");
      }
      coords[f] = *v;
      cursor = comma == std::string_view::npos ? line.size() + 1 : comma + 1;
    }
    std::string_view text =
        cursor <= line.size() ? line.substr(cursor) : std::string_view{};
    if (text.empty()) {
      ++dropped;
      continue;
    }
    BoundingBox hull{
        std::min({coords[0], coords[2], coords[4], coords[6]}),
        std::min({coords[1], coords[3], coords[5], coords[7]}),
        std::max({coords[0], coords[2], coords[4], coords[6]}),
        std::max({coords[1], coords[3], coords[5], coords[7]}),
    };
    doc.tokens.push_back(Token{std::string(text), hull});
  }

  json entities;
  try {
    entities = json::parse(entities_raw);
  } catch (const json::parse_error& e) {
    malformed(std::string("entities: invalid JSON: ") + e.what());
  }
  if (!entities.is_object()) malformed("entities: top level is not an object");
  std::int64_t next_id = 0;
  for (std::string_view label : kReceiptLabels) {
    auto it = entities.find(std::string(label));
    if (it == entities.end()) continue;
    if (!it->is_string()) {
      malformed("entities." + std::string(label) + ": expected string value");
    }
    Entity e;
    e.entity_id = next_id++;
    e.label = std::string(label);
    e.text = it->get<std::string>();
    doc.entities.push_back(std::move(e));
  }
  if (stats) stats->dropped_lines += dropped;
  return doc;
}

std::string dump_json(const json& j) {
  return j.dump(2, ' ', false, json::error_handler_t::replace);
}

json to_json(const LoadReport& report) {
  json errors = json::array();
  for (const auto& e : report.errors) {
    errors.push_back({{"path", e.path}, {"kind", e.kind}, {"detail", e.detail}});
  }
  return {{"documents", report.documents},
          {"dropped_lines", report.dropped_lines},
          {"errors", std::move(errors)},
          {"warnings", report.warnings}};
}

namespace {

struct LoadJob {
  std::string doc_id;
  OriginSplit split = OriginSplit::unassigned;
  fs::path primary;    // annotation json or OCR box file
  fs::path secondary;  // SROIE entity file
};

struct JobOutcome {
  std::optional<Document> doc;
  std::optional<LoadError> error;
  std::size_t dropped = 0;
};

std::optional<OriginSplit> split_for_dir(const std::string& name) {
  if (name == "training_data" || name == "train") return OriginSplit::train;
  if (name == "testing_data" || name == "test") return OriginSplit::test;
  return std::nullopt;
}

std::vector<fs::path> list_files(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      out.push_back(entry.path());
    }
  }
  if (ec) throw Error(ErrorKind::io_error, "cannot list " + dir.string());
  std::sort(out.begin(), out.end());
  return out;
}

void collect_jobs(const fs::path& split_dir, OriginSplit split, Dataset dataset,
                  std::vector<LoadJob>& jobs, LoadReport& report) {
  if (dataset != Dataset::sroie) {
    const fs::path ann = split_dir / "annotations";
    if (!fs::is_directory(ann)) {
      report.warnings.push_back("missing directory " + ann.string());
      return;
    }
    for (auto& p : list_files(ann, ".json")) {
      jobs.push_back({p.stem().string(), split, p, {}});
    }
    return;
  }

  const fs::path box_dir = split_dir / "box";
  const fs::path ent_dir = split_dir / "entities";
  if (!fs::is_directory(box_dir) || !fs::is_directory(ent_dir)) {
    report.warnings.push_back("missing box/ or entities/ under " +
                              split_dir.string());
    return;
  }
  std::map<std::string, fs::path> boxes;
  std::map<std::string, fs::path> ents;
  for (auto& p : list_files(box_dir, ".txt")) boxes[p.stem().string()] = p;
  for (auto& p : list_files(ent_dir, ".txt")) ents[p.stem().string()] = p;
  for (auto& [stem, path] : boxes) {
    auto it = ents.find(stem);
    if (it == ents.end()) {
      report.errors.push_back({path.string(), std::string(to_string(ErrorKind::missing_pair)),
                               "no entity file with stem " + stem});
      continue;
    }
    jobs.push_back({stem, split, path, it->second});
  }
  for (auto& [stem, path] : ents) {
    if (!boxes.count(stem)) {
      report.errors.push_back({path.string(), std::string(to_string(ErrorKind::missing_pair)),
                               "no box file with stem " + stem});
    }
  }
}

JobOutcome run_job(const LoadJob& job, Dataset dataset) {
  JobOutcome out;
  ParseStats stats;
  try {
    if (dataset == Dataset::sroie) {
      out.doc = parse_sroie_document(read_file(job.primary),
                                     read_file(job.secondary), job.doc_id,
                                     job.split, &stats);
    } else {
      out.doc = parse_funsd_document(read_file(job.primary), job.doc_id,
                                     job.split, &stats, dataset);
    }
  } catch (const Error& e) {
    out.error = LoadError{job.primary.string(), std::string(to_string(e.kind())),
                          e.what()};
  } catch (const std::exception& e) {
    out.error = LoadError{job.primary.string(), "IoError", e.what()};
  }
  out.dropped = stats.dropped_lines;
  return out;
}

}  // namespace

LoadResult load_corpus(const fs::path& root, Dataset dataset,
                       Execution execution) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorKind::io_error,
                "data root is not a readable directory: " + root.string());
  }

  LoadResult result;
  result.corpus.dataset = dataset;
  LoadReport& report = result.report;

  std::vector<std::pair<std::string, OriginSplit>> split_dirs;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (auto split = split_for_dir(name)) split_dirs.emplace_back(name, *split);
  }
  if (ec) throw Error(ErrorKind::io_error, "cannot list " + root.string());
  std::sort(split_dirs.begin(), split_dirs.end());
  if (split_dirs.empty()) {
    report.warnings.push_back("no split directories under " + root.string());
  }

  std::vector<LoadJob> jobs;
  for (const auto& [name, split] : split_dirs) {
    collect_jobs(root / name, split, dataset, jobs, report);
  }
  std::sort(jobs.begin(), jobs.end(), [](const LoadJob& a, const LoadJob& b) {
    return std::tie(a.doc_id, a.primary) < std::tie(b.doc_id, b.primary);
  });
  for (std::size_t i = 1; i < jobs.size(); ++i) {
    if (jobs[i].doc_id == jobs[i - 1].doc_id) {
      throw Error(ErrorKind::duplicate_doc_id,
                  "doc_id '" + jobs[i].doc_id + "' produced by " +
                      jobs[i - 1].primary.string() + " and " +
                      jobs[i].primary.string());
    }
  }

  std::vector<JobOutcome> outcomes(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());
  if (execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < n; ++i) outcomes[i] = run_job(jobs[i], dataset);
  } else {
    for (std::int64_t i = 0; i < n; ++i) outcomes[i] = run_job(jobs[i], dataset);
  }

  for (auto& o : outcomes) {
    report.dropped_lines += o.dropped;
    if (o.error) report.errors.push_back(std::move(*o.error));
    if (o.doc) result.corpus.documents.push_back(std::move(*o.doc));
  }
  std::sort(report.errors.begin(), report.errors.end(),
            [](const LoadError& a, const LoadError& b) { return a.path < b.path; });
  report.documents = result.corpus.documents.size();
  if (report.documents == 0) {
    report.warnings.push_back("corpus is empty");
  }
  return result;
}

std::string_view to_string(IssueKind kind) noexcept {
  switch (kind) {
    case IssueKind::empty_doc_id: return "EmptyDocId";
    case IssueKind::invalid_box: return "InvalidBox";
    case IssueKind::empty_token_text: return "EmptyTokenText";
    case IssueKind::unknown_label: return "UnknownLabel";
    case IssueKind::duplicate_entity_id: return "DuplicateEntityId";
    case IssueKind::dangling_token: return "DanglingToken";
  }
  return "Unknown";
}

std::vector<Issue> validate_document(const Document& doc) {
  std::vector<Issue> issues;
  if (doc.doc_id.empty()) issues.push_back({IssueKind::empty_doc_id, ""});

  auto check_token = [&](const Token& t, const std::string& where) {
    if (!t.box.valid()) issues.push_back({IssueKind::invalid_box, where});
    if (t.text.empty()) issues.push_back({IssueKind::empty_token_text, where});
  };
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    check_token(doc.tokens[i], "tokens[" + std::to_string(i) + "]");
  }

  std::unordered_map<std::int64_t, std::size_t> seen_ids;
  for (std::size_t i = 0; i < doc.entities.size(); ++i) {
    const Entity& e = doc.entities[i];
    const std::string where = "entities[" + std::to_string(i) + "]";
    if (!is_known_label(doc.dataset, e.label)) {
      issues.push_back({IssueKind::unknown_label, where + ": " + e.label});
    }
    if (auto [it, fresh] = seen_ids.emplace(e.entity_id, i); !fresh) {
      issues.push_back({IssueKind::duplicate_entity_id,
                        where + ": id " + std::to_string(e.entity_id) +
                            " already used by entities[" +
                            std::to_string(it->second) + "]"});
    }
    for (std::size_t t = 0; t < e.tokens.size(); ++t) {
      const std::string twhere = where + ".tokens[" + std::to_string(t) + "]";
      check_token(e.tokens[t], twhere);
      if (std::find(doc.tokens.begin(), doc.tokens.end(), e.tokens[t]) ==
          doc.tokens.end()) {
        issues.push_back({IssueKind::dangling_token, twhere});
      }
    }
  }
  return issues;
}

namespace {

json token_json(const Token& t) {
  return {{"text", t.text}, {"box", {t.box.x0, t.box.y0, t.box.x1, t.box.y1}}};
}

Token token_from_json(const json& j) {
  const auto& b = j.at("box");
  return Token{j.at("text").get<std::string>(),
               {b.at(0).get<std::int64_t>(), b.at(1).get<std::int64_t>(),
                b.at(2).get<std::int64_t>(), b.at(3).get<std::int64_t>()}};
}

}  // namespace

json to_json(const Document& doc) {
  json tokens = json::array();
  for (const auto& t : doc.tokens) tokens.push_back(token_json(t));
  json entities = json::array();
  for (const auto& e : doc.entities) {
    json etoks = json::array();
    for (const auto& t : e.tokens) etoks.push_back(token_json(t));
    json links = json::array();
    for (const auto& [a, b] : e.links) links.push_back({a, b});
    entities.push_back({{"entity_id", e.entity_id},
                        {"label", e.label},
                        {"text", e.text},
                        {"tokens", std::move(etoks)},
                        {"links", std::move(links)}});
  }
  return {{"doc_id", doc.doc_id},
          {"dataset", to_string(doc.dataset)},
          {"origin_split", to_string(doc.origin_split)},
          {"tokens", std::move(tokens)},
          {"entities", std::move(entities)}};
}

Document document_from_json(const json& j) {
  try {
    Document doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.dataset = parse_dataset(j.at("dataset").get<std::string>());
    doc.origin_split = parse_origin_split(j.at("origin_split").get<std::string>());
    for (const auto& t : j.at("tokens")) doc.tokens.push_back(token_from_json(t));
    for (const auto& je : j.at("entities")) {
      Entity e;
      e.entity_id = je.at("entity_id").get<std::int64_t>();
      e.label = je.at("label").get<std::string>();
      e.text = je.at("text").get<std::string>();
      for (const auto& t : je.at("tokens")) e.tokens.push_back(token_from_json(t));
      for (const auto& l : je.at("links")) {
        e.links.emplace_back(l.at(0).get<std::int64_t>(), l.at(1).get<std::int64_t>());
      }
      doc.entities.push_back(std::move(e));
    }
    return doc;
  } catch (const json::exception& e) {
    malformed(std::string("canonical document: ") + e.what());
  }
}

}  // namespace docleak
