#include "docleak/cli.hpp"

#include <omp.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "docleak/corpus.hpp"
#include "docleak/digest.hpp"
#include "docleak/errors.hpp"
#include "docleak/evaluation.hpp"
#include "docleak/grouping.hpp"
#include "docleak/resampling.hpp"

namespace docleak {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Thrown for configuration mistakes that map to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Metric resolve_metric(const RunConfig& c, Dataset dataset) {
  if (c.metric != "auto") return parse_metric(c.metric);
  switch (dataset) {
    case Dataset::funsd: return Metric::question_overlap;
    case Dataset::sroie: return Metric::business_key;
    case Dataset::generic: return Metric::shingle;
  }
  return Metric::question_overlap;
}

std::vector<double> parse_threshold_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (part.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("bad threshold list '" + text + "'");
    }
  }
  return out;
}

struct Validated {
  Dataset dataset;
  Metric metric;
};

Validated validate(const RunConfig& c) {
  Validated v{};
  try {
    v.dataset = parse_dataset(c.dataset);
    v.metric = resolve_metric(c, v.dataset);
    if (c.ratios != "auto") parse_ratios(c.ratios);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!(c.threshold > 0.0 && c.threshold <= 1.0)) {
    throw UsageError("threshold must lie in (0, 1], got " + format_double(c.threshold));
  }
  if (c.k_folds < 1) throw UsageError("k_folds must be >= 1");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) {
    throw UsageError("train_fraction must lie in (0, 1)");
  }
  if (c.shingle_k < 1) throw UsageError("shingle_k must be >= 1");
  if (c.threads < 0) throw UsageError("threads must be >= 0");
  return v;
}

// Everything a subcommand needs after loading and grouping.
class Session {
 public:
  Session(const RunConfig& config, std::ostream& out, std::ostream& err)
      : config_(config), out_(out), err_(err), valid_(validate(config)) {
    if (config.threads > 0) omp_set_num_threads(config.threads);
  }

  const RunConfig& config() const { return config_; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }
  Metric metric() const { return valid_.metric; }

  json provenance() const {
    return {{"tool", "docleak"},
            {"version", kToolVersion},
            {"config_sha256", config_digest(config_)},
            {"seed", config_.seed}};
  }

  std::string provenance_comment() const {
    std::ostringstream s;
    s << "# tool=docleak version=" << kToolVersion
      << " config_sha256=" << config_digest(config_) << " seed=" << config_.seed << '\n';
    return s.str();
  }

  const Corpus& corpus() {
    if (!loaded_) {
      if (config_.data_root.empty()) throw UsageError("--data-root is required");
      loaded_ = load_corpus(config_.data_root, valid_.dataset);
      for (const auto& e : loaded_->report.errors) {
        err_ << "warning: " << e.path << ": " << e.kind << ": " << e.detail << '\n';
      }
      if (config_.strict && !loaded_->report.errors.empty()) {
        throw Error(ErrorKind::io_error,
                    std::to_string(loaded_->report.errors.size()) +
                        " annotation file(s) failed to parse (strict mode)");
      }
      write("load_report.json", dump_json(with_provenance(to_json(loaded_->report))));
    }
    return loaded_->corpus;
  }

  const GroupingResult& groups() {
    if (!groups_) {
      if (!config_.groups_path.empty()) {
        groups_ = grouping_from_json(json::parse(read(config_.groups_path)));
      } else {
        GraphOptions opts;
        opts.shingle_k = config_.shingle_k;
        groups_ = group_corpus(corpus(), valid_.metric, config_.threshold, opts);
      }
    }
    return *groups_;
  }

  SplitRatios ratios() {
    if (config_.ratios != "auto") return parse_ratios(config_.ratios);
    const Corpus& c = corpus();
    std::size_t n_test = 0;
    for (const auto& d : c.documents) n_test += d.origin_split == OriginSplit::test;
    const double t = c.documents.empty()
                         ? 0.0
                         : static_cast<double>(n_test) / static_cast<double>(c.size());
    return default_ratios(t);
  }

  json with_provenance(json body) const {
    body["provenance"] = provenance();
    return body;
  }

  fs::path path(const std::string& name) const { return fs::path(config_.output_dir) / name; }

  void write(const std::string& name, const std::string& content) const {
    std::error_code ec;
    fs::create_directories(config_.output_dir, ec);
    std::ofstream f(path(name), std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::io_error, "cannot write " + path(name).string());
    f << content;
    if (!f) throw Error(ErrorKind::io_error, "write failed for " + path(name).string());
  }

  static std::string read(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::io_error, "cannot read " + p.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }

  ManifestHeader manifest_header() {
    ManifestHeader h;
    h.tool_version = std::string(kToolVersion);
    h.metric = groups().metric;
    h.threshold = groups().threshold;
    h.groups_digest = grouping_digest(groups());
    h.extra = {{"config_sha256", config_digest(config_)}};
    return h;
  }

 private:
  RunConfig config_;
  std::ostream& out_;
  std::ostream& err_;
  Validated valid_;
  std::optional<LoadResult> loaded_;
  std::optional<GroupingResult> groups_;
};

void write_groups(Session& s) {
  const GroupingResult& g = s.groups();
  s.write("groups.json", dump_json(s.with_provenance(to_json(g))));
  s.write("histogram.csv", s.provenance_comment() + histogram_csv(group_size_histogram(g)));
}

int cmd_audit(Session& s) {
  const LeakageReport report = leakage_report(s.groups(), s.corpus());
  write_groups(s);
  s.write("leakage.json", dump_json(s.with_provenance(to_json(report))));
  s.out() << "documents: " << s.corpus().size() << '\n'
          << "groups: " << s.groups().groups.size() << '\n'
          << "leaked test documents: " << report.n_leaked_test << " of " << report.n_test
          << " (" << format_double(report.leak_fraction) << ")\n";
  return report.n_leaked_test > 0 ? kExitLeakage : kExitOk;
}

int cmd_group(Session& s) {
  write_groups(s);
  const auto& g = s.groups();
  s.out() << "documents: " << g.document_count() << '\n'
          << "groups: " << g.groups.size() << '\n'
          << "max group size: " << g.max_group_size() << '\n';
  return kExitOk;
}

int cmd_tune(Session& s) {
  if (s.config().ground_truth.empty()) throw UsageError("tune needs --ground-truth");
  const auto gt =
      GroundTruthGrouping::from_json(json::parse(Session::read(s.config().ground_truth)));
  const auto thresholds = parse_threshold_list(s.config().thresholds);
  for (double t : thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw UsageError("tuning thresholds must lie in (0, 1]");
  }
  GraphOptions opts;
  opts.shingle_k = s.config().shingle_k;
  const TuningTable table = tune_threshold(s.corpus(), gt, thresholds, s.metric(), opts);
  s.write("tuning.csv", s.provenance_comment() + tuning_csv(table));
  const auto& best = table.rows[table.best];
  s.out() << "best threshold: " << format_double(best.threshold)
          << " (f1 " << format_double(best.metrics.f1) << ")\n";
  return kExitOk;
}

SplitManifest compute_resampled(Session& s) {
  return resample_splits(s.groups(), s.ratios(), s.config().seed);
}

int cmd_resample(Session& s) {
  // Manifests reference the grouping by digest, so keep it next to them.
  if (s.config().groups_path.empty()) write_groups(s);
  const SplitManifest manifest = compute_resampled(s);
  const ManifestHeader header = s.manifest_header();

  int status = kExitOk;
  auto check = [&](const SplitManifest& m, const std::string& name, bool ratio_checked) {
    for (const auto& v : verify_manifest(m, s.groups())) {
      if (!ratio_checked && v.kind == ViolationKind::ratio_deviation) continue;
      s.err() << name << ": " << to_string(v.kind) << ' ' << v.doc_id << ' ' << v.detail << '\n';
      status = kExitFailure;
    }
  };
  check(manifest, "manifest.tsv", true);
  s.write("manifest.tsv", format_manifest(manifest, header));

  FoldOptions fold_opts;
  fold_opts.group_atomic = s.config().group_atomic_folds;
  fold_opts.groups = &s.groups();
  const CvFolds folds = make_cv_folds(manifest, s.config().k_folds,
                                      s.config().train_fraction, s.config().seed, fold_opts);
  for (std::size_t i = 0; i < folds.folds.size(); ++i) {
    ManifestHeader fh = header;
    fh.fold = i + 1;
    const std::string name = "fold_" + std::to_string(i + 1) + ".tsv";
    // Train/val may share templates unless group-atomic folds were asked for;
    // only the test side must stay atomic.
    if (s.config().group_atomic_folds) {
      check(folds.folds[i], name, false);
    } else if (leakage_report(s.groups(), folds.folds[i]).n_leaked_test != 0) {
      s.err() << name << ": test documents share a template with train/val\n";
      status = kExitFailure;
    }
    s.write(name, format_manifest(folds.folds[i], fh));
  }
  s.out() << "train " << manifest.count(Split::train) << ", val "
          << manifest.count(Split::val) << ", test " << manifest.count(Split::test)
          << "; " << folds.folds.size() << " folds\n";
  return status;
}

int cmd_eval(Session& s) {
  const SplitManifest leaky = manifest_from_origin(s.corpus());
  SplitManifest clean;
  fs::path manifest_path = s.config().manifest_path.empty()
                               ? s.path("manifest.tsv")
                               : fs::path(s.config().manifest_path);
  if (fs::exists(manifest_path)) {
    clean = parse_manifest(Session::read(manifest_path));
  } else if (!s.config().manifest_path.empty()) {
    throw Error(ErrorKind::io_error, "cannot read " + manifest_path.string());
  } else {
    clean = compute_resampled(s);
  }
  const GapResult gap = leakage_gap_experiment(s.corpus(), s.groups(), leaky, clean);
  json body = to_json(gap.clean.metrics);
  body.update(to_json(gap));
  s.write("metrics.json", dump_json(s.with_provenance(std::move(body))));
  s.out() << "memorizer f1 official split: " << format_double(gap.f1_leaky) << '\n'
          << "memorizer f1 resampled split: " << format_double(gap.f1_clean) << '\n'
          << "gap: " << format_double(gap.gap) << '\n';
  return kExitOk;
}

// Strips "# ..." provenance lines so artifact CSVs can be re-read.
std::vector<std::vector<std::string>> read_csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  bool header = true;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

const SizeHistogram& published_reference(Dataset d) {
  static const SizeHistogram forms = {{1, 130}, {2, 21}, {3, 8}, {4, 1}};
  static const SizeHistogram receipts = {{1, 301}, {9, 6},  {17, 3}, {26, 2}, {34, 3},
                                         {42, 3},  {51, 1}, {59, 1}, {67, 3}, {75, 1}};
  static const SizeHistogram none;
  if (d == Dataset::funsd) return forms;
  if (d == Dataset::sroie) return receipts;
  return none;
}

int cmd_report(Session& s) {
  for (const char* required : {"groups.json", "leakage.json"}) {
    if (!fs::exists(s.path(required))) {
      throw Error(ErrorKind::io_error,
                  "missing artifact " + s.path(required).string() + " (run audit first)");
    }
  }
  const GroupingResult groups =
      grouping_from_json(json::parse(Session::read(s.path("groups.json"))));
  const json leakage = json::parse(Session::read(s.path("leakage.json")));
  const SizeHistogram hist = group_size_histogram(groups);
  const Dataset dataset = parse_dataset(s.config().dataset);

  s.write("histogram.csv", s.provenance_comment() + histogram_csv(hist));
  SizeHistogram shown = hist;
  if (dataset == Dataset::sroie) {
    shown = rebin_histogram(hist, kReceiptFigureAnchors);
    s.write("histogram_binned.csv", s.provenance_comment() + histogram_csv(shown));
  }

  std::ostringstream md;
  md << "# docleak summary\n\n"
     << "- tool version: " << kToolVersion << '\n'
     << "- config sha256: " << config_digest(s.config()) << '\n'
     << "- seed: " << s.config().seed << '\n'
     << "- dataset: " << s.config().dataset << '\n'
     << "- metric: " << to_string(groups.metric) << '\n'
     << "- threshold: " << format_double(groups.threshold) << "\n\n";

  md << "## Group-size distribution\n\n"
     << "| metric | value |\n|---|---|\n"
     << "| documents | " << groups.document_count() << " |\n"
     << "| groups | " << groups.groups.size() << " |\n"
     << "| max group size | " << groups.max_group_size() << " |\n\n";
  const SizeHistogram& ref = published_reference(dataset);
  md << "| group size | groups |" << (ref.empty() ? "" : " published reference |") << '\n'
     << "|---|---|" << (ref.empty() ? "" : "---|") << '\n';
  if (shown.empty()) md << "| - | 0 |" << (ref.empty() ? "" : " - |") << '\n';
  for (const auto& [size, count] : shown) {
    md << "| " << size << " | " << count << " |";
    if (!ref.empty()) {
      auto it = ref.find(size);
      md << ' ' << (it == ref.end() ? std::string("-") : std::to_string(it->second)) << " |";
    }
    md << '\n';
  }
  if (dataset == Dataset::sroie) {
    md << "\nSizes are binned to the nearest lower anchor of "
          "{1, 9, 17, 26, 34, 42, 51, 59, 67, 75}; histogram.csv holds exact sizes.\n";
  }

  md << "\n## Leakage\n\n"
     << "| metric | value |\n|---|---|\n"
     << "| test documents | " << leakage.value("n_test", 0) << " |\n"
     << "| leaked test documents | " << leakage.value("n_leaked_test", 0) << " |\n"
     << "| leak fraction | " << format_double(leakage.value("leak_fraction", 0.0))
     << " |\n"
     << "| offending groups | " << leakage.value("offending_groups", json::array()).size()
     << " |\n";

  md << "\n## Threshold tuning\n\n";
  if (fs::exists(s.path("tuning.csv"))) {
    md << "| threshold | precision | recall | f1 | selected |\n|---|---|---|---|---|\n";
    for (const auto& row : read_csv_rows(Session::read(s.path("tuning.csv")))) {
      if (row.size() < 5) continue;
      md << "| " << row[0] << " | " << row[1] << " | " << row[2] << " | " << row[3]
         << " | " << (row[4] == "1" ? "yes" : "") << " |\n";
    }
  } else {
    md << "Not computed (run `docleak tune` with a ground-truth file).\n";
  }

  md << "\n## Memorizer gap\n\n";
  if (fs::exists(s.path("metrics.json"))) {
    const json m = json::parse(Session::read(s.path("metrics.json")));
    md << "| split | f1 |\n|---|---|\n"
       << "| official (leaky) | " << format_double(m.value("f1_leaky", 0.0)) << " |\n"
       << "| resampled (clean) | " << format_double(m.value("f1_clean", 0.0)) << " |\n"
       << "| gap | " << format_double(m.value("gap", 0.0)) << " |\n";
  } else {
    md << "Not computed (run `docleak eval`).\n";
  }
  s.write("summary.md", md.str());
  s.out() << md.str();
  return kExitOk;
}

void add_common_options(CLI::App& app, RunConfig& c) {
  app.add_option("--dataset", c.dataset, "funsd | sroie | generic")->capture_default_str();
  app.add_option("--data-root,--data_root", c.data_root, "Corpus root directory");
  app.add_option("--metric", c.metric, "auto | question_overlap | shingle | business_key")
      ->capture_default_str();
  app.add_option("--threshold", c.threshold, "Grouping threshold in (0, 1]")
      ->capture_default_str();
  app.add_option("--ratios", c.ratios, "train,val,test or auto")->capture_default_str();
  app.add_option("--seed", c.seed, "Resampling seed")->capture_default_str();
  app.add_option("--k-folds,--k_folds", c.k_folds, "Number of train/val draws")
      ->capture_default_str();
  app.add_option("--train-fraction,--train_fraction", c.train_fraction,
                 "Train share of the non-test documents")
      ->capture_default_str();
  app.add_option("--output-dir,--output_dir", c.output_dir, "Artifact directory")
      ->capture_default_str();
  app.add_option("--shingle-k,--shingle_k", c.shingle_k, "Shingle width")->capture_default_str();
  app.add_option("--threads", c.threads, "OpenMP threads (0 = default)");
  app.add_flag("--strict", c.strict, "Fail on any per-file parse error");
  app.add_flag("--group-atomic-folds,--group_atomic_folds", c.group_atomic_folds,
               "Keep template groups whole across train/val");
  app.add_option("--ground-truth,--ground_truth", c.ground_truth,
                 "Ground-truth grouping JSON (tune)");
  app.add_option("--thresholds", c.thresholds, "Comma-separated thresholds (tune)")
      ->capture_default_str();
  app.add_option("--groups", c.groups_path, "Reuse an existing groups.json");
  app.add_option("--manifest", c.manifest_path, "Clean manifest for eval");
}

}  // namespace

std::string config_digest(const RunConfig& c) {
  std::ostringstream s;
  s << "dataset=" << c.dataset << '\n'
    << "data_root=" << c.data_root << '\n'
    << "metric=" << c.metric << '\n'
    << "threshold=" << format_double(c.threshold) << '\n'
    << "ratios=" << c.ratios << '\n'
    << "seed=" << c.seed << '\n'
    << "k_folds=" << c.k_folds << '\n'
    << "train_fraction=" << format_double(c.train_fraction) << '\n'
    << "shingle_k=" << c.shingle_k << '\n'
    << "group_atomic_folds=" << c.group_atomic_folds << '\n'
    << "ground_truth=" << c.ground_truth << '\n'
    << "thresholds=" << c.thresholds << '\n'
    << "groups=" << c.groups_path << '\n'
    << "manifest=" << c.manifest_path << '\n';
  return sha256_hex(s.str());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  CLI::App app{"Template-leakage audit and group-atomic resampling for document IE benchmarks",
               "docleak"};
  app.set_config("--config", "", "key=value configuration file; flags take precedence");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();
  add_common_options(app, config);

  using Handler = std::function<int(Session&)>;
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"audit", "Group the corpus and measure train/test template leakage", cmd_audit},
      {"group", "Write template groups and the group-size histogram", cmd_group},
      {"tune", "Score grouping thresholds against a ground-truth grouping", cmd_tune},
      {"resample", "Write a group-atomic manifest and train/val folds", cmd_resample},
      {"eval", "Memorizer score on the official vs the resampled split", cmd_eval},
      {"report", "Summarize previously written artifacts", cmd_report},
  };
  for (const auto& [name, help, handler] : commands) app.add_subcommand(name, help);

  std::vector<std::string> argv(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Session session(config, out, err);
    for (const auto& [name, help, handler] : commands) {
      if (app.got_subcommand(name)) return handler(session);
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::invalid_parameter:
      case ErrorKind::infeasible_ratios:
        return kExitUsage;
      default:
        return kExitFailure;
    }
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON artifact: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace docleak
