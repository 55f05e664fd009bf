#include "relprobe/pipeline.hpp"

#include <fnmatch.h>
#include <omp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "relprobe/csv.hpp"
#include "relprobe/error.hpp"

namespace relprobe {

namespace fs = std::filesystem;

const LoadedSpace& Study::random_space() const {
  for (const auto& s : spaces) {
    if (s.is_random) return s;
  }
  throw InputError("study has no random space");
}

Study load_study(const StudyConfig& config) {
  if (!fs::exists(config.kg_path)) throw InputError("knowledge graph file not found: " + config.kg_path);
  Study study{config, KnowledgeGraph::load(config.kg_path, config.groups), {}, {}};

  std::size_t widest = 0;
  for (const auto& e : config.spaces) {
    if (e.is_random && e.path.empty()) continue;
    if (!fs::exists(e.path)) throw InputError("embedding file not found: " + e.path);
    auto space = load_embeddings(e.path, e.name);
    widest = std::max(widest, space.dim());
    study.spaces.push_back(LoadedSpace{std::move(space), e.covers, e.is_random});
  }
  std::vector<CoveredSpace> covered;
  for (const auto& s : study.spaces) covered.push_back(CoveredSpace{&s.space, s.covers});
  if (covered.empty()) throw InputError("config lists no embedding space to probe");
  study.seed = seed_vocabulary(covered);

  const SpaceEntry& r = config.random_space();
  if (r.path.empty()) {
    const std::size_t dim = r.dim.value_or(widest);
    if (dim == 0) throw InputError("random space dimension must be positive");
    auto space = make_random_space(study.seed.all(), dim, derive_seed(config.master_seed, {"space_rand"}), r.name);
    study.spaces.push_back(LoadedSpace{std::move(space), r.covers, true});
  }
  return study;
}

std::string StudyPaths::datasets() const { return (fs::path(root) / "datasets").string(); }
std::string StudyPaths::manifest() const { return (fs::path(root) / "manifest.csv").string(); }
std::string StudyPaths::kg_summary() const { return (fs::path(root) / "kg_summary.csv").string(); }
std::string StudyPaths::seed_vocab() const { return (fs::path(root) / "seed_vocab.txt").string(); }
std::string StudyPaths::results() const { return (fs::path(root) / "results").string(); }
std::string StudyPaths::analysis() const { return (fs::path(root) / "analysis").string(); }

namespace {

// Writes through a temporary file so a crash never leaves a partial file
// under the final name.
template <typename F>
void write_file_atomically(const std::string& path, F&& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp + "'");
    body(out);
    out.flush();
    if (!out) throw InputError("write failed for '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

std::string dataset_path(const StudyPaths& p, const std::string& name) {
  return (fs::path(p.datasets()) / (dataset_file_stem(name) + ".tsv")).string();
}

KindSet kinds_of(const RelationDataset& ds) {
  KindSet k;
  for (const auto& s : ds.samples) {
    k.insert(s.subject.kind);
    k.insert(s.object.kind);
  }
  return k;
}

bool covers(const KindSet& have, const KindSet& need) {
  return std::includes(have.begin(), have.end(), need.begin(), need.end());
}

}  // namespace

GenSummary cmd_gen(const StudyConfig& config, std::ostream& log) {
  const Study study = load_study(config);
  const StudyPaths paths{config.out_dir};
  fs::create_directories(paths.datasets());
  for (const auto& w : study.seed.warnings) log << "warning: " << w << '\n';

  ForgeOutput forged = forge_all(study.kg, study.seed, config.forge_config());

  // The directory mirrors the manifest exactly, so reruns with a changed
  // configuration leave no stale datasets behind.
  std::set<std::string> expected;
  for (const auto& ds : forged.datasets) expected.insert(dataset_file_stem(ds.name) + ".tsv");
  for (const auto& entry : fs::directory_iterator(paths.datasets())) {
    if (!expected.count(entry.path().filename().string())) fs::remove(entry.path());
  }
  for (const auto& ds : forged.datasets) {
    write_file_atomically(dataset_path(paths, ds.name), [&](std::ostream& o) { write_dataset(o, ds); });
  }
  write_file_atomically(paths.manifest(), [&](std::ostream& o) { write_manifest(o, forged.manifest); });

  std::vector<RelationStats> stats;
  std::set<std::string> unary_relations;
  for (const auto& [rel, types] : config.pair_types_by_relation) {
    if (std::find(types.begin(), types.end(), PairType::Unary) != types.end()) unary_relations.insert(rel);
  }
  for (const auto& r : study.kg.relations()) {
    stats.push_back(study.kg.relation_stats(r.name, unary_relations.count(r.name) != 0));
  }
  write_file_atomically(paths.kg_summary(), [&](std::ostream& o) { write_kg_summary(o, stats); });
  write_file_atomically(paths.seed_vocab(), [&](std::ostream& o) {
    for (const auto& n : study.seed.all()) o << n.str() << '\n';
  });

  GenSummary summary;
  for (const auto& row : forged.manifest) {
    if (row.status == "ok") {
      ++summary.datasets;
    } else {
      ++summary.skipped;
      log << "skipped " << row.dataset << ": " << row.status << '\n';
    }
  }
  log << "generated " << summary.datasets << " datasets (" << summary.skipped << " skipped) in "
      << paths.datasets() << '\n';
  return summary;
}

bool glob_match(const std::string& pattern, const std::string& text) {
  return pattern.empty() || ::fnmatch(pattern.c_str(), text.c_str(), 0) == 0;
}

std::string result_file_name(const std::string& dataset, const std::string& space, ProbeKind arch) {
  return dataset_file_stem(dataset) + "__" + dataset_file_stem(space) + "__" +
         std::string(probe_kind_name(arch)) + ".csv";
}

namespace {

const std::vector<std::string> kResultHeader = {
    "dataset",      "relation",      "group",          "pair_type",   "random",      "space",
    "arch",         "run_count",     "precision_mean", "precision_std", "recall_mean", "recall_std",
    "accuracy_mean", "accuracy_std", "f1_mean",        "f1_std"};
const std::vector<std::string> kRunHeader = {"run", "precision", "recall", "accuracy", "f1", "final_epoch"};

double to_double(const std::string& s, const std::string& source) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw InputError(source + ": bad number '" + s + "'");
  }
  return v;
}

std::size_t to_size(const std::string& s, const std::string& source) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw InputError(source + ": bad integer '" + s + "'");
  }
  return v;
}

}  // namespace

void write_result(std::ostream& out, const ExperimentResult& r) {
  using csv::format_double;
  csv::write_row(out, kResultHeader);
  csv::write_row(out, {r.dataset, r.relation, r.group, std::string(pair_type_name(r.pair_type)),
                       r.dataset_is_random ? "1" : "0", r.space, std::string(probe_kind_name(r.arch)),
                       std::to_string(r.runs.size()), format_double(r.precision.mean),
                       format_double(r.precision.std), format_double(r.recall.mean), format_double(r.recall.std),
                       format_double(r.accuracy.mean), format_double(r.accuracy.std), format_double(r.f1.mean),
                       format_double(r.f1.std)});
  csv::write_row(out, kRunHeader);
  for (const auto& m : r.runs) {
    csv::write_row(out, {std::to_string(m.run_index), format_double(m.precision), format_double(m.recall),
                         format_double(m.accuracy), format_double(m.f1), std::to_string(m.final_epoch)});
  }
}

ExperimentResult read_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open result file '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(csv::split_row(line));
  }
  if (rows.size() < 3 || rows[0] != kResultHeader || rows[1].size() != kResultHeader.size() ||
      rows[2] != kRunHeader) {
    throw InputError(path + ": not a result file");
  }
  const auto& s = rows[1];
  ExperimentResult r;
  r.dataset = s[0];
  r.relation = s[1];
  r.group = s[2];
  r.pair_type = parse_pair_type(s[3]);
  r.dataset_is_random = s[4] == "1";
  r.space = s[5];
  r.arch = parse_probe_kind(s[6]);
  const std::size_t n = to_size(s[7], path);
  if (rows.size() != 3 + n) throw InputError(path + ": expected " + std::to_string(n) + " run rows");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = rows[3 + i];
    if (f.size() != kRunHeader.size()) throw InputError(path + ": malformed run row");
    RunMetrics m;
    m.run_index = to_size(f[0], path);
    m.precision = to_double(f[1], path);
    m.recall = to_double(f[2], path);
    m.accuracy = to_double(f[3], path);
    m.f1 = to_double(f[4], path);
    m.final_epoch = to_size(f[5], path);
    r.runs.push_back(m);
  }
  r.aggregate();
  return r;
}

std::vector<ExperimentResult> read_results(const std::string& dir) {
  std::vector<std::string> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ExperimentResult> out;
  for (const auto& f : files) out.push_back(read_result(f));
  return out;
}

TrainSummary cmd_train(const StudyConfig& config, const TrainOptions& options, std::ostream& log) {
  const StudyPaths paths{config.out_dir};
  if (!fs::exists(paths.manifest())) {
    throw InputError("no manifest at '" + paths.manifest() + "'; run gen first");
  }
  const Study study = load_study(config);
  fs::create_directories(paths.results());
  // Leftovers of an interrupted write.
  for (const auto& e : fs::directory_iterator(paths.results())) {
    if (e.path().extension() == ".tmp") fs::remove(e.path());
  }

  std::vector<RelationDataset> datasets;
  for (const auto& row : read_manifest(paths.manifest())) {
    if (row.status != "ok" || !glob_match(options.relation_glob, row.relation)) continue;
    datasets.push_back(read_dataset(dataset_path(paths, row.dataset)));
  }

  struct Task {
    const RelationDataset* dataset;
    const LoadedSpace* space;
    ProbeKind arch;
    std::string file;
  };
  TrainSummary summary;
  std::vector<Task> tasks;
  for (const auto& ds : datasets) {
    const KindSet need = kinds_of(ds);
    for (const auto& sp : study.spaces) {
      if (!options.space_filter.empty() && sp.space.name() != options.space_filter) continue;
      if (!covers(sp.covers, need)) {
        ++summary.not_covered;
        log << "not covered: " << ds.name << " x " << sp.space.name() << '\n';
        continue;
      }
      for (ProbeKind arch : config.architectures) {
        ++summary.planned;
        std::string file = (fs::path(paths.results()) / result_file_name(ds.name, sp.space.name(), arch)).string();
        if (fs::exists(file)) {
          ++summary.already_present;
          continue;
        }
        tasks.push_back(Task{&ds, &sp, arch, std::move(file)});
      }
    }
  }
  if (options.max_tasks && tasks.size() > *options.max_tasks) tasks.resize(*options.max_tasks);

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, std::max<std::size_t>(1, tasks.size())));
  const int omp_threads = std::max(1, omp_get_num_procs() / static_cast<int>(jobs));
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  auto worker = [&] {
    omp_set_num_threads(omp_threads);
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      const std::string label = t.dataset->name + " x " + t.space->space.name() + " (" +
                                std::string(probe_kind_name(t.arch)) + ")";
      try {
        ExperimentResult r = run_experiment(*t.dataset, t.space->space, t.arch, config.training, config.master_seed);
        write_file_atomically(t.file, [&](std::ostream& o) { write_result(o, r); });
        std::lock_guard lock(mu);
        ++summary.trained;
        log << "trained " << label << ": f1 " << csv::format_double(r.f1.mean) << '\n';
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        summary.failures.push_back(label + ": " + e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::sort(summary.failures.begin(), summary.failures.end());
  for (const auto& f : summary.failures) log << "FAILED " << f << '\n';
  log << "trained " << summary.trained << ", already present " << summary.already_present << ", failed "
      << summary.failures.size() << '\n';
  return summary;
}

AnalyzeSummary cmd_analyze(const StudyConfig& config, std::ostream& log) {
  const StudyPaths paths{config.out_dir};
  if (!fs::exists(paths.manifest())) {
    throw InputError("no manifest at '" + paths.manifest() + "'; run gen first");
  }
  const auto manifest = read_manifest(paths.manifest());
  const auto results = read_results(paths.results());
  fs::create_directories(paths.analysis());
  const fs::path dir = paths.analysis();

  AnalyzeSummary summary;
  summary.results = results.size();
  const std::string unanalyzable_path = (dir / "unanalyzable.txt").string();

  BaselineRange range;
  try {
    range = baseline_range(results);
    summary.baseline_available = true;
  } catch (const InputError& e) {
    summary.unanalyzable.push_back(std::string("baseline: ") + e.what());
  }

  if (summary.baseline_available) {
    const Classified classified = classify_all(results, range, config.random_space().name);
    summary.verdicts = classified.verdicts.size();
    summary.unanalyzable.insert(summary.unanalyzable.end(), classified.unanalyzable.begin(),
                                classified.unanalyzable.end());
    const auto rows = aggregate(classified.verdicts, manifest, config.kg_name);
    write_file_atomically((dir / "baseline.csv").string(), [&](std::ostream& o) { write_baseline(o, range); });
    write_file_atomically((dir / "verdicts.csv").string(),
                          [&](std::ostream& o) { write_verdicts(o, classified.verdicts); });
    write_file_atomically((dir / "aggregate.csv").string(),
                          [&](std::ostream& o) { write_aggregate_csv(o, rows); });
    write_file_atomically((dir / "aggregate.txt").string(),
                          [&](std::ostream& o) { write_aggregate_table(o, rows); });
  }
  write_file_atomically((dir / "results.csv").string(), [&](std::ostream& o) {
    csv::write_row(o, kResultHeader);
    for (const auto& r : results) {
      std::ostringstream one;
      write_result(one, r);
      std::istringstream lines(one.str());
      std::string line;
      std::getline(lines, line);
      std::getline(lines, line);
      o << line << '\n';
    }
  });
  write_file_atomically(unanalyzable_path, [&](std::ostream& o) {
    for (const auto& u : summary.unanalyzable) o << u << '\n';
  });

  if (summary.baseline_available) {
    log << "baseline f1 range [" << csv::format_double(range.lower) << ", " << csv::format_double(range.upper)
        << "] from " << range.n_results << " runs\n";
  }
  log << summary.verdicts << " verdicts from " << summary.results << " results\n";
  for (const auto& u : summary.unanalyzable) log << "unanalyzable: " << u << '\n';
  return summary;
}

void cmd_report(const StudyConfig& config, std::ostream& out) {
  const StudyPaths paths{config.out_dir};
  auto dump = [&](const fs::path& p, const std::string& title) {
    std::ifstream in(p);
    if (!in) throw InputError("missing report input '" + p.string() + "'");
    out << "== " << title << " ==\n" << in.rdbuf() << '\n';
  };
  dump(paths.kg_summary(), "knowledge graph");
  dump(fs::path(paths.analysis()) / "baseline.csv", "baseline range");
  dump(fs::path(paths.analysis()) / "aggregate.txt", "overview");

  const auto table = csv::read_table((fs::path(paths.analysis()) / "verdicts.csv").string());
  const std::size_t col = table.column("classification");
  std::map<std::string, std::size_t> counts;
  for (const auto& row : table.rows) ++counts[row[col]];
  out << "== verdicts ==\n";
  for (const auto& [k, n] : counts) out << k << ": " << n << '\n';
}

std::vector<CheckLine> run_checks(std::uint64_t seed) {
  std::vector<CheckLine> lines;
  auto add = [&](std::string name, bool ok, std::string detail) {
    lines.push_back(CheckLine{std::move(name), ok, std::move(detail)});
  };
  TrainingConfig cfg;
  const auto tiny = ProbeArchitecture::tiny();
  const double err = gradient_check(tiny, cfg, seed);
  add("gradient_check", err <= 1e-3, "max relative error " + csv::format_double(err));
  const double broken = gradient_check(tiny, cfg, seed, BackwardFault::FlipHiddenSign);
  add("gradient_check_sensitivity", broken > 1e-1,
      "sign-flipped backward pass error " + csv::format_double(broken));

  const RunMetrics m = metrics_from_confusion(Confusion{3, 1, 2, 4});
  const bool metrics_ok = std::abs(m.precision - 0.75) <= 1e-12 && std::abs(m.recall - 0.6) <= 1e-12 &&
                          std::abs(m.f1 - 2.0 / 3.0) <= 1e-12 && std::abs(m.accuracy - 0.7) <= 1e-12;
  add("confusion_metrics", metrics_ok, "tp=3 fp=1 fn=2 tn=4");

  const double pooled[] = {0.4, 0.5, 0.6};
  const BaselineRange r = baseline_from_values(pooled);
  add("baseline_range", std::abs(r.lower - 0.3) <= 1e-12 && std::abs(r.upper - 0.7) <= 1e-12,
      "[" + csv::format_double(r.lower) + ", " + csv::format_double(r.upper) + "]");

  const bool sig_ok = significance({0.75, 0.02}, {0.55, 0.05}) == Significance::Better &&
                      significance({0.30, 0.03}, {0.55, 0.05}) == Significance::Worse &&
                      significance({0.5, 0.25}, {0.0, 0.0}) == Significance::NotSignificant &&
                      significance({0.0, 0.25}, {0.5, 0.0}) == Significance::NotSignificant;
  add("significance_table", sig_ok, "better, worse and strict boundaries");
  return lines;
}

}  // namespace relprobe
