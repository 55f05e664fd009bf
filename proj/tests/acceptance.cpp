// One PASS/FAIL line per acceptance criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "relprobe/csv.hpp"
#include "relprobe/pipeline.hpp"
#include "relprobe/synthetic.hpp"

using namespace relprobe;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ok = o.passed;
  std::string detail = o.detail;
  if (limit_s > 0 && secs >= limit_s) {
    ok = false;
    detail += "; over the time limit";
  }
  if (!ok) ++failures;
  std::printf("criterion %d: %s  %s (%s; %.2fs", n, ok ? "PASS" : "FAIL", name.c_str(), detail.c_str(), secs);
  if (limit_s > 0) std::printf(" of %.0fs", limit_s);
  std::printf(")\n");
  std::fflush(stdout);
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("relprobe_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// First result whose dataset or relation is `name`, on `space`.
const ExperimentResult* find(const std::vector<ExperimentResult>& rs, const std::string& name,
                             const std::string& space) {
  for (const auto& r : rs) {
    if ((r.dataset == name || r.relation == name) && r.space == space) return &r;
  }
  return nullptr;
}

// Shared synthetic study for criteria 2-4.
struct SyntheticRun {
  StudyConfig config;
  std::ostringstream log;

  std::vector<ExperimentResult> results() const {
    return read_results(StudyPaths{config.out_dir}.results());
  }
  void train(const std::string& glob) {
    TrainOptions opt;
    opt.relation_glob = glob;
    auto t = cmd_train(config, opt, log);
    if (!t.failures.empty()) throw std::runtime_error("training failed: " + t.failures.front());
  }
};

Outcome criterion1() {
  for (const auto& line : run_checks(1)) {
    if (line.name == "gradient_check") return {line.passed, line.detail};
  }
  return {false, "no gradient check reported"};
}

Outcome criterion4(SyntheticRun& s) {
  s.train("random_*");
  const auto results = s.results();
  const auto range = baseline_range(results);
  std::set<std::string> datasets;
  std::size_t better = 0;
  for (const auto& r : results) {
    if (!r.dataset_is_random || r.space == "random") continue;
    datasets.insert(r.dataset);
    const auto* ref = find(results, r.dataset, "random");
    if (ref && significance(r, *ref) == Significance::Better) ++better;
  }
  const bool ok = datasets.size() == 12 && range.source_mean >= 0.25 && range.source_mean <= 0.65 && better <= 1;
  return {ok, "pooled mu_f1 " + fmt(range.source_mean) + " over " + std::to_string(range.n_results) +
                  " runs, sigma " + fmt(range.source_std) + ", " + std::to_string(better) + "/" +
                  std::to_string(datasets.size()) + " random datasets predictable_better"};
}

Outcome criterion2(SyntheticRun& s) {
  s.train("planted");
  const auto results = s.results();
  const auto range = baseline_range(results);
  const auto* real = find(results, "planted", "planted");
  const auto* rnd = find(results, "planted", "random");
  if (!real || !rnd) return {false, "missing planted results"};
  const auto classified = classify_all(results, range, "random");
  std::string verdict = "none";
  for (const auto& v : classified.verdicts) {
    if (v.relation == "planted" && v.space == "planted") verdict = classification_name(v.classification);
  }
  const bool ok = real->runs.size() == 3 && real->f1.mean >= 0.90 && range.contains(rnd->f1.mean) &&
                  verdict == "predictable_better";
  return {ok, "planted mu_f1 " + fmt(real->f1.mean) + ", random-embedding mu_f1 " + fmt(rnd->f1.mean) +
                  " in [" + fmt(range.lower) + ", " + fmt(range.upper) + "], verdict " + verdict};
}

Outcome criterion3(SyntheticRun& s) {
  s.train("identity");
  const auto results = s.results();
  const auto range = baseline_range(results);
  const auto* rnd = find(results, "identity", "random");
  if (!rnd) return {false, "missing identity results"};
  const auto classified = classify_all(results, range, "random");
  std::string verdict = "none";
  for (const auto& v : classified.verdicts) {
    if (v.relation == "identity" && v.space == "planted") verdict = classification_name(v.classification);
  }
  const bool ok = detect_bias(*rnd, range) && rnd->f1.mean > range.upper && verdict == "biased_dataset";
  return {ok, "random-embedding mu_f1 " + fmt(rnd->f1.mean) + " vs upper bound " + fmt(range.upper) +
                  ", verdict " + verdict};
}

// 30 concept-level hypernymy triples over c0..c19 plus one word per concept.
Outcome criterion5() {
  std::vector<RawTriple> raw;
  for (int i = 0; i < 20; ++i) {
    raw.push_back({"hyp", NodeId::concept_node("c" + std::to_string(i)),
                   NodeId::concept_node("c" + std::to_string((3 * i + 1) % 20))});
  }
  for (int i = 0; i < 10; ++i) {
    raw.push_back({"hyp", NodeId::concept_node("c" + std::to_string(i)),
                   NodeId::concept_node("c" + std::to_string(i + 10))});
  }
  for (int i = 0; i < 20; ++i) {
    raw.push_back({"rw", NodeId::word_node("w" + std::to_string(i)), NodeId::concept_node("c" + std::to_string(i))});
  }
  const auto kg = KnowledgeGraph::from_triples(raw, "rw");
  SeedVocabulary seed;
  for (const auto& n : kg.nodes()) seed.by_kind[static_cast<int>(n.kind)].push_back(n);
  for (auto& v : seed.by_kind) std::sort(v.begin(), v.end());

  ForgeConfig cfg;
  cfg.master_seed = 5;
  cfg.min_total = 40;
  cfg.random_sizes = {10};
  cfg.default_pair_types = {PairType::ConceptConcept, PairType::WordWord, PairType::WordConcept};
  const auto out = forge_all(kg, seed, cfg);

  // Exhaustive oracle: project every hyp triple through rw.
  std::map<NodeId, NodeId> word_of;
  for (const auto& t : raw) {
    if (t.relation == "rw") word_of[t.object] = t.subject;
  }
  std::size_t checked = 0, relation_sets = 0;
  for (const auto& ds : out.datasets) {
    if (ds.is_random) continue;
    ++relation_sets;
    std::set<std::pair<NodeId, NodeId>> truth;
    for (const auto& t : raw) {
      if (t.relation != "hyp") continue;
      const NodeId s = ds.pair_type == PairType::ConceptConcept ? t.subject : word_of.at(t.subject);
      const NodeId o = ds.pair_type == PairType::WordWord ? word_of.at(t.object) : t.object;
      truth.insert({s, o});
    }
    std::set<NodeId> subjects, objects;
    std::size_t pos = 0, neg = 0;
    for (const auto& s : ds.samples) {
      if (s.label == 1) {
        if (!truth.count({s.subject, s.object})) return {false, ds.name + ": unexpected positive"};
        subjects.insert(s.subject);
        objects.insert(s.object);
        ++pos;
      } else {
        ++neg;
      }
    }
    if (pos != truth.size()) return {false, ds.name + ": positives incomplete"};
    for (const auto& s : ds.samples) {
      if (s.label != 0) continue;
      ++checked;
      if (truth.count({s.subject, s.object})) return {false, ds.name + ": negative is a positive"};
      if (!subjects.count(s.subject) || !objects.count(s.object)) return {false, ds.name + ": closure violated"};
    }
    if ((pos > neg ? pos - neg : neg - pos) > 1) return {false, ds.name + ": unbalanced"};
  }
  return {relation_sets == 3 && raw.size() == 50,
          std::to_string(checked) + " negatives over " + std::to_string(relation_sets) + " datasets"};
}

Outcome criterion6() {
  struct Fixture {
    Confusion c;
    double p, r, f1, acc;
  };
  const Fixture fixtures[] = {
      {{3, 1, 2, 4}, 0.75, 0.6, 2.0 / 3.0, 0.7},
      {{10, 0, 0, 10}, 1, 1, 1, 1},
      {{0, 5, 5, 0}, 0, 0, 0, 0},
      {{0, 0, 4, 6}, 0, 0, 0, 0.6},
      {{7, 3, 1, 9}, 0.7, 0.875, 2 * 0.7 * 0.875 / 1.575, 0.8},
  };
  for (const auto& f : fixtures) {
    const auto m = metrics_from_confusion(f.c);
    if (std::abs(m.precision - f.p) > 1e-12 || std::abs(m.recall - f.r) > 1e-12 || std::abs(m.f1 - f.f1) > 1e-12 ||
        std::abs(m.accuracy - f.acc) > 1e-12) {
      return {false, "confusion fixture mismatch"};
    }
  }
  const double pooled[] = {0.4, 0.5, 0.6};
  const auto range = baseline_from_values(pooled);
  if (std::abs(range.lower - 0.3) > 1e-12 || std::abs(range.upper - 0.7) > 1e-12) {
    return {false, "range [" + fmt(range.lower, 15) + ", " + fmt(range.upper, 15) + "]"};
  }
  struct Row {
    MetricSummary a, b;
    Significance expected;
  };
  const Row table[] = {
      {{0.75, 0.02}, {0.55, 0.05}, Significance::Better},
      {{0.30, 0.03}, {0.55, 0.05}, Significance::Worse},
      {{0.60, 0.05}, {0.55, 0.05}, Significance::NotSignificant},
      {{0.5, 0.25}, {0.0, 0.0}, Significance::NotSignificant},
      {{0.0, 0.25}, {0.5, 0.0}, Significance::NotSignificant},
      {{0.5, 0.0}, {0.0, 0.25}, Significance::NotSignificant},
      {{0.5000001, 0.0}, {0.0, 0.25}, Significance::Better},
      {{0.0, 0.25}, {0.5000001, 0.0}, Significance::Worse},
      {{0.5, 0.0}, {0.5, 0.0}, Significance::NotSignificant},
  };
  for (const auto& row : table) {
    if (significance(row.a, row.b) != row.expected) return {false, "significance table mismatch"};
  }
  return {true, "5 confusion fixtures, range [0.3, 0.7], 9 significance rows"};
}

Outcome criterion7() {
  const TrainingConfig cfg;
  const std::size_t sizes[] = {250, 4000, 20000, 60000};
  const std::size_t expected[] = {48, 24, 12, 6};
  std::string got;
  bool ok = true;
  for (int i = 0; i < 4; ++i) {
    const auto e = epochs_for(cfg, sizes[i]);
    ok = ok && e == expected[i];
    got += (i ? "/" : "") + std::to_string(e);
  }
  return {ok, "epochs " + got};
}

Outcome criterion8() {
  SyntheticOptions opt;
  opt.n_pairs = 150;
  opt.identity_nodes = 80;
  opt.random_sizes = {50, 100};
  opt.random_repeats = 2;
  opt.runs = 2;
  auto files = [](const StudyConfig& cfg) {
    const auto dir = fs::path(StudyPaths{cfg.out_dir}.analysis());
    return slurp(dir / "verdicts.csv") + "\x1f" + slurp(dir / "aggregate.csv") + "\x1f" + slurp(dir / "aggregate.txt");
  };
  auto run = [&](const std::string& name, const std::vector<TrainOptions>& passes) {
    auto cfg = write_synthetic_study(fresh_dir(name).string(), opt);
    std::ostringstream log;
    cmd_gen(cfg, log);
    for (const auto& p : passes) cmd_train(cfg, p, log);
    cmd_analyze(cfg, log);
    return files(cfg);
  };
  TrainOptions serial;
  TrainOptions interrupted;
  interrupted.max_tasks = 5;
  TrainOptions wide;
  wide.jobs = 8;
  const auto a = run("det_serial", {serial});
  const auto b = run("det_resumed", {interrupted, serial});
  const auto c = run("det_jobs8", {wide});
  const bool ok = !a.empty() && a == b && a == c;
  return {ok, std::string("resumed ") + (a == b ? "identical" : "differs") + ", jobs 8 " +
                  (a == c ? "identical" : "differs")};
}

}  // namespace

int main() {
  report(1, "gradient correctness", 10, criterion1);

  SyntheticRun study;
  study.config = write_synthetic_study(fresh_dir("synthetic").string(), SyntheticOptions{});
  cmd_gen(study.config, study.log);
  // The baseline needs the random datasets, so they train first.
  report(4, "null behavior", 300, [&] { return criterion4(study); });
  report(2, "planted-relation recovery", 180, [&] { return criterion2(study); });
  report(3, "bias detection", 120, [&] { return criterion3(study); });

  report(5, "negative-switching soundness", 1, criterion5);
  report(6, "metric and statistics oracles", 0, criterion6);
  report(7, "epoch tiers", 0, criterion7);
  report(8, "determinism and resumability", 0, criterion8);
  return failures == 0 ? 0 : 1;
}
