#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "relprobe/error.hpp"
#include "relprobe/pipeline.hpp"
#include "relprobe/study_config.hpp"

using namespace relprobe;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::size_t> jobs;
  std::string filter_relation;
  std::string filter_space;
  std::optional<std::uint64_t> seed;
};

StudyConfig load(const Options& o) {
  StudyConfig cfg = load_study_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.seed) cfg.master_seed = *o.seed;
  if (cfg.jobs == 0) throw InputError("--jobs must be positive");
  return cfg;
}

int run_gen(const Options& o) {
  cmd_gen(load(o), std::cout);
  return kExitOk;
}

int run_train(const Options& o) {
  const StudyConfig cfg = load(o);
  TrainOptions t;
  t.relation_glob = o.filter_relation;
  t.space_filter = o.filter_space;
  t.jobs = cfg.jobs;
  const TrainSummary s = cmd_train(cfg, t, std::cout);
  return s.failures.empty() ? kExitOk : kExitTaskFailures;
}

int run_analyze(const Options& o) {
  const AnalyzeSummary s = cmd_analyze(load(o), std::cout);
  return s.baseline_available && s.unanalyzable.empty() ? kExitOk : kExitIncompleteBaselines;
}

int run_report(const Options& o) {
  cmd_report(load(o), std::cout);
  return kExitOk;
}

int run_check(const Options& o) {
  bool ok = true;
  for (const auto& line : run_checks(o.seed.value_or(1))) {
    std::cout << (line.passed ? "PASS " : "FAIL ") << line.name << ": " << line.detail << '\n';
    ok = ok && line.passed;
  }
  return ok ? kExitOk : kExitTaskFailures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relprobe: probe embedding spaces for knowledge-graph relations"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "study configuration (JSON)");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides out_dir)");
    sub->add_option("--seed", o.seed, "master seed (overrides master_seed)");
  };

  auto* gen = app.add_subcommand("gen", "generate datasets, manifest and KG summary");
  add_common(gen, true);
  auto* train = app.add_subcommand("train", "train probes for every covered (dataset, space) pair");
  add_common(train, true);
  train->add_option("--jobs", o.jobs, "parallel training tasks")->check(CLI::PositiveNumber);
  train->add_option("--filter-relation", o.filter_relation, "only relations matching this glob");
  train->add_option("--filter-space", o.filter_space, "only this space");
  auto* analyze = app.add_subcommand("analyze", "baseline range, verdicts and aggregate report");
  add_common(analyze, true);
  auto* report = app.add_subcommand("report", "print the analysis reports");
  add_common(report, true);
  auto* check = app.add_subcommand("check", "gradient check and fixture oracles");
  check->add_option("--seed", o.seed, "probe seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*gen) return run_gen(o);
    if (*train) return run_train(o);
    if (*analyze) return run_analyze(o);
    if (*report) return run_report(o);
    if (*check) return run_check(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTaskFailures;
  }
  return kExitInput;
}
