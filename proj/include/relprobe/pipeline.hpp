#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relprobe/embedding_store.hpp"
#include "relprobe/kg_store.hpp"
#include "relprobe/prober.hpp"
#include "relprobe/study_config.hpp"
#include "relprobe/verdict.hpp"

namespace relprobe {

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitIncompleteBaselines = 3, kExitTaskFailures = 4 };

struct LoadedSpace {
  EmbeddingSpace space;
  KindSet covers;
  bool is_random = false;
};

// Everything derived from the config's input files. The random space is
// synthesized over the seed vocabulary unless a file is supplied for it.
struct Study {
  StudyConfig config;
  KnowledgeGraph kg;
  std::vector<LoadedSpace> spaces;
  SeedVocabulary seed;

  const LoadedSpace& random_space() const;
};

// Throws InputError naming the offending file.
Study load_study(const StudyConfig& config);

// Output layout below config.out_dir.
struct StudyPaths {
  std::string root;
  std::string datasets() const;
  std::string manifest() const;
  std::string kg_summary() const;
  std::string seed_vocab() const;
  std::string results() const;
  std::string analysis() const;
};

struct GenSummary {
  std::size_t datasets = 0;
  std::size_t skipped = 0;
};

GenSummary cmd_gen(const StudyConfig& config, std::ostream& log);

struct TrainOptions {
  std::string relation_glob;  // empty matches everything
  std::string space_filter;   // exact space name; empty matches everything
  std::size_t jobs = 1;
  // Stop scheduling after this many trainings; simulates an interrupted run.
  std::optional<std::size_t> max_tasks;
};

struct TrainSummary {
  std::size_t planned = 0;
  std::size_t trained = 0;
  std::size_t already_present = 0;
  std::size_t not_covered = 0;
  std::vector<std::string> failures;
};

TrainSummary cmd_train(const StudyConfig& config, const TrainOptions& options, std::ostream& log);

struct AnalyzeSummary {
  std::size_t results = 0;
  std::size_t verdicts = 0;
  std::vector<std::string> unanalyzable;
  bool baseline_available = false;
};

AnalyzeSummary cmd_analyze(const StudyConfig& config, std::ostream& log);

// Prints the KG summary, the aggregate table and verdict counts.
void cmd_report(const StudyConfig& config, std::ostream& out);

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Gradient check on the tiny probe plus fixture oracles.
std::vector<CheckLine> run_checks(std::uint64_t seed);

std::string result_file_name(const std::string& dataset, const std::string& space, ProbeKind arch);
void write_result(std::ostream& out, const ExperimentResult& r);
ExperimentResult read_result(const std::string& path);
std::vector<ExperimentResult> read_results(const std::string& dir);

// Shell-style glob match ('*', '?', '[...]').
bool glob_match(const std::string& pattern, const std::string& text);

}  // namespace relprobe
