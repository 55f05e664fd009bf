#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relprobe/dataset_forge.hpp"
#include "relprobe/prober.hpp"

namespace relprobe {

// [mean - 2 std, mean + 2 std] of a metric pooled over random-dataset runs.
// Closed interval.
struct BaselineRange {
  std::string metric = "f1";
  double lower = 0;
  double upper = 0;
  double source_mean = 0;
  double source_std = 0;
  std::size_t n_results = 0;

  bool contains(double v) const { return v >= lower && v <= upper; }
};

BaselineRange baseline_from_values(std::span<const double> pooled, std::string metric = "f1");

// Pools per-run values of `metric` (precision, recall, accuracy or f1) over
// every result on a random dataset. Needs at least 2 pooled values.
BaselineRange baseline_range(const std::vector<ExperimentResult>& results,
                             const std::string& metric = "f1");

// True when the random-embedding probe's mean f1 falls outside the range.
bool detect_bias(const ExperimentResult& random_embedding_result, const BaselineRange& range);

enum class Significance { Better, Worse, NotSignificant };

std::string_view significance_name(Significance s);

// Better when mean_s - mean_rand > 2 max(std_s, std_rand); Worse with the
// roles swapped. Strict inequality.
Significance significance(const MetricSummary& space_f1, const MetricSummary& random_f1);
Significance significance(const ExperimentResult& space_result, const ExperimentResult& random_result);

enum class Classification { BiasedDataset, NotSignificant, PredictableBetter, PredictableWorse };

std::string_view classification_name(Classification c);
Classification parse_classification(std::string_view text);

struct RelationVerdict {
  std::string dataset;
  std::string relation;
  std::string group;
  PairType pair_type = PairType::WordWord;
  std::string space;
  ProbeKind arch = ProbeKind::NN2;
  Classification classification = Classification::NotSignificant;
  // Absent for biased datasets.
  std::optional<double> mu_f1;
  std::optional<double> delta_mu_f1;
};

struct Classified {
  std::vector<RelationVerdict> verdicts;
  // Relation datasets lacking a random-embedding result, with the reason.
  std::vector<std::string> unanalyzable;
};

// Results on random datasets form the baseline and get no verdict; results of
// the random-embedding space itself are the per-dataset reference.
Classified classify_all(const std::vector<ExperimentResult>& results, const BaselineRange& range,
                        const std::string& random_space);

struct AggregateRow {
  std::string group;      // "all" for roll-up rows
  std::string pair_type;  // pair type name, or "all"
  std::string kg;
  std::size_t n_datasets = 0;
  std::size_t n_biased = 0;  // datasets
  std::size_t n_models = 0;
  std::size_t n_not_signif = 0, n_better = 0, n_worse = 0, n_biased_models = 0;
  double pct_biased = 0, pct_not_signif = 0, pct_better = 0, pct_worse = 0;
  // Over predictable_better verdicts only; absent when there are none.
  std::optional<double> mean_mu_f1;
  std::optional<double> mean_delta_mu_f1;
};

// Rows: all/all, all/<pair type>..., then <group>/<pair type>. Dataset
// counts come from the manifest's ok rows.
std::vector<AggregateRow> aggregate(const std::vector<RelationVerdict>& verdicts,
                                    const std::vector<ManifestRow>& manifest,
                                    const std::string& kg_name);

void write_baseline(std::ostream& out, const BaselineRange& range);
void write_verdicts(std::ostream& out, const std::vector<RelationVerdict>& verdicts);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);
// Plain-text aligned table in the column order of the CSV.
void write_aggregate_table(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace relprobe
