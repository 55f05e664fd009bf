#include "relprobe/verdict.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "relprobe/csv.hpp"
#include "relprobe/error.hpp"

namespace relprobe {

BaselineRange baseline_from_values(std::span<const double> pooled, std::string metric) {
  if (pooled.size() < 2) {
    throw InputError("baseline range needs at least 2 pooled values, got " + std::to_string(pooled.size()));
  }
  auto s = summarize(pooled);
  BaselineRange r;
  r.metric = std::move(metric);
  r.source_mean = s.mean;
  r.source_std = s.std;
  r.lower = s.mean - 2 * s.std;
  r.upper = s.mean + 2 * s.std;
  r.n_results = pooled.size();
  return r;
}

BaselineRange baseline_range(const std::vector<ExperimentResult>& results, const std::string& metric) {
  double RunMetrics::*field = nullptr;
  if (metric == "f1") field = &RunMetrics::f1;
  else if (metric == "precision") field = &RunMetrics::precision;
  else if (metric == "recall") field = &RunMetrics::recall;
  else if (metric == "accuracy") field = &RunMetrics::accuracy;
  else throw InputError("unknown metric '" + metric + "'");
  std::vector<double> pooled;
  for (const auto& r : results) {
    if (!r.dataset_is_random) continue;
    for (const auto& run : r.runs) pooled.push_back(run.*field);
  }
  return baseline_from_values(pooled, metric);
}

bool detect_bias(const ExperimentResult& random_embedding_result, const BaselineRange& range) {
  return !range.contains(random_embedding_result.f1.mean);
}

std::string_view significance_name(Significance s) {
  switch (s) {
    case Significance::Better: return "better";
    case Significance::Worse: return "worse";
    case Significance::NotSignificant: return "not_significant";
  }
  return "?";
}

Significance significance(const MetricSummary& space_f1, const MetricSummary& random_f1) {
  const double margin = 2 * std::max(space_f1.std, random_f1.std);
  if (space_f1.mean - random_f1.mean > margin) return Significance::Better;
  if (random_f1.mean - space_f1.mean > margin) return Significance::Worse;
  return Significance::NotSignificant;
}

Significance significance(const ExperimentResult& space_result, const ExperimentResult& random_result) {
  if (space_result.dataset != random_result.dataset) {
    throw InputError("significance compares results on different datasets ('" + space_result.dataset +
                     "' vs '" + random_result.dataset + "')");
  }
  return significance(space_result.f1, random_result.f1);
}

std::string_view classification_name(Classification c) {
  switch (c) {
    case Classification::BiasedDataset: return "biased_dataset";
    case Classification::NotSignificant: return "not_significant";
    case Classification::PredictableBetter: return "predictable_better";
    case Classification::PredictableWorse: return "predictable_worse";
  }
  return "?";
}

Classification parse_classification(std::string_view text) {
  for (auto c : {Classification::BiasedDataset, Classification::NotSignificant,
                 Classification::PredictableBetter, Classification::PredictableWorse}) {
    if (classification_name(c) == text) return c;
  }
  throw InputError("unknown classification '" + std::string(text) + "'");
}

Classified classify_all(const std::vector<ExperimentResult>& results, const BaselineRange& range,
                        const std::string& random_space) {
  // (dataset, arch) -> random-embedding result
  std::map<std::pair<std::string, ProbeKind>, const ExperimentResult*> reference;
  for (const auto& r : results) {
    if (!r.dataset_is_random && r.space == random_space) reference[{r.dataset, r.arch}] = &r;
  }
  std::vector<const ExperimentResult*> ordered;
  for (const auto& r : results) {
    if (!r.dataset_is_random && r.space != random_space) ordered.push_back(&r);
  }
  std::sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return std::tie(a->dataset, a->space, a->arch) < std::tie(b->dataset, b->space, b->arch);
  });

  Classified out;
  std::set<std::string> missing;
  for (const auto* r : ordered) {
    auto it = reference.find({r->dataset, r->arch});
    if (it == reference.end()) {
      missing.insert(r->dataset + " (" + std::string(probe_kind_name(r->arch)) +
                     "): no result for random-embedding space '" + random_space + "'");
      continue;
    }
    const ExperimentResult& ref = *it->second;
    RelationVerdict v;
    v.dataset = r->dataset;
    v.relation = r->relation;
    v.group = r->group;
    v.pair_type = r->pair_type;
    v.space = r->space;
    v.arch = r->arch;
    if (detect_bias(ref, range)) {
      v.classification = Classification::BiasedDataset;
    } else {
      v.mu_f1 = r->f1.mean;
      v.delta_mu_f1 = r->f1.mean - ref.f1.mean;
      switch (significance(*r, ref)) {
        case Significance::Better: v.classification = Classification::PredictableBetter; break;
        case Significance::Worse: v.classification = Classification::PredictableWorse; break;
        case Significance::NotSignificant: v.classification = Classification::NotSignificant; break;
      }
    }
    out.verdicts.push_back(std::move(v));
  }
  out.unanalyzable.assign(missing.begin(), missing.end());
  return out;
}

namespace {

std::string group_label(const std::string& group, const std::string& relation) {
  return group.empty() ? relation : group;
}

void finish(AggregateRow& row, const std::vector<const RelationVerdict*>& vs,
            const std::set<std::string>& generated) {
  std::set<std::string> biased;
  double sum_mu = 0, sum_delta = 0;
  for (const auto* v : vs) {
    switch (v->classification) {
      case Classification::BiasedDataset:
        ++row.n_biased_models;
        biased.insert(v->dataset);
        break;
      case Classification::NotSignificant: ++row.n_not_signif; break;
      case Classification::PredictableBetter:
        ++row.n_better;
        sum_mu += *v->mu_f1;
        sum_delta += *v->delta_mu_f1;
        break;
      case Classification::PredictableWorse: ++row.n_worse; break;
    }
  }
  row.n_models = vs.size();
  row.n_datasets = generated.size();
  row.n_biased = biased.size();
  if (row.n_models) {
    const double n = static_cast<double>(row.n_models);
    row.pct_biased = 100.0 * static_cast<double>(row.n_biased_models) / n;
    row.pct_not_signif = 100.0 * static_cast<double>(row.n_not_signif) / n;
    row.pct_better = 100.0 * static_cast<double>(row.n_better) / n;
    row.pct_worse = 100.0 * static_cast<double>(row.n_worse) / n;
  }
  if (row.n_better) {
    row.mean_mu_f1 = sum_mu / static_cast<double>(row.n_better);
    row.mean_delta_mu_f1 = sum_delta / static_cast<double>(row.n_better);
  }
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RelationVerdict>& verdicts,
                                    const std::vector<ManifestRow>& manifest,
                                    const std::string& kg_name) {
  using Key = std::pair<std::string, PairType>;
  std::map<Key, std::set<std::string>> generated;
  std::map<PairType, std::set<std::string>> generated_by_pt;
  std::set<std::string> generated_all;
  for (const auto& m : manifest) {
    if (m.status != "ok" || m.group == "random") continue;
    generated[{group_label(m.group, m.relation), m.pair_type}].insert(m.dataset);
    generated_by_pt[m.pair_type].insert(m.dataset);
    generated_all.insert(m.dataset);
  }
  std::map<Key, std::vector<const RelationVerdict*>> by_group;
  std::map<PairType, std::vector<const RelationVerdict*>> by_pt;
  std::vector<const RelationVerdict*> all;
  for (const auto& v : verdicts) {
    Key k{group_label(v.group, v.relation), v.pair_type};
    by_group[k].push_back(&v);
    by_pt[v.pair_type].push_back(&v);
    all.push_back(&v);
    generated[k];
  }

  std::vector<AggregateRow> rows;
  auto row = [&](std::string group, std::string_view pt) {
    AggregateRow r;
    r.group = std::move(group);
    r.pair_type = std::string(pt);
    r.kg = kg_name;
    return r;
  };
  AggregateRow total = row("all", "all");
  finish(total, all, generated_all);
  rows.push_back(total);
  for (PairType pt : kAllPairTypes) {
    if (!by_pt.count(pt) && !generated_by_pt.count(pt)) continue;
    AggregateRow r = row("all", pair_type_name(pt));
    finish(r, by_pt[pt], generated_by_pt[pt]);
    rows.push_back(r);
  }
  for (const auto& [key, datasets] : generated) {
    AggregateRow r = row(key.first, pair_type_name(key.second));
    finish(r, by_group[key], datasets);
    rows.push_back(r);
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string opt_fixed(const std::optional<double>& v, int digits) {
  return v ? fixed(*v, digits) : std::string();
}

}  // namespace

void write_baseline(std::ostream& out, const BaselineRange& range) {
  csv::write_row(out, {"metric", "mean", "std", "lower", "upper", "n_results"});
  csv::write_row(out, {range.metric, csv::format_double(range.source_mean),
                       csv::format_double(range.source_std), csv::format_double(range.lower),
                       csv::format_double(range.upper), std::to_string(range.n_results)});
}

void write_verdicts(std::ostream& out, const std::vector<RelationVerdict>& verdicts) {
  csv::write_row(out, {"dataset", "relation", "group", "pair_type", "space", "arch", "classification",
                       "mu_f1", "delta_mu_f1"});
  for (const auto& v : verdicts) {
    csv::write_row(out, {v.dataset, v.relation, v.group, std::string(pair_type_name(v.pair_type)), v.space,
                         std::string(probe_kind_name(v.arch)),
                         std::string(classification_name(v.classification)), opt_fixed(v.mu_f1, 6),
                         opt_fixed(v.delta_mu_f1, 6)});
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  csv::write_row(out, {"group", "pair_type", "kg", "n_datasets", "n_biased", "n_models", "pct_biased",
                       "pct_not_signif", "pct_better", "pct_worse", "mean_mu_f1", "mean_delta_mu_f1"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.group, r.pair_type, r.kg, std::to_string(r.n_datasets), std::to_string(r.n_biased),
                         std::to_string(r.n_models), fixed(r.pct_biased, 1), fixed(r.pct_not_signif, 1),
                         fixed(r.pct_better, 1), fixed(r.pct_worse, 1), opt_fixed(r.mean_mu_f1, 3),
                         opt_fixed(r.mean_delta_mu_f1, 3)});
  }
}

void write_aggregate_table(std::ostream& out, const std::vector<AggregateRow>& rows) {
  auto label = [](const AggregateRow& r) -> std::string {
    if (r.pair_type == "all") return r.group;
    const PairType pt = parse_pair_type(r.pair_type);
    if (r.group == "all") {
      switch (pt) {
        case PairType::ConceptConcept: return "concept";
        case PairType::WordConcept: return "word/concept";
        case PairType::WordWord: return "word";
        case PairType::Unary: return "unary";
      }
    }
    return r.group + "_" + std::string(pair_type_code(pt));
  };
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"dataset rel", "KG", "#", "# biased", "#", "% biased", "% not signif.", "% better",
                   "% worse", "mu_f1", "delta_mu_f1"});
  for (const auto& r : rows) {
    cells.push_back({label(r), r.kg, std::to_string(r.n_datasets), std::to_string(r.n_biased),
                     std::to_string(r.n_models), fixed(r.pct_biased, 1), fixed(r.pct_not_signif, 1),
                     fixed(r.pct_better, 1), fixed(r.pct_worse, 1), opt_fixed(r.mean_mu_f1, 3),
                     opt_fixed(r.mean_delta_mu_f1, 3)});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      // First two columns left-aligned, numbers right-aligned.
      std::string pad(width[i] - row[i].size(), ' ');
      line += i < 2 ? row[i] + pad : pad + row[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  };
  emit(cells[0]);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out << std::string(total - 2, '-') << '\n';
  for (std::size_t i = 1; i < cells.size(); ++i) emit(cells[i]);
}

}  // namespace relprobe
