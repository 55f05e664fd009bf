#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relprobe/dataset_forge.hpp"
#include "relprobe/embedding_store.hpp"
#include "relprobe/mlp.hpp"

namespace relprobe {

// Datasets with fewer than max_positives positives train for `epochs`.
struct EpochTier {
  std::size_t max_positives;
  std::size_t epochs;
};

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

struct TrainingConfig {
  double learning_rate = 1e-5;
  double dropout = 0.5;
  std::vector<EpochTier> epoch_tiers = {{300, 48}, {5000, 24}, {30000, 12}, {kUnbounded, 6}};
  std::size_t batch_size = 64;
  std::size_t runs = 3;
  PlateauParams scheduler;
  AdamParams adam;
  bool perturbation = true;  // training only; evaluation never perturbs

  // Throws InputError on an inconsistent configuration.
  void validate() const;
};

std::size_t epochs_for(const TrainingConfig& cfg, std::size_t positives);

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct RunMetrics {
  double precision = 0, recall = 0, accuracy = 0, f1 = 0;
  std::size_t run_index = 0;
  std::size_t final_epoch = 0;
};

// Positive-class precision/recall/f1 (0 when undefined) and overall accuracy.
RunMetrics metrics_from_confusion(const Confusion& c);

struct MetricSummary {
  double mean = 0;
  double std = 0;  // sample (n-1) standard deviation; 0 for a single run
};

MetricSummary summarize(std::span<const double> values);

struct ExperimentResult {
  std::string dataset;
  std::string relation;
  std::string group;
  PairType pair_type = PairType::WordWord;
  bool dataset_is_random = false;
  std::string space;
  ProbeKind arch = ProbeKind::NN2;
  std::vector<RunMetrics> runs;
  MetricSummary precision, recall, accuracy, f1;

  // Fills the summaries from `runs`.
  void aggregate();
};

// (subject + v) followed by (object + v); unary inputs are subject + v only.
// An empty v means no perturbation.
std::vector<double> compose_input(const EmbeddingSpace& space, const Sample& s,
                                  std::span<const double> v = {}, bool unary = false);

// One vector per mini-batch, components uniform on [-sigma, sigma] where
// sigma is the space's component standard deviation.
std::vector<double> draw_perturbation(const EmbeddingSpace& space, Rng& rng);

ProbeArchitecture architecture_for(ProbeKind kind, const EmbeddingSpace& space, PairType pt);

struct TrainingTrace {
  std::vector<double> train_loss;  // mean per epoch
  std::vector<double> val_loss;
  std::vector<double> learning_rate;  // rate used during each epoch
};

struct TrainedProbe {
  Mlp model;
  RunMetrics metrics;
  TrainingTrace trace;
};

TrainedProbe train_probe(const RelationDataset& dataset, const EmbeddingSpace& space,
                         const ProbeArchitecture& arch, const TrainingConfig& cfg,
                         std::uint64_t run_seed);

// Metrics on the dataset's test split, without perturbation or dropout.
RunMetrics evaluate(const Mlp& model, const RelationDataset& dataset, const EmbeddingSpace& space);

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& dataset,
                       const std::string& space, ProbeKind arch, std::size_t run);

ExperimentResult run_experiment(const RelationDataset& dataset, const EmbeddingSpace& space,
                                ProbeKind arch, const TrainingConfig& cfg,
                                std::uint64_t master_seed);

// Max relative error between backprop gradients of the cross-entropy loss
// and central finite differences (step 1e-4), dropout off, on one random
// batch. Relative error is |a - n| / max(|a|, |n|, 1e-6).
double gradient_check(const ProbeArchitecture& arch, const TrainingConfig& cfg,
                      std::uint64_t probe_seed, BackwardFault fault = BackwardFault::None);

}  // namespace relprobe
