#include "relprobe/prober.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "relprobe/error.hpp"

namespace relprobe {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0)) throw InputError("learning_rate must be positive");
  if (dropout < 0 || dropout >= 1) throw InputError("dropout must be in [0, 1)");
  if (batch_size == 0) throw InputError("batch_size must be positive");
  if (runs == 0) throw InputError("runs must be at least 1");
  if (epoch_tiers.empty()) throw InputError("epoch_tiers must not be empty");
  for (std::size_t i = 1; i < epoch_tiers.size(); ++i) {
    if (epoch_tiers[i].max_positives <= epoch_tiers[i - 1].max_positives) {
      throw InputError("epoch_tiers must be strictly increasing in max_positives");
    }
  }
  if (epoch_tiers.back().max_positives != kUnbounded) {
    throw InputError("the last epoch tier must be unbounded");
  }
  if (scheduler.factor <= 0 || scheduler.factor >= 1) throw InputError("scheduler factor must be in (0, 1)");
  if (scheduler.min_lr > learning_rate) throw InputError("scheduler min_lr exceeds learning_rate");
}

std::size_t epochs_for(const TrainingConfig& cfg, std::size_t positives) {
  for (const auto& t : cfg.epoch_tiers) {
    if (positives < t.max_positives) return t.epochs;
  }
  return cfg.epoch_tiers.back().epochs;
}

RunMetrics metrics_from_confusion(const Confusion& c) {
  RunMetrics m;
  const double tp = static_cast<double>(c.tp);
  const std::size_t total = c.tp + c.fp + c.fn + c.tn;
  m.precision = c.tp + c.fp ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
  m.recall = c.tp + c.fn ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
  m.accuracy = total ? static_cast<double>(c.tp + c.tn) / static_cast<double>(total) : 0.0;
  const double denom = m.precision + m.recall;
  m.f1 = denom > 0 ? 2.0 * m.precision * m.recall / denom : 0.0;
  return m;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void ExperimentResult::aggregate() {
  auto collect = [&](double RunMetrics::*field) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.*field);
    return summarize(v);
  };
  precision = collect(&RunMetrics::precision);
  recall = collect(&RunMetrics::recall);
  accuracy = collect(&RunMetrics::accuracy);
  f1 = collect(&RunMetrics::f1);
}

namespace {

// Space rows of each sample, resolved once per (dataset, space).
struct ResolvedSamples {
  std::vector<std::uint32_t> subject;
  std::vector<std::uint32_t> object;
  std::vector<int> label;
};

ResolvedSamples resolve(const RelationDataset& ds, const EmbeddingSpace& space) {
  ResolvedSamples r;
  const bool unary = ds.pair_type == PairType::Unary;
  for (const auto& s : ds.samples) {
    auto si = space.index_of(s.subject);
    auto oi = unary ? std::optional<std::uint32_t>(0) : space.index_of(s.object);
    if (!si || !oi) {
      const NodeId& missing = si ? s.object : s.subject;
      throw InputError("dataset '" + ds.name + "': node '" + missing.str() +
                       "' is not in the vocabulary of space '" + space.name() + "'");
    }
    r.subject.push_back(*si);
    r.object.push_back(*oi);
    r.label.push_back(s.label);
  }
  return r;
}

void fill_batch(const EmbeddingSpace& space, const ResolvedSamples& rs,
                std::span<const std::size_t> idx, std::span<const double> v, bool unary,
                std::vector<double>& x, std::vector<int>& y) {
  const std::size_t d = space.dim();
  const std::size_t width = unary ? d : 2 * d;
  x.resize(idx.size() * width);
  y.resize(idx.size());
  for (std::size_t b = 0; b < idx.size(); ++b) {
    double* row = x.data() + b * width;
    auto sv = space.row(rs.subject[idx[b]]);
    for (std::size_t k = 0; k < d; ++k) row[k] = sv[k] + (v.empty() ? 0.0 : v[k]);
    if (!unary) {
      auto ov = space.row(rs.object[idx[b]]);
      for (std::size_t k = 0; k < d; ++k) row[d + k] = ov[k] + (v.empty() ? 0.0 : v[k]);
    }
    y[b] = rs.label[idx[b]];
  }
}

std::vector<std::size_t> indices_of(const RelationDataset& ds, Split s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.split.size(); ++i) {
    if (ds.split[i] == s) out.push_back(i);
  }
  return out;
}

double mean_loss(const Mlp& model, const EmbeddingSpace& space, const ResolvedSamples& rs,
                 const std::vector<std::size_t>& idx, bool unary, std::size_t batch_size) {
  ForwardCache cache;
  std::vector<double> x;
  std::vector<int> y;
  double total = 0;
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    std::size_t n = std::min(batch_size, idx.size() - start);
    fill_batch(space, rs, std::span(idx).subspan(start, n), {}, unary, x, y);
    model.forward(x, n, cache);
    total += softmax_cross_entropy(model.logits(cache), y, {}) * static_cast<double>(n);
  }
  return total / static_cast<double>(idx.size());
}

Confusion confusion_on(const Mlp& model, const EmbeddingSpace& space, const ResolvedSamples& rs,
                       const std::vector<std::size_t>& idx, bool unary) {
  Confusion c;
  ForwardCache cache;
  std::vector<double> x;
  std::vector<int> y;
  constexpr std::size_t kEvalBatch = 256;
  for (std::size_t start = 0; start < idx.size(); start += kEvalBatch) {
    std::size_t n = std::min(kEvalBatch, idx.size() - start);
    fill_batch(space, rs, std::span(idx).subspan(start, n), {}, unary, x, y);
    model.forward(x, n, cache);
    auto z = model.logits(cache);
    for (std::size_t b = 0; b < n; ++b) {
      const bool predicted = z[2 * b + 1] > z[2 * b];
      const bool actual = y[b] == 1;
      if (predicted && actual) ++c.tp;
      else if (predicted) ++c.fp;
      else if (actual) ++c.fn;
      else ++c.tn;
    }
  }
  return c;
}

}  // namespace

std::vector<double> compose_input(const EmbeddingSpace& space, const Sample& s,
                                  std::span<const double> v, bool unary) {
  const std::size_t d = space.dim();
  if (!v.empty() && v.size() != d) throw InputError("perturbation has wrong dimension");
  auto sv = space.lookup(s.subject);
  std::vector<double> out(unary ? d : 2 * d);
  for (std::size_t k = 0; k < d; ++k) out[k] = sv[k] + (v.empty() ? 0.0 : v[k]);
  if (!unary) {
    auto ov = space.lookup(s.object);
    for (std::size_t k = 0; k < d; ++k) out[d + k] = ov[k] + (v.empty() ? 0.0 : v[k]);
  }
  return out;
}

std::vector<double> draw_perturbation(const EmbeddingSpace& space, Rng& rng) {
  const double sigma = space.component_std();
  std::vector<double> v(space.dim(), 0.0);
  if (sigma == 0.0) return v;
  std::uniform_real_distribution<double> u(-sigma, sigma);
  for (double& x : v) x = u(rng);
  return v;
}

ProbeArchitecture architecture_for(ProbeKind kind, const EmbeddingSpace& space, PairType pt) {
  return ProbeArchitecture::make(kind, space.dim(), pt == PairType::Unary);
}

TrainedProbe train_probe(const RelationDataset& dataset, const EmbeddingSpace& space,
                         const ProbeArchitecture& arch, const TrainingConfig& cfg,
                         std::uint64_t seed) {
  cfg.validate();
  const bool unary = dataset.pair_type == PairType::Unary;
  const std::size_t width = unary ? space.dim() : 2 * space.dim();
  if (arch.input_width != width) {
    throw InputError("probe input width " + std::to_string(arch.input_width) +
                     " does not match space '" + space.name() + "' (" + std::to_string(width) + ")");
  }
  if (dataset.split.size() != dataset.samples.size()) {
    throw InputError("dataset '" + dataset.name + "' has no split assignment");
  }
  const auto rs = resolve(dataset, space);
  auto train_idx = indices_of(dataset, Split::Train);
  const auto val_idx = indices_of(dataset, Split::Val);
  const auto test_idx = indices_of(dataset, Split::Test);
  if (train_idx.empty() || test_idx.empty()) {
    throw InputError("dataset '" + dataset.name + "' needs non-empty train and test splits");
  }

  Rng init_rng(derive_seed(seed, {"init"}));
  Rng rng(derive_seed(seed, {"train"}));
  TrainedProbe out{Mlp(arch, init_rng), {}, {}};
  Mlp& model = out.model;
  Adam adam(model, cfg.adam);
  PlateauScheduler sched(cfg.learning_rate, cfg.scheduler);

  const std::size_t epochs = epochs_for(cfg, dataset.positives());
  ForwardCache cache;
  Gradients grads = model.zero_gradients();
  std::vector<double> x, dlogits;
  std::vector<int> y;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    const double lr = sched.lr();
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double epoch_loss = 0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size, ++batch_no) {
      const std::size_t n = std::min(cfg.batch_size, train_idx.size() - start);
      std::vector<double> v;
      if (cfg.perturbation) v = draw_perturbation(space, rng);
      fill_batch(space, rs, std::span(train_idx).subspan(start, n), v, unary, x, y);
      model.forward(x, n, cache, cfg.dropout, &rng);
      dlogits.resize(2 * n);
      const double loss = softmax_cross_entropy(model.logits(cache), y, dlogits);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss on dataset '" + dataset.name + "' space '" + space.name() +
                            "' at epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_no));
      }
      epoch_loss += loss * static_cast<double>(n);
      model.backward(cache, dlogits, grads);
      adam.step(model, grads, lr);
    }
    out.trace.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));
    out.trace.learning_rate.push_back(lr);
    if (!val_idx.empty()) {
      const double vl = mean_loss(model, space, rs, val_idx, unary, cfg.batch_size);
      out.trace.val_loss.push_back(vl);
      sched.step(vl);
    }
  }
  out.metrics = metrics_from_confusion(confusion_on(model, space, rs, test_idx, unary));
  out.metrics.final_epoch = epochs;
  return out;
}

RunMetrics evaluate(const Mlp& model, const RelationDataset& dataset, const EmbeddingSpace& space) {
  const auto test_idx = indices_of(dataset, Split::Test);
  if (test_idx.empty()) throw InputError("dataset '" + dataset.name + "' has an empty test split");
  const auto rs = resolve(dataset, space);
  return metrics_from_confusion(
      confusion_on(model, space, rs, test_idx, dataset.pair_type == PairType::Unary));
}

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& dataset,
                       const std::string& space, ProbeKind arch, std::size_t run) {
  return derive_seed(master_seed,
                     {"run", dataset, space, probe_kind_name(arch), std::to_string(run)});
}

ExperimentResult run_experiment(const RelationDataset& dataset, const EmbeddingSpace& space,
                                ProbeKind arch, const TrainingConfig& cfg,
                                std::uint64_t master_seed) {
  cfg.validate();
  ExperimentResult res;
  res.dataset = dataset.name;
  res.relation = dataset.relation;
  res.group = dataset.group;
  res.pair_type = dataset.pair_type;
  res.dataset_is_random = dataset.is_random;
  res.space = space.name();
  res.arch = arch;
  const auto a = architecture_for(arch, space, dataset.pair_type);
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    auto probe = train_probe(dataset, space, a, cfg, run_seed(master_seed, dataset.name, space.name(), arch, r));
    probe.metrics.run_index = r;
    res.runs.push_back(probe.metrics);
  }
  res.aggregate();
  return res;
}

double gradient_check(const ProbeArchitecture& arch, const TrainingConfig& cfg,
                      std::uint64_t probe_seed, BackwardFault fault) {
  (void)cfg;  // dropout is always off here
  constexpr double kStep = 1e-4;
  constexpr std::size_t kBatch = 5;
  Rng rng(probe_seed);
  Mlp model(arch, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(kBatch * arch.input_width);
  for (double& v : x) v = normal(rng);
  std::vector<int> y(kBatch);
  for (std::size_t b = 0; b < kBatch; ++b) y[b] = static_cast<int>(b % 2);

  ForwardCache cache;
  std::vector<double> dlogits(2 * kBatch);
  model.forward(x, kBatch, cache);
  softmax_cross_entropy(model.logits(cache), y, dlogits);
  Gradients grads = model.zero_gradients();
  model.backward(cache, dlogits, grads, fault);

  auto loss_at = [&]() {
    ForwardCache c;
    model.forward(x, kBatch, c);
    return softmax_cross_entropy(model.logits(c), y, {});
  };
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + kStep;
    const double up = loss_at();
    param = saved - kStep;
    const double down = loss_at();
    param = saved;
    const double numeric = (up - down) / (2 * kStep);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t k = 0; k < layers[l].w.size(); ++k) check(layers[l].w[k], grads.dw[l][k]);
    for (std::size_t k = 0; k < layers[l].b.size(); ++k) check(layers[l].b[k], grads.db[l][k]);
  }
  return worst;
}

}  // namespace relprobe
