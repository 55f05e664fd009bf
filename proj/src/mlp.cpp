#include "relprobe/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "relprobe/error.hpp"
#include "relprobe/kernels.hpp"

namespace relprobe {

std::string_view probe_kind_name(ProbeKind k) { return k == ProbeKind::NN2 ? "NN2" : "NN3"; }

ProbeKind parse_probe_kind(std::string_view text) {
  if (text == "NN2" || text == "nn2") return ProbeKind::NN2;
  if (text == "NN3" || text == "nn3") return ProbeKind::NN3;
  throw InputError("unknown probe architecture '" + std::string(text) + "'");
}

namespace {
std::size_t round_to_10(double v) {
  return std::max<std::size_t>(10, static_cast<std::size_t>(std::lround(v / 10.0)) * 10);
}
}  // namespace

ProbeArchitecture ProbeArchitecture::make(ProbeKind kind, std::size_t embedding_dim, bool unary) {
  if (embedding_dim == 0) throw InputError("embedding dimension must be positive");
  static const std::vector<std::size_t> kNN2 = {750, 400};
  static const std::vector<std::size_t> kNN3 = {750, 500, 250};
  const auto& base = kind == ProbeKind::NN2 ? kNN2 : kNN3;
  const std::size_t pair_width = 2 * embedding_dim;
  ProbeArchitecture a;
  a.kind = kind;
  a.input_width = unary ? embedding_dim : pair_width;
  for (std::size_t h : base) {
    std::size_t scaled = pair_width == 600 ? h : round_to_10(static_cast<double>(h) * pair_width / 600.0);
    a.hidden_sizes.push_back(unary ? scaled / 2 : scaled);
  }
  return a;
}

ProbeArchitecture ProbeArchitecture::tiny() {
  ProbeArchitecture a;
  a.kind = ProbeKind::NN2;
  a.input_width = 8;
  a.hidden_sizes = {6, 4};
  return a;
}

Mlp::Mlp(const ProbeArchitecture& arch, Rng& init_rng) : arch_(arch) {
  if (arch_.input_width == 0) throw InputError("probe input width must be positive");
  std::size_t in = arch_.input_width;
  std::vector<std::size_t> widths = arch_.hidden_sizes;
  widths.push_back(ProbeArchitecture::kOutputs);
  for (std::size_t out : widths) {
    if (out == 0) throw InputError("probe layer width must be positive");
    DenseLayer l;
    l.in = in;
    l.out = out;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    l.w.resize(out * in);
    l.b.resize(out);
    for (double& w : l.w) w = u(init_rng);
    for (double& b : l.b) b = u(init_rng);
    layers_.push_back(std::move(l));
    in = out;
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

void Mlp::forward(std::span<const double> input, std::size_t batch, ForwardCache& cache,
                  double dropout, Rng* dropout_rng) const {
  if (input.size() != batch * arch_.input_width) {
    throw TrainingError("probe input has wrong width");
  }
  const bool drop = dropout > 0.0 && dropout_rng != nullptr;
  const double keep_scale = drop ? 1.0 / (1.0 - dropout) : 1.0;
  std::bernoulli_distribution keep(1.0 - dropout);

  cache.batch = batch;
  cache.act.resize(layers_.size() + 1);
  cache.gate.resize(layers_.size() - 1);
  cache.act[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& L = layers_[l];
    auto& y = cache.act[l + 1];
    y.resize(batch * L.out);
    kernels::dense_forward(cache.act[l], L.w, L.b, y, {batch, L.in, L.out});
    if (l + 1 == layers_.size()) break;
    auto& g = cache.gate[l];
    g.resize(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
      double gk = y[k] > 0.0 ? 1.0 : 0.0;
      if (drop) gk = keep(*dropout_rng) ? gk * keep_scale : 0.0;
      g[k] = gk;
      y[k] *= gk;
    }
  }
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.dw.emplace_back(l.w.size(), 0.0);
    g.db.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void Mlp::backward(const ForwardCache& cache, std::span<const double> dlogits, Gradients& grads,
                   BackwardFault fault) const {
  if (grads.dw.size() != layers_.size()) grads = zero_gradients();
  const std::size_t batch = cache.batch;
  std::vector<double> delta(dlogits.begin(), dlogits.end());
  std::vector<double> prev;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& L = layers_[l];
    kernels::DenseShape s{batch, L.in, L.out};
    kernels::dense_backward_params(cache.act[l], delta, grads.dw[l], grads.db[l], s);
    if (l == 0) break;
    prev.resize(batch * L.in);
    kernels::dense_backward_input(delta, L.w, prev, s);
    const auto& g = cache.gate[l - 1];
    const double sign = (fault == BackwardFault::FlipHiddenSign && l == 1) ? -1.0 : 1.0;
    for (std::size_t k = 0; k < prev.size(); ++k) prev[k] *= g[k] * sign;
    delta.swap(prev);
  }
}

double softmax_cross_entropy(std::span<const double> logits, std::span<const int> labels,
                             std::span<double> dlogits) {
  const std::size_t batch = labels.size();
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double z0 = logits[2 * b], z1 = logits[2 * b + 1];
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
    const double sum = e0 + e1;
    const double lse = m + std::log(sum);
    const int y = labels[b];
    loss += lse - (y == 1 ? z1 : z0);
    if (!dlogits.empty()) {
      dlogits[2 * b] = (e0 / sum - (y == 0 ? 1.0 : 0.0)) / static_cast<double>(batch);
      dlogits[2 * b + 1] = (e1 / sum - (y == 1 ? 1.0 : 0.0)) / static_cast<double>(batch);
    }
  }
  return loss / static_cast<double>(batch);
}

Adam::Adam(const Mlp& model, AdamParams params) : p_(params) {
  for (const auto& l : model.layers()) {
    mw_.emplace_back(l.w.size(), 0.0);
    vw_.emplace_back(l.w.size(), 0.0);
    mb_.emplace_back(l.b.size(), 0.0);
    vb_.emplace_back(l.b.size(), 0.0);
  }
}

void Adam::step(Mlp& model, const Gradients& grads, double lr) {
  ++t_;
  kernels::AdamStep a{lr, p_.beta1, p_.beta2, p_.eps, t_};
  auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    kernels::adam_update(layers[l].w, grads.dw[l], mw_[l], vw_[l], a);
    kernels::adam_update(layers[l].b, grads.db[l], mb_[l], vb_[l], a);
  }
}

PlateauScheduler::PlateauScheduler(double initial_lr, PlateauParams params) : p_(params), lr_(initial_lr) {}

double PlateauScheduler::step(double metric) {
  if (metric < best_ * (1.0 - p_.threshold)) {
    best_ = metric;
    bad_ = 0;
  } else if (++bad_ > p_.patience) {
    lr_ = std::max(lr_ * p_.factor, p_.min_lr);
    bad_ = 0;
  }
  return lr_;
}

}  // namespace relprobe
