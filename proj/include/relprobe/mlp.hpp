#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "relprobe/rng.hpp"

namespace relprobe {

enum class ProbeKind { NN2, NN3 };

std::string_view probe_kind_name(ProbeKind k);
ProbeKind parse_probe_kind(std::string_view text);

// Fully connected probe: input -> hidden (ReLU, dropout) ... -> 2 logits.
struct ProbeArchitecture {
  static constexpr std::size_t kOutputs = 2;

  ProbeKind kind = ProbeKind::NN2;
  std::vector<std::size_t> hidden_sizes;
  std::size_t input_width = 0;

  // Hidden sizes are (750, 400) for NN2 and (750, 500, 250) for NN3 at an
  // input width of 600, scaled proportionally (to the nearest 10) otherwise.
  // Unary probes take one embedding of width d and use half the sizes of
  // the matching pair probe.
  static ProbeArchitecture make(ProbeKind kind, std::size_t embedding_dim, bool unary = false);

  // 8 inputs, hidden (6, 4); used by the gradient check.
  static ProbeArchitecture tiny();
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> w;  // [out x in]
  std::vector<double> b;  // [out]
};

// Activations of one forward pass, kept for the backward pass.
struct ForwardCache {
  std::size_t batch = 0;
  std::vector<std::vector<double>> act;   // act[0] input, act[l+1] output of layer l
  std::vector<std::vector<double>> gate;  // per hidden layer: relu'(z) * dropout mask
};

struct Gradients {
  std::vector<std::vector<double>> dw;
  std::vector<std::vector<double>> db;
};

// Test hook for the gradient check's sensitivity test.
enum class BackwardFault { None, FlipHiddenSign };

class Mlp {
 public:
  // Weights and biases uniform on +-1/sqrt(fan_in).
  Mlp(const ProbeArchitecture& arch, Rng& init_rng);

  const ProbeArchitecture& architecture() const { return arch_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::size_t parameter_count() const;

  // input is [batch x input_width]. With dropout > 0 a mask is drawn from
  // *dropout_rng for every hidden unit (inverted dropout).
  void forward(std::span<const double> input, std::size_t batch, ForwardCache& cache,
               double dropout = 0.0, Rng* dropout_rng = nullptr) const;
  std::span<const double> logits(const ForwardCache& cache) const { return cache.act.back(); }

  void backward(const ForwardCache& cache, std::span<const double> dlogits, Gradients& grads,
                BackwardFault fault = BackwardFault::None) const;

  Gradients zero_gradients() const;

 private:
  ProbeArchitecture arch_;
  std::vector<DenseLayer> layers_;
};

// Mean softmax cross-entropy over the batch; labels are 0/1 and select the
// target unit. Writes d(loss)/d(logits) into dlogits when it is non-empty.
double softmax_cross_entropy(std::span<const double> logits, std::span<const int> labels,
                             std::span<double> dlogits);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const Mlp& model, AdamParams params);
  void step(Mlp& model, const Gradients& grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  AdamParams p_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> mw_, vw_, mb_, vb_;
};

struct PlateauParams {
  double factor = 0.5;
  int patience = 2;
  double min_lr = 1e-7;
  double threshold = 1e-4;  // relative improvement needed to reset patience
};

// Reduce-on-plateau for a metric that should decrease: once more than
// `patience` consecutive checks fail to improve on the best value, the rate
// is multiplied by `factor`, never going below `min_lr`.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, PlateauParams params);
  double step(double metric);
  double lr() const { return lr_; }

 private:
  PlateauParams p_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_ = 0;
};

}  // namespace relprobe
