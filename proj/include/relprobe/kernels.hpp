#pragma once

// Dense-layer kernels used by the probe. Matrices are row-major:
//   x  [batch x in]     activations entering the layer
//   w  [out x in]       weights
//   y  [batch x out]    pre-activations leaving the layer
//
// relprobe::kernels::* are the OpenMP versions used in training.
// relprobe::kernels::serial::* are the single-threaded references they are
// tested against. Both accumulate every output element in the same order,
// so their results are bitwise identical for any thread count.

#include <cstddef>
#include <span>

namespace relprobe::kernels {

struct DenseShape {
  std::size_t batch;
  std::size_t in;
  std::size_t out;
};

struct AdamStep {
  double lr;
  double beta1;
  double beta2;
  double eps;
  std::size_t step;  // 1-based
};

// y = x * w^T + bias
void dense_forward(std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y, DenseShape s);
// dx = dy * w
void dense_backward_input(std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx, DenseShape s);
// dw = dy^T * x, db = column sums of dy
void dense_backward_params(std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> db, DenseShape s);
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamStep& a);

namespace serial {
void dense_forward(std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y, DenseShape s);
void dense_backward_input(std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx, DenseShape s);
void dense_backward_params(std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> db, DenseShape s);
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamStep& a);
}  // namespace serial

}  // namespace relprobe::kernels
