#include "relprobe/kernels.hpp"

#include <cmath>
#include <cstdint>

namespace relprobe::kernels {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = std::size_t{1} << 15;

inline void forward_row(const double* x, const double* w, const double* bias, double* y,
                        const DenseShape& s) {
  for (std::size_t o = 0; o < s.out; ++o) {
    const double* wr = w + o * s.in;
    double acc = bias[o];
    for (std::size_t i = 0; i < s.in; ++i) acc += x[i] * wr[i];
    y[o] = acc;
  }
}

inline void backward_input_row(const double* dy, const double* w, double* dx, const DenseShape& s) {
  for (std::size_t i = 0; i < s.in; ++i) dx[i] = 0.0;
  for (std::size_t o = 0; o < s.out; ++o) {
    const double g = dy[o];
    const double* wr = w + o * s.in;
    for (std::size_t i = 0; i < s.in; ++i) dx[i] += g * wr[i];
  }
}

inline void backward_params_row(std::size_t o, const double* x, const double* dy, double* dw,
                                double* db, const DenseShape& s) {
  double* dwr = dw + o * s.in;
  for (std::size_t i = 0; i < s.in; ++i) dwr[i] = 0.0;
  double bacc = 0.0;
  for (std::size_t b = 0; b < s.batch; ++b) {
    const double g = dy[b * s.out + o];
    const double* xr = x + b * s.in;
    bacc += g;
    for (std::size_t i = 0; i < s.in; ++i) dwr[i] += g * xr[i];
  }
  db[o] = bacc;
}

inline void adam_element(double& p, double g, double& m, double& v, const AdamStep& a,
                         double c1, double c2) {
  m = a.beta1 * m + (1.0 - a.beta1) * g;
  v = a.beta2 * v + (1.0 - a.beta2) * g * g;
  const double mhat = m / c1;
  const double vhat = v / c2;
  p -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
}

}  // namespace

void dense_forward(std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y, DenseShape s) {
  const auto n = static_cast<std::int64_t>(s.batch);
#pragma omp parallel for schedule(static) if (s.batch * s.in * s.out >= kParallelWork)
  for (std::int64_t b = 0; b < n; ++b) {
    forward_row(x.data() + b * s.in, w.data(), bias.data(), y.data() + b * s.out, s);
  }
}

void dense_backward_input(std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx, DenseShape s) {
  const auto n = static_cast<std::int64_t>(s.batch);
#pragma omp parallel for schedule(static) if (s.batch * s.in * s.out >= kParallelWork)
  for (std::int64_t b = 0; b < n; ++b) {
    backward_input_row(dy.data() + b * s.out, w.data(), dx.data() + b * s.in, s);
  }
}

void dense_backward_params(std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> db, DenseShape s) {
  const auto n = static_cast<std::int64_t>(s.out);
#pragma omp parallel for schedule(static) if (s.batch * s.in * s.out >= kParallelWork)
  for (std::int64_t o = 0; o < n; ++o) {
    backward_params_row(static_cast<std::size_t>(o), x.data(), dy.data(), dw.data(), db.data(), s);
  }
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamStep& a) {
  const double c1 = 1.0 - std::pow(a.beta1, static_cast<double>(a.step));
  const double c2 = 1.0 - std::pow(a.beta2, static_cast<double>(a.step));
  const auto n = static_cast<std::int64_t>(param.size());
#pragma omp parallel for schedule(static) if (param.size() >= kParallelWork)
  for (std::int64_t i = 0; i < n; ++i) adam_element(param[i], grad[i], m[i], v[i], a, c1, c2);
}

namespace serial {

void dense_forward(std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y, DenseShape s) {
  for (std::size_t b = 0; b < s.batch; ++b) {
    forward_row(x.data() + b * s.in, w.data(), bias.data(), y.data() + b * s.out, s);
  }
}

void dense_backward_input(std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx, DenseShape s) {
  for (std::size_t b = 0; b < s.batch; ++b) {
    backward_input_row(dy.data() + b * s.out, w.data(), dx.data() + b * s.in, s);
  }
}

void dense_backward_params(std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> db, DenseShape s) {
  for (std::size_t o = 0; o < s.out; ++o) backward_params_row(o, x.data(), dy.data(), dw.data(), db.data(), s);
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, const AdamStep& a) {
  const double c1 = 1.0 - std::pow(a.beta1, static_cast<double>(a.step));
  const double c2 = 1.0 - std::pow(a.beta2, static_cast<double>(a.step));
  for (std::size_t i = 0; i < param.size(); ++i) adam_element(param[i], grad[i], m[i], v[i], a, c1, c2);
}

}  // namespace serial
}  // namespace relprobe::kernels
