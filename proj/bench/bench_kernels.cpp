// OpenMP kernels against their serial references on probe-sized layers.
// Arguments: batch, in, out.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "relprobe/kernels.hpp"

namespace k = relprobe::kernels;

namespace {

struct Layer {
  k::DenseShape shape;
  std::vector<double> x, w, b, y, dy, dx, dw, db, m, v;

  explicit Layer(const benchmark::State& st)
      : shape{static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)),
              static_cast<std::size_t>(st.range(2))} {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1, 1);
    auto fill = [&](std::vector<double>& a, std::size_t n) {
      a.resize(n);
      for (auto& e : a) e = u(rng);
    };
    fill(x, shape.batch * shape.in);
    fill(w, shape.out * shape.in);
    fill(b, shape.out);
    fill(dy, shape.batch * shape.out);
    y.assign(shape.batch * shape.out, 0);
    dx.assign(shape.batch * shape.in, 0);
    dw.assign(w.size(), 0);
    db.assign(b.size(), 0);
    m.assign(w.size(), 0);
    v.assign(w.size(), 0);
  }
};

template <bool Parallel>
void BM_Forward(benchmark::State& st) {
  Layer l(st);
  for (auto _ : st) {
    if constexpr (Parallel) k::dense_forward(l.x, l.w, l.b, l.y, l.shape);
    else k::serial::dense_forward(l.x, l.w, l.b, l.y, l.shape);
    benchmark::DoNotOptimize(l.y.data());
  }
}

template <bool Parallel>
void BM_Backward(benchmark::State& st) {
  Layer l(st);
  for (auto _ : st) {
    if constexpr (Parallel) {
      k::dense_backward_input(l.dy, l.w, l.dx, l.shape);
      k::dense_backward_params(l.x, l.dy, l.dw, l.db, l.shape);
    } else {
      k::serial::dense_backward_input(l.dy, l.w, l.dx, l.shape);
      k::serial::dense_backward_params(l.x, l.dy, l.dw, l.db, l.shape);
    }
    benchmark::DoNotOptimize(l.dw.data());
  }
}

template <bool Parallel>
void BM_Adam(benchmark::State& st) {
  Layer l(st);
  std::size_t step = 0;
  for (auto _ : st) {
    const k::AdamStep a{1e-5, 0.9, 0.999, 1e-8, ++step};
    if constexpr (Parallel) k::adam_update(l.w, l.dy.size() >= l.w.size() ? l.dy : l.w, l.m, l.v, a);
    else k::serial::adam_update(l.w, l.dy.size() >= l.w.size() ? l.dy : l.w, l.m, l.v, a);
    benchmark::DoNotOptimize(l.w.data());
  }
}

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({64, 600, 750})->Args({64, 750, 400})->Args({64, 64, 80})->Args({256, 600, 750});
}

}  // namespace

BENCHMARK(BM_Forward<false>)->Apply(shapes)->Name("forward/serial");
BENCHMARK(BM_Forward<true>)->Apply(shapes)->Name("forward/omp");
BENCHMARK(BM_Backward<false>)->Apply(shapes)->Name("backward/serial");
BENCHMARK(BM_Backward<true>)->Apply(shapes)->Name("backward/omp");
BENCHMARK(BM_Adam<false>)->Apply(shapes)->Name("adam/serial");
BENCHMARK(BM_Adam<true>)->Apply(shapes)->Name("adam/omp");

BENCHMARK_MAIN();
