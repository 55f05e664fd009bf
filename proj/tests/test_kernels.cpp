#include <omp.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "relprobe/kernels.hpp"

namespace k = relprobe::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Shapes small enough for the serial path and large enough for the threaded one.
const k::DenseShape kShapes[] = {{1, 1, 1}, {3, 5, 2}, {64, 64, 80}, {64, 600, 750}, {17, 301, 129}};

}  // namespace

TEST_CASE("dense kernels match a naive oracle") {
  std::mt19937_64 rng(1);
  for (const auto s : kShapes) {
    if (s.in * s.out > 100000) continue;
    auto x = random_vec(rng, s.batch * s.in), w = random_vec(rng, s.out * s.in), b = random_vec(rng, s.out);
    auto dy = random_vec(rng, s.batch * s.out);
    std::vector<double> y(s.batch * s.out), dx(s.batch * s.in), dw(w.size()), db(b.size());
    k::serial::dense_forward(x, w, b, y, s);
    k::serial::dense_backward_input(dy, w, dx, s);
    k::serial::dense_backward_params(x, dy, dw, db, s);
    for (std::size_t n = 0; n < s.batch; ++n) {
      for (std::size_t o = 0; o < s.out; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < s.in; ++i) acc += x[n * s.in + i] * w[o * s.in + i];
        CHECK(y[n * s.out + o] == doctest::Approx(acc).epsilon(1e-12));
      }
      for (std::size_t i = 0; i < s.in; ++i) {
        double acc = 0;
        for (std::size_t o = 0; o < s.out; ++o) acc += dy[n * s.out + o] * w[o * s.in + i];
        CHECK(dx[n * s.in + i] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
    for (std::size_t o = 0; o < s.out; ++o) {
      double bacc = 0;
      for (std::size_t n = 0; n < s.batch; ++n) bacc += dy[n * s.out + o];
      CHECK(db[o] == doctest::Approx(bacc).epsilon(1e-12));
      for (std::size_t i = 0; i < s.in; ++i) {
        double acc = 0;
        for (std::size_t n = 0; n < s.batch; ++n) acc += dy[n * s.out + o] * x[n * s.in + i];
        CHECK(dw[o * s.in + i] == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("OpenMP kernels are bitwise identical to the serial reference for any thread count") {
  std::mt19937_64 rng(2);
  for (int threads : {1, 2, 4, 7}) {
    omp_set_num_threads(threads);
    for (const auto s : kShapes) {
      auto x = random_vec(rng, s.batch * s.in), w = random_vec(rng, s.out * s.in), b = random_vec(rng, s.out);
      auto dy = random_vec(rng, s.batch * s.out);
      std::vector<double> y1(s.batch * s.out), y2(y1.size()), dx1(s.batch * s.in), dx2(dx1.size());
      std::vector<double> dw1(w.size()), dw2(w.size()), db1(b.size()), db2(b.size());
      k::serial::dense_forward(x, w, b, y1, s);
      k::dense_forward(x, w, b, y2, s);
      CHECK(bitwise_equal(y1, y2));
      k::serial::dense_backward_input(dy, w, dx1, s);
      k::dense_backward_input(dy, w, dx2, s);
      CHECK(bitwise_equal(dx1, dx2));
      k::serial::dense_backward_params(x, dy, dw1, db1, s);
      k::dense_backward_params(x, dy, dw2, db2, s);
      CHECK(bitwise_equal(dw1, dw2));
      CHECK(bitwise_equal(db1, db2));

      auto p1 = w, p2 = w, g = random_vec(rng, w.size());
      std::vector<double> m1(w.size()), v1(w.size()), m2(w.size()), v2(w.size());
      for (std::size_t step = 1; step <= 3; ++step) {
        const k::AdamStep a{1e-3, 0.9, 0.999, 1e-8, step};
        k::serial::adam_update(p1, g, m1, v1, a);
        k::adam_update(p2, g, m2, v2, a);
      }
      CHECK(bitwise_equal(p1, p2));
      CHECK(bitwise_equal(m1, m2));
      CHECK(bitwise_equal(v1, v2));
    }
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST_CASE("adam's first step moves each parameter by lr against the gradient sign") {
  std::vector<double> p{1.0, -2.0, 0.5}, g{0.3, -4.0, 0.0}, m(3), v(3);
  k::serial::adam_update(p, g, m, v, {0.01, 0.9, 0.999, 1e-8, 1});
  CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(-1.99).epsilon(1e-6));
  CHECK(p[2] == 0.5);
}
