#include <doctest.h>

#include <cmath>

#include "eegscreen/nn/adam.hpp"
#include "eegscreen/nn/ops.hpp"
#include "gradcheck.hpp"
#include "helpers.hpp"

using namespace eegscreen;
using namespace eegscreen::nn;
using testing::error_code_of;

TEST_CASE("tensor basics") {
  Tensor<float> t({2, 3}, 1.5f);
  CHECK(t.size() == 6);
  CHECK(shape_size({2, 3, 4}) == 24);
  CHECK(shape_string({2, 3}) == "[2,3]");
  CHECK(t[5] == 1.5f);
  CHECK(error_code_of([] { Tensor<float>({2, 0}); }) == Errc::ShapeMismatch);
}

TEST_CASE("conv2d examples") {
  NoGradGuard g;
  Var<float> x(Tensor<float>({1, 19, 64, 100}));
  Var<float> w(Tensor<float>({64, 19, 7, 7}));
  CHECK(conv2d(x, w, Var<float>(), 2, 3).dims() == Shape{1, 64, 32, 50});

  Tensor<double> in({1, 1, 3, 4});
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = double(i) - 4.5;
  const auto id = conv2d(Var<double>(in), Var<double>(Tensor<double>({1, 1, 1, 1}, 1.0)), Var<double>(), 1, 0);
  CHECK(id.value() == in);

  const auto y = conv2d(Var<double>(Tensor<double>({1, 1, 2, 2}, 3.0)), Var<double>(Tensor<double>({1, 1, 1, 1}, 2.0)),
                        Var<double>(Tensor<double>({1}, 1.0)), 1, 0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(y.value()[i] == 7.0);

  CHECK(error_code_of([] {
          conv2d(Var<double>(Tensor<double>({1, 2, 4, 4})), Var<double>(Tensor<double>({1, 3, 3, 3})), Var<double>(), 1, 0);
        }) == Errc::ShapeMismatch);
  CHECK(error_code_of([] {
          conv2d(Var<double>(Tensor<double>({1, 1, 2, 2})), Var<double>(Tensor<double>({1, 1, 5, 5})), Var<double>(), 1, 0);
        }) == Errc::ShapeMismatch);
}

TEST_CASE("conv2d matches a direct loop oracle") {
  testing::ShapeRng r(3);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t B = 2, C = 3, O = 4, K = 3, S = 1 + trial % 2, P = trial % 2, H = 7, W = 9;
    const auto x = r.normal({B, C, H, W}), w = r.normal({O, C, K, K}), b = r.normal({O});
    NoGradGuard g;
    const auto y = conv2d(Var<double>(x), Var<double>(w), Var<double>(b), S, P);
    const std::size_t OH = (H + 2 * P - K) / S + 1, OW = (W + 2 * P - K) / S + 1;
    REQUIRE(y.dims() == Shape{B, O, OH, OW});
    for (std::size_t n = 0; n < B; ++n)
      for (std::size_t o = 0; o < O; ++o)
        for (std::size_t i = 0; i < OH; ++i)
          for (std::size_t j = 0; j < OW; ++j) {
            double acc = b[o];
            for (std::size_t c = 0; c < C; ++c)
              for (std::size_t ky = 0; ky < K; ++ky)
                for (std::size_t kx = 0; kx < K; ++kx) {
                  const long iy = long(i * S + ky) - long(P), ix = long(j * S + kx) - long(P);
                  if (iy < 0 || ix < 0 || iy >= long(H) || ix >= long(W)) continue;
                  acc += w[((o * C + c) * K + ky) * K + kx] * x[((n * C + c) * H + iy) * W + ix];
                }
            CHECK(y.value()[((n * O + o) * OH + i) * OW + j] == doctest::Approx(acc).epsilon(1e-12));
          }
  }
}

TEST_CASE("batch norm examples") {
  testing::ShapeRng r(4);
  const Shape s = {4, 3, 5, 5};
  BatchNormStats<double> stats(3);
  const auto y = batch_norm2d(Var<double>(r.normal(s, 3.0)), Var<double>(Tensor<double>({3}, 1.0)),
                              Var<double>(Tensor<double>({3}, 0.0)), stats, true);
  for (std::size_t c = 0; c < 3; ++c) {
    double m = 0, v = 0;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t i = 0; i < 25; ++i) m += y.value()[(b * 3 + c) * 25 + i];
    m /= 100;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t i = 0; i < 25; ++i) v += std::pow(y.value()[(b * 3 + c) * 25 + i] - m, 2);
    CHECK(std::abs(m) < 1e-12);
    CHECK(v / 100 == doctest::Approx(1.0).epsilon(1e-3));
  }
  // running stats moved towards the batch statistics
  CHECK(stats.running_var[0] != 1.0);

  BatchNormStats<double> s2(2);
  const auto c5 = batch_norm2d(Var<double>(Tensor<double>({2, 2, 3, 3}, 7.0)), Var<double>(Tensor<double>({2}, 1.0)),
                               Var<double>(Tensor<double>({2}, 5.0)), s2, true);
  for (std::size_t i = 0; i < c5.value().size(); ++i) CHECK(c5.value()[i] == doctest::Approx(5.0));

  BatchNormStats<double> s3(3);
  const auto x = r.normal(s);
  const auto e = batch_norm2d(Var<double>(x), Var<double>(Tensor<double>({3}, 1.0)), Var<double>(Tensor<double>({3}, 0.0)),
                              s3, false);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(e.value()[i] == doctest::Approx(x[i] / std::sqrt(1 + 1e-5)));
}

TEST_CASE("batch norm running statistics use momentum 0.1 and unbiased variance") {
  Tensor<double> x({2, 1, 1, 2});
  x[0] = 1, x[1] = 2, x[2] = 3, x[3] = 6;  // mean 3, biased var 3.5, unbiased 14/3
  BatchNormStats<double> st(1);
  batch_norm2d(Var<double>(x), Var<double>(Tensor<double>({1}, 1.0)), Var<double>(Tensor<double>({1}, 0.0)), st, true);
  CHECK(st.running_mean[0] == doctest::Approx(0.3));
  CHECK(st.running_var[0] == doctest::Approx(0.9 + 0.1 * 14.0 / 3.0));
}

TEST_CASE("cross entropy examples") {
  auto ce = [](double a, double b, int label) {
    Tensor<double> t({1, 2});
    t[0] = a, t[1] = b;
    return cross_entropy(Var<double>(t), {label}).value()[0];
  };
  CHECK(ce(0, 0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(ce(0, 0, 1) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(ce(1000, -1000, 0) == doctest::Approx(0.0));
  CHECK(std::isfinite(ce(1000, -1000, 1)));
  CHECK(ce(0, std::log(3.0), 1) == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK(error_code_of([&] { ce(0, 0, 2); }) == Errc::BadLabel);
  CHECK(error_code_of([] { cross_entropy(Var<double>(Tensor<double>({2, 2})), {0}); }) == Errc::LengthMismatch);
}

TEST_CASE("softmax rows sum to one") {
  testing::ShapeRng r(8);
  const auto p = softmax(Var<double>(r.normal({6, 5}, 10.0)));
  for (std::size_t b = 0; b < 6; ++b) {
    double s = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      const double v = p.value()[b * 5 + k];
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("pool shape contracts") {
  testing::ShapeRng r(9);
  NoGradGuard g;
  for (int i = 0; i < 50; ++i) {
    const std::size_t k = r.dim(1, 4), s = r.dim(1, 3), p = r.dim(0, k / 2), h = r.dim(k, 12), w = r.dim(k, 12);
    const auto y = max_pool2d(Var<double>(r.normal({2, 3, h, w})), k, s, p);
    CHECK(y.dims() == Shape{2, 3, (h + 2 * p - k) / s + 1, (w + 2 * p - k) / s + 1});
    CHECK(global_avg_pool(Var<double>(r.normal({2, 3, h, w}))).dims() == Shape{2, 3});
  }
}

TEST_CASE("backward basics") {
  Var<double> w(Tensor<double>({1}, 3.0), true);
  Var<double> unused(Tensor<double>({1}, 1.0), true);
  backward(mul(w, w));
  CHECK(w.grad()[0] == 6.0);
  CHECK(unused.grad()[0] == 0.0);
  // leaf gradients accumulate until zero_grad
  backward(mul(w, w));
  CHECK(w.grad()[0] == 12.0);
  w.zero_grad();
  CHECK(w.grad()[0] == 0.0);
  CHECK(error_code_of([] { backward(Var<double>(Tensor<double>({2}, 1.0), true)); }) == Errc::ShapeMismatch);
}

TEST_CASE("no-grad guard records no graph") {
  Var<double> w(Tensor<double>({1}, 3.0), true);
  {
    NoGradGuard g;
    CHECK_FALSE(grad_enabled());
    CHECK_FALSE(mul(w, w).requires_grad());
  }
  CHECK(grad_enabled());
  CHECK(mul(w, w).requires_grad());
}

TEST_CASE("cycles are detected") {
  auto a = std::make_shared<Node<double>>();
  auto b = std::make_shared<Node<double>>();
  a->value = Tensor<double>({1}, 1.0);
  b->value = Tensor<double>({1}, 1.0);
  a->requires_grad = b->requires_grad = true;
  a->backward_fn = b->backward_fn = [](Node<double>&) {};
  a->parents = {b};
  b->parents = {a};
  CHECK(error_code_of([&] { backward(Var<double>(a)); }) == Errc::GraphCycle);
  a->parents.clear();
  b->parents.clear();
}

TEST_CASE("gradient checks for every layer kind") {
  for (const auto& [kind, cases] : testing::gradient_cases(2024, 10)) {
    double worst = 0;
    for (const auto& c : cases) worst = std::max(worst, testing::max_grad_error(c.inputs, c.fn));
    INFO(kind << " worst relative error " << worst);
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("forward is deterministic") {
  testing::ShapeRng r(10);
  const auto x = r.normal({3, 4, 9, 9}), w = r.normal({5, 4, 3, 3});
  NoGradGuard g;
  const auto a = conv2d(Var<double>(x), Var<double>(w), Var<double>(), 2, 1);
  const auto b = conv2d(Var<double>(x), Var<double>(w), Var<double>(), 2, 1);
  CHECK(a.value() == b.value());
}

TEST_CASE("adam") {
  std::vector<Tensor<double>> p = {Tensor<double>({3}, 1.0)};
  AdamState<double> st;
  const auto z = adam_step(p, {Tensor<double>({3}, 0.0)}, st);
  CHECK(z.params[0] == p[0]);

  for (double g : {1e-3, 1.0, 250.0}) {
    const auto r1 = adam_step(p, {Tensor<double>({3}, g)}, AdamState<double>{});
    CHECK(p[0][0] - r1.params[0][0] == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(r1.state.step == 1);
  }
  const auto a = adam_step(p, {Tensor<double>({3}, -0.7)}, st), b = adam_step(p, {Tensor<double>({3}, -0.7)}, st);
  CHECK(a.params[0] == b.params[0]);
  CHECK(a.state.m[0] == b.state.m[0]);

  // In-place form agrees with the pure form over several steps.
  Tensor<double> q({3}, 1.0);
  AdamState<double> sq, sp;
  std::vector<Tensor<double>> pp = {q};
  for (int step = 0; step < 4; ++step) {
    const Tensor<double> g({3}, 0.1 * (step + 1));
    adam_update<double>({&q}, {&g}, sq);
    auto res = adam_step(pp, {g}, sp);
    pp = res.params;
    sp = res.state;
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(q[i] == doctest::Approx(pp[0][i]).epsilon(1e-15));
  CHECK(error_code_of([&] { adam_step(p, {Tensor<double>({4}, 1.0)}, st); }) == Errc::ShapeMismatch);
}
