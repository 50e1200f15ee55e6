#include "dhvton/checkpoint.hpp"
#include "dhvton/ops.hpp"
#include "dhvton/optimizer.hpp"
#include "dhvton/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>

using namespace dhvton;

TEST_CASE("tensor shape and invariants") {
  Tensor<float> t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.all_finite());
  CHECK_THROWS_AS(Tensor<float>({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor<float>({2, 2}, {1.0f}), ShapeError);
  t[5] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("seeded rng: counter semantics and stream independence") {
  SeededRng a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // same (seed, stream, counter) => same value regardless of history
  SeededRng c(42, 7);
  for (int i = 0; i < 5; ++i) c.next_u64();
  SeededRng d(42, 7, 5);
  CHECK(c.next_u64() == d.next_u64());

  SeededRng e(42, 8);
  CHECK(SeededRng(42, 7).next_u64() != e.next_u64());

  // normal(): deterministic and roughly standard
  SeededRng g(123, 1);
  double sum = 0, sq = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double v = g.normal();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("matmul: identity, hand oracle, annihilator, shape error") {
  auto I = Var<float>::constant(Tensor<float>::from({2, 2}, {1, 0, 0, 1}));
  auto B = Var<float>::constant(Tensor<float>::from({2, 2}, {5, 6, 7, 8}));
  CHECK(bit_equal(matmul(I, B).value(), B.value()));

  auto A = Var<float>::constant(Tensor<float>::from({2, 2}, {1, 2, 3, 4}));
  Tensor<float> expect = Tensor<float>::from({2, 2}, {19, 22, 43, 50});
  CHECK(tmax_abs_diff(matmul(A, B).value(), expect) == 0.0f);

  auto Z = Var<float>::constant(Tensor<float>::zeros({2, 3}));
  Tensor<float> prod = matmul(A, Z).value();
  for (float v : prod.data) CHECK(v == 0.0f);

  try {
    matmul(A, Var<float>::constant(Tensor<float>::zeros({3, 2})));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2,2]") != std::string::npos);
    CHECK(msg.find("[3,2]") != std::string::npos);
  }
}

TEST_CASE("softmax_rows: examples, stability, row sums") {
  auto r1 = softmax_rows(Var<float>::constant(Tensor<float>::from({1, 2}, {1, 1}))).value();
  CHECK(r1[0] == doctest::Approx(0.5));
  CHECK(r1[1] == doctest::Approx(0.5));

  auto r2 = softmax_rows(Var<double>::constant(
                             Tensor<double>::from({1, 2}, {0.0, std::log(3.0)})))
                .value();
  CHECK(r2[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(r2[1] == doctest::Approx(0.75).epsilon(1e-12));

  auto r3 = softmax_rows(Var<float>::constant(Tensor<float>::from({1, 2}, {1000, 1000}))).value();
  CHECK(r3.all_finite());
  CHECK(r3[0] == doctest::Approx(0.5));

  SeededRng rng(9, 1);
  Tensor<float> xf = uniform_tensor<float>({5, 7}, rng, -30.0, 30.0);
  auto sf = softmax_rows(Var<float>::constant(xf)).value();
  for (int64_t r = 0; r < 5; ++r) {
    float s = 0;
    for (int64_t c = 0; c < 7; ++c) {
      CHECK(sf.at(r, c) >= 0.0f);
      s += sf.at(r, c);
    }
    CHECK(std::abs(s - 1.0f) < 1e-6f);
  }
  Tensor<double> xd = uniform_tensor<double>({5, 7}, rng, -30.0, 30.0);
  auto sd = softmax_rows(Var<double>::constant(xd)).value();
  for (int64_t r = 0; r < 5; ++r) {
    double s = 0;
    for (int64_t c = 0; c < 7; ++c) s += sd.at(r, c);
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("softmax jacobian matches diag(s) - s s^T at [0, ln3]") {
  auto x = Var<double>::leaf(Tensor<double>::from({1, 2}, {0.0, std::log(3.0)}), true);
  Var<double> s = softmax_rows(x);
  s.backward(Tensor<double>::from({1, 2}, {1.0, 0.0}));
  // first column of J^T with s = [0.25, 0.75]: [s0 - s0^2, -s0 s1]
  CHECK(x.grad()[0] == doctest::Approx(0.1875).epsilon(1e-12));
  CHECK(x.grad()[1] == doctest::Approx(-0.1875).epsilon(1e-12));
}

TEST_CASE("autodiff: composite backward and no-grad mode") {
  auto x = Var<double>::leaf(Tensor<double>::from({2}, {2.0, -1.0}), true);
  auto y = Var<double>::leaf(Tensor<double>::from({2}, {3.0, 5.0}), true);
  Var<double> z = reduce_sum(mul(add(x, y), x));  // sum(x^2 + xy)
  z.backward();
  CHECK(x.grad()[0] == doctest::Approx(2 * 2.0 + 3.0));
  CHECK(x.grad()[1] == doctest::Approx(2 * -1.0 + 5.0));
  CHECK(y.grad()[0] == doctest::Approx(2.0));
  CHECK(y.grad()[1] == doctest::Approx(-1.0));

  {
    NoGradGuard ng;
    Var<double> w = mul(x, y);
    CHECK_FALSE(w.requires_grad());
  }
}

TEST_CASE("shared subexpression accumulates gradient once per use") {
  auto x = Var<double>::leaf(Tensor<double>::from({1}, {3.0}), true);
  Var<double> h = mul(x, x);           // x^2
  Var<double> z = reduce_sum(add(h, h));  // 2 x^2
  z.backward();
  CHECK(x.grad()[0] == doctest::Approx(12.0));
}

TEST_CASE("adamw: hand-computed single step and frozen bit-identity") {
  ParamStore<float> ps;
  ps.create("w", Tensor<float>::from({1}, {1.0f}));
  ps.create("frozen", Tensor<float>::from({2}, {0.25f, -0.5f}), /*trainable=*/false);
  Tensor<float> frozen_before = ps.get("frozen").value();

  AdamWConfig cfg{0.01, 0.9, 0.999, 1e-8, 0.01};
  AdamW<float> opt(ps, cfg);

  ps.get("w").grad()[0] = 0.5f;
  ps.get("frozen").grad()[0] = 123.0f;  // must be ignored
  opt.step();

  // independent arithmetic for one bias-corrected step
  double m = 0.1 * 0.5, v = 0.001 * 0.25;
  double mhat = m / (1 - 0.9), vhat = v / (1 - 0.999);
  double expect = 1.0 - 0.01 * (mhat / (std::sqrt(vhat) + 1e-8) + 0.01 * 1.0);
  CHECK(ps.get("w").value()[0] == doctest::Approx(expect).epsilon(1e-6));

  for (int i = 0; i < 10; ++i) opt.step();
  CHECK(bit_equal(ps.get("frozen").value(), frozen_before));
}

TEST_CASE("checkpoint: exact byte layout and bit-exact round trip") {
  std::string path = "test_ckpt.dhvt";
  {
    ParamStore<float> ps;
    ps.create("a/b", Tensor<float>::from({2}, {1.0f, -2.0f}));
    save_checkpoint(path, ps);
  }
  {
    std::ifstream is(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                     std::istreambuf_iterator<char>());
    std::vector<unsigned char> expect = {
        'D', 'H', 'V', 'T',
        1, 0, 0, 0,        // version
        1, 0, 0, 0,        // entry count
        3, 0,              // name length
        'a', '/', 'b',
        1,                 // rank
        2, 0, 0, 0,        // dims
        0x00, 0x00, 0x80, 0x3f,   // 1.0f LE
        0x00, 0x00, 0x00, 0xc0};  // -2.0f LE
    CHECK(bytes == expect);
  }
  {
    ParamStore<float> ps;
    ps.create("a/b", Tensor<float>::zeros({2}));
    load_checkpoint(path, ps);
    CHECK(ps.get("a/b").value()[0] == 1.0f);
    CHECK(ps.get("a/b").value()[1] == -2.0f);
  }

  // round-trip a messier store bit-exactly
  {
    ParamStore<float> ps;
    SeededRng rng(5, 5);
    ps.create("backbone/x", gaussian<float>({3, 2, 2}, rng));
    ps.create("gfc/y", gaussian<float>({7}, rng));
    save_checkpoint(path, ps);
    ParamStore<float> ps2;
    ps2.create("backbone/x", Tensor<float>::zeros({3, 2, 2}));
    ps2.create("gfc/y", Tensor<float>::zeros({7}));
    load_checkpoint(path, ps2);
    CHECK(bit_equal(ps.get("backbone/x").value(), ps2.get("backbone/x").value()));
    CHECK(bit_equal(ps.get("gfc/y").value(), ps2.get("gfc/y").value()));

    FrozenReport rep = compare_checkpoint(path, ps2, "backbone/");
    CHECK(rep.pass);
    CHECK(rep.compared == 1);
    ps2.get("backbone/x").value()[0] += 1.0f;
    rep = compare_checkpoint(path, ps2, "backbone/");
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.mismatched.size() == 1);
    CHECK(rep.mismatched[0] == "backbone/x");
  }
  std::remove(path.c_str());
}

TEST_CASE("embedding, concat, slice, reshape forward semantics") {
  auto table = Var<float>::constant(Tensor<float>::from({3, 2}, {1, 2, 3, 4, 5, 6}));
  auto rows = embedding_rows(table, {2, 0, 2}).value();
  CHECK(rows.at(0, 0) == 5.0f);
  CHECK(rows.at(1, 1) == 2.0f);
  CHECK(rows.at(2, 1) == 6.0f);
  CHECK_THROWS_AS(embedding_rows(table, {3}), IndexError);

  auto a = Var<float>::constant(Tensor<float>::from({1, 2}, {1, 2}));
  auto b = Var<float>::constant(Tensor<float>::from({2, 2}, {3, 4, 5, 6}));
  auto c = concat0<float>({a, b});
  CHECK(c.shape() == Shape{3, 2});
  CHECK(bit_equal(slice0(c, 1, 3).value(), b.value()));

  auto r = reshape(c, {2, 3});
  CHECK(r.shape() == Shape{2, 3});
  CHECK(r.value()[5] == 6.0f);

  // sinusoidal embedding: finite, right width, distinct across t
  Tensor<float> e1 = sinusoidal_embedding<float>(1, 16);
  Tensor<float> e2 = sinusoidal_embedding<float>(2, 16);
  CHECK(e1.numel() == 16);
  CHECK(e1.all_finite());
  CHECK(tmax_abs_diff(e1, e2) > 0.0f);
}
