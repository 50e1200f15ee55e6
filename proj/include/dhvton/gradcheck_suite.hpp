#pragma once

#include "dhvton/attention.hpp"
#include "dhvton/diffusion.hpp"
#include "dhvton/gradcheck.hpp"

namespace dhvton {

// f64 finite-difference coverage for every trainable op plus the assembled
// hybrid block, three seeded shapes per op. Shared by the unit tests, the
// grad-check CLI subcommand, and the acceptance suite.
inline std::vector<GradCheckCase> standard_gradcheck_suite(double eps = 1e-5,
                                                           double tol = 1e-4) {
  using VD = Var<double>;
  using TD = Tensor<double>;
  std::vector<GradCheckCase> cases;

  auto rand_t = [](Shape s, uint64_t seed) {
    SeededRng r(seed, stream_id(11));
    return uniform_tensor<double>(std::move(s), r, -1.0, 1.0);
  };

  auto worst = [](std::vector<GradReport> reps) {
    GradReport w;
    w.pass = true;
    for (auto& r : reps)
      if (r.max_rel_err >= w.max_rel_err) {
        bool pass = w.pass && r.pass;
        w = r;
        w.pass = pass;
      }
    return w;
  };

  auto add_case = [&](const std::string& name, std::function<GradReport()> run) {
    cases.push_back({name, std::move(run)});
  };

  add_case("add", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {1u, 2u, 3u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return add(v[0], v[1]); },
                             {rand_t({3, 4}, s), rand_t({3, 4}, s + 10)}, eps, tol));
    return worst(r);
  });
  add_case("sub", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {1u, 2u, 3u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return sub(v[0], v[1]); },
                             {rand_t({2, 5}, s), rand_t({2, 5}, s + 10)}, eps, tol));
    return worst(r);
  });
  add_case("mul", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {4u, 5u, 6u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return mul(v[0], v[1]); },
                             {rand_t({4, 3}, s), rand_t({4, 3}, s + 10)}, eps, tol));
    return worst(r);
  });
  add_case("scale", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {7u, 8u, 9u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return scale(v[0], 1.7); },
                             {rand_t({6}, s)}, eps, tol));
    return worst(r);
  });
  add_case("silu", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {10u, 11u, 12u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return silu(v[0]); },
                             {rand_t({3, 7}, s)}, eps, tol));
    return worst(r);
  });
  add_case("matmul", [=] {
    std::vector<GradReport> r;
    r.push_back(grad_check([](const std::vector<VD>& v) { return matmul(v[0], v[1]); },
                           {rand_t({3, 4}, 21), rand_t({4, 2}, 22)}, eps, tol));
    r.push_back(grad_check([](const std::vector<VD>& v) { return matmul(v[0], v[1]); },
                           {rand_t({2, 2}, 23), rand_t({2, 2}, 24)}, eps, tol));
    r.push_back(grad_check([](const std::vector<VD>& v) { return matmul(v[0], v[1]); },
                           {rand_t({5, 3}, 25), rand_t({3, 1}, 26)}, eps, tol));
    return worst(r);
  });
  add_case("transpose", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {31u, 32u, 33u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return transpose(v[0]); },
                             {rand_t({3, 5}, s)}, eps, tol));
    return worst(r);
  });
  add_case("softmax_rows", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {41u, 42u, 43u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return softmax_rows(v[0]); },
                             {rand_t({4, 5}, s)}, eps, tol));
    return worst(r);
  });
  add_case("conv2d", [=] {
    std::vector<GradReport> r;
    r.push_back(grad_check(
        [](const std::vector<VD>& v) { return conv2d(v[0], v[1], v[2], 1, 1); },
        {rand_t({1, 2, 5, 4}, 51), rand_t({3, 2, 3, 3}, 52), rand_t({3}, 53)}, eps, tol));
    r.push_back(grad_check(
        [](const std::vector<VD>& v) { return conv2d(v[0], v[1], v[2], 2, 1); },
        {rand_t({2, 3, 6, 6}, 54), rand_t({2, 3, 3, 3}, 55), rand_t({2}, 56)}, eps, tol));
    r.push_back(grad_check(
        [](const std::vector<VD>& v) { return conv2d(v[0], v[1], v[2], 1, 0); },
        {rand_t({1, 1, 4, 4}, 57), rand_t({2, 1, 1, 1}, 58), rand_t({2}, 59)}, eps, tol));
    return worst(r);
  });
  add_case("upsample_nearest", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {61u, 62u, 63u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return upsample_nearest(v[0], 2); },
                             {rand_t({1, 2, 3, 2}, s)}, eps, tol));
    return worst(r);
  });
  add_case("downsample_nearest", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {64u, 65u, 66u})
      r.push_back(
          grad_check([](const std::vector<VD>& v) { return downsample_nearest(v[0], 2); },
                     {rand_t({1, 2, 4, 6}, s)}, eps, tol));
    return worst(r);
  });
  add_case("group_norm", [=] {
    std::vector<GradReport> r;
    r.push_back(grad_check(
        [](const std::vector<VD>& v) { return group_norm(v[0], 2, v[1], v[2]); },
        {rand_t({1, 4, 3, 3}, 71), rand_t({4}, 72), rand_t({4}, 73)}, eps, tol));
    r.push_back(grad_check(
        [](const std::vector<VD>& v) { return group_norm(v[0], 3, v[1], v[2]); },
        {rand_t({2, 6, 2, 2}, 74), rand_t({6}, 75), rand_t({6}, 76)}, eps, tol));
    r.push_back(grad_check(
        [](const std::vector<VD>& v) { return group_norm(v[0], 8, v[1], v[2]); },
        {rand_t({1, 8, 2, 3}, 77), rand_t({8}, 78), rand_t({8}, 79)}, eps, tol));
    return worst(r);
  });
  add_case("concat_channels", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {81u, 82u, 83u})
      r.push_back(grad_check(
          [](const std::vector<VD>& v) { return concat_channels<double>({v[0], v[1]}); },
          {rand_t({2, 2, 3, 2}, s), rand_t({2, 3, 3, 2}, s + 5)}, eps, tol));
    return worst(r);
  });
  add_case("concat0", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {84u, 85u, 86u})
      r.push_back(grad_check(
          [](const std::vector<VD>& v) { return concat0<double>({v[0], v[1], v[2]}); },
          {rand_t({2, 3}, s), rand_t({1, 3}, s + 5), rand_t({3, 3}, s + 9)}, eps, tol));
    return worst(r);
  });
  add_case("slice0", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {87u, 88u, 89u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return slice0(v[0], 1, 3); },
                             {rand_t({4, 3}, s)}, eps, tol));
    return worst(r);
  });
  add_case("reshape", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {91u, 92u, 93u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return reshape(v[0], {3, 4}); },
                             {rand_t({2, 6}, s)}, eps, tol));
    return worst(r);
  });
  add_case("add_channel_bias", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {94u, 95u, 96u})
      r.push_back(grad_check(
          [](const std::vector<VD>& v) { return add_channel_bias(v[0], v[1]); },
          {rand_t({2, 3, 2, 2}, s), rand_t({3}, s + 3)}, eps, tol));
    return worst(r);
  });
  add_case("add_channel_bias_nc", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {97u, 98u, 99u})
      r.push_back(grad_check(
          [](const std::vector<VD>& v) { return add_channel_bias_nc(v[0], v[1]); },
          {rand_t({2, 3, 2, 2}, s), rand_t({2, 3}, s + 3)}, eps, tol));
    return worst(r);
  });
  add_case("add_row_bias", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {101u, 102u, 103u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return add_row_bias(v[0], v[1]); },
                             {rand_t({4, 3}, s), rand_t({3}, s + 3)}, eps, tol));
    return worst(r);
  });
  add_case("mse", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {104u, 105u, 106u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return mse(v[0], v[1]); },
                             {rand_t({3, 4}, s), rand_t({3, 4}, s + 3)}, eps, tol));
    return worst(r);
  });
  add_case("reduce_sum", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {107u, 108u, 109u})
      r.push_back(grad_check([](const std::vector<VD>& v) { return reduce_sum(v[0]); },
                             {rand_t({2, 3, 2}, s)}, eps, tol));
    return worst(r);
  });
  add_case("embedding_rows", [=] {
    std::vector<GradReport> r;
    std::vector<int64_t> idx = {0, 2, 1, 2};  // repeated index exercises scatter-add
    for (uint64_t s : {111u, 112u, 113u})
      r.push_back(grad_check(
          [idx](const std::vector<VD>& v) { return embedding_rows(v[0], idx); },
          {rand_t({3, 4}, s)}, eps, tol));
    return worst(r);
  });
  add_case("q_sample", [=] {
    NoiseSchedule sched = make_schedule(10, 1e-2, 2e-1);
    std::vector<GradReport> r;
    for (uint64_t s : {114u, 115u, 116u})
      r.push_back(grad_check(
          [&sched](const std::vector<VD>& v) { return q_sample(v[0], 5, v[1], sched); },
          {rand_t({2, 3}, s), rand_t({2, 3}, s + 3)}, eps, tol));
    return worst(r);
  });
  add_case("constant_producer", [=] {
    // Fixed sinusoidal/gaussian outputs: analytic and numeric gradients are 0.
    SeededRng g(202, stream_id(12));
    Tensor<double> fixed = gaussian<double>({2, 3}, g);
    return grad_check(
        [fixed](const std::vector<VD>&) { return VD::constant(fixed); },
        {rand_t({2, 2}, 117)}, eps, tol);
  });
  add_case("self_attention", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {121u, 122u, 123u})
      r.push_back(grad_check(
          [](const std::vector<VD>& v) { return self_attention(v[0], v[1], v[2], v[3]); },
          {rand_t({3, 4}, s), rand_t({4, 4}, s + 3), rand_t({4, 4}, s + 6),
           rand_t({4, 4}, s + 9)},
          eps, tol));
    return worst(r);
  });
  add_case("hybrid_attention", [=] {
    std::vector<GradReport> r;
    for (uint64_t s : {131u, 132u, 133u})
      r.push_back(grad_check(
          [](const std::vector<VD>& v) {
            HybridWeights<double> w{v[2], v[3], v[4], v[5], v[6]};
            return hybrid_attention(v[0], v[1], w, 0.7);
          },
          {rand_t({3, 4}, s), rand_t({5, 3}, s + 1), rand_t({4, 4}, s + 2),
           rand_t({4, 4}, s + 3), rand_t({4, 4}, s + 4), rand_t({3, 4}, s + 5),
           rand_t({3, 4}, s + 6)},
          eps, tol));
    return worst(r);
  });
  add_case("hybrid_block", [=] {
    // Full block: self-attention sub-layer with residual feeding Eq.-2 hybrid
    // sub-layer with residual; gradients flow to both inputs and all eight
    // projections.
    std::vector<GradReport> r;
    for (uint64_t s : {141u, 142u, 143u})
      r.push_back(grad_check(
          [](const std::vector<VD>& v) {
            Var<double> o_s = add(v[0], self_attention(v[0], v[2], v[3], v[4]));
            HybridWeights<double> w{v[5], v[6], v[7], v[8], v[9]};
            return add(o_s, hybrid_attention(o_s, v[1], w, 1.0));
          },
          {rand_t({3, 4}, s), rand_t({4, 3}, s + 1), rand_t({4, 4}, s + 2),
           rand_t({4, 4}, s + 3), rand_t({4, 4}, s + 4), rand_t({4, 4}, s + 5),
           rand_t({4, 4}, s + 6), rand_t({4, 4}, s + 7), rand_t({3, 4}, s + 8),
           rand_t({3, 4}, s + 9)},
          eps, tol));
    return worst(r);
  });
  return cases;
}

}  // namespace dhvton
