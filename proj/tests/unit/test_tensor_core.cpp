#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "snnsc/adam.hpp"
#include "snnsc/checkpoint.hpp"
#include "snnsc/grad_check.hpp"
#include "test_util.hpp"

using namespace snnsc;
using test::check_op_grad;
using test::random_tensor;

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor({2, 3}, {1.0}), ShapeError);
  CHECK_THROWS_AS(Tensor({0}, {}), ShapeError);
  Tensor t = Tensor::zeros({2, 3});
  CHECK(t.size() == 6);
  CHECK(shape_str(t.shape) == "(2,3)");
  CHECK_THROWS_AS(SpikeTensor({2}, {0, 2}), NumericError);
}

TEST_CASE("elementwise op gradients match central differences") {
  CHECK(check_op_grad({{4, 4}, {4, 4}}, [](Graph& g, const std::vector<int>& p) {
          return g.add(p[0], p[1]);
        }).pass());
  CHECK(check_op_grad({{4, 4}, {4, 4}}, [](Graph& g, const std::vector<int>& p) {
          return g.sub(p[0], p[1]);
        }).pass());
  CHECK(check_op_grad({{4, 4}, {4, 4}}, [](Graph& g, const std::vector<int>& p) {
          return g.mul(p[0], p[1]);
        }).pass());
  CHECK(check_op_grad({{8}}, [](Graph& g, const std::vector<int>& p) {
          return g.scale(p[0], -2.5);
        }).pass());
  CHECK(check_op_grad({{8}}, [](Graph& g, const std::vector<int>& p) {
          return g.add_scalar(p[0], 0.7);
        }).pass());
  CHECK(check_op_grad({{3, 7}}, [](Graph& g, const std::vector<int>& p) {
          return g.sigmoid(p[0]);
        }).pass());
  CHECK(check_op_grad({{3, 7}}, [](Graph& g, const std::vector<int>& p) {
          return g.relu(p[0]);
        }).pass());
  CHECK(check_op_grad({{3, 7}}, [](Graph& g, const std::vector<int>& p) {
          return g.clamp(p[0], -0.5, 0.5);
        }).pass());
}

TEST_CASE("shape and reduction op gradients") {
  CHECK(check_op_grad({{2, 3, 2}}, [](Graph& g, const std::vector<int>& p) {
          return g.reshape(p[0], {6, 2});
        }).pass());
  CHECK(check_op_grad({{2, 6}, {2, 4}}, [](Graph& g, const std::vector<int>& p) {
          return g.concat_samples({p[0], p[1]});
        }).pass());
  CHECK(check_op_grad({{2, 5}}, [](Graph& g, const std::vector<int>& p) {
          return g.zero_pad_samples(p[0], 9);
        }).pass());
  CHECK(check_op_grad({{4, 4}}, [](Graph& g, const std::vector<int>& p) {
          return g.mean_all(p[0]);
        }).pass());
  CHECK(check_op_grad({{2, 3, 2, 2}}, [](Graph& g, const std::vector<int>& p) {
          return g.spatial_mean(p[0]);
        }).pass());
}

TEST_CASE("nn op gradients") {
  // linear: x (2,5), w (3,5), b (3)
  CHECK(check_op_grad({{2, 5}, {3, 5}, {3}}, [](Graph& g, const std::vector<int>& p) {
          return g.linear(p[0], p[1], p[2]);
        }).pass());
  // 1x1 conv
  CHECK(check_op_grad({{2, 3, 4, 4}, {2, 3, 1, 1}, {2}}, [](Graph& g, const std::vector<int>& p) {
          return g.conv2d(p[0], p[1], p[2], 1, 0);
        }).pass());
  // 3x3 conv, padding 1
  CHECK(check_op_grad({{1, 2, 4, 4}, {3, 2, 3, 3}, {3}}, [](Graph& g, const std::vector<int>& p) {
          return g.conv2d(p[0], p[1], p[2], 1, 1);
        }).pass());
  // 3x3 conv, stride 2
  CHECK(check_op_grad({{1, 2, 4, 4}, {3, 2, 3, 3}, {3}}, [](Graph& g, const std::vector<int>& p) {
          return g.conv2d(p[0], p[1], p[2], 2, 1);
        }).pass());
}

TEST_CASE("loss op gradients") {
  CHECK(check_op_grad({{3, 5}}, [](Graph& g, const std::vector<int>& p) {
          return g.softmax_cross_entropy(p[0], {1, 4, 0});
        }).pass());
  CHECK(check_op_grad({{2, 6}, {2, 6}}, [](Graph& g, const std::vector<int>& p) {
          return g.squared_error(p[0], p[1]);
        }).pass());
}

TEST_CASE("surrogate-path op gradients (smooth mode)") {
  CHECK(check_op_grad({{3, 8}}, [](Graph& g, const std::vector<int>& p) {
          return g.fire(p[0], 1.0, 4.0);
        }, /*seed=*/3, 0.2, 1.8).pass());
  CHECK(check_op_grad({{3, 8}}, [](Graph& g, const std::vector<int>& p) {
          return g.quantize_sign(p[0]);
        }, /*seed=*/4, -2.0, 2.0).pass());
  CHECK(check_op_grad({{3, 8}}, [](Graph& g, const std::vector<int>& p) {
          std::vector<uint8_t> mask(24);
          for (size_t i = 0; i < mask.size(); ++i) mask[i] = i % 3 == 0;
          return g.bsc_flip(p[0], mask);
        }).pass());
  CHECK(check_op_grad({{3, 8}}, [](Graph& g, const std::vector<int>& p) {
          return g.binary_entropy_per_sample(p[0]);
        }, /*seed=*/5, 0.1, 0.9).pass());
}

TEST_CASE("chained graph gradient matches finite differences") {
  // conv -> relu -> linear -> sigmoid chain, < 10^3 params
  CHECK(check_op_grad({{2, 2, 3, 3}, {3, 2, 1, 1}, {3}, {4, 27}, {4}},
                      [](Graph& g, const std::vector<int>& p) {
                        const int c = g.relu(g.conv2d(p[0], p[1], p[2], 1, 0));
                        return g.sigmoid(g.linear(g.flatten_samples(c), p[3], p[4]));
                      })
            .pass());
}

TEST_CASE("mean squared loss analytic example") {
  // loss = mean((x - c)^2), x = 3, c = 1  =>  dloss/dx = 4
  Parameter x;
  x.value = Tensor::scalar(3.0);
  Graph g;
  const int loss = g.squared_error(g.param(x), g.input(Tensor::scalar(1.0)));
  CHECK(g.val(loss).item() == doctest::Approx(4.0));
  g.backward(loss);
  CHECK(x.grad.v[0] == doctest::Approx(4.0));
}

TEST_CASE("cross-entropy gradient equals softmax minus one-hot") {
  Rng rng(11);
  Parameter z;
  z.value = random_tensor({1, 6}, rng, -2, 2);
  Graph g;
  const int loss = g.softmax_cross_entropy(g.param(z), {4});
  g.backward(loss);
  double m = z.value.v[0];
  for (double v : z.value.v) m = std::max(m, v);
  double sum = 0;
  for (double v : z.value.v) sum += std::exp(v - m);
  for (int j = 0; j < 6; ++j) {
    const double soft = std::exp(z.value.v[j] - m) / sum;
    const double want = soft - (j == 4 ? 1.0 : 0.0);
    CHECK(z.grad.v[j] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("identity graph finite differences are exactly zero error") {
  Parameter x;
  Rng rng(7);
  x.value = random_tensor({6}, rng);
  Tensor w = random_tensor({6}, rng);
  auto loss_fn = [&] {
    Graph g(true);
    return g.val(g.mean_all(g.mul(g.param(x), g.input(w)))).item();
  };
  auto grad_fn = [&] {
    Graph g(true);
    const int loss = g.mean_all(g.mul(g.param(x), g.input(w)));
    g.backward(loss);
  };
  const auto report = finite_diff_check(loss_fn, grad_fn, {{"x", &x}}, 1e-5, 1e-4);
  CHECK(report.pass());
  CHECK(report.max_rel_err <= 1e-9);
}

TEST_CASE("finite_diff_check rejects oversized parameter sets") {
  Parameter big;
  big.value = Tensor::zeros({101, 101});
  CHECK_THROWS_AS(finite_diff_check([] { return 0.0; }, [] {}, {{"big", &big}}, 1e-5, 1e-4),
                  ConfigError);
}

TEST_CASE("repeated forward/backward is bit-identical") {
  Rng rng(21);
  Parameter w, b;
  w.value = random_tensor({3, 5}, rng);
  b.value = random_tensor({3}, rng);
  Tensor x = random_tensor({2, 5}, rng);

  auto run = [&] {
    w.zero_grad();
    b.zero_grad();
    Graph g;
    const int y = g.sigmoid(g.linear(g.input(x), g.param(w), g.param(b)));
    const int loss = g.mean_all(y);
    g.backward(loss);
    return std::pair<Tensor, Tensor>(w.grad, b.grad);
  };
  const auto [gw1, gb1] = run();
  const auto [gw2, gb2] = run();
  CHECK(gw1.v == gw2.v);
  CHECK(gb1.v == gb2.v);
}

TEST_CASE("ops reject shape mismatches with both shapes named") {
  Graph g;
  const int a = g.input(Tensor::zeros({2, 3}));
  const int b = g.input(Tensor::zeros({3, 2}));
  try {
    g.add(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(2,3)") != std::string::npos);
    CHECK(msg.find("(3,2)") != std::string::npos);
  }
}

TEST_CASE("non-finite op output raises instead of propagating") {
  Graph g;
  const int huge = g.input(Tensor::scalar(1e308));
  CHECK_THROWS_AS(g.scale(huge, 1e10), NumericError);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  ParamGroup grp;
  grp.role = ParamRole::kEncoder;
  Rng rng(5);
  grp.create("w", random_tensor({4}, rng));
  const Tensor before = grp.at("w").value;
  Adam opt({0.1, 0.9, 0.999, 1e-8}, {&grp});
  grp.at("w").zero_grad();
  opt.step();
  CHECK(grp.at("w").value.v == before.v);
}

TEST_CASE("adam: first bias-corrected step moves by about lr") {
  ParamGroup grp;
  grp.role = ParamRole::kEncoder;
  grp.create("w", Tensor::scalar(1.0));
  Adam opt({0.1, 0.9, 0.999, 1e-8}, {&grp});
  grp.at("w").ensure_grad();
  grp.at("w").grad.v[0] = 1.0;
  opt.step();
  CHECK(grp.at("w").value.v[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("adam: non-finite gradient raises naming the layer") {
  ParamGroup grp;
  grp.role = ParamRole::kConverter;
  grp.create("converter.w", Tensor::scalar(1.0));
  Adam opt({0.1, 0.9, 0.999, 1e-8}, {&grp});
  grp.at("converter.w").ensure_grad();
  grp.at("converter.w").grad.v[0] = std::nan("");
  try {
    opt.step();
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("gamma/converter.w") != std::string::npos);
  }
}

TEST_CASE("adam: identical runs give identical parameters") {
  auto run = [] {
    ParamGroup grp;
    grp.role = ParamRole::kEncoder;
    Rng rng(9);
    grp.create("w", random_tensor({8}, rng));
    Adam opt({1e-2, 0.9, 0.999, 1e-8}, {&grp});
    Rng grad_rng(10);
    for (int step = 0; step < 25; ++step) {
      Parameter& p = grp.at("w");
      p.zero_grad();
      for (double& gv : p.grad.v) gv = grad_rng.uniform(-1, 1);
      opt.step();
    }
    return grp.at("w").value;
  };
  CHECK(run().v == run().v);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  ModelParams m;
  m.config_hash = 0xDEADBEEFCAFEF00DULL;
  Rng rng(13);
  ParamGroup& enc = m.group(ParamRole::kEncoder);
  enc.create("enc1.w", random_tensor({4, 3, 1, 1}, rng));
  enc.create("enc1.b", random_tensor({4}, rng));
  ParamGroup& head = m.group(ParamRole::kSimilarityHead);
  head.create("sd1.w", random_tensor({2, 9}, rng));

  const std::string path = (std::filesystem::temp_directory_path() / "snnsc_ckpt_test.bin").string();
  save_checkpoint(m, path);
  const ModelParams r = load_checkpoint(path);
  CHECK(r.config_hash == m.config_hash);
  REQUIRE(r.has(ParamRole::kEncoder));
  REQUIRE(r.has(ParamRole::kSimilarityHead));
  CHECK(r.group(ParamRole::kEncoder).at("enc1.w").value.v == enc.at("enc1.w").value.v);
  CHECK(r.group(ParamRole::kEncoder).at("enc1.b").value.shape == Shape{4});
  CHECK(r.group(ParamRole::kSimilarityHead).at("sd1.w").value.v == head.at("sd1.w").value.v);
  CHECK(r.group(ParamRole::kEncoder).checksum() == enc.checksum());
  std::filesystem::remove(path);
}

TEST_CASE("frozen parameters pass gradient through but never accumulate") {
  Rng rng(17);
  Parameter w, frozen_w;
  w.value = random_tensor({2, 3}, rng);
  frozen_w.value = random_tensor({2, 2}, rng);
  Tensor x = random_tensor({1, 3}, rng);
  Graph g;
  const int h = g.linear(g.input(x), g.param(w), g.input(Tensor::zeros({2})));
  const int y = g.linear(h, g.frozen(frozen_w), g.input(Tensor::zeros({2})));
  g.backward(g.mean_all(y));
  CHECK(w.has_grad());
  bool any_nonzero = false;
  for (double gv : w.grad.v) any_nonzero = any_nonzero || gv != 0.0;
  CHECK(any_nonzero);
  CHECK(!frozen_w.has_grad());
}
