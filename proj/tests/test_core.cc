// tests/test_core.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "lts/core/archive.h"
#include "lts/core/nn.h"
#include "lts/core/optim.h"
#include "test_util.h"

using namespace lts;
namespace A = lts::ag;

TEST_CASE("rng streams are deterministic and well distributed") {
  Rng a(42), b(42), c(43);
  bool all_same = true;
  for (int i = 0; i < 100; ++i) {
    real x = a.uniform();
    CHECK(x == b.uniform());
    if (x != c.uniform()) all_same = false;
    CHECK(x >= 0);
    CHECK(x < 1);
  }
  CHECK_FALSE(all_same);

  Rng d(7);
  real sum = 0, sumsq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    real x = d.normal();
    sum += x;
    sumsq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sumsq / n - 1) < 0.05);

  Rng e(9);
  for (int i = 0; i < 200; ++i) {
    int64_t v = e.uniform_int(3, 7);
    CHECK(v >= 3);
    CHECK(v <= 7);
  }
}

TEST_CASE("derived seeds differ by tag and index") {
  uint64_t base = 1234;
  CHECK(derive_seed(base, "a") != derive_seed(base, "b"));
  CHECK(derive_seed(base, "a", 0) != derive_seed(base, "a", 1));
  CHECK(derive_seed(base, 1, 2) != derive_seed(base, 2, 1));
  CHECK(derive_seed(base, "a") == derive_seed(base, "a"));
}

TEST_CASE("parameter init is order independent") {
  nn::Params p1(99);
  nn::Linear l1(p1, "enc.fc", 8, 4);
  nn::Conv1d c1(p1, "enc.conv", 3, 5, 3);

  nn::Params p2(99);
  nn::Conv1d c2(p2, "enc.conv", 3, 5, 3);
  nn::Linear l2(p2, "enc.fc", 8, 4);

  for (int64_t i = 0; i < l1.w->value.numel(); ++i)
    CHECK(l1.w->value[i] == l2.w->value[i]);
  for (int64_t i = 0; i < c1.w->value.numel(); ++i)
    CHECK(c1.w->value[i] == c2.w->value[i]);

  nn::Params p3(100);
  nn::Linear l3(p3, "enc.fc", 8, 4);
  bool same = true;
  for (int64_t i = 0; i < l1.w->value.numel(); ++i)
    if (l1.w->value[i] != l3.w->value[i]) same = false;
  CHECK_FALSE(same);

  CHECK_THROWS(nn::Linear(p1, "enc.fc", 8, 4));  // duplicate name
}

TEST_CASE("zero-init layers start at zero") {
  nn::Params ps(1);
  nn::Conv1d c(ps, "head", 4, 2, 3, true, true);
  for (int64_t i = 0; i < c.w->value.numel(); ++i) CHECK(c.w->value[i] == 0);
  for (int64_t i = 0; i < c.b->value.numel(); ++i) CHECK(c.b->value[i] == 0);
}

TEST_CASE("adamw first step matches the closed form") {
  nn::Params ps(5);
  auto p = ps.create("p", Tensor({2}, {1.0, -2.0}));
  p->ensure_grad() = Tensor({2}, {0.3, -0.7});
  opt::AdamW::Config cfg;
  cfg.lr = 1e-2;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.98;
  cfg.eps = 1e-9;
  cfg.weight_decay = 1e-2;
  opt::AdamW optm(cfg);
  Tensor before = p->value.clone();
  optm.step(ps.all());
  for (int64_t i = 0; i < 2; ++i) {
    real g = i == 0 ? 0.3 : -0.7;
    real mhat = g;        // (1-b1)g / (1-b1)
    real vhat = g * g;    // (1-b2)g^2 / (1-b2)
    real expect = before[i] -
                  cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) +
                            cfg.weight_decay * before[i]);
    CHECK(p->value[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("adamw trajectory matches independent scalar recurrence") {
  nn::Params ps(6);
  auto p = ps.create("p", Tensor({1}, {0.8}));
  opt::AdamW::Config cfg;
  cfg.lr = 5e-2;
  cfg.weight_decay = 1e-3;
  opt::AdamW optm(cfg);

  real x = 0.8, m = 0, v = 0;
  for (int t = 1; t <= 25; ++t) {
    // Objective x^4: gradient 4x^3, computed by the engine on one side and
    // by hand on the other.
    ps.zero_grads();
    auto loss = A::sum_all(A::square(A::square(p)));
    A::backward(loss);
    optm.step(ps.all());

    real g = 4 * x * x * x;
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    real mhat = m / (1 - std::pow(cfg.beta1, t));
    real vhat = v / (1 - std::pow(cfg.beta2, t));
    x -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) + cfg.weight_decay * x);
    CHECK(p->value[0] == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("gradient clipping rescales to the target norm") {
  nn::Params ps(8);
  auto a = ps.create("a", Tensor({2}, {0.0, 0.0}));
  auto b = ps.create("b", Tensor({1}, {0.0}));
  a->ensure_grad() = Tensor({2}, {3.0, 0.0});
  b->ensure_grad() = Tensor({1}, {4.0});
  CHECK(opt::global_grad_norm(ps.all()) == doctest::Approx(5.0));
  real pre = opt::clip_grad_norm(ps.all(), 1.0);
  CHECK(pre == doctest::Approx(5.0));
  CHECK(opt::global_grad_norm(ps.all()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a->grad[0] == doctest::Approx(0.6).epsilon(1e-12));
  // Below the threshold nothing changes.
  real pre2 = opt::clip_grad_norm(ps.all(), 10.0);
  CHECK(pre2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a->grad[0] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("archive round trip preserves content and bytes") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "lts_archive_test";
  fs::create_directories(dir);
  fs::path p1 = dir / "a1.lts", p2 = dir / "a2.lts";

  Rng rng(derive_seed(11, "archive"));
  Archive ar;
  Tensor t = rand_tensor(rng, {3, 4});
  ar.put_tensor("model/w", t);
  ar.put_i64("units", {5, 1, 0, 99});
  ar.put_u8("frames", {10, 20, 30, 40, 50, 60}, {1, 2, 3});
  ar.meta() = {{"step", 17}, {"config", {{"d_model", 96}, {"lr", 2e-4}}}};
  ar.save(p1.string());

  Archive back = Archive::load(p1.string());
  Tensor t2 = back.tensor("model/w");
  REQUIRE(t2.same_shape(t));
  for (int64_t i = 0; i < t.numel(); ++i) CHECK(t2[i] == t[i]);
  CHECK(back.i64("units") == std::vector<int64_t>{5, 1, 0, 99});
  CHECK(back.u8("frames").size() == 6);
  CHECK(back.shape("frames") == std::vector<int64_t>{1, 2, 3});
  CHECK(back.meta().at("step").get<int>() == 17);
  CHECK(back.meta().at("config").at("lr").get<double>() == 2e-4);

  back.save(p2.string());
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1.size() > 0);
  CHECK(s1 == s2);

  CHECK_THROWS_AS(back.tensor("units"), DataError);  // wrong kind
  CHECK_THROWS_AS(back.tensor("nope"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("archive rejects corrupt files") {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "lts_bad_archive.lts";
  {
    std::ofstream out(p, std::ios::binary);
    out << "NOTANARCHIVE";
  }
  CHECK_THROWS_AS(Archive::load(p.string()), DataError);
  fs::remove(p);
}
