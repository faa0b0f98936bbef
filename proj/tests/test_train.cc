// tests/test_train.cc

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lts/data/cache.h"
#include "lts/data/synthetic.h"
#include "lts/data/window.h"
#include "lts/train/checkpoint.h"
#include "lts/train/train.h"
#include "test_util.h"

namespace lts {
namespace {

namespace fs = std::filesystem;

ModelConfig tiny_config() {
  ModelConfig cfg = smoke_preset();
  cfg.d_model = 32;
  cfg.n_heads = 2;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.conv_kernel = 3;
  cfg.ff_expansion = 2;
  cfg.k_units = 4;
  cfg.n_flow_steps = 2;
  cfg.trunk_base = 8;
  cfg.flow_hidden = 16;
  cfg.relpos_max_dist = 8;
  return cfg;
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.batch_size = 2;
  cfg.window_length = 8;
  cfg.epochs = 2;
  cfg.seed = 5;
  return cfg;
}

// Builds the synthetic corpus plus feature cache once per test binary run.
struct Corpus {
  std::string root;
  std::string cache;
  Manifest manifest;
  std::vector<AlignedPair> pairs;
};

const Corpus& corpus() {
  static Corpus c = [] {
    Corpus c;
    c.root = (fs::temp_directory_path() / "lts_test_train").string();
    fs::remove_all(c.root);
    SyntheticConfig scfg;
    scfg.clips = 2;
    scfg.seed = 7;
    c.manifest = generate_synthetic_corpus(scfg, c.root);
    c.cache = c.root + "/cache";
    preprocess_corpus(c.manifest, c.cache);
    fit_units(c.manifest, c.cache, 4, 11, c.cache + "/codebook.lts");
    for (const auto& e : c.manifest.entries)
      c.pairs.push_back(load_features(c.cache, e.id, true).to_pair());
    return c;
  }();
  return c;
}

std::vector<AlignedPair> tiny_batch() {
  std::vector<AlignedPair> batch;
  for (const AlignedPair& p : corpus().pairs)
    batch.push_back(slice_pair(p, 0, 8));
  return batch;
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

real max_param_diff(const nn::Params& a, const nn::Params& b) {
  real worst = 0;
  for (const auto& [name, v] : a.all()) {
    Var other = b.get(name);
    REQUIRE(other->value.numel() == v->value.numel());
    for (int64_t i = 0; i < v->value.numel(); ++i)
      worst = std::max(worst, std::abs(v->value[i] - other->value[i]));
  }
  return worst;
}

TEST_CASE("train config validates and round-trips through json") {
  TrainConfig cfg;
  CHECK(cfg.lr == 2e-4);
  CHECK(cfg.beta1 == 0.9);
  CHECK(cfg.beta2 == 0.98);
  CHECK(cfg.eps == 1e-9);
  CHECK(cfg.weight_decay == 1e-6);
  CHECK(cfg.lambda_var == 0.1);
  CHECK(cfg.lambda_post == 0.1);
  cfg.validate();

  cfg.window_length = 75;
  cfg.epochs = 900;
  cfg.seed = 99;
  cfg.fixed_windows = true;
  TrainConfig back = train_config_from_json(train_config_to_json(cfg));
  CHECK(back.window_length == 75);
  CHECK(back.epochs == 900);
  CHECK(back.seed == 99);
  CHECK(back.fixed_windows);

  TrainConfig bad;
  bad.lr = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = TrainConfig{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = TrainConfig{};
  bad.lambda_post = -0.1;
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("zero learning rate leaves weights bitwise unchanged") {
  TrainConfig tcfg = tiny_train_config();
  TrainState st = make_train_state(tiny_config(), tcfg);
  TrainState ref = make_train_state(tiny_config(), tcfg);

  std::vector<AlignedPair> batch = tiny_batch();
  opt::AdamW::Config ac = st.adam.config();
  ac.lr = 0;
  st.adam = opt::AdamW(ac);
  train_step(batch, *st.model, st.postnet, st.adam, tcfg, 0);

  // The data-dependent flow init rewrites each step's channel-affine
  // parameters ("postnet.stepN.log_s" / "postnet.stepN.bias", two dots);
  // every other parameter must be untouched bit for bit.
  real worst = 0;
  for (const auto& [name, v] : st.model->params().all()) {
    bool affine = name.rfind("postnet.step", 0) == 0 &&
                  std::count(name.begin(), name.end(), '.') == 2;
    if (affine) continue;
    Var other = ref.model->params().get(name);
    for (int64_t i = 0; i < v->value.numel(); ++i)
      worst = std::max(worst, std::abs(v->value[i] - other->value[i]));
  }
  CHECK(worst == 0);
  CHECK(st.adam.steps() == 1);
  CHECK_FALSE(st.adam.m().empty());
}

TEST_CASE("consecutive steps on a fixed batch do not increase the loss") {
  TrainConfig tcfg = tiny_train_config();
  tcfg.lr = 1e-4;
  TrainState st = make_train_state(tiny_config(), tcfg);
  std::vector<AlignedPair> batch = tiny_batch();

  StepMetrics m0 = train_step(batch, *st.model, st.postnet, st.adam, tcfg, 0);
  StepMetrics m1 = train_step(batch, *st.model, st.postnet, st.adam, tcfg, 1);
  StepMetrics m2 = train_step(batch, *st.model, st.postnet, st.adam, tcfg, 2);
  CHECK(m1.total <= m0.total);
  CHECK(m2.total <= m1.total);
  CHECK(m0.grad_norm > 0);
}

TEST_CASE("gradient reaches every trainable parameter") {
  TrainConfig tcfg = tiny_train_config();
  TrainState st = make_train_state(tiny_config(), tcfg);
  std::vector<AlignedPair> batch = tiny_batch();

  // The coupling output layers start at zero, so nothing upstream of them
  // receives gradient until after the first optimisation step.
  train_step(batch, *st.model, st.postnet, st.adam, tcfg, 0);
  train_step(batch, *st.model, st.postnet, st.adam, tcfg, 1);

  for (const auto& [name, v] : st.model->params().all()) {
    REQUIRE_MESSAGE(v->grad.defined(), name);
    real norm = 0;
    for (int64_t i = 0; i < v->grad.numel(); ++i)
      norm += v->grad[i] * v->grad[i];
    CHECK_MESSAGE(norm > 0, name);
  }
}

TEST_CASE("non-finite states abort with a numerical error") {
  TrainConfig tcfg = tiny_train_config();

  // A poisoned variance target reaches the decoder through teacher forcing
  // and is caught by the conditioning check before any loss is formed.
  SUBCASE("poisoned variance target is caught in conditioning") {
    TrainState st = make_train_state(tiny_config(), tcfg);
    std::vector<AlignedPair> batch = tiny_batch();
    batch[0].targets.energy[2] = std::numeric_limits<real>::infinity();
    CHECK_THROWS_WITH_AS(
        train_step(batch, *st.model, st.postnet, st.adam, tcfg, 0),
        doctest::Contains("non-finite"), NumericalError);
  }

  SUBCASE("overflowing loss names the component") {
    TrainState st = make_train_state(tiny_config(), tcfg);
    std::vector<AlignedPair> batch = tiny_batch();
    st.model->params().get("decoder.out.bias")->value.fill(1e306);
    CHECK_THROWS_WITH_AS(
        train_step(batch, *st.model, st.postnet, st.adam, tcfg, 0),
        doctest::Contains("mel"), NumericalError);
  }
}

TEST_CASE("checkpoint round-trip restores parameters and optimiser state") {
  TrainConfig tcfg = tiny_train_config();
  TrainState st = make_train_state(tiny_config(), tcfg);
  std::vector<AlignedPair> batch = tiny_batch();
  train_step(batch, *st.model, st.postnet, st.adam, tcfg, 0);
  train_step(batch, *st.model, st.postnet, st.adam, tcfg, 1);
  st.step = 2;
  st.epoch = 1;
  st.best_val = 0.5;
  st.codebook_hash = "abc123";

  std::string dir = (fs::temp_directory_path() / "lts_test_ckpt").string();
  fs::create_directories(dir);
  std::string path = dir + "/state.lts";
  save_checkpoint(path, st);

  TrainState back = load_checkpoint(path);
  CHECK(max_param_diff(st.model->params(), back.model->params()) == 0);
  CHECK(back.step == 2);
  CHECK(back.epoch == 1);
  CHECK(back.best_val == 0.5);
  CHECK(back.codebook_hash == "abc123");
  CHECK(back.adam.steps() == st.adam.steps());
  CHECK(back.postnet.initialized());
  REQUIRE(back.adam.m().size() == st.adam.m().size());
  for (const auto& [name, t] : st.adam.m()) {
    const Tensor& other = back.adam.m().at(name);
    for (int64_t i = 0; i < t.numel(); ++i) CHECK(t[i] == other[i]);
  }

  // Saving the loaded state reproduces the file byte for byte.
  std::string path2 = dir + "/state2.lts";
  save_checkpoint(path2, back);
  CHECK(file_bytes(path) == file_bytes(path2));
}

TEST_CASE("experiment with zero epochs emits only the initial checkpoint") {
  std::string out = (fs::temp_directory_path() / "lts_test_exp0").string();
  fs::remove_all(out);
  TrainConfig tcfg = tiny_train_config();
  tcfg.epochs = 0;
  ExperimentResult res = run_experiment(corpus().manifest, corpus().cache,
                                        tiny_config(), tcfg, out);
  CHECK(res.steps == 0);
  CHECK(fs::exists(res.last_checkpoint));
  CHECK(res.best_checkpoint.empty());
  TrainState st = load_checkpoint(res.last_checkpoint);
  CHECK(st.step == 0);
  CHECK(st.epoch == 0);
}

TEST_CASE("experiment trains, validates on train fallback, and checkpoints") {
  std::string out = (fs::temp_directory_path() / "lts_test_exp").string();
  fs::remove_all(out);
  TrainConfig tcfg = tiny_train_config();
  tcfg.epochs = 3;
  tcfg.checkpoint_every = 2;
  ExperimentResult res = run_experiment(corpus().manifest, corpus().cache,
                                        tiny_config(), tcfg, out);
  CHECK(res.steps == 3);
  CHECK(fs::exists(res.last_checkpoint));
  CHECK(fs::exists(res.best_checkpoint));
  CHECK(fs::exists(out + "/epoch000002.lts"));
  CHECK(res.best_val_mel < std::numeric_limits<real>::infinity());

  std::ifstream log(res.metrics_path);
  std::string line;
  int64_t steps = 0, vals = 0, notes = 0;
  while (std::getline(log, line)) {
    auto j = nlohmann::json::parse(line);
    if (j.contains("note"))
      ++notes;
    else if (j.contains("val"))
      ++vals;
    else
      ++steps;
  }
  CHECK(notes == 1);
  CHECK(steps == 3);
  CHECK(vals == 3);

  TrainState st = load_checkpoint(res.last_checkpoint);
  CHECK(st.step == 3);
  CHECK(st.epoch == 3);
  CHECK_FALSE(st.codebook_hash.empty());
}

TEST_CASE("missing feature cache yields an actionable error") {
  std::string out = (fs::temp_directory_path() / "lts_test_nocache").string();
  fs::remove_all(out);
  CHECK_THROWS_WITH_AS(
      run_experiment(corpus().manifest, out + "/empty_cache", tiny_config(),
                     tiny_train_config(), out),
      doctest::Contains("preprocess"), DataError);
}

TEST_CASE("resumed run continues the uninterrupted trace") {
  std::string out_a = (fs::temp_directory_path() / "lts_test_res_a").string();
  std::string out_b = (fs::temp_directory_path() / "lts_test_res_b").string();
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  TrainConfig tcfg = tiny_train_config();
  tcfg.epochs = 4;
  run_experiment(corpus().manifest, corpus().cache, tiny_config(), tcfg,
                 out_a);

  TrainConfig half = tcfg;
  half.epochs = 2;
  run_experiment(corpus().manifest, corpus().cache, tiny_config(), half,
                 out_b);
  TrainConfig full = tcfg;
  run_experiment(corpus().manifest, corpus().cache, tiny_config(), full,
                 out_b, true);

  TrainState a = load_checkpoint(out_a + "/last.lts");
  TrainState b = load_checkpoint(out_b + "/last.lts");
  CHECK(a.step == b.step);
  CHECK(a.epoch == b.epoch);
  CHECK(max_param_diff(a.model->params(), b.model->params()) == 0);

  // The launch headers legitimately differ (run B's first leg was started
  // with fewer epochs); every step and validation line must match exactly.
  auto trace = [](const std::string& path) {
    std::string all = file_bytes(path);
    return all.substr(all.find('\n') + 1);
  };
  CHECK(trace(out_a + "/metrics.jsonl") == trace(out_b + "/metrics.jsonl"));
  CHECK(file_bytes(out_a + "/last.lts") == file_bytes(out_b + "/last.lts"));
}

}  // namespace
}  // namespace lts
