// src/train/train.cc

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

#include "lts/train/train.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <utility>

#include "lts/core/autograd.h"
#include "lts/core/rng.h"
#include "lts/data/cache.h"
#include "lts/data/window.h"
#include "lts/model/losses.h"
#include "lts/train/checkpoint.h"

namespace lts {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  require<DataError>(lr > 0, "TrainConfig: lr must be positive");
  require<DataError>(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1,
                     "TrainConfig: betas must lie in (0, 1)");
  require<DataError>(eps > 0, "TrainConfig: eps must be positive");
  require<DataError>(weight_decay >= 0,
                     "TrainConfig: weight_decay must be non-negative");
  require<DataError>(batch_size > 0, "TrainConfig: batch_size must be positive");
  require<DataError>(window_length > 0,
                     "TrainConfig: window_length must be positive");
  require<DataError>(epochs >= 0, "TrainConfig: epochs must be non-negative");
  require<DataError>(lambda_var >= 0 && lambda_post >= 0,
                     "TrainConfig: loss weights must be non-negative");
  require<DataError>(val_every > 0, "TrainConfig: val_every must be positive");
  require<DataError>(checkpoint_every >= 0,
                     "TrainConfig: checkpoint_every must be non-negative");
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return nlohmann::json{{"lr", cfg.lr},
                        {"beta1", cfg.beta1},
                        {"beta2", cfg.beta2},
                        {"eps", cfg.eps},
                        {"weight_decay", cfg.weight_decay},
                        {"batch_size", cfg.batch_size},
                        {"window_length", cfg.window_length},
                        {"epochs", cfg.epochs},
                        {"lambda_var", cfg.lambda_var},
                        {"lambda_post", cfg.lambda_post},
                        {"seed", cfg.seed},
                        {"grad_clip", cfg.grad_clip},
                        {"mean_reduction", cfg.mean_reduction},
                        {"deterministic", cfg.deterministic},
                        {"fixed_windows", cfg.fixed_windows},
                        {"val_every", cfg.val_every},
                        {"checkpoint_every", cfg.checkpoint_every}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.lr = j.value("lr", cfg.lr);
  cfg.beta1 = j.value("beta1", cfg.beta1);
  cfg.beta2 = j.value("beta2", cfg.beta2);
  cfg.eps = j.value("eps", cfg.eps);
  cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.window_length = j.value("window_length", cfg.window_length);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.lambda_var = j.value("lambda_var", cfg.lambda_var);
  cfg.lambda_post = j.value("lambda_post", cfg.lambda_post);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.grad_clip = j.value("grad_clip", cfg.grad_clip);
  cfg.mean_reduction = j.value("mean_reduction", cfg.mean_reduction);
  cfg.deterministic = j.value("deterministic", cfg.deterministic);
  cfg.fixed_windows = j.value("fixed_windows", cfg.fixed_windows);
  cfg.val_every = j.value("val_every", cfg.val_every);
  cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  cfg.validate();
  return cfg;
}

nlohmann::json StepMetrics::to_json() const {
  return nlohmann::json{{"step", step},
                        {"epoch", epoch},
                        {"mel_l1", mel_l1},
                        {"linguistic", linguistic},
                        {"pitch", pitch},
                        {"energy", energy},
                        {"nll", nll},
                        {"total", total},
                        {"grad_norm", grad_norm},
                        {"wall_s", wall_s}};
}

nlohmann::json ValMetrics::to_json() const {
  return nlohmann::json{{"mel_l1", mel_l1},
                        {"linguistic", linguistic},
                        {"pitch", pitch},
                        {"energy", energy},
                        {"nll", nll}};
}

namespace {

struct WindowLosses {
  Var mel, linguistic, pitch, energy, nll;
  Var total;
};

// Losses for one window with the configured reduction applied.
WindowLosses window_losses(const AlignedPair& w, LipToSpeechModel& model,
                           FlowPostnet& postnet, const TrainConfig& cfg,
                           uint64_t fwd_seed, bool training) {
  auto out = model.forward_teacher(w.clip, w.targets, w.clip.speaker_id,
                                   fwd_seed, training);
  int64_t t_v = w.clip.t_v();

  FlowCondition cond;
  cond.decoder_input = out.decoder_input;
  cond.decoder_output = out.coarse_mel;
  cond.speaker = model.speaker_embedding(w.clip.speaker_id);

  WindowLosses l;
  l.mel = mel_loss(out.coarse_mel, w.mel.values);
  VarianceLosses vl = variance_losses(out.pred, w.targets);
  l.linguistic = vl.linguistic;
  l.pitch = vl.pitch;
  l.energy = vl.energy;
  l.nll = postnet.nll(ag::constant(w.mel.values.clone()), cond,
                      cfg.mean_reduction);
  if (cfg.mean_reduction) {
    l.mel = ag::mul_scalar(l.mel, 1.0 / static_cast<real>(w.mel.values.numel()));
    l.linguistic = ag::mul_scalar(l.linguistic, 1.0 / static_cast<real>(t_v));
    l.pitch = ag::mul_scalar(l.pitch, 1.0 / static_cast<real>(t_v));
    l.energy = ag::mul_scalar(l.energy, 1.0 / static_cast<real>(t_v));
  }
  VarianceLosses reduced{l.linguistic, l.pitch, l.energy};
  l.total = combine_losses(l.mel, reduced, l.nll, cfg.lambda_var,
                           cfg.lambda_post);
  return l;
}

void check_finite_losses(const WindowLosses& l, int64_t step) {
  const std::pair<const char*, real> parts[] = {
      {"mel", l.mel->scalar()},
      {"linguistic", l.linguistic->scalar()},
      {"pitch", l.pitch->scalar()},
      {"energy", l.energy->scalar()},
      {"post-net NLL", l.nll->scalar()}};
  for (const auto& [name, v] : parts)
    require<NumericalError>(
        std::isfinite(v),
        strprintf("non-finite %s loss at step %lld", name,
                  static_cast<long long>(step)));
}

AlignedPair fixed_window(const AlignedPair& pair, int64_t length) {
  return slice_pair(pad_pair(pair, length), 0, length);
}

void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

StepMetrics train_step(const std::vector<AlignedPair>& batch,
                       LipToSpeechModel& model, FlowPostnet& postnet,
                       opt::AdamW& adam, const TrainConfig& cfg,
                       int64_t step) {
  require<DataError>(!batch.empty(), "train_step: empty batch");
  auto t0 = std::chrono::steady_clock::now();

  // Channel-affine statistics of the post-net are set from the whole first
  // batch; pooling across windows keeps per-channel estimates stable.
  if (!postnet.initialized()) {
    ag::NoGradGuard ng;
    std::vector<Tensor> mels;
    std::vector<FlowCondition> conds;
    for (size_t i = 0; i < batch.size(); ++i) {
      const AlignedPair& w = batch[i];
      auto out = model.forward_teacher(w.clip, w.targets, w.clip.speaker_id,
                                       derive_seed(cfg.seed, "init", i), false);
      FlowCondition cond;
      cond.decoder_input = out.decoder_input;
      cond.decoder_output = out.coarse_mel;
      cond.speaker = model.speaker_embedding(w.clip.speaker_id);
      mels.push_back(w.mel.values);
      conds.push_back(cond);
    }
    postnet.data_init(mels, conds);
  }

  model.params().zero_grads();

  StepMetrics m;
  m.step = step;
  real inv_b = 1.0 / static_cast<real>(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    uint64_t fwd_seed =
        derive_seed(cfg.seed, "fwd", static_cast<uint64_t>(step), i);
    WindowLosses l =
        window_losses(batch[i], model, postnet, cfg, fwd_seed, true);
    check_finite_losses(l, step);
    ag::backward(ag::mul_scalar(l.total, inv_b));
    m.mel_l1 += l.mel->scalar() * inv_b;
    m.linguistic += l.linguistic->scalar() * inv_b;
    m.pitch += l.pitch->scalar() * inv_b;
    m.energy += l.energy->scalar() * inv_b;
    m.nll += l.nll->scalar() * inv_b;
    m.total += l.total->scalar() * inv_b;
  }
  m.grad_norm = cfg.grad_clip > 0
                    ? opt::clip_grad_norm(model.params().all(), cfg.grad_clip)
                    : opt::global_grad_norm(model.params().all());
  adam.step(model.params().all());
  if (!cfg.deterministic) {
    std::chrono::duration<real> dt = std::chrono::steady_clock::now() - t0;
    m.wall_s = dt.count();
  }
  return m;
}

ValMetrics evaluate_clips(const std::vector<AlignedPair>& clips,
                          LipToSpeechModel& model, FlowPostnet& postnet,
                          const TrainConfig& cfg) {
  require<DataError>(!clips.empty(), "evaluate_clips: empty clip list");
  ag::NoGradGuard ng;
  ValMetrics vm;
  real inv_n = 1.0 / static_cast<real>(clips.size());
  for (size_t i = 0; i < clips.size(); ++i) {
    AlignedPair w = fixed_window(clips[i], cfg.window_length);
    uint64_t seed = derive_seed(cfg.seed, "val", i);
    WindowLosses l = window_losses(w, model, postnet, cfg, seed, false);
    vm.mel_l1 += l.mel->scalar() * inv_n;
    vm.linguistic += l.linguistic->scalar() * inv_n;
    vm.pitch += l.pitch->scalar() * inv_n;
    vm.energy += l.energy->scalar() * inv_n;
    vm.nll += l.nll->scalar() * inv_n;
  }
  return vm;
}

namespace {

std::vector<AlignedPair> load_split(
    const std::vector<const ManifestEntry*>& entries,
    const std::string& cache_dir, const ModelConfig& mcfg,
    std::string* codebook_hash) {
  std::vector<AlignedPair> pairs;
  pairs.reserve(entries.size());
  for (const ManifestEntry* e : entries) {
    std::string path = feature_path(cache_dir, e->id);
    require<DataError>(
        fs::exists(path),
        strprintf("feature cache missing for clip '%s' (expected %s): run "
                  "`lts preprocess --manifest <manifest> --cache-dir %s` "
                  "first",
                  e->id.c_str(), path.c_str(), cache_dir.c_str()));
    ClipFeatures f = load_features(cache_dir, e->id);
    require<DataError>(
        f.has_units,
        strprintf("clip '%s' has no linguistic unit targets: run "
                  "`lts fit-units --manifest <manifest> --cache-dir %s` "
                  "first",
                  e->id.c_str(), cache_dir.c_str()));
    if (codebook_hash) {
      if (codebook_hash->empty()) {
        *codebook_hash = f.codebook_hash;
      } else {
        require<DataError>(
            *codebook_hash == f.codebook_hash,
            strprintf("clip '%s' was quantised with a different codebook: "
                      "re-run `lts fit-units` over the full cache",
                      e->id.c_str()));
      }
    }
    AlignedPair pair = f.to_pair();
    try {
      pair.validate(mcfg.k_units);
    } catch (const DataError& err) {
      throw DataError(strprintf(
          "clip '%s' is inconsistent with the model configuration (%s); "
          "check k_units against the fitted codebook",
          e->id.c_str(), err.what()));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace

ExperimentResult run_experiment(const Manifest& manifest,
                                const std::string& cache_dir,
                                const ModelConfig& model_cfg,
                                const TrainConfig& train_cfg,
                                const std::string& out_dir, bool resume) {
  fs::create_directories(out_dir);
  std::string last_path = out_dir + "/last.lts";
  std::string best_path = out_dir + "/best.lts";
  std::string metrics_path = out_dir + "/metrics.jsonl";

  auto train_entries = manifest.split("train");
  require<DataError>(!train_entries.empty(),
                     "run_experiment: manifest has no train split");
  int64_t max_speaker = 0;
  for (const ManifestEntry& e : manifest.entries)
    max_speaker = std::max(max_speaker, e.speaker_id);

  TrainState st;
  int64_t target_epochs = train_cfg.epochs;
  bool raised_speakers = false;
  if (resume) {
    require<DataError>(
        fs::exists(last_path),
        strprintf("cannot resume: checkpoint %s not found", last_path.c_str()));
    st = load_checkpoint(last_path);
    st.train_cfg.epochs = target_epochs;
  } else {
    ModelConfig mcfg = model_cfg;
    if (mcfg.n_speakers <= max_speaker) {
      mcfg.n_speakers = max_speaker + 1;
      raised_speakers = true;
    }
    st = make_train_state(mcfg, train_cfg);
  }
  const TrainConfig& cfg = st.train_cfg;

  std::string codebook_hash = resume ? st.codebook_hash : std::string();
  std::vector<AlignedPair> train_pairs =
      load_split(train_entries, cache_dir, st.model_cfg, &codebook_hash);
  st.codebook_hash = codebook_hash;

  auto val_entries = manifest.split("val");
  bool val_on_train = val_entries.empty();
  std::vector<AlignedPair> val_pairs =
      val_on_train ? train_pairs
                   : load_split(val_entries, cache_dir, st.model_cfg,
                                &codebook_hash);

  std::ofstream log(metrics_path,
                    resume ? std::ios::app : std::ios::trunc);
  require<DataError>(log.good(), strprintf("cannot open %s for writing",
                                           metrics_path.c_str()));
  if (!resume) {
    nlohmann::json header{{"note", "run_start"},
                          {"model_config", model_config_to_json(st.model_cfg)},
                          {"train_config", train_config_to_json(cfg)},
                          {"clips", train_pairs.size()},
                          {"val_on_train", val_on_train}};
    if (raised_speakers)
      header["n_speakers_raised_to"] = st.model_cfg.n_speakers;
    log << header.dump() << "\n";
    log.flush();
  }

  ExperimentResult result;
  result.metrics_path = metrics_path;
  result.last_checkpoint = last_path;
  result.best_val_mel = st.best_val;
  bool first_recorded = false;

  for (int64_t e = st.epoch; e < cfg.epochs; ++e) {
    std::vector<size_t> order(train_pairs.size());
    std::iota(order.begin(), order.end(), size_t(0));
    Rng order_rng(derive_seed(cfg.seed, "order", static_cast<uint64_t>(e)));
    shuffle_indices(order, order_rng);

    for (size_t pos = 0; pos < order.size();
         pos += static_cast<size_t>(cfg.batch_size)) {
      size_t end = std::min(order.size(),
                            pos + static_cast<size_t>(cfg.batch_size));
      std::vector<AlignedPair> batch;
      batch.reserve(end - pos);
      for (size_t i = pos; i < end; ++i) {
        const AlignedPair& pair = train_pairs[order[i]];
        if (cfg.fixed_windows) {
          batch.push_back(fixed_window(pair, cfg.window_length));
        } else {
          Rng wrng(derive_seed(cfg.seed, "window",
                               static_cast<uint64_t>(e), i));
          batch.push_back(
              sample_window(pair, cfg.window_length, wrng, true));
        }
      }
      StepMetrics sm;
      try {
        sm = train_step(batch, *st.model, st.postnet, st.adam, cfg, st.step);
      } catch (const NumericalError& err) {
        std::string abort_path = out_dir + "/abort.lts";
        save_checkpoint(abort_path, st);
        throw NumericalError(strprintf("%s; state saved to %s", err.what(),
                                       abort_path.c_str()));
      }
      sm.epoch = e;
      log << sm.to_json().dump() << "\n";
      log.flush();
      if (!first_recorded) {
        result.first_train_mel = sm.mel_l1;
        first_recorded = true;
      }
      result.final_train_mel = sm.mel_l1;
      ++st.step;
    }
    st.epoch = e + 1;

    if ((e + 1) % cfg.val_every == 0 || e + 1 == cfg.epochs) {
      ValMetrics vm = evaluate_clips(val_pairs, *st.model, st.postnet, cfg);
      nlohmann::json line{{"step", st.step},
                          {"epoch", e + 1},
                          {"val", vm.to_json()}};
      log << line.dump() << "\n";
      log.flush();
      if (vm.mel_l1 < st.best_val) {
        st.best_val = vm.mel_l1;
        save_checkpoint(best_path, st);
        result.best_checkpoint = best_path;
      }
    }
    if (cfg.checkpoint_every > 0 && (e + 1) % cfg.checkpoint_every == 0) {
      save_checkpoint(
          strprintf("%s/epoch%06lld.lts", out_dir.c_str(),
                    static_cast<long long>(e + 1)),
          st);
    }
  }

  save_checkpoint(last_path, st);
  result.steps = st.step;
  result.best_val_mel = st.best_val;
  if (fs::exists(best_path)) result.best_checkpoint = best_path;
  return result;
}

}  // namespace lts
