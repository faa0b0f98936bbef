// src/audio/pitch.cc

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

#include "lts/audio/pitch.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lts {

namespace {

// Survival function of Beta(2,18): probability that a YIN threshold drawn
// from the prior exceeds x. Closed form of 1 - CDF.
real beta_survival(real x) {
  if (x <= 0) return 1;
  if (x >= 1) return 0;
  return std::pow(1 - x, 18.0) * (1 + 18.0 * x);
}

int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

real semitone_distance(real f1, real f2) {
  return std::abs(std::log2(f1 / f2)) * 12.0;
}

real parabolic_tau(const std::vector<real>& d, int64_t tau) {
  if (tau <= 0 || tau + 1 >= static_cast<int64_t>(d.size()))
    return real(tau);
  real s0 = d[tau - 1], s1 = d[tau], s2 = d[tau + 1];
  real denom = s0 - 2 * s1 + s2;
  return denom != 0 ? real(tau) - 0.5 * (s2 - s0) / denom : real(tau);
}

}  // namespace

int64_t PitchTrack::voiced_count() const {
  int64_t n = 0;
  for (uint8_t v : voiced) n += v;
  return n;
}

PitchTrack pyin_pitch(const std::vector<real>& waveform, int64_t sample_rate,
                      const PitchConfig& cfg) {
  require<DataError>(!waveform.empty(), "pyin_pitch: empty waveform");
  require(cfg.fmax > cfg.fmin && cfg.fmin > 0 &&
              cfg.fmax < real(sample_rate) / 2,
          "pyin_pitch: bad frequency range");
  int64_t tau_min = static_cast<int64_t>(std::ceil(sample_rate / cfg.fmax));
  int64_t tau_max = static_cast<int64_t>(std::floor(sample_rate / cfg.fmin));
  require(cfg.window >= tau_max, "pyin_pitch: window shorter than one period");

  int64_t len = static_cast<int64_t>(waveform.size());
  int64_t frames = len / cfg.hop;
  require<DataError>(frames > 0, "pyin_pitch: signal shorter than one hop");

  int64_t n_bins = static_cast<int64_t>(
      std::ceil(semitone_distance(cfg.fmin, cfg.fmax) / cfg.bin_semitones)) + 1;
  std::vector<real> bin_freq(n_bins);
  for (int64_t b = 0; b < n_bins; ++b)
    bin_freq[b] = cfg.fmin * std::exp2(cfg.bin_semitones * real(b) / 12.0);
  real stay = 1 - cfg.switch_prob;
  int64_t half_width = (cfg.transition_width + 1) / 2;
  real sqr_half = real(half_width * half_width);
  constexpr real kTiny = 1e-16;

  // Two HMM state vectors: voiced and unvoiced occupancy per pitch bin.
  std::vector<real> state_v(n_bins, 0.5 / real(n_bins));
  std::vector<real> state_u(n_bins, 0.5 / real(n_bins));
  std::vector<real> next_v(n_bins), next_u(n_bins);

  int64_t seg_len = cfg.window + tau_max;
  std::vector<real> seg(seg_len);
  std::vector<real> diff(tau_max + 1);
  std::vector<real> obs(n_bins);
  std::vector<real> best_freq(n_bins);

  PitchTrack track;
  track.f0.assign(frames, 0);
  track.voiced.assign(frames, 0);

  for (int64_t f = 0; f < frames; ++f) {
    int64_t center = f * cfg.hop + cfg.hop / 2;
    for (int64_t j = 0; j < seg_len; ++j)
      seg[j] = waveform[reflect_index(center - seg_len / 2 + j, len)];

    for (int64_t tau = 0; tau <= tau_max; ++tau) {
      real acc = 0;
      for (int64_t j = 0; j < cfg.window; ++j) {
        real d = seg[j] - seg[j + tau];
        acc += d * d;
      }
      diff[tau] = acc;
    }

    // Trough scan over the cumulative-mean-normalised difference, assigning
    // each successively deeper trough the threshold mass between its depth
    // and the previous trough's depth.
    std::fill(obs.begin(), obs.end(), real(0));
    best_freq = bin_freq;
    real cur_norm = 0, next_norm = 1;
    real global_min = std::numeric_limits<real>::max();
    int64_t global_min_bin = -1;
    real running_sum = 0, last_survival = 0;
    for (int64_t tau = 0; tau < tau_max; ++tau) {
      bool prev_decreasing = cur_norm >= next_norm;
      cur_norm = next_norm;
      running_sum += diff[tau + 1];
      // Silence convention: a zero cumulative sum yields no trough.
      next_norm = running_sum > 0
                      ? diff[tau + 1] / (running_sum / real(tau + 1))
                      : real(1);
      if (tau >= tau_min && prev_decreasing && next_norm >= cur_norm &&
          cur_norm < global_min && cur_norm < 1) {
        real survival = beta_survival(
            std::floor(cur_norm / cfg.threshold_step) * cfg.threshold_step);
        real prob = survival - last_survival;
        real freq = std::clamp(real(sample_rate) / parabolic_tau(diff, tau),
                               cfg.fmin, cfg.fmax);
        auto bin = static_cast<int64_t>(
            std::round(semitone_distance(freq, cfg.fmin) / cfg.bin_semitones));
        bin = std::clamp(bin, int64_t(0), n_bins - 1);
        if (prob >= obs[bin]) best_freq[bin] = freq;
        obs[bin] += prob;
        last_survival = survival;
        global_min = cur_norm;
        global_min_bin = bin;
      }
    }
    real global_min_prob = 0;
    if (global_min_bin >= 0) {
      global_min_prob = (1 - last_survival) * cfg.prior_global_min;
      obs[global_min_bin] += global_min_prob;
    }
    real voiced_mass = last_survival + global_min_prob;
    real obs_unvoiced = (1 - voiced_mass) / real(n_bins) * cfg.yin_trust +
                        (1 - cfg.voiced_trust) * (1 - cfg.yin_trust);

    // One forward HMM step: local max over a triangular transition window,
    // then the voiced/unvoiced switch.
    real best_path = -1;
    for (int64_t b = 0; b < n_bins; ++b) {
      real max_prev_v = kTiny, max_prev_u = kTiny;
      int64_t j_lo = -std::min(half_width - 1, b);
      int64_t j_hi = std::min(half_width, n_bins - b);
      for (int64_t j = j_lo; j < j_hi; ++j) {
        real trans = real(half_width - std::abs(j)) / sqr_half;
        max_prev_v = std::max(max_prev_v, state_v[b + j] * trans);
        max_prev_u = std::max(max_prev_u, state_u[b + j] * trans);
      }
      real obs_voiced =
          obs[b] * cfg.yin_trust + cfg.voiced_trust * (1 - cfg.yin_trust);
      real pv = std::max(max_prev_v * stay, max_prev_u * cfg.switch_prob) *
                obs_voiced;
      pv = std::clamp(pv, kTiny, real(1));
      next_v[b] = pv;
      if (pv > best_path) {
        best_path = pv;
        track.f0[f] = best_freq[b];
        track.voiced[f] = 1;
      }
      real pu = std::max(max_prev_u * stay, max_prev_v * cfg.switch_prob) *
                obs_unvoiced;
      pu = std::clamp(pu, kTiny, real(1));
      next_u[b] = pu;
      if (pu > best_path) {
        best_path = pu;
        track.f0[f] = 0;
        track.voiced[f] = 0;
      }
    }
    real total = 0;
    for (int64_t b = 0; b < n_bins; ++b) total += next_v[b] + next_u[b];
    for (int64_t b = 0; b < n_bins; ++b) {
      state_v[b] = next_v[b] / total;
      state_u[b] = next_u[b] / total;
    }
  }
  return track;
}

PitchStats accumulate_pitch_stats(const std::vector<const PitchTrack*>& tracks) {
  PitchStats stats;
  real sum = 0;
  for (const PitchTrack* t : tracks)
    for (int64_t i = 0; i < t->frames(); ++i)
      if (t->voiced[i]) {
        sum += t->f0[i];
        ++stats.voiced_frames;
      }
  require<DataError>(stats.voiced_frames > 0,
                     "pitch stats: no voiced frames in corpus");
  stats.mean = sum / real(stats.voiced_frames);
  real sq = 0;
  for (const PitchTrack* t : tracks)
    for (int64_t i = 0; i < t->frames(); ++i)
      if (t->voiced[i]) {
        real d = t->f0[i] - stats.mean;
        sq += d * d;
      }
  stats.stddev = std::sqrt(sq / real(stats.voiced_frames));
  return stats;
}

StandardisedPitch standardise_pitch(const PitchTrack& track,
                                    const PitchStats& stats, int64_t t_v) {
  require<DataError>(track.frames() == 4 * t_v,
                     "standardise_pitch: track length must be 4*T_v");
  require<NumericalError>(stats.stddev > 0,
                          "standardise_pitch: degenerate corpus (zero std)");
  StandardisedPitch out;
  out.all_unvoiced = track.voiced_count() == 0;
  out.values.assign(t_v, 0);
  for (int64_t v = 0; v < t_v; ++v) {
    real acc = 0;
    for (int64_t j = 0; j < 4; ++j) {
      int64_t i = 4 * v + j;
      real raw = track.voiced[i] ? track.f0[i] : stats.mean;
      acc += (raw - stats.mean) / stats.stddev;
    }
    out.values[v] = acc / 4;
  }
  return out;
}

}  // namespace lts
