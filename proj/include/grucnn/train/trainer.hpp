#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grucnn/dsp/spectral.hpp"
#include "grucnn/model/checkpoint.hpp"
#include "grucnn/train/adam.hpp"
#include "grucnn/train/loss.hpp"
#include "grucnn/train/manifest.hpp"

namespace grucnn::train {

struct TrainConfig {
  double lr0 = 1e-3;
  double decay_steps = 20000;
  double decay_rate = 0.99;
  std::size_t segment_frames = 128;
  std::size_t batch = 1;
  std::uint64_t max_steps = 1000;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t checkpoint_every = 100;  // 0 = only at the end

  void validate() const {
    if (!(lr0 > 0) || !(decay_steps > 0) || !(decay_rate > 0) || !(epsilon > 0))
      throw ContractError("TrainConfig: lr0, decay_steps, decay_rate and epsilon must be positive");
    if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1))
      throw ContractError("TrainConfig: beta1 and beta2 must lie in (0, 1)");
    if (segment_frames < 1) throw ContractError("TrainConfig: segment_frames must be >= 1");
    if (max_steps < 1) throw ContractError("TrainConfig: max_steps must be >= 1");
    if (batch != 1) throw ContractError(str_cat("TrainConfig: batch ", batch, " unsupported, only batch = 1"));
  }

  AdamConfig adam() const { return {lr0, decay_steps, decay_rate, beta1, beta2, epsilon}; }

  nlohmann::json to_json() const {
    return {{"lr0", lr0},         {"decay_steps", decay_steps},       {"decay_rate", decay_rate},
            {"segment_frames", segment_frames}, {"batch", batch},     {"max_steps", max_steps},
            {"seed", seed},       {"beta1", beta1},                   {"beta2", beta2},
            {"epsilon", epsilon}, {"checkpoint_every", checkpoint_every}};
  }

  /// Overlays the keys present in `j` on top of `base`; unknown keys are errors.
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig()); }

  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base) {
    if (!j.is_object()) throw ContractError("TrainConfig: config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      try {
        if (k == "lr0") base.lr0 = v.get<double>();
        else if (k == "decay_steps") base.decay_steps = v.get<double>();
        else if (k == "decay_rate") base.decay_rate = v.get<double>();
        else if (k == "segment_frames") base.segment_frames = v.get<std::size_t>();
        else if (k == "batch") base.batch = v.get<std::size_t>();
        else if (k == "max_steps") base.max_steps = v.get<std::uint64_t>();
        else if (k == "seed") base.seed = v.get<std::uint64_t>();
        else if (k == "beta1") base.beta1 = v.get<double>();
        else if (k == "beta2") base.beta2 = v.get<double>();
        else if (k == "epsilon") base.epsilon = v.get<double>();
        else if (k == "checkpoint_every") base.checkpoint_every = v.get<std::uint64_t>();
        else throw ContractError(str_cat("TrainConfig: unknown key '", k, "'"));
      } catch (const nlohmann::json::exception& e) {
        throw ContractError(str_cat("TrainConfig: bad value for '", k, "': ", e.what()));
      }
    }
    return base;
  }

  static TrainConfig load(const std::filesystem::path& path) { return load(path, TrainConfig()); }

  static TrainConfig load(const std::filesystem::path& path, TrainConfig base) {
    if (!std::filesystem::exists(path)) throw ContractError(str_cat("config not found: ", path.string()));
    try {
      return from_json(nlohmann::json::parse(dsp::read_file_bytes(path)), base);
    } catch (const nlohmann::json::parse_error& e) {
      throw ContractError(str_cat("config ", path.string(), ": ", e.what()));
    }
  }
};

/// Whole-utterance training pair: noisy log-power features and clean
/// magnitude targets, both [161 x frames].
struct TrainingExample {
  RowMatrix noisy_log_power;
  RowMatrix clean_magnitude;
};

inline TrainingExample make_example(const dsp::AudioClip& clean, const dsp::AudioClip& noisy) {
  if (clean.samples.size() != noisy.samples.size())
    throw ContractError("make_example: clean and noisy clips differ in length");
  return {dsp::stft(noisy).log_power, dsp::magnitude(dsp::stft(clean))};
}

/// Noisy input and clean target for the same `frames` frames starting at
/// `start`; frames past the end are zero on both sides.
struct Segment {
  Tensor input;
  Tensor target;
};

inline Segment crop_segment(const TrainingExample& ex, std::size_t start, std::size_t frames) {
  const std::size_t bins = static_cast<std::size_t>(ex.noisy_log_power.rows());
  const std::size_t total = static_cast<std::size_t>(ex.noisy_log_power.cols());
  if (start > total) throw ContractError("crop_segment: start past the end of the example");
  std::vector<double> in(bins * frames, 0.0), tg(bins * frames, 0.0);
  const std::size_t avail = std::min(frames, total - start);
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t t = 0; t < avail; ++t) {
      in[k * frames + t] = ex.noisy_log_power(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(start + t));
      tg[k * frames + t] = ex.clean_magnitude(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(start + t));
    }
  }
  return {Tensor::from({bins, frames}, std::move(in)), Tensor::from({bins, frames}, std::move(tg))};
}

/// Forward, loss, backward and Adam update on one segment at a time.
class Trainer {
 public:
  Trainer(const model::Model& model, const AdamConfig& adam) : model_(model), adam_(adam, model.parameters()) {}

  /// Returns the loss before the update.
  double step(const Segment& seg) {
    model::zero_grad(model_);
    const Tensor loss = loss_mse_magnitude(model_.forward(seg.input), seg.target);
    const double value = loss.item();
    loss.backward();
    adam_.step(model_.parameters());
    return value;
  }

  Adam& optimizer() { return adam_; }
  const model::Model& model() const { return model_; }

 private:
  const model::Model& model_;
  Adam adam_;
};

struct LossRecord {
  std::uint64_t step;
  double lr;
  double loss;
};

inline std::string format_loss_record(const LossRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%llu\t%.17g\t%.17g\n", static_cast<unsigned long long>(r.step), r.lr, r.loss);
  return buf;
}

struct TrainOptions {
  std::filesystem::path checkpoint_path;  // empty = keep in memory only
  std::filesystem::path loss_log_path;    // empty = no log file
  std::optional<model::Checkpoint> resume;
  std::function<void(const LossRecord&)> on_step;
};

struct TrainResult {
  model::Checkpoint checkpoint;
  std::vector<LossRecord> curve;
};

/// Trains `spec` on recipes drawn uniformly with replacement until the global
/// step count reaches `config.max_steps`. With `options.resume` the model,
/// optimizer moments, step count and sampling RNG continue from the
/// checkpoint, so an interrupted run and an uninterrupted one agree.
inline TrainResult train_loop(const model::ModelSpec& spec, const TrainConfig& config, MixtureSource& source,
                              const TrainOptions& options = {}) {
  config.validate();
  for (const auto& r : source.recipes()) validate_recipe(r, Split::train);

  std::optional<model::Model> model;
  Rng rng(config.seed ^ 0x7261696e6c6f6f70ULL);
  if (options.resume) {
    if (!(options.resume->spec == spec))
      throw ContractError(str_cat("resume: checkpoint spec ", options.resume->spec.canonical(), " differs from ",
                                  spec.canonical()));
    model.emplace(model::model_from_checkpoint(*options.resume));
    if (!options.resume->rng_state.empty()) rng.restore(options.resume->rng_state);
  } else {
    model.emplace(spec, config.seed);
  }
  Trainer trainer(*model, config.adam());
  if (options.resume) {
    if (options.resume->moments) trainer.optimizer().restore(*options.resume->moments, options.resume->step);
    else trainer.optimizer().restore(trainer.optimizer().moments(), options.resume->step);
  }

  std::ofstream log;
  if (!options.loss_log_path.empty()) {
    log.open(options.loss_log_path, options.resume ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc);
    if (!log) throw RuntimeError(str_cat("cannot open loss log ", options.loss_log_path.string()));
  }
  auto save = [&] {
    auto ckpt = model::snapshot(*model, trainer.optimizer().steps(), rng.state(), trainer.optimizer().moments());
    if (!options.checkpoint_path.empty()) model::save_checkpoint(options.checkpoint_path, ckpt);
    return ckpt;
  };

  TrainResult result;
  std::vector<std::optional<TrainingExample>> examples(source.size());
  while (trainer.optimizer().steps() < config.max_steps) {
    const std::uint64_t step = trainer.optimizer().steps();
    const std::size_t idx = rng.index(source.size());
    if (!examples[idx]) {
      const auto mix = source.mixture(idx);
      examples[idx] = make_example(mix.clean, mix.noisy);
    }
    const auto& ex = *examples[idx];
    const std::size_t total = static_cast<std::size_t>(ex.noisy_log_power.cols());
    const std::size_t start = total > config.segment_frames ? rng.index(total - config.segment_frames + 1) : 0;
    const LossRecord rec{step, learning_rate(trainer.optimizer().config(), step),
                         trainer.step(crop_segment(ex, start, config.segment_frames))};
    result.curve.push_back(rec);
    if (log) {
      log << format_loss_record(rec);
      log.flush();
    }
    if (options.on_step) options.on_step(rec);
    if (config.checkpoint_every != 0 && trainer.optimizer().steps() % config.checkpoint_every == 0 &&
        trainer.optimizer().steps() < config.max_steps)
      save();
  }
  result.checkpoint = save();
  return result;
}

/// Runs the model over the whole clip and resynthesizes with the noisy phase.
/// Predicted log-power is clamped to the same range the loss uses.
inline dsp::AudioClip enhance(const model::Model& model, const dsp::AudioClip& noisy) {
  if (noisy.sample_rate != dsp::kSampleRate)
    throw ContractError(str_cat("enhance: sample rate ", noisy.sample_rate, " Hz unsupported (expected 16000)"));
  if (noisy.samples.empty()) throw ContractError("enhance: empty clip");
  NoGradGuard no_grad;
  const auto seq = dsp::stft(noisy);
  const auto bins = static_cast<std::size_t>(seq.log_power.rows());
  const auto frames = static_cast<std::size_t>(seq.log_power.cols());
  const Tensor features = Tensor::from({bins, frames}, {seq.log_power.data(), seq.log_power.data() + bins * frames});
  const Tensor pred = model.forward(features);
  RowMatrix lp = Eigen::Map<const RowMatrix>(pred.data().data(), static_cast<Eigen::Index>(pred.dim(0)),
                                             static_cast<Eigen::Index>(pred.dim(1)));
  lp = lp.cwiseMax(-kLogPowerClamp).cwiseMin(kLogPowerClamp);
  auto out = dsp::istft_with_phase(lp, seq.phase, noisy.samples.size());
  dsp::clip_to_unit(out);
  return out;
}

inline dsp::AudioClip enhance(const model::Checkpoint& ckpt, const dsp::AudioClip& noisy) {
  return enhance(model::model_from_checkpoint(ckpt), noisy);
}

}  // namespace grucnn::train
