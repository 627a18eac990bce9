#pragma once

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "grucnn/metrics/evaluate.hpp"
#include "grucnn/model/checkpoint.hpp"
#include "grucnn/train/trainer.hpp"

namespace grucnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

struct SpecFlags {
  std::string arch = "grucnn-fc";
  std::size_t channels = 256;
  std::size_t layers = 6;
  std::size_t lstm_hidden = 1024;

  void add(CLI::App* cmd) {
    cmd->add_option("--arch", arch, "cnn-fc, cnn-lstm or grucnn-fc")->capture_default_str();
    cmd->add_option("--channels", channels, "channels per conv-like layer")->capture_default_str();
    cmd->add_option("--layers", layers, "number of conv-like layers")->capture_default_str();
    cmd->add_option("--lstm-hidden", lstm_hidden, "LSTM units (cnn-lstm only)")->capture_default_str();
  }

  model::ModelSpec spec() const {
    model::ModelSpec s;
    s.arch = model::parse_architecture(arch);
    s.channels = channels;
    s.conv_layers = layers;
    s.lstm_hidden = lstm_hidden;
    s.validate();
    return s;
  }
};

inline void require_file(const std::string& path, const char* what) {
  if (!std::filesystem::is_regular_file(path)) throw ContractError(str_cat(what, " not found: ", path));
}

inline void print_params(const model::ModelSpec& spec, std::ostream& out) {
  const auto report = model::count_params(spec);
  out << "# " << model::arch_display_name(spec.arch) << " " << spec.canonical() << "\n";
  out << "row\tlayer\tkind\tformula\tcount\n";
  for (const auto& r : report.rows)
    out << r.table_row << '\t' << r.layer << '\t' << r.kind << '\t' << r.formula << '\t' << r.count << '\n';
  out << "total\t" << report.total << '\n';
  if (spec.is_full_scale()) {
    const double ref = model::reference_param_count(spec.arch);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "published\t%.2fM\ncounted\t%.2fM\ndifference\t%+.2fM (informational)\n",
                  ref / 1e6, static_cast<double>(report.total) / 1e6,
                  (static_cast<double>(report.total) - ref) / 1e6);
    out << buf;
  }
}

}  // namespace detail

/// Command-line entry point. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 usage or contract error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"gruCNN speech enhancement: synthesize data, train, enhance, evaluate, count parameters"};
  app.require_subcommand(1);

  // synthesize
  auto* syn = app.add_subcommand("synthesize", "build a mixture manifest from clean and noise directories");
  std::string clean_dir, noise_dir, split = "train", syn_out;
  std::uint64_t syn_seed = 0;
  train::SplitRules rules;
  syn->add_option("--clean-dir", clean_dir, "directory of clean 16 kHz WAV files")->required();
  syn->add_option("--noise-dir", noise_dir, "directory of noise 16 kHz WAV files")->required();
  syn->add_option("--split", split, "train or test")->capture_default_str();
  syn->add_option("--seed", syn_seed, "manifest seed")->capture_default_str();
  syn->add_option("--out", syn_out, "manifest path")->required();
  syn->add_option("--train-noises", rules.train_noises, "explicit training noise file names")->delimiter(',');
  syn->add_option("--test-noises", rules.test_noises, "explicit test noise file names")->delimiter(',');
  syn->add_option("--noise-train-fraction", rules.train_noise_fraction)->capture_default_str();
  syn->add_option("--clean-train-fraction", rules.train_clean_fraction)->capture_default_str();
  syn->add_option("--mixtures-per-clean", rules.mixtures_per_clean)->capture_default_str();
  syn->add_flag("--share-clean", rules.share_clean, "use every clean file in both splits");

  // train
  auto* trn = app.add_subcommand("train", "train a model on a manifest");
  detail::SpecFlags trn_spec;
  trn_spec.add(trn);
  std::string trn_manifest, trn_out, config_path, resume_path, loss_log;
  std::optional<std::uint64_t> trn_seed, max_steps, checkpoint_every;
  std::optional<std::size_t> segment_frames;
  trn->add_option("--manifest", trn_manifest, "training manifest")->required();
  trn->add_option("--out,--checkpoint", trn_out, "checkpoint to write")->required();
  trn->add_option("--config", config_path, "JSON training config");
  trn->add_option("--seed", trn_seed, "training seed");
  trn->add_option("--max-steps", max_steps, "total optimizer steps");
  trn->add_option("--segment-frames", segment_frames, "training segment length in frames");
  trn->add_option("--checkpoint-every", checkpoint_every, "steps between checkpoints (0 = end only)");
  trn->add_option("--loss-log", loss_log, "loss log path (default: <out>.loss.tsv)");
  trn->add_option("--resume", resume_path, "checkpoint to resume from");

  // enhance
  auto* enh = app.add_subcommand("enhance", "enhance a noisy WAV file");
  std::string enh_ckpt, enh_in, enh_out;
  enh->add_option("--checkpoint", enh_ckpt, "trained checkpoint")->required();
  enh->add_option("--in", enh_in, "noisy 16 kHz WAV")->required();
  enh->add_option("--out", enh_out, "enhanced WAV to write")->required();

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "score systems on a test manifest (SSNR, STOI)");
  std::string evl_manifest, evl_out;
  std::vector<std::string> evl_ckpts;
  evl->add_option("--manifest", evl_manifest, "test manifest")->required();
  evl->add_option("--checkpoint", evl_ckpts, "checkpoint(s) to evaluate besides the noisy input");
  evl->add_option("--out", evl_out, "CSV report path (default: stdout)");

  // params
  auto* prm = app.add_subcommand("params", "itemized parameter count");
  detail::SpecFlags prm_spec;
  prm_spec.add(prm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*syn) {
      const auto recipes = train::build_manifest(clean_dir, noise_dir, train::parse_split(split), rules, syn_seed);
      train::write_manifest(syn_out, recipes);
      const auto summary = train::summarize_manifest(recipes);
      dsp::write_file_bytes(syn_out + ".summary", summary);
      out << summary;
    } else if (*trn) {
      detail::require_file(trn_manifest, "manifest");
      train::TrainConfig config;
      if (!config_path.empty()) config = train::TrainConfig::load(config_path);
      if (trn_seed) config.seed = *trn_seed;
      if (max_steps) config.max_steps = *max_steps;
      if (segment_frames) config.segment_frames = *segment_frames;
      if (checkpoint_every) config.checkpoint_every = *checkpoint_every;
      train::MixtureSource source(train::read_manifest(trn_manifest));
      train::TrainOptions options;
      options.checkpoint_path = trn_out;
      options.loss_log_path = loss_log.empty() ? trn_out + ".loss.tsv" : loss_log;
      if (!resume_path.empty()) {
        detail::require_file(resume_path, "resume checkpoint");
        options.resume = model::load_checkpoint(resume_path);
      }
      options.on_step = [&](const train::LossRecord& r) { out << train::format_loss_record(r); };
      const auto spec = options.resume ? options.resume->spec : trn_spec.spec();
      log_info("training ", spec.canonical(), " for ", config.max_steps, " steps");
      train::train_loop(spec, config, source, options);
    } else if (*enh) {
      detail::require_file(enh_ckpt, "checkpoint");
      detail::require_file(enh_in, "input WAV");
      const auto model = model::model_from_checkpoint(model::load_checkpoint(enh_ckpt));
      dsp::write_wav(enh_out, train::enhance(model, dsp::load_wav(enh_in)));
    } else if (*evl) {
      detail::require_file(evl_manifest, "manifest");
      std::vector<metrics::System> systems{metrics::System::passthrough()};
      for (const auto& path : evl_ckpts) {
        detail::require_file(path, "checkpoint");
        systems.push_back({std::filesystem::path(path).stem().string(),
                           model::model_from_checkpoint(model::load_checkpoint(path))});
      }
      const auto csv = metrics::format_report_csv(metrics::evaluate(train::read_manifest(evl_manifest), systems));
      if (evl_out.empty())
        out << csv;
      else
        dsp::write_file_bytes(evl_out, csv);
    } else if (*prm) {
      detail::print_params(prm_spec.spec(), out);
    }
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace grucnn::cli
