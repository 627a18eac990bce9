// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Pass criterion names (AC1 ... AC9) to
// run a subset.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "grucnn/cli.hpp"
#include "support/fixtures.hpp"
#include "support/stoi_pairs.hpp"

namespace {

using namespace grucnn;
namespace gt = grucnn::testing;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> notes;  // informational lines printed under the verdict
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

// AC1: analytic gradients against central differences.

constexpr double kGradTolerance = 1e-4;
constexpr int kGradInstances = 20;
constexpr double kGradBudgetSeconds = 60.0;

Outcome gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(101);
  std::map<std::string, double> worst;
  std::map<std::string, int> count;
  auto check = [&](const std::string& op, const std::function<Tensor(const std::vector<Tensor>&)>& f,
                   std::vector<Tensor> in) {
    worst[op] = std::max(worst[op], gt::gradcheck(f, in));
    ++count[op];
  };

  for (int n = 0; n < kGradInstances; ++n) {
    {
      const auto k = pick(rng, 2, 6), ci = pick(rng, 1, 3), co = pick(rng, 1, 3);
      const Tensor proj = gt::random_tensor(rng, {k, co}, -1, 1, false);
      check("conv1d_freq", [&](const auto& v) { return gt::project(ops::conv1d_freq(v[0], v[1], v[2]), proj); },
            {gt::random_tensor(rng, {k, ci}), gt::random_tensor(rng, {3, ci, co}), gt::random_tensor(rng, {co})});
    }
    {
      const auto k = pick(rng, 2, 5), t = pick(rng, 1, 4), ci = pick(rng, 1, 2), co = pick(rng, 1, 3);
      const Tensor proj = gt::random_tensor(rng, {k, t, co}, -1, 1, false);
      check("conv2d_causal", [&](const auto& v) { return gt::project(ops::conv2d_causal(v[0], v[1], v[2]), proj); },
            {gt::random_tensor(rng, {k, t, ci}), gt::random_tensor(rng, {3, 3, ci, co}), gt::random_tensor(rng, {co})});
    }
    {
      const auto k = pick(rng, 2, 9), c = pick(rng, 1, 3);
      const bool rank3 = n % 2 == 1;
      const Shape in_shape = rank3 ? Shape{k, 2, c} : Shape{k, c};
      const Shape out_shape = rank3 ? Shape{(k + 1) / 2, 2, c} : Shape{(k + 1) / 2, c};
      const Tensor proj = gt::random_tensor(rng, out_shape, -1, 1, false);
      check("maxpool_freq2", [&](const auto& v) { return gt::project(ops::maxpool_freq2(v[0]), proj); },
            {gt::random_tensor(rng, in_shape)});
    }
    {
      const auto rows = pick(rng, 1, 4), in = pick(rng, 1, 20), out = pick(rng, 1, 6);
      const Tensor proj = gt::random_tensor(rng, {rows, out}, -1, 1, false);
      check("dense", [&](const auto& v) { return gt::project(ops::dense(v[0], v[1], v[2]), proj); },
            {gt::random_tensor(rng, {rows, in}), gt::random_tensor(rng, {in, out}), gt::random_tensor(rng, {out})});
    }
    {
      const auto k = pick(rng, 1, 6), c = pick(rng, 1, 4);
      const Tensor proj = gt::random_tensor(rng, {k, c}, -1, 1, false);
      check("prelu", [&](const auto& v) { return gt::project(ops::prelu(v[0], v[1]), proj); },
            {gt::random_tensor(rng, {k, c}), gt::random_tensor(rng, {c}, 0.0, 0.5)});
    }
    {
      const auto k = pick(rng, 2, 5), ci = pick(rng, 1, 2), c = pick(rng, 1, 3);
      const auto p = gt::random_grucnn_params(rng, ci, c, 0.8);
      const Tensor proj = gt::random_tensor(rng, {k, c}, -1, 1, false);
      check("grucnn_step x3",
            [&](const auto& v) {
              const model::GruCnnParams q{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
              auto s = model::GruCnnState::zeros(k, c);
              for (std::size_t t = 0; t < 3; ++t) s = model::grucnn_step(q, s, v[9 + t]);
              return gt::project(s.h, proj);
            },
            {p.w_zh, p.w_zx, p.w_rh, p.w_rx, p.w_hh, p.w_hx, p.b_z, p.b_r, p.b_h, gt::random_tensor(rng, {k, ci}),
             gt::random_tensor(rng, {k, ci}), gt::random_tensor(rng, {k, ci})});
    }
    {
      const auto in = pick(rng, 1, 5), h = pick(rng, 1, 4);
      const Tensor ph = gt::random_tensor(rng, {h}, -1, 1, false);
      const Tensor pc = gt::random_tensor(rng, {h}, -1, 1, false);
      check("lstm_step",
            [&](const auto& v) {
              const auto s = model::lstm_step({v[0], v[1], v[2]}, {v[4], v[5]}, v[3]);
              return ops::add(gt::project(s.h, ph), gt::project(s.c, pc));
            },
            {gt::random_tensor(rng, {in, 4 * h}), gt::random_tensor(rng, {h, 4 * h}), gt::random_tensor(rng, {4 * h}),
             gt::random_tensor(rng, {in}), gt::random_tensor(rng, {h}), gt::random_tensor(rng, {h})});
    }
  }

  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = elapsed < kGradBudgetSeconds;
  double overall = 0;
  for (const auto& [op, err] : worst) {
    o.pass = o.pass && err < kGradTolerance && count[op] >= kGradInstances;
    overall = std::max(overall, err);
    o.notes.push_back(str_cat(op, ": ", count[op], " instances, max rel err ", fmt("%.2e", err)));
  }
  o.detail = str_cat("max rel err ", fmt("%.2e", overall), " (< 1e-4) over ", worst.size(), " ops, ",
                     fmt("%.1f", elapsed), " s (< 60 s)");
  return o;
}

// AC2: gruCNN update against the scalar-loop oracle; boundedness.

Outcome equation_fidelity() {
  Rng rng(202);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = pick(rng, 2, 9), ci = pick(rng, 1, 3), c = pick(rng, 1, 4);
    const auto p = gt::random_grucnn_params(rng, ci, c, 1.0);
    auto state = model::GruCnnState::zeros(k, c);
    std::vector<double> h(k * c, 0.0);
    for (int t = 0; t < 5; ++t) {
      const Tensor x = gt::random_tensor(rng, {k, ci}, -2, 2, false);
      const auto s = model::grucnn_step_detailed(p, state, x);
      const auto ref = gt::grucnn_ref(p, h, gt::vec(x), k);
      for (std::size_t i = 0; i < k * c; ++i) {
        worst = std::max({worst, std::abs(s.update.at(i) - ref.z[i]), std::abs(s.reset.at(i) - ref.r[i]),
                          std::abs(s.candidate.at(i) - ref.cand[i]), std::abs(s.h.at(i) - ref.h[i])});
      }
      state = {s.h};
      h = ref.h;
    }
  }

  NoGradGuard no_grad;
  const std::size_t k = 8, ci = 2, c = 4;
  const auto p = gt::random_grucnn_params(rng, ci, c, 0.5);
  auto state = model::GruCnnState::zeros(k, c);
  std::size_t violations = 0;
  double h_max = 0, gate_min = 1, gate_max = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto s = model::grucnn_step_detailed(p, state, gt::random_tensor(rng, {k, ci}, -2, 2, false));
    for (std::size_t i = 0; i < k * c; ++i) {
      const double z = s.update.at(i), r = s.reset.at(i), hv = s.h.at(i);
      if (!(z > 0 && z < 1 && r > 0 && r < 1 && hv > -1 && hv < 1)) ++violations;
      h_max = std::max(h_max, std::abs(hv));
      gate_min = std::min({gate_min, z, r});
      gate_max = std::max({gate_max, z, r});
    }
    state = {s.h};
  }
  Outcome o;
  o.pass = worst <= 1e-12 && violations == 0;
  o.detail = str_cat("oracle max abs diff ", fmt("%.2e", worst), " (<= 1e-12); 1000 fuzzed steps from H0 = 0: ",
                     violations, " bound violations, max |H| ", fmt("%.6f", h_max), ", gates in [",
                     fmt("%.3e", gate_min), ", ", fmt("%.6f", gate_max), "]");
  return o;
}

// AC3: STFT/ISTFT round trip and mixing SNR.

Outcome dsp_fidelity() {
  Rng rng(303);
  double worst_rt = 0;
  for (int i = 0; i < 100; ++i) {
    dsp::AudioClip clip{std::vector<double>(16000), dsp::kSampleRate};
    for (double& s : clip.samples) s = rng.uniform(-0.9, 0.9);
    const auto back = dsp::istft_with_phase(dsp::stft(clip));
    if (back.size() != clip.size()) return {false, "istft changed the clip length", {}};
    for (std::size_t n = dsp::kFrameLength; n + dsp::kFrameLength < clip.size(); ++n)
      worst_rt = std::max(worst_rt, std::abs(back.samples[n] - clip.samples[n]));
  }

  std::vector<double> points = train::snr_points(train::Split::train);
  for (double s : train::snr_points(train::Split::test)) points.push_back(s);
  double worst_snr = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto clean = gt::harmonic_clip(16000, 130 + 10.0 * i, 0.2, rng);
    const auto noise = gt::white_noise(40000, rng, 0.05);
    const auto mix = dsp::mix_at_snr_detailed(clean, noise, points[i], 77 + i);
    if (mix.clipped_samples) return {false, "mixture clipped; SNR not measurable", {}};
    double es = 0, en = 0;
    for (std::size_t n = 0; n < clean.size(); ++n) {
      const double d = mix.mixture.samples[n] - clean.samples[n];
      es += clean.samples[n] * clean.samples[n];
      en += d * d;
    }
    worst_snr = std::max(worst_snr, std::abs(10 * std::log10(es / en) - points[i]));
  }
  Outcome o;
  o.pass = worst_rt < 1e-6 && worst_snr <= 1e-9 && points.size() == 8;
  o.detail = str_cat("round trip max abs err ", fmt("%.2e", worst_rt), " (< 1e-6) on 100 clips; SNR max err ",
                     fmt("%.2e", worst_snr), " dB (<= 1e-9) at ", points.size(), " points");
  return o;
}

// AC4: layer output shapes at full scale.

Outcome shape_fidelity() {
  // "Output shape" column of the layer table, rows 1-9, for an input [1, 161, 128, 1].
  const std::vector<Shape> table{{1, 161, 128, 256}, {1, 161, 128, 256}, {1, 81, 128, 256},
                                 {1, 81, 128, 256},  {1, 81, 128, 256},  {1, 41, 128, 256},
                                 {1, 41, 128, 256},  {1, 41, 128, 256},  {1, 161, 128, 1}};
  Outcome o;
  o.pass = true;
  std::vector<std::string> parts;
  for (auto arch : {model::Architecture::cnn_fc, model::Architecture::cnn_lstm, model::Architecture::grucnn_fc}) {
    const auto start = std::chrono::steady_clock::now();
    NoGradGuard no_grad;
    const model::Model m(model::ModelSpec::full_scale(arch), 1);
    Rng rng(404);
    model::ShapeTrace trace;
    const Tensor y = m.forward(gt::random_tensor(rng, {161, 128}, -20, 2, false), &trace);
    std::map<std::size_t, Shape> by_row;  // last layer of each row gives the row's output
    for (const auto& e : trace.entries) by_row[e.layer.table_row] = e.shape;
    std::size_t matched = 0;
    for (std::size_t r = 0; r < table.size(); ++r) {
      if (by_row.count(r + 1) && by_row[r + 1] == table[r]) {
        ++matched;
      } else {
        o.pass = false;
        o.notes.push_back(str_cat(model::arch_name(arch), " row ", r + 1, ": got ",
                                  by_row.count(r + 1) ? shape_str(by_row[r + 1]) : "nothing", ", expected ",
                                  shape_str(table[r])));
      }
    }
    const bool out_ok = y.shape() == Shape{161, 128};
    o.pass = o.pass && out_ok && by_row.size() == table.size();
    parts.push_back(str_cat(model::arch_name(arch), " ", matched, "/9", out_ok ? "" : " (bad output)", " in ",
                            fmt("%.0f", seconds_since(start)), " s"));
  }
  o.detail = "rows matched: ";
  for (std::size_t i = 0; i < parts.size(); ++i) o.detail += (i ? ", " : "") + parts[i];
  return o;
}

// AC5: loss against the double loop.

Outcome loss_fidelity() {
  Rng rng(505);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor pred = gt::random_tensor(rng, {161, 128}, -12, 4, false);
    const Tensor target = gt::random_tensor(rng, {161, 128}, 0, 6, false);
    const double got = train::loss_mse_magnitude(pred, target).item();
    worst = std::max(worst, std::abs(got - gt::loss_ref(gt::vec(pred), gt::vec(target), 161, 128)));
  }
  const Tensor pred = gt::random_tensor(rng, {161, 128}, -12, 4, false);
  std::vector<double> same(pred.numel());
  for (std::size_t i = 0; i < same.size(); ++i) same[i] = std::exp(0.5 * pred.at(i));
  const double zero = train::loss_mse_magnitude(pred, Tensor::from({161, 128}, same)).item();
  Outcome o;
  o.pass = worst <= 1e-12 && zero == 0.0;
  o.detail = str_cat("max abs diff ", fmt("%.2e", worst), " (<= 1e-12); identical magnitudes give ", fmt("%g", zero));
  return o;
}

// AC6: a tiny gruCNN overfits one pair.

Outcome desk_scale_learning() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(606);
  const std::size_t samples = 20640;  // 128 frames
  const auto clean = gt::harmonic_clip(samples, 160, 0.4, rng);
  const auto noisy = dsp::mix_at_snr(clean, gt::white_noise(2 * samples, rng, 0.3), 5.0, 6);
  model::ModelSpec spec;
  spec.arch = model::Architecture::grucnn_fc;
  spec.channels = 8;
  spec.conv_layers = 2;
  const model::Model m(spec, 6);
  train::Trainer trainer(m, {});
  const auto ex = train::make_example(clean, noisy);
  const auto seg = train::crop_segment(ex, 0, static_cast<std::size_t>(ex.noisy_log_power.cols()));
  const double initial = trainer.step(seg);
  for (int i = 1; i < 200; ++i) trainer.step(seg);
  double final_loss = 0;
  {
    NoGradGuard no_grad;
    final_loss = train::loss_mse_magnitude(m.forward(seg.input), seg.target).item();
  }
  const double noisy_ssnr = metrics::ssnr(clean, noisy);
  const double enhanced_ssnr = metrics::ssnr(clean, train::enhance(m, noisy));
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = final_loss <= 0.1 * initial && enhanced_ssnr > noisy_ssnr && elapsed < 300;
  o.detail = str_cat("loss ", fmt("%.4g", initial), " -> ", fmt("%.4g", final_loss), " after 200 steps (",
                     fmt("%.1f", 100 * final_loss / initial), "% of initial, <= 10%); SSNR noisy ",
                     fmt("%.2f", noisy_ssnr), " dB, enhanced ", fmt("%.2f", enhanced_ssnr), " dB; ",
                     fmt("%.0f", elapsed), " s");
  return o;
}

// AC7: metric sanity.

Outcome metric_sanity() {
  const auto [x, y] = gt::stoi_pair(4);
  const double self_ssnr = metrics::ssnr(x, x);
  const double self_stoi = metrics::stoi(x, x);
  const double base = metrics::stoi(x, y);
  double scale_dev = 0;
  for (double g : {0.01, 0.5, 2.0, 100.0}) {
    auto scaled = y;
    for (double& s : scaled.samples) s *= g;
    scale_dev = std::max(scale_dev, std::abs(metrics::stoi(x, scaled) - base));
  }
  double ref_dev = 0;
  for (std::size_t i = 0; i < gt::kStoiReference.size(); ++i) {
    const auto [c, n] = gt::stoi_pair(static_cast<int>(i));
    ref_dev = std::max(ref_dev, std::abs(metrics::stoi(c, n) - gt::kStoiReference[i]));
  }
  Outcome o;
  o.pass = self_ssnr == 35.0 && std::abs(self_stoi - 1.0) <= 1e-6 && scale_dev <= 1e-6 && ref_dev <= 0.01;
  o.detail = str_cat("ssnr(x,x) = ", fmt("%.17g", self_ssnr), "; |stoi(x,x) - 1| = ", fmt("%.1e", std::abs(self_stoi - 1)),
                     "; scale dev ", fmt("%.1e", scale_dev), "; max dev from reference on ", gt::kStoiReference.size(),
                     " pairs ", fmt("%.1e", ref_dev), " (<= 0.01)");
  return o;
}

// AC8: parameter accounting.

Outcome parameter_accounting() {
  const std::size_t c = 256, bins = 161, head_in = 41 * c, hid = 1024;
  const std::size_t conv_first = 3 * 3 * 1 * c + c + c, conv_rest = 3 * 3 * c * c + c + c;
  const std::size_t gru_first = 3 * (3 * 1 * c) + 3 * (3 * c * c) + 3 * c, gru_rest = 3 * (3 * c * c) + 3 * (3 * c * c) + 3 * c;
  const std::size_t fc_head = head_in * bins + bins;
  const std::size_t lstm = 4 * hid * (head_in + hid) + 4 * hid, lstm_head = hid * bins + bins;
  const std::map<model::Architecture, std::vector<std::size_t>> expected{
      {model::Architecture::cnn_fc, {conv_first, conv_rest, conv_rest, conv_rest, conv_rest, conv_rest, fc_head}},
      {model::Architecture::grucnn_fc, {gru_first, gru_rest, gru_rest, gru_rest, gru_rest, gru_rest, fc_head}},
      {model::Architecture::cnn_lstm,
       {conv_first, conv_rest, conv_rest, conv_rest, conv_rest, conv_rest, lstm, lstm_head}}};
  Outcome o;
  bool forms_ok = true;
  std::map<model::Architecture, std::size_t> totals;
  for (const auto& [arch, rows] : expected) {
    const auto report = model::count_params(model::ModelSpec::full_scale(arch));
    bool ok = report.rows.size() == rows.size();
    for (std::size_t i = 0; ok && i < rows.size(); ++i) ok = report.rows[i].count == rows[i];
    std::size_t sum = 0;
    for (auto n : rows) sum += n;
    ok = ok && report.total == sum;
    forms_ok = forms_ok && ok;
    totals[arch] = report.total;
    const double published = model::reference_param_count(arch);
    o.notes.push_back(str_cat(model::arch_display_name(arch), ": counted ", fmt("%.2f", report.total / 1e6),
                              "M, published ", fmt("%.2f", published / 1e6), "M, difference ",
                              fmt("%+.2f", (report.total - published) / 1e6), "M (reported, not asserted)"));
  }
  const bool ordered = totals[model::Architecture::cnn_fc] < totals[model::Architecture::grucnn_fc] &&
                       totals[model::Architecture::grucnn_fc] < totals[model::Architecture::cnn_lstm];
  const bool published_ordered = model::reference_param_count(model::Architecture::cnn_fc) <
                                     model::reference_param_count(model::Architecture::grucnn_fc) &&
                                 model::reference_param_count(model::Architecture::grucnn_fc) <
                                     model::reference_param_count(model::Architecture::cnn_lstm);
  o.pass = forms_ok && ordered && published_ordered;
  o.detail = str_cat("per-layer closed forms ", forms_ok ? "match" : "DIFFER", "; totals cnn-fc ",
                     totals[model::Architecture::cnn_fc], " < grucnn-fc ", totals[model::Architecture::grucnn_fc],
                     " < cnn-lstm ", totals[model::Architecture::cnn_lstm], ordered ? "" : " (ORDER VIOLATED)");
  return o;
}

// AC9: end-to-end determinism through the command line.

struct RunArtifacts {
  std::string loss_log;
  std::string wav;
};

RunArtifacts end_to_end(const std::filesystem::path& corpus, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "grucnn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream sink;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink);
    if (code != 0) throw RuntimeError(str_cat("grucnn ", args[1], " exited with ", code, ": ", sink.str()));
  };
  const auto s = [](const std::filesystem::path& p) { return p.string(); };
  for (const char* split : {"train", "test"})
    run({"synthesize", "--clean-dir", s(corpus / "clean"), "--noise-dir", s(corpus / "noise"), "--split", split,
         "--seed", "17", "--out", s(out / (std::string(split) + ".tsv"))});
  run({"train", "--manifest", s(out / "train.tsv"), "--out", s(out / "model.ckpt"), "--arch", "grucnn-fc",
       "--channels", "4", "--layers", "2", "--seed", "17", "--max-steps", "50", "--segment-frames", "32"});
  const auto test = train::read_manifest(out / "test.tsv");
  dsp::write_wav(out / "noisy.wav", train::MixtureSource(test).mixture(0).noisy);
  run({"enhance", "--checkpoint", s(out / "model.ckpt"), "--in", s(out / "noisy.wav"), "--out", s(out / "enhanced.wav")});
  return {dsp::read_file_bytes(out / "model.ckpt.loss.tsv"), dsp::read_file_bytes(out / "enhanced.wav")};
}

Outcome determinism() {
  gt::TempDir dir("grucnn_acceptance");
  gt::write_corpus(dir / "corpus", 10, 10, 16000, 48000);
  const auto a = end_to_end(dir / "corpus", dir / "run1");
  const auto b = end_to_end(dir / "corpus", dir / "run2");
  const auto lines = std::count(a.loss_log.begin(), a.loss_log.end(), '\n');
  Outcome o;
  o.pass = lines == 50 && a.loss_log == b.loss_log && a.wav == b.wav;
  o.detail = str_cat("loss logs ", a.loss_log == b.loss_log ? "identical" : "DIFFER", " (", lines, " steps); WAV ",
                     a.wav == b.wav ? "identical" : "DIFFER", " (", a.wav.size(), " bytes)");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  setenv("GRUCNN_LOG", "quiet", 0);
  const std::vector<std::pair<std::string, std::pair<const char*, Outcome (*)()>>> criteria{
      {"AC1", {"gradient correctness", gradient_correctness}},
      {"AC2", {"gruCNN update fidelity", equation_fidelity}},
      {"AC3", {"DSP fidelity", dsp_fidelity}},
      {"AC4", {"full-scale shapes", shape_fidelity}},
      {"AC5", {"loss fidelity", loss_fidelity}},
      {"AC6", {"desk-scale learning", desk_scale_learning}},
      {"AC7", {"metric sanity", metric_sanity}},
      {"AC8", {"parameter accounting", parameter_accounting}},
      {"AC9", {"end-to-end determinism", determinism}},
  };
  const std::set<std::string> selected(argv + 1, argv + argc);
  for (const auto& name : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; })) {
      std::fprintf(stderr, "unknown criterion '%s' (expected AC1 ... AC9)\n", name.c_str());
      return 2;
    }
  }
  int failed = 0;
  for (const auto& [name, entry] : criteria) {
    if (!selected.empty() && !selected.count(name)) continue;
    Outcome o;
    try {
      o = entry.second();
    } catch (const std::exception& e) {
      o = {false, str_cat("threw: ", e.what()), {}};
    }
    std::printf("%s %s %s: %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", entry.first, o.detail.c_str());
    for (const auto& note : o.notes) std::printf("    %s\n", note.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
