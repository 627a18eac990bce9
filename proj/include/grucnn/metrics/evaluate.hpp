#pragma once

#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grucnn/metrics/ssnr.hpp"
#include "grucnn/metrics/stoi.hpp"
#include "grucnn/train/trainer.hpp"

namespace grucnn::metrics {

/// A system under evaluation: a trained model, or the unprocessed mixture
/// when `model` is empty.
struct System {
  std::string name;
  std::optional<model::Model> model;

  static System passthrough() { return {"noisy", std::nullopt}; }
};

struct EvalRow {
  std::string system;
  double snr_db = 0;
  std::size_t n_clips = 0;
  double ssnr_mean = 0;
  double stoi_mean = 0;

  bool operator==(const EvalRow&) const = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;
};

/// Scores every system on the same test mixtures. Rows are ordered by
/// condition (2.5, 12.5, 22.5 dB) and then by the order of `systems`;
/// conditions with no clips report NaN means.
inline EvalReport evaluate(const std::vector<train::MixtureRecipe>& manifest, const std::vector<System>& systems) {
  if (systems.empty()) throw ContractError("evaluate: no systems given");
  for (const auto& r : manifest) train::validate_recipe(r, train::Split::test);
  train::MixtureSource source(manifest);
  const auto& conditions = train::snr_points(train::Split::test);

  struct Acc {
    double ssnr = 0, stoi = 0;
    std::size_t n = 0;
  };
  std::vector<std::vector<Acc>> acc(conditions.size(), std::vector<Acc>(systems.size()));
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto c = static_cast<std::size_t>(
        std::find(conditions.begin(), conditions.end(), manifest[i].snr_db) - conditions.begin());
    const auto mix = source.mixture(i);
    for (std::size_t s = 0; s < systems.size(); ++s) {
      const auto out = systems[s].model ? train::enhance(*systems[s].model, mix.noisy) : mix.noisy;
      acc[c][s].ssnr += ssnr(mix.clean, out);
      acc[c][s].stoi += stoi(mix.clean, out);
      ++acc[c][s].n;
    }
  }
  EvalReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    for (std::size_t s = 0; s < systems.size(); ++s) {
      const auto& a = acc[c][s];
      const double n = static_cast<double>(a.n);
      report.rows.push_back({systems[s].name, conditions[c], a.n, a.n ? a.ssnr / n : nan, a.n ? a.stoi / n : nan});
    }
  }
  return report;
}

inline constexpr const char* kReportColumns = "system,snr_db,n_clips,ssnr_mean,stoi_mean";

inline std::string format_report_csv(const EvalReport& report) {
  std::string out = str_cat("# ", ssnr_variant(), '\n', kReportColumns, '\n');
  char buf[256];
  for (const auto& r : report.rows) {
    if (r.system.find_first_of(",\n") != std::string::npos)
      throw ContractError(str_cat("report: system name may not contain commas: ", r.system));
    std::snprintf(buf, sizeof(buf), ",%s,%zu,%.17g,%.17g\n", train::format_snr(r.snr_db).c_str(), r.n_clips,
                  r.ssnr_mean, r.stoi_mean);
    out += r.system + buf;
  }
  return out;
}

inline EvalReport parse_report_csv(const std::string& text) {
  EvalReport report;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kReportColumns) throw ContractError(str_cat("report: unexpected header '", line, "'"));
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw ContractError(str_cat("report: expected 5 columns in '", line, "'"));
    auto num = [&](const std::string& s) {
      if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
      double v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw ContractError(str_cat("report: bad number '", s, "'"));
      return v;
    };
    EvalRow r;
    r.system = f[0];
    r.snr_db = num(f[1]);
    r.n_clips = static_cast<std::size_t>(num(f[2]));
    r.ssnr_mean = num(f[3]);
    r.stoi_mean = num(f[4]);
    report.rows.push_back(std::move(r));
  }
  if (!header) throw ContractError("report: missing header line");
  return report;
}

}  // namespace grucnn::metrics
