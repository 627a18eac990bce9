#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "grucnn/dsp/mix.hpp"
#include "grucnn/dsp/wav.hpp"

namespace grucnn::train {

enum class Split { train, test };

inline std::string_view split_name(Split s) { return s == Split::train ? "train" : "test"; }

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw ContractError(str_cat("unknown split '", s, "' (expected train or test)"));
}

/// SNR points a split may draw from. Test points are disjoint from training.
inline const std::vector<double>& snr_points(Split s) {
  static const std::vector<double> train{0.0, 5.0, 10.0, 15.0, 20.0};
  static const std::vector<double> test{2.5, 12.5, 22.5};
  return s == Split::train ? train : test;
}

/// Everything needed to rebuild one noisy utterance.
struct MixtureRecipe {
  std::string clean_path;
  std::string noise_path;
  double snr_db = 0.0;
  std::uint64_t offset_seed = 0;

  bool operator==(const MixtureRecipe&) const = default;
};

inline void validate_recipe(const MixtureRecipe& r, Split split) {
  const auto& allowed = snr_points(split);
  if (std::find(allowed.begin(), allowed.end(), r.snr_db) == allowed.end())
    throw ContractError(str_cat("recipe for ", r.clean_path, ": SNR ", r.snr_db, " dB is not a ", split_name(split),
                                "-split SNR point"));
}

/// How the clean and noise directories are divided between splits.
///
/// By default the sorted file lists are cut by fraction (7 of 10 noises and
/// 8 of 10 clean files go to training). Explicit noise lists override the
/// noise fraction; `share_clean` puts every clean file in both splits.
struct SplitRules {
  double train_noise_fraction = 0.7;
  double train_clean_fraction = 0.8;
  std::vector<std::string> train_noises;
  std::vector<std::string> test_noises;
  bool share_clean = false;
  std::size_t mixtures_per_clean = 1;
};

/// Sorted *.wav files directly inside `dir`.
inline std::vector<std::filesystem::path> list_wavs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ContractError(str_cat("not a directory: ", dir.string()));
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ContractError(str_cat("no .wav files in ", dir.string()));
  return out;
}

namespace detail {

inline std::vector<std::filesystem::path> split_by_fraction(const std::vector<std::filesystem::path>& files,
                                                            double fraction, Split split, const char* what) {
  if (files.size() < 2)
    throw ContractError(str_cat("empty split: ", files.size(), " ", what, " file(s) cannot be split into train and test"));
  const auto n = static_cast<double>(files.size());
  const auto n_train = static_cast<std::size_t>(
      std::clamp(std::llround(n * fraction), 1LL, static_cast<long long>(files.size()) - 1));
  return split == Split::train ? std::vector(files.begin(), files.begin() + static_cast<std::ptrdiff_t>(n_train))
                               : std::vector(files.begin() + static_cast<std::ptrdiff_t>(n_train), files.end());
}

inline std::vector<std::filesystem::path> pick_named(const std::vector<std::filesystem::path>& files,
                                                     const std::vector<std::string>& names) {
  std::vector<std::filesystem::path> out;
  for (const auto& name : names) {
    auto it = std::find_if(files.begin(), files.end(), [&](const auto& p) { return p.filename() == name; });
    if (it == files.end()) throw ContractError(str_cat("split rules name unknown noise file '", name, "'"));
    out.push_back(*it);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Draws one recipe per clean file (times `mixtures_per_clean`) of the given
/// split: a random noise file of that split, a random SNR point of that split
/// and a random offset seed. Deterministic given the seed.
inline std::vector<MixtureRecipe> build_manifest(const std::filesystem::path& clean_dir,
                                                 const std::filesystem::path& noise_dir, Split split,
                                                 const SplitRules& rules, std::uint64_t seed) {
  const auto clean_all = list_wavs(clean_dir);
  const auto noise_all = list_wavs(noise_dir);

  std::vector<std::filesystem::path> noises;
  if (!rules.train_noises.empty() || !rules.test_noises.empty()) {
    if (rules.train_noises.empty() || rules.test_noises.empty())
      throw ContractError("empty split: explicit noise lists must name files for both train and test");
    const std::set<std::string> a(rules.train_noises.begin(), rules.train_noises.end());
    for (const auto& n : rules.test_noises)
      if (a.count(n)) throw ContractError(str_cat("overlapping splits: noise '", n, "' is in both train and test"));
    noises = detail::pick_named(noise_all, split == Split::train ? rules.train_noises : rules.test_noises);
  } else {
    noises = detail::split_by_fraction(noise_all, rules.train_noise_fraction, split, "noise");
  }
  const auto cleans =
      rules.share_clean ? clean_all : detail::split_by_fraction(clean_all, rules.train_clean_fraction, split, "clean");
  if (rules.mixtures_per_clean == 0) throw ContractError("mixtures_per_clean must be positive");

  Rng rng(seed);
  const auto& snrs = snr_points(split);
  std::vector<MixtureRecipe> out;
  for (const auto& c : cleans) {
    for (std::size_t j = 0; j < rules.mixtures_per_clean; ++j) {
      MixtureRecipe r;
      r.clean_path = c.string();
      r.noise_path = noises[rng.index(noises.size())].string();
      r.snr_db = snrs[rng.index(snrs.size())];
      r.offset_seed = rng.next();
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::string format_snr(double snr) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), snr);
  return std::string(buf, p);
}

/// One recipe per line: clean_path, noise_path, snr_db, offset_seed separated by tabs.
inline std::string format_manifest(const std::vector<MixtureRecipe>& recipes) {
  std::string out;
  for (const auto& r : recipes) {
    for (const auto* p : {&r.clean_path, &r.noise_path})
      if (p->find_first_of("\t\n") != std::string::npos)
        throw ContractError(str_cat("manifest paths may not contain tabs or newlines: ", *p));
    out += str_cat(r.clean_path, '\t', r.noise_path, '\t', format_snr(r.snr_db), '\t', r.offset_seed, '\n');
  }
  return out;
}

inline std::vector<MixtureRecipe> parse_manifest(const std::string& text) {
  std::vector<MixtureRecipe> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4)
      throw ContractError(str_cat("manifest line ", line_no, ": expected 4 tab-separated fields, got ", fields.size()));
    MixtureRecipe r{fields[0], fields[1], 0.0, 0};
    const auto& s = fields[2];
    auto [p1, e1] = std::from_chars(s.data(), s.data() + s.size(), r.snr_db);
    const auto& o = fields[3];
    auto [p2, e2] = std::from_chars(o.data(), o.data() + o.size(), r.offset_seed);
    if (e1 != std::errc() || p1 != s.data() + s.size() || e2 != std::errc() || p2 != o.data() + o.size())
      throw ContractError(str_cat("manifest line ", line_no, ": malformed SNR or seed"));
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_manifest(const std::filesystem::path& path, const std::vector<MixtureRecipe>& recipes) {
  dsp::write_file_bytes(path, format_manifest(recipes));
}

inline std::vector<MixtureRecipe> read_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ContractError(str_cat("manifest not found: ", path.string()));
  return parse_manifest(dsp::read_file_bytes(path));
}

/// Counts per SNR point and per noise file.
inline std::string summarize_manifest(const std::vector<MixtureRecipe>& recipes) {
  std::map<double, std::size_t> by_snr;
  std::map<std::string, std::size_t> by_noise;
  for (const auto& r : recipes) {
    ++by_snr[r.snr_db];
    ++by_noise[std::filesystem::path(r.noise_path).filename().string()];
  }
  std::string out = str_cat("recipes\t", recipes.size(), '\n');
  for (const auto& [snr, n] : by_snr) out += str_cat("snr_db\t", format_snr(snr), '\t', n, '\n');
  for (const auto& [noise, n] : by_noise) out += str_cat("noise\t", noise, '\t', n, '\n');
  return out;
}

struct Mixture {
  dsp::AudioClip clean;
  dsp::AudioClip noisy;
};

/// Loads audio for recipes and synthesizes mixtures, caching decoded files.
class MixtureSource {
 public:
  explicit MixtureSource(std::vector<MixtureRecipe> recipes) : recipes_(std::move(recipes)) {
    if (recipes_.empty()) throw ContractError("MixtureSource: manifest is empty");
  }

  const std::vector<MixtureRecipe>& recipes() const { return recipes_; }
  std::size_t size() const { return recipes_.size(); }

  Mixture mixture(std::size_t i) {
    const auto& r = recipes_.at(i);
    const auto& clean = audio(r.clean_path);
    const auto& noise = audio(r.noise_path);
    return {clean, dsp::mix_at_snr(clean, noise, r.snr_db, r.offset_seed)};
  }

 private:
  const dsp::AudioClip& audio(const std::string& path) {
    auto it = cache_.find(path);
    if (it == cache_.end()) it = cache_.emplace(path, dsp::load_wav(path)).first;
    return it->second;
  }

  std::vector<MixtureRecipe> recipes_;
  std::unordered_map<std::string, dsp::AudioClip> cache_;
};

}  // namespace grucnn::train
