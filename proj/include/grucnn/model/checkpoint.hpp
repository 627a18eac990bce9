#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grucnn/dsp/wav.hpp"
#include "grucnn/model/model.hpp"

namespace grucnn::model {

// Checkpoint file layout, all integers and floats little-endian:
//   magic "GRUCNNCK" | u32 version | u64 spec digest | str spec
//   u64 global step | str rng state
//   u32 parameter count, then per parameter:
//     str name | u32 rank | u64 extents... | u64 offset (in doubles)
//   u8 has optimizer moments
//   u64 blob length (doubles) | f64 blob: parameters, then first moments,
//                                         then second moments (when present)
//   u64 FNV-1a checksum of every preceding byte
// where str is u32 length followed by raw bytes.
inline constexpr char kCheckpointMagic[8] = {'G', 'R', 'U', 'C', 'N', 'N', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

/// Adam moment estimates aligned with the parameter list.
struct OptimizerMoments {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
};

struct Checkpoint {
  ModelSpec spec;
  std::vector<NamedTensor> parameters;
  std::optional<OptimizerMoments> moments;
  std::uint64_t step = 0;
  std::string rng_state;
};

namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void put_str(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    bytes_ += s;
  }
  void put_raw(const void* p, std::size_t n) { bytes_.append(static_cast<const char*>(p), n); }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void get_raw(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (n > end_ - pos_) throw ContractError("checkpoint: truncated record");
  }
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& ckpt) {
  detail::ByteWriter w;
  w.put_raw(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.put(kCheckpointVersion);
  w.put(ckpt.spec.digest());
  w.put_str(ckpt.spec.canonical());
  w.put(ckpt.step);
  w.put_str(ckpt.rng_state);
  w.put(static_cast<std::uint32_t>(ckpt.parameters.size()));
  std::uint64_t offset = 0;
  for (const auto& p : ckpt.parameters) {
    w.put_str(p.name);
    w.put(static_cast<std::uint32_t>(p.value.rank()));
    for (auto d : p.value.shape()) w.put(static_cast<std::uint64_t>(d));
    w.put(offset);
    offset += p.value.numel();
  }
  const bool has_moments = ckpt.moments.has_value();
  w.put(static_cast<std::uint8_t>(has_moments ? 1 : 0));
  w.put(has_moments ? 3 * offset : offset);
  for (const auto& p : ckpt.parameters) w.put_raw(p.value.data().data(), p.value.numel() * sizeof(double));
  if (has_moments) {
    const auto& m = *ckpt.moments;
    if (m.first.size() != ckpt.parameters.size() || m.second.size() != ckpt.parameters.size())
      throw ContractError("checkpoint: optimizer moments do not match the parameter list");
    for (const auto* set : {&m.first, &m.second}) {
      for (std::size_t i = 0; i < set->size(); ++i) {
        if ((*set)[i].size() != ckpt.parameters[i].value.numel())
          throw ContractError(str_cat("checkpoint: moment size mismatch for '", ckpt.parameters[i].name, "'"));
        w.put_raw((*set)[i].data(), (*set)[i].size() * sizeof(double));
      }
    }
  }
  const std::uint64_t checksum = fnv1a64(w.bytes().data(), w.bytes().size());
  w.put(checksum);
  return std::move(w.bytes());
}

inline Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
    throw ContractError("checkpoint: bad magic, not a checkpoint file");
  if (bytes.size() < sizeof(kCheckpointMagic) + 4 + 8)
    throw ContractError("checkpoint: checksum mismatch (file truncated)");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (stored != fnv1a64(bytes.data(), body))
    throw ContractError("checkpoint: checksum mismatch (file corrupt or truncated)");

  detail::ByteReader r(bytes, body);
  char magic[8];
  r.get_raw(magic, 8);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw ContractError(str_cat("checkpoint: format version ", version, " unsupported (expected ",
                                kCheckpointVersion, ")"));
  const auto digest = r.get<std::uint64_t>();
  Checkpoint ckpt;
  ckpt.spec = ModelSpec::parse(r.get_str());
  if (ckpt.spec.digest() != digest) throw ContractError("checkpoint: spec digest does not match spec text");
  ckpt.step = r.get<std::uint64_t>();
  ckpt.rng_state = r.get_str();

  struct Entry {
    std::string name;
    Shape shape;
    std::uint64_t offset;
  };
  std::vector<Entry> entries(r.get<std::uint32_t>());
  std::uint64_t expected_offset = 0;
  for (auto& e : entries) {
    e.name = r.get_str();
    e.shape.resize(r.get<std::uint32_t>());
    for (auto& d : e.shape) d = static_cast<std::size_t>(r.get<std::uint64_t>());
    e.offset = r.get<std::uint64_t>();
    if (e.offset != expected_offset) throw ContractError(str_cat("checkpoint: bad offset for '", e.name, "'"));
    expected_offset += shape_numel(e.shape);
  }
  const bool has_moments = r.get<std::uint8_t>() != 0;
  const auto blob_len = r.get<std::uint64_t>();
  if (blob_len != (has_moments ? 3 : 1) * expected_offset)
    throw ContractError("checkpoint: blob length disagrees with parameter table");
  auto read_block = [&](std::size_t n) {
    std::vector<double> v(n);
    r.get_raw(v.data(), n * sizeof(double));
    return v;
  };
  for (const auto& e : entries)
    ckpt.parameters.push_back({e.name, Tensor::from(e.shape, read_block(shape_numel(e.shape)), true)});
  if (has_moments) {
    OptimizerMoments m;
    for (const auto& e : entries) m.first.push_back(read_block(shape_numel(e.shape)));
    for (const auto& e : entries) m.second.push_back(read_block(shape_numel(e.shape)));
    ckpt.moments = std::move(m);
  }
  if (r.position() != body) throw ContractError("checkpoint: trailing bytes before checksum");
  return ckpt;
}

/// Writes through a temporary file and renames it into place, so an existing
/// checkpoint is never left half-written.
inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  dsp::write_file_bytes(tmp, encode_checkpoint(ckpt));
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(dsp::read_file_bytes(path));
}

/// Copies the model's current parameter values into a checkpoint.
inline Checkpoint snapshot(const Model& model, std::uint64_t step = 0, std::string rng_state = {},
                           std::optional<OptimizerMoments> moments = std::nullopt) {
  Checkpoint ckpt;
  ckpt.spec = model.spec();
  for (const auto& p : model.parameters()) ckpt.parameters.push_back({p.name, p.value.detach()});
  ckpt.moments = std::move(moments);
  ckpt.step = step;
  ckpt.rng_state = std::move(rng_state);
  return ckpt;
}

/// Overwrites the model's parameter values from a checkpoint, matching by
/// name and shape.
inline void restore_parameters(const Model& model, const Checkpoint& ckpt) {
  for (const auto& p : model.parameters()) {
    const NamedTensor* src = nullptr;
    for (const auto& c : ckpt.parameters)
      if (c.name == p.name) src = &c;
    if (src == nullptr)
      throw ContractError(str_cat("checkpoint has no parameter '", p.name, "' required by ", model.spec().canonical()));
    if (src->value.shape() != p.value.shape())
      throw ContractError(str_cat("checkpoint parameter '", p.name, "' has shape ", shape_str(src->value.shape()),
                                  ", model expects ", shape_str(p.value.shape())));
    Tensor dst = p.value;
    std::copy(src->value.data().begin(), src->value.data().end(), dst.mutable_data().begin());
  }
  if (ckpt.parameters.size() != model.parameters().size())
    throw ContractError(str_cat("checkpoint carries ", ckpt.parameters.size(), " parameters, model has ",
                                model.parameters().size()));
}

inline Model model_from_checkpoint(const Checkpoint& ckpt) {
  std::vector<NamedTensor> params;
  for (const auto& p : ckpt.parameters) params.push_back({p.name, Tensor::from(p.value.shape(),
                                                                                {p.value.data().begin(), p.value.data().end()}, true)});
  return Model(ckpt.spec, std::move(params));
}

}  // namespace grucnn::model
