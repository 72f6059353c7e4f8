#include "scnn/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <map>
#include <string>
#include <system_error>

#include <zlib.h>

#include "scnn/error.hpp"
#include "scnn/file_util.hpp"

namespace scnn {

namespace {

constexpr std::string_view kMagic = "SCNNCKPT";

class Writer {
 public:
  void bytes(std::string_view data) { out_.append(data); }
  void u32(std::uint32_t x) {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<char>((x >> (8 * i)) & 0xffu));
    }
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      out_.push_back(static_cast<char>((x >> (8 * i)) & 0xffu));
    }
  }
  void f32(float x) { u32(std::bit_cast<std::uint32_t>(x)); }
  void floats(std::span<const float> xs) {
    for (float x : xs) {
      f32(x);
    }
  }
  std::string& buffer() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t count) {
    need(count);
    std::string_view out = data_.substr(pos_, count);
    pos_ += count;
    return out;
  }
  std::uint32_t u32() {
    std::string_view b = bytes(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
      x |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    }
    return x;
  }
  std::uint64_t u64() {
    std::string_view b = bytes(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    }
    return x;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::vector<float> floats(std::uint64_t count) {
    if (count > remaining() / 4) {
      throw CorruptFileError("checkpoint truncated: tensor payload of " + std::to_string(count) +
                             " floats exceeds remaining bytes");
    }
    std::vector<float> out(count);
    for (float& x : out) {
      x = f32();
    }
    return out;
  }
  [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t count) const {
    if (count > remaining()) {
      throw CorruptFileError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

template <typename T>
std::string number(T value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    throw Error("checkpoint: cannot format number");
  }
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::map<std::string, std::string, std::less<>>& meta, std::string_view key) {
  auto it = meta.find(key);
  if (it == meta.end()) {
    throw CorruptFileError("checkpoint metadata is missing key '" + std::string(key) + "'");
  }
  const std::string& text = it->second;
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw CorruptFileError("checkpoint metadata key '" + std::string(key) + "' has malformed value '" + text + "'");
  }
  return value;
}

std::string encode_metadata(const Checkpoint& ckpt) {
  const NetConfig& c = ckpt.model.config;
  std::string out;
  const auto put = [&out](std::string_view key, const std::string& value) {
    out.append(key).append("=").append(value).append("\n");
  };
  put("in_channels", number(c.in_channels));
  put("hidden_channels", number(c.hidden_channels));
  put("kernel_size", number(c.kernel_size));
  put("snn_position", number(c.snn_position));
  put("seed", number(c.seed));
  put("surrogate_width", number(c.surrogate_width));
  put("v_th", number(c.lif.v_th));
  put("v_reset", number(c.lif.v_reset));
  put("tau_m_ms", number(c.lif.tau_m_ms));
  put("r_m", number(c.lif.r_m));
  put("refractory_ms", number(c.lif.refractory_ms));
  put("dt_ms", number(c.lif.dt_ms));
  put("noise_std", number(c.lif.noise_std));
  put("rate_min_hz", number(c.lif.rate_min_hz));
  put("rate_max_hz", number(c.lif.rate_max_hz));
  put("epoch", number(ckpt.meta.epoch));
  put("best_val_loss", number(ckpt.meta.best_val_loss));
  return out;
}

std::map<std::string, std::string, std::less<>> parse_metadata(std::string_view text) {
  std::map<std::string, std::string, std::less<>> meta;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    if (eol == std::string_view::npos) {
      throw CorruptFileError("checkpoint metadata is not newline-terminated");
    }
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw CorruptFileError("checkpoint metadata line without '='");
    }
    meta.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  return meta;
}

std::string layer_name(std::size_t index, std::string_view part) {
  return "layer" + std::to_string(index) + "." + std::string(part);
}

void write_tensor(Writer& w, const std::string& name, const Shape4& shape, std::span<const float> data) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.bytes(name);
  w.u32(static_cast<std::uint32_t>(shape.n));
  w.u32(static_cast<std::uint32_t>(shape.c));
  w.u32(static_cast<std::uint32_t>(shape.h));
  w.u32(static_cast<std::uint32_t>(shape.w));
  w.floats(data);
}

Tensor4 read_tensor(Reader& r, const std::string& expected_name) {
  const std::uint32_t name_len = r.u32();
  const std::string_view name = r.bytes(name_len);
  if (name != expected_name) {
    throw CorruptFileError("checkpoint expected tensor '" + expected_name + "', found '" + std::string(name) + "'");
  }
  Shape4 shape;
  shape.n = r.u32();
  shape.c = r.u32();
  shape.h = r.u32();
  shape.w = r.u32();
  return Tensor4(shape, r.floats(shape.size()));
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  const std::string meta = encode_metadata(ckpt);
  w.u32(static_cast<std::uint32_t>(meta.size()));
  w.bytes(meta);

  const auto& layers = ckpt.model.layers;
  w.u32(static_cast<std::uint32_t>(layers.size() * 2));
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const ConvLayerParams& conv = layers[i].conv;
    write_tensor(w, layer_name(i, "weight"), conv.weight.shape(), conv.weight.data());
    write_tensor(w, layer_name(i, "bias"), {1, conv.bias.size(), 1, 1}, conv.bias);
  }

  w.u32(static_cast<std::uint32_t>(ckpt.optimizer.size()));
  for (const AdamState& state : ckpt.optimizer) {
    w.u64(static_cast<std::uint64_t>(state.t));
    w.f32(state.hyper.lr);
    w.f32(state.hyper.beta1);
    w.f32(state.hyper.beta2);
    w.f32(state.hyper.epsilon);
    w.u64(state.m.size());
    w.floats(state.m);
    w.floats(state.v);
  }

  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CorruptFileError("not a checkpoint: bad magic bytes");
  }
  Reader r(bytes);
  r.bytes(kMagic.size());
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  if (bytes.size() < kMagic.size() + 8) {
    throw CorruptFileError("checkpoint truncated");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  if (crc32_of(body) != tail.u32()) {
    throw CorruptFileError("checkpoint checksum mismatch (truncated or corrupted file)");
  }

  const std::uint32_t meta_len = r.u32();
  const auto meta = parse_metadata(r.bytes(meta_len));

  Checkpoint ckpt;
  NetConfig& c = ckpt.model.config;
  c.in_channels = parse_number<std::size_t>(meta, "in_channels");
  c.hidden_channels = parse_number<std::size_t>(meta, "hidden_channels");
  c.kernel_size = parse_number<std::size_t>(meta, "kernel_size");
  c.snn_position = parse_number<std::size_t>(meta, "snn_position");
  c.seed = parse_number<std::uint64_t>(meta, "seed");
  c.surrogate_width = parse_number<float>(meta, "surrogate_width");
  c.lif.v_th = parse_number<double>(meta, "v_th");
  c.lif.v_reset = parse_number<double>(meta, "v_reset");
  c.lif.tau_m_ms = parse_number<double>(meta, "tau_m_ms");
  c.lif.r_m = parse_number<double>(meta, "r_m");
  c.lif.refractory_ms = parse_number<double>(meta, "refractory_ms");
  c.lif.dt_ms = parse_number<double>(meta, "dt_ms");
  c.lif.noise_std = parse_number<double>(meta, "noise_std");
  c.lif.rate_min_hz = parse_number<double>(meta, "rate_min_hz");
  c.lif.rate_max_hz = parse_number<double>(meta, "rate_max_hz");
  ckpt.meta.epoch = parse_number<std::int64_t>(meta, "epoch");
  ckpt.meta.best_val_loss = parse_number<double>(meta, "best_val_loss");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw CorruptFileError(std::string("checkpoint holds an invalid network config: ") + e.what());
  }

  // The architecture fixes the layer kinds; build a skeleton and fill it.
  Model skeleton = build_model(c);
  const std::uint32_t tensor_count = r.u32();
  if (tensor_count != skeleton.layers.size() * 2) {
    throw CorruptFileError("checkpoint holds " + std::to_string(tensor_count) + " tensors, expected " +
                           std::to_string(skeleton.layers.size() * 2));
  }
  for (std::size_t i = 0; i < skeleton.layers.size(); ++i) {
    ConvLayerParams& conv = skeleton.layers[i].conv;
    Tensor4 weight = read_tensor(r, layer_name(i, "weight"));
    Tensor4 bias = read_tensor(r, layer_name(i, "bias"));
    if (weight.shape() != conv.weight.shape() || bias.shape() != Shape4{1, conv.bias.size(), 1, 1}) {
      throw CorruptFileError("checkpoint tensor shapes for layer " + std::to_string(i) +
                             " do not match the stored config");
    }
    conv.weight = std::move(weight);
    conv.bias = bias.vector();
  }
  ckpt.model = std::move(skeleton);

  const std::uint32_t state_count = r.u32();
  if (state_count != 0 && state_count != ckpt.model.layers.size() * 2) {
    throw CorruptFileError("checkpoint holds " + std::to_string(state_count) + " optimizer states");
  }
  for (std::uint32_t i = 0; i < state_count; ++i) {
    AdamState state;
    state.t = static_cast<std::int64_t>(r.u64());
    state.hyper.lr = r.f32();
    state.hyper.beta1 = r.f32();
    state.hyper.beta2 = r.f32();
    state.hyper.epsilon = r.f32();
    const std::uint64_t size = r.u64();
    state.m = r.floats(size);
    state.v = r.floats(size);
    ckpt.optimizer.push_back(std::move(state));
  }
  if (r.remaining() != 4) {
    throw CorruptFileError("checkpoint payload length does not match its headers");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(checkpoint));
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  save_checkpoint(Checkpoint{model, {}, {}}, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("checkpoint " + path.string() + " does not exist");
  }
  return decode_checkpoint(read_file(path));
}

}  // namespace scnn
