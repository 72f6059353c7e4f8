#include "run_config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "scnn/error.hpp"
#include "scnn/file_util.hpp"
#include "scnn/rng.hpp"

namespace scnn::cli {

namespace {

template <typename T>
T parse(std::string_view key, std::string_view text) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") {
    return true;
  }
  if (text == "false" || text == "0") {
    return false;
  }
  throw ConfigError("config key '" + std::string(key) + "': expected true or false, got '" + std::string(text) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

template <typename T, typename Field>
Setter number(Field field) {
  return [field](RunConfig& c, std::string_view key, std::string_view value) { field(c) = parse<T>(key, value); };
}

const std::vector<std::pair<std::string_view, Setter>>& setters() {
  static const std::vector<std::pair<std::string_view, Setter>> table = {
      {"seed", number<std::uint64_t>([](RunConfig& c) -> auto& { return c.seed; })},
      {"epochs", number<std::size_t>([](RunConfig& c) -> auto& { return c.train.epochs; })},
      {"lr", number<float>([](RunConfig& c) -> auto& { return c.train.lr; })},
      {"batch_size", number<std::size_t>([](RunConfig& c) -> auto& { return c.train.batch_size; })},
      {"loss_on",
       [](RunConfig& c, std::string_view, std::string_view v) { c.train.loss_on = parse_loss_target(v); }},
      {"resample_masks",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.train.resample_masks = parse_bool(k, v); }},
      {"val_fraction", number<double>([](RunConfig& c) -> auto& { return c.val_fraction; })},
      {"resolution", number<std::size_t>([](RunConfig& c) -> auto& { return c.resolution; })},
      {"hidden_channels", number<std::size_t>([](RunConfig& c) -> auto& { return c.net.hidden_channels; })},
      {"kernel_size", number<std::size_t>([](RunConfig& c) -> auto& { return c.net.kernel_size; })},
      {"snn_position", number<std::size_t>([](RunConfig& c) -> auto& { return c.net.snn_position; })},
      {"surrogate_width", number<float>([](RunConfig& c) -> auto& { return c.net.surrogate_width; })},
      {"v_th", number<double>([](RunConfig& c) -> auto& { return c.net.lif.v_th; })},
      {"v_reset", number<double>([](RunConfig& c) -> auto& { return c.net.lif.v_reset; })},
      {"tau_m_ms", number<double>([](RunConfig& c) -> auto& { return c.net.lif.tau_m_ms; })},
      {"r_m", number<double>([](RunConfig& c) -> auto& { return c.net.lif.r_m; })},
      {"refractory_ms", number<double>([](RunConfig& c) -> auto& { return c.net.lif.refractory_ms; })},
      {"dt_ms", number<double>([](RunConfig& c) -> auto& { return c.net.lif.dt_ms; })},
      {"noise_std", number<double>([](RunConfig& c) -> auto& { return c.net.lif.noise_std; })},
      {"mask_min_rects", number<std::size_t>([](RunConfig& c) -> auto& { return c.mask.min_rects; })},
      {"mask_max_rects", number<std::size_t>([](RunConfig& c) -> auto& { return c.mask.max_rects; })},
      {"mask_min_h_frac", number<double>([](RunConfig& c) -> auto& { return c.mask.min_h_frac; })},
      {"mask_max_h_frac", number<double>([](RunConfig& c) -> auto& { return c.mask.max_h_frac; })},
      {"mask_min_w_frac", number<double>([](RunConfig& c) -> auto& { return c.mask.min_w_frac; })},
      {"mask_max_w_frac", number<double>([](RunConfig& c) -> auto& { return c.mask.max_w_frac; })},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

void RunConfig::derive_seeds() {
  net.seed = derive_seed(seed, "init");
  train.seed = derive_seed(seed, "train");
  mask.seed = derive_seed(seed, "mask");
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = [] {
    std::vector<std::string_view> out;
    for (const auto& [key, setter] : setters()) {
      out.push_back(key);
    }
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("config file " + path.string() + " does not exist");
  }
  apply_config_text(config, read_file(path), path.string());
}

}  // namespace scnn::cli
