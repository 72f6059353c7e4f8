#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "run_config.hpp"
#include "scnn/activation.hpp"
#include "scnn/checkpoint.hpp"
#include "scnn/dataset.hpp"
#include "scnn/error.hpp"
#include "scnn/file_util.hpp"
#include "scnn/image_io.hpp"
#include "scnn/lif.hpp"
#include "scnn/mask.hpp"
#include "scnn/rng.hpp"
#include "scnn/synth.hpp"
#include "scnn/train.hpp"

namespace scnn::cli {

namespace fs = std::filesystem;

namespace {

// Staging directory that is removed unless commit() moved it into place.
class StagingDir {
 public:
  explicit StagingDir(fs::path target) : target_(std::move(target)), path_(target_) {
    path_ += ".partial";
    std::error_code ec;
    fs::remove_all(path_, ec);
    fs::create_directories(path_, ec);
    if (ec) {
      throw IoError("cannot create " + path_.string() + ": " + ec.message());
    }
  }
  StagingDir(const StagingDir&) = delete;
  StagingDir& operator=(const StagingDir&) = delete;
  ~StagingDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }

  [[nodiscard]] const fs::path& path() const { return path_; }

  /// Moves the staged tree to the target. An existing empty target
  /// directory is replaced.
  void commit() {
    std::error_code ec;
    if (fs::is_directory(target_) && fs::is_empty(target_)) {
      fs::remove(target_, ec);
    }
    fs::rename(path_, target_, ec);
    if (ec) {
      throw IoError("cannot move " + path_.string() + " to " + target_.string() + ": " + ec.message());
    }
    committed_ = true;
  }

  /// Moves each staged file into the (possibly existing) target directory.
  void commit_files() {
    std::error_code ec;
    fs::create_directories(target_, ec);
    if (ec) {
      throw IoError("cannot create " + target_.string() + ": " + ec.message());
    }
    for (const auto& entry : fs::directory_iterator(path_)) {
      fs::rename(entry.path(), target_ / entry.path().filename(), ec);
      if (ec) {
        throw IoError("cannot move " + entry.path().string() + " into " + target_.string() + ": " + ec.message());
      }
    }
    fs::remove(path_, ec);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path path_;
  bool committed_ = false;
};

void require_fresh_output_dir(const fs::path& out) {
  if (fs::exists(out) && !(fs::is_directory(out) && fs::is_empty(out))) {
    throw ConfigError("output directory " + out.string() + " already exists and is not empty");
  }
}

// Loads a manifest from `data` (a manifest file or a directory holding
// manifest.tsv). A directory without a manifest is split on the fly.
DatasetManifest resolve_dataset(const fs::path& data, const RunConfig& config) {
  if (!fs::exists(data)) {
    throw ConfigError("data path " + data.string() + " does not exist");
  }
  if (fs::is_regular_file(data)) {
    return read_manifest(data);
  }
  const fs::path manifest_file = data / kManifestFileName;
  if (fs::exists(manifest_file)) {
    return read_manifest(manifest_file);
  }
  return split_dataset(list_images(data), derive_seed(config.seed, "split"), config.val_fraction, config.resolution);
}

std::vector<double> parse_current_trace(const std::string& spec, std::size_t steps) {
  double constant = 0.0;
  auto [end, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), constant);
  if (ec == std::errc{} && end == spec.data() + spec.size()) {
    return std::vector<double>(steps, constant);
  }
  if (!fs::exists(spec)) {
    throw ConfigError("--current '" + spec + "' is neither a number nor an existing trace file");
  }
  // One value per line; the first comma-separated field is used and a
  // non-numeric first line is treated as a header.
  std::istringstream in(read_file(spec));
  std::vector<double> trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string field = line.substr(0, line.find(','));
    if (field.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    double value = 0.0;
    const char* first = field.data() + field.find_first_not_of(" \t");
    const char* last = field.data() + field.find_last_not_of(" \t\r") + 1;
    auto [stop, err] = std::from_chars(first, last, value);
    if (err != std::errc{} || stop != last) {
      if (line_no == 1) {
        continue;
      }
      throw ConfigError("trace file " + spec + " line " + std::to_string(line_no) + ": not a number");
    }
    trace.push_back(value);
  }
  if (trace.empty()) {
    throw ConfigError("trace file " + spec + " holds no values");
  }
  return trace;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

// Common "--config" + override handling for subcommands that build a RunConfig.
struct ConfigSource {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

RunConfig load_run_config(const ConfigSource& source) {
  RunConfig config;
  if (!source.config_path.empty()) {
    apply_config_file(config, source.config_path);
  }
  if (source.seed) {
    config.seed = *source.seed;
  }
  return config;
}

int cmd_make_dataset(std::size_t count, std::size_t resolution, std::uint64_t seed, double val_fraction,
                     const fs::path& out, std::ostream& stdout_stream) {
  if (resolution == 0) {
    throw ConfigError("--resolution must be positive");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("--val-fraction must lie in (0, 1)");
  }
  if (count == 1) {
    throw ConfigError("--count 1 cannot fill both a train and a val split");
  }
  require_fresh_output_dir(out);
  StagingDir staging(out);
  const std::vector<fs::path> written = synth_corpus(count, resolution, derive_seed(seed, "synth"), staging.path());
  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.resolution = resolution;
  if (!written.empty()) {
    std::vector<fs::path> names;
    for (const auto& path : written) {
      names.push_back(path.filename());
    }
    manifest = split_dataset(names, derive_seed(seed, "split"), val_fraction, resolution);
    manifest.seed = seed;
  }
  write_manifest(manifest, staging.path() / kManifestFileName);
  staging.commit();
  stdout_stream << "wrote " << count << " images to " << out.string() << " (" << manifest.paths(Split::train).size()
                << " train, " << manifest.paths(Split::val).size() << " val)\n";
  return kOk;
}

int cmd_train(RunConfig config, const fs::path& data, const fs::path& out, std::ostream& stdout_stream) {
  config.derive_seeds();
  const DatasetManifest manifest = resolve_dataset(data, config);
  const std::vector<Tensor4> train_images = load_split(manifest, Split::train);
  const std::vector<Tensor4> val_images = load_split(manifest, Split::val);
  if (train_images.empty() || val_images.empty()) {
    throw ConfigError("dataset " + data.string() + " must have images in both the train and val splits");
  }

  StagingDir staging(out);
  TrainConfig train_config = config.train;
  train_config.checkpoint_dir = staging.path();
  train_config.metrics_path = staging.path() / "metrics.csv";

  Model model = build_model(config.net);
  stdout_stream << "training " << model.parameter_count() << " parameters on " << train_images.size()
                << " train / " << val_images.size() << " val images at " << manifest.resolution << "x"
                << manifest.resolution << '\n';
  auto last = std::chrono::steady_clock::now();
  const auto report = [&](const EpochMetrics& m) {
    const auto now = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(now - last).count();
    last = now;
    stdout_stream << "epoch " << m.epoch << "/" << train_config.epochs << " train_loss=" << format_double(m.train_loss)
                  << " val_loss=" << format_double(m.val_loss) << " time=" << format_double(seconds) << "s\n";
    stdout_stream.flush();
  };
  const TrainResult result = train(std::move(model), train_images, val_images, config.mask, train_config, report);
  staging.commit_files();
  (void)result;
  stdout_stream << "wrote " << (out / "metrics.csv").string() << ", " << (out / kBestCheckpointName).string()
                << ", " << (out / kLastCheckpointName).string() << '\n';
  return kOk;
}

Tensor4 load_mask_image(const fs::path& path, const Shape4& image_shape) {
  const Tensor4 raw = load_image(path);
  if (raw.shape().h != image_shape.h || raw.shape().w != image_shape.w) {
    throw ShapeError("mask " + path.string() + " is " + std::to_string(raw.shape().w) + "x" +
                     std::to_string(raw.shape().h) + " but the image is " + std::to_string(image_shape.w) + "x" +
                     std::to_string(image_shape.h));
  }
  Tensor4 mask({1, 1, image_shape.h, image_shape.w});
  std::span<const float> src = raw.plane(0, 0);
  std::span<float> dst = mask.plane(0, 0);
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = src[i] >= 0.5f ? 1.0f : 0.0f;
  }
  return mask;
}

int cmd_infer(const fs::path& checkpoint_path, const fs::path& image_path, const std::string& mask_path,
              std::optional<std::uint64_t> mask_seed, const fs::path& out, std::ostream& stdout_stream) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const Tensor4 image = load_image(image_path);
  const Shape4& shape = image.shape();
  Tensor4 mask;
  if (!mask_path.empty()) {
    mask = load_mask_image(mask_path, shape);
  } else {
    MaskSpec spec;
    spec.seed = *mask_seed;
    mask = generate_mask(shape.h, shape.w, spec, 0);
  }
  const ImageFormat format = format_from_path(out);
  const Tensor4 result = inpaint(checkpoint.model, image, mask);
  save_image(result, out, format);
  stdout_stream << "inpainted " << static_cast<std::size_t>(mask_coverage(mask) * static_cast<double>(mask.size()))
                << " masked pixels, wrote " << out.string() << '\n';
  return kOk;
}

int cmd_eval(RunConfig config, const fs::path& checkpoint_path, const fs::path& data, const std::string& split_arg,
             const std::string& mask_mode, const std::string& score_mode, std::ostream& stdout_stream) {
  const Split split = parse_split(split_arg);
  if (mask_mode != "random" && mask_mode != "none") {
    throw ConfigError("--mask must be 'random' or 'none'");
  }
  if (score_mode != "raw" && score_mode != "composite") {
    throw ConfigError("--score must be 'raw' or 'composite'");
  }
  config.derive_seeds();
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const DatasetManifest manifest = resolve_dataset(data, config);
  const std::vector<Tensor4> images = load_split(manifest, split);
  if (images.empty()) {
    throw ConfigError("split '" + split_arg + "' of " + data.string() + " is empty");
  }
  const Model& model = checkpoint.model;
  const bool composited = score_mode == "composite";
  const Predictor predictor = [&](const ModelInput& input) {
    Tensor4 pred = predict(model, input);
    return composited ? composite(pred, input.corrupted, input.mask) : pred;
  };

  double mse = 0.0;
  if (mask_mode == "none") {
    for (const Tensor4& image : images) {
      const Shape4& s = image.shape();
      const ModelInput input{image, Tensor4({1, 1, s.h, s.w})};
      mse += mse_loss(predictor(input), image).loss;
    }
    mse /= static_cast<double>(images.size());
  } else {
    const MaskSpec spec = split == Split::val ? validation_mask_spec(config.mask) : training_mask_spec(config.mask);
    mse = evaluate(predictor, images, spec);
  }
  stdout_stream << "mse=" << format_double(mse) << '\n';
  return kOk;
}

int cmd_neuron_sim(const std::string& current, std::size_t steps, bool steps_given, LifParams params,
                   const std::string& out, std::ostream& stdout_stream) {
  params.validate();
  if (steps == 0) {
    throw ConfigError("--steps must be positive");
  }
  std::vector<double> trace = parse_current_trace(current, steps);
  if (steps_given && trace.size() > steps) {
    trace.resize(steps);
  }
  const NeuronTrace result = simulate_neuron(trace, params);
  std::string csv = "step,v,spiked\n";
  for (std::size_t i = 0; i < result.v.size(); ++i) {
    csv += std::to_string(i) + "," + format_double(result.v[i]) + "," + (result.spiked[i] ? "1" : "0") + "\n";
  }
  if (out.empty() || out == "-") {
    stdout_stream << csv;
  } else {
    write_file_atomic(out, csv);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid spiking-convolutional image inpainting"};
  app.name(args.empty() ? "scnn" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // make-dataset
  auto* make_dataset = app.add_subcommand("make-dataset", "Write a synthetic image corpus and its manifest");
  std::size_t md_count = 64;
  std::size_t md_resolution = 32;
  std::uint64_t md_seed = 0;
  double md_val_fraction = 0.2;
  std::string md_out;
  make_dataset->add_option("--count", md_count, "Number of images");
  make_dataset->add_option("--resolution", md_resolution, "Image side length in pixels");
  make_dataset->add_option("--seed", md_seed, "Random seed");
  make_dataset->add_option("--val-fraction", md_val_fraction, "Expected fraction of images in the val split");
  make_dataset->add_option("--out", md_out, "Output directory (must not exist or be empty)")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the network on a dataset");
  ConfigSource tr_source;
  std::string tr_data;
  std::string tr_out;
  std::size_t tr_epochs = TrainConfig{}.epochs;
  float tr_lr = TrainConfig{}.lr;
  std::size_t tr_batch = TrainConfig{}.batch_size;
  std::uint64_t tr_seed = 0;
  bool tr_record_time = false;
  train_cmd->add_option("--config", tr_source.config_path, "Flat key = value config file (default: none)");
  train_cmd->add_option("--data", tr_data, "Dataset directory or manifest file")->required();
  auto* tr_epochs_opt = train_cmd->add_option("--epochs", tr_epochs, "Training epochs");
  auto* tr_seed_opt = train_cmd->add_option("--seed", tr_seed, "Random seed");
  auto* tr_lr_opt = train_cmd->add_option("--lr", tr_lr, "Adam learning rate");
  auto* tr_batch_opt = train_cmd->add_option("--batch-size", tr_batch, "Images per batch");
  train_cmd->add_flag("--record-time", tr_record_time, "Write wall-clock seconds into metrics.csv (default: off, seconds are 0)");
  train_cmd->add_option("--out", tr_out, "Output directory for metrics.csv and checkpoints")->required();

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "Inpaint one image with a trained checkpoint");
  std::string in_checkpoint;
  std::string in_image;
  std::string in_mask;
  std::uint64_t in_mask_seed = 0;
  std::string in_out;
  infer_cmd->add_option("--checkpoint", in_checkpoint, "Checkpoint file")->required();
  infer_cmd->add_option("--image", in_image, "Input image (PGM/PPM/PNG)")->required();
  auto* in_mask_opt = infer_cmd->add_option("--mask", in_mask, "Mask image; pixels >= 0.5 are holes (default: none, one of --mask/--mask-seed is required)");
  auto* in_seed_opt = infer_cmd->add_option("--mask-seed", in_mask_seed, "Generate a random mask with this seed (default: none)");
  in_seed_opt->default_str("");
  in_mask_opt->excludes(in_seed_opt);
  infer_cmd->add_option("--out", in_out, "Output image; format follows the extension")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Print the mean MSE of a checkpoint on a dataset split");
  ConfigSource ev_source;
  std::uint64_t ev_seed = 0;
  std::string ev_checkpoint;
  std::string ev_data;
  std::string ev_split = "val";
  std::string ev_mask = "random";
  std::string ev_score = "raw";
  eval_cmd->add_option("--config", ev_source.config_path, "Flat key = value config file (default: none)");
  eval_cmd->add_option("--checkpoint", ev_checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", ev_data, "Dataset directory or manifest file")->required();
  eval_cmd->add_option("--split", ev_split, "train or val");
  auto* ev_seed_opt = eval_cmd->add_option("--seed", ev_seed, "Seed used for training (selects the same masks)");
  eval_cmd->add_option("--mask", ev_mask, "random: seeded masks; none: no holes");
  eval_cmd->add_option("--score", ev_score, "raw: model output; composite: prediction pasted into holes");

  // neuron-sim
  auto* sim_cmd = app.add_subcommand("neuron-sim", "Simulate a single LIF neuron and write step,v,spiked CSV");
  std::string sim_current = "0";
  std::size_t sim_steps = 100;
  LifParams sim_params;
  std::string sim_out = "-";
  sim_cmd->add_option("--current", sim_current, "Constant input current, or a file with one value per line");
  auto* sim_steps_opt = sim_cmd->add_option("--steps", sim_steps, "Number of steps (caps a trace file)");
  sim_cmd->add_option("--dt", sim_params.dt_ms, "Integration step in ms");
  sim_cmd->add_option("--tau", sim_params.tau_m_ms, "Membrane time constant in ms");
  sim_cmd->add_option("--threshold", sim_params.v_th, "Spike threshold");
  sim_cmd->add_option("--reset", sim_params.v_reset, "Reset potential");
  sim_cmd->add_option("--resistance", sim_params.r_m, "Membrane resistance");
  sim_cmd->add_option("--refractory", sim_params.refractory_ms, "Refractory period in ms");
  sim_cmd->add_option("--out", sim_out, "Output CSV file, or - for standard output");

  std::vector<std::string> argv_tail(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*make_dataset) {
      return cmd_make_dataset(md_count, md_resolution, md_seed, md_val_fraction, md_out, out);
    }
    if (*train_cmd) {
      if (*tr_seed_opt) {
        tr_source.seed = tr_seed;
      }
      RunConfig config = load_run_config(tr_source);
      if (*tr_epochs_opt) {
        config.train.epochs = tr_epochs;
      }
      if (*tr_lr_opt) {
        config.train.lr = tr_lr;
      }
      if (*tr_batch_opt) {
        config.train.batch_size = tr_batch;
      }
      config.train.record_wall_time = tr_record_time;
      return cmd_train(config, tr_data, tr_out, out);
    }
    if (*infer_cmd) {
      if (!*in_mask_opt && !*in_seed_opt) {
        throw ConfigError("infer needs --mask or --mask-seed");
      }
      return cmd_infer(in_checkpoint, in_image, in_mask,
                       *in_seed_opt ? std::optional<std::uint64_t>(in_mask_seed) : std::nullopt, in_out, out);
    }
    if (*eval_cmd) {
      if (*ev_seed_opt) {
        ev_source.seed = ev_seed;
      }
      return cmd_eval(load_run_config(ev_source), ev_checkpoint, ev_data, ev_split, ev_mask, ev_score, out);
    }
    if (*sim_cmd) {
      return cmd_neuron_sim(sim_current, sim_steps, static_cast<bool>(*sim_steps_opt), sim_params, sim_out, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const CorruptFileError& e) {
    err << "error: " << e.what() << '\n';
    return kCorruptData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kConfigError;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr); }

}  // namespace scnn::cli
