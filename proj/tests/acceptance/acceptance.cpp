// Acceptance suite. Each criterion prints one PASS/FAIL line.
//
//   scnn_acceptance            run every criterion
//   scnn_acceptance 2 3a 7     run the named criteria
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "model_fd.hpp"
#include "oracles.hpp"
#include "scnn/activation.hpp"
#include "scnn/checkpoint.hpp"
#include "scnn/conv.hpp"
#include "scnn/file_util.hpp"
#include "scnn/lif.hpp"
#include "scnn/mask.hpp"
#include "scnn/net.hpp"
#include "scnn/rng.hpp"
#include "scnn/snn_conv.hpp"
#include "scnn/synth.hpp"
#include "scnn/train.hpp"
#include "temp_dir.hpp"

namespace scnn::acceptance {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int quiet_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scnn");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  if (code != 0) {
    std::cerr << err.str();
  }
  return code;
}

Tensor4 to_tensor(const std::vector<std::uint8_t>& rgb, std::size_t res) {
  Tensor4 t({1, 3, res, res});
  for (std::size_t y = 0; y < res; ++y) {
    for (std::size_t x = 0; x < res; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        t(0, c, y, x) = static_cast<float>(rgb[(y * res + x) * 3 + c]) / 255.0f;
      }
    }
  }
  return t;
}

ModelInput random_model_input(std::mt19937_64& gen, std::size_t res, std::uint64_t mask_index) {
  const Tensor4 image = testing::random_tensor({1, 3, res, res}, gen, 0.0f, 1.0f);
  const Tensor4 mask = generate_mask(res, res, MaskSpec{}, mask_index);
  return {apply_mask(image, mask), mask};
}

// 1. conv2d_forward against the nested-loop oracle.
Verdict conv_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1001);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  std::uniform_int_distribution<std::size_t> half_kernel(0, 3);
  std::uniform_int_distribution<std::size_t> stride_dist(1, 2);
  int instances = 0;
  double worst = 0.0;
  while (instances < 100) {
    const std::size_t k = 2 * half_kernel(gen) + 1;
    const std::size_t stride = stride_dist(gen);
    const std::size_t pad = std::uniform_int_distribution<std::size_t>(0, k / 2)(gen);
    const Shape4 in{dim(gen), dim(gen), dim(gen), dim(gen)};
    if (k > 8 || in.h + 2 * pad < k || in.w + 2 * pad < k || (in.h + 2 * pad - k) % stride != 0 ||
        (in.w + 2 * pad - k) % stride != 0) {
      continue;
    }
    const Tensor4 input = testing::random_tensor(in, gen);
    const ConvLayerParams params = testing::random_conv(dim(gen), in.c, k, stride, pad, gen);
    Shape4 shape;
    const std::vector<double> expected = testing::reference_conv(input, params, shape);
    const Tensor4 out = conv2d_forward(input, params);
    if (out.shape() != shape) {
      return {false, "shape mismatch on " + in.to_string()};
    }
    worst = std::max(worst, testing::max_relative_error(out.data(), expected));
    ++instances;
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-6 && elapsed < 5.0,
          fmt("100 instances, max rel err %.3g (< 1e-6), %.2fs (< 5s)", worst, elapsed)};
}

// 2. Analytic gradients against central finite differences.
Verdict gradients() {
  const auto start = Clock::now();
  const int instances = 3;
  double conv_worst = 0.0;
  double relu_worst = 0.0;
  double mse_worst = 0.0;
  double model_worst = 0.0;
  std::size_t model_checked = 0;
  std::size_t model_skipped = 0;
  for (int i = 0; i < instances; ++i) {
    std::mt19937_64 gen(2000 + i);

    Tensor4 input = testing::random_tensor({1, 2, 5, 5}, gen, -0.25f, 0.25f);
    ConvLayerParams params = testing::random_conv(3, 2, 3, 1 + (i % 2), 1, gen, 0.25f);
    const Tensor4 probe = testing::random_tensor(conv2d_output_shape(input.shape(), params), gen);
    const auto conv_f = [&] { return testing::weighted_sum(conv2d_forward(input, params), probe); };
    const ConvGrads g = conv2d_backward(input, params, probe);
    conv_worst = std::max({conv_worst,
                           testing::norm_relative_error(testing::to_double(g.input.data()),
                                                        testing::numeric_gradient(input.data(), conv_f)),
                           testing::norm_relative_error(testing::to_double(g.weight.data()),
                                                        testing::numeric_gradient(params.weight.data(), conv_f)),
                           testing::norm_relative_error(testing::to_double(g.bias),
                                                        testing::numeric_gradient(params.bias, conv_f))});

    Tensor4 x = testing::random_tensor({1, 3, 4, 4}, gen);
    for (float& v : x.data()) {
      v = std::copysign(0.01f + std::abs(v), v);
    }
    const Tensor4 relu_probe = testing::random_tensor(x.shape(), gen);
    const auto relu_f = [&] { return testing::weighted_sum(relu(x), relu_probe); };
    relu_worst = std::max(relu_worst, testing::norm_relative_error(testing::to_double(relu_backward(x, relu_probe).data()),
                                                                   testing::numeric_gradient(x.data(), relu_f)));

    Tensor4 pred = testing::random_tensor({1, 3, 4, 4}, gen);
    const Tensor4 target = testing::random_tensor(pred.shape(), gen);
    const auto mse_f = [&] { return mse_loss(pred, target).loss; };
    mse_worst = std::max(mse_worst, testing::norm_relative_error(testing::to_double(mse_loss(pred, target).grad.data()),
                                                                 testing::numeric_gradient(pred.data(), mse_f)));

    NetConfig config;
    config.hidden_channels = 4;
    config.snn_position = static_cast<std::size_t>(i) + 1;
    config.lif.v_th = 0.3;
    config.seed = 2100 + i;
    Model model = build_model(config);
    for (NetLayer& layer : model.layers) {
      for (float& b : layer.conv.bias) {
        b = std::uniform_real_distribution<float>(-0.1f, 0.1f)(gen);
      }
    }
    const ModelInput model_input = random_model_input(gen, 6, i);
    const Tensor4 model_target = testing::random_tensor({1, 3, 6, 6}, gen, 0.0f, 1.0f);
    ForwardOptions options;
    options.training = true;
    options.seed = 7 + i;
    options.spike_mode = SpikeMode::smoothed;
    const testing::ModelFdResult fd = testing::model_gradient_check(model, model_input, model_target, options);
    model_worst = std::max(model_worst, fd.error);
    model_checked += fd.checked;
    model_skipped += fd.skipped;
  }
  const double elapsed = seconds_since(start);
  const bool rare_skips = model_skipped * 5 < model_checked + model_skipped;
  const bool pass = conv_worst < 1e-4 && relu_worst < 1e-4 && mse_worst < 1e-4 && model_worst < 1e-3 && rare_skips &&
                    elapsed < 30.0;
  return {pass, fmt("%d instances each; rel err conv %.2g, relu %.2g, mse %.2g (< 1e-4), full model %.2g (< 1e-3) "
                    "over %zu params, %zu kink-crossing probes skipped; %.1fs (< 30s)",
                    instances, conv_worst, relu_worst, mse_worst, model_worst, model_checked, model_skipped, elapsed)};
}

// 3a. Zero-input Euler trace against the closed-form decay.
Verdict lif_decay_match() {
  LifParams params;
  params.dt_ms = params.tau_m_ms / 40.0;
  const std::size_t steps = 400;  // 10 tau
  const double v0 = 1.0;
  const NeuronTrace trace = simulate_neuron(std::vector<double>(steps, 0.0), params, {v0, 0.0});
  double worst = 0.0;
  std::size_t worst_step = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double exact = lif_decay(v0, static_cast<double>(k + 1) * params.dt_ms, params);
    const double rel = std::abs(trace.v[k] - exact) / exact;
    if (rel > worst) {
      worst = rel;
      worst_step = k + 1;
    }
  }
  return {worst < 1e-3, fmt("dt = tau/40 over 10 tau: max rel err %.4g at step %zu (< 1e-3)", worst, worst_step)};
}

// 3b. Spike count is monotone in constant current.
Verdict lif_monotone() {
  const LifParams params;
  std::vector<std::size_t> counts;
  for (int i = 0; i < 10; ++i) {
    const double current = 0.5 + 0.5 * i;
    counts.push_back(simulate_neuron(std::vector<double>(1000, current), params).spike_steps.size());
  }
  bool monotone = true;
  std::string listing;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    monotone = monotone && (i == 0 || counts[i] >= counts[i - 1]);
    listing += (i ? "," : "") + std::to_string(counts[i]);
  }
  return {monotone && counts.back() > counts.front(),
          "currents 0.5..5.0 over 1000 steps, spike counts [" + listing + "]"};
}

// 3c. No spike pair inside the refractory window.
Verdict lif_refractory() {
  LifParams params;
  params.refractory_ms = 3.0;
  std::mt19937_64 gen(3003);
  std::uniform_real_distribution<double> dist(-10.0, 60.0);
  std::vector<double> currents(100000);
  for (double& c : currents) {
    c = dist(gen);
  }
  const NeuronTrace trace = simulate_neuron(currents, params);
  const double window = params.refractory_ms / params.dt_ms;
  std::size_t violations = 0;
  for (std::size_t i = 1; i < trace.spike_steps.size(); ++i) {
    if (static_cast<double>(trace.spike_steps[i] - trace.spike_steps[i - 1]) <= window) {
      ++violations;
    }
  }
  return {violations == 0 && trace.spike_steps.size() > 1000,
          fmt("1e5 random-input steps, %zu spikes, %zu violations", trace.spike_steps.size(), violations)};
}

// 4. Spike outputs stay in {-1, 0, +1}.
Verdict spike_domain() {
  std::mt19937_64 gen(4004);
  std::size_t activations = 0;
  std::size_t violations = 0;
  std::uint64_t seed = 0;
  while (activations < 1000000) {
    SnnConvLayer layer;
    layer.conv = testing::random_conv(8, 4, 3, 1, 1, gen);
    layer.lif.v_th = std::uniform_real_distribution<double>(0.05, 2.0)(gen);
    layer.lif.noise_std = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const Tensor4 input = testing::random_tensor({4, 4, 16, 16}, gen, -3.0f, 3.0f);
    const bool training = seed % 2 == 0;
    const Tensor4 spikes = snn_forward(layer, input, seed++, training).spikes;
    for (const float s : spikes.data()) {
      violations += (s == -1.0f || s == 0.0f || s == 1.0f) ? 0 : 1;
    }
    activations += spikes.size();
  }
  return {violations == 0, fmt("%zu activations, %zu outside {-1, 0, +1}", activations, violations)};
}

// 5. Two train runs with the same seed/config give byte-identical files.
Verdict determinism() {
  const testing::TempDir dir;
  const fs::path data = dir.path() / "data";
  if (quiet_cli({"make-dataset", "--count", "16", "--resolution", "16", "--seed", "5", "--out", data.string()}) != 0) {
    return {false, "make-dataset failed"};
  }
  for (const char* run : {"a", "b"}) {
    if (quiet_cli({"train", "--data", data.string(), "--epochs", "3", "--seed", "11", "--out",
                   (dir.path() / run).string()}) != 0) {
      return {false, "train failed"};
    }
  }
  bool identical = true;
  std::string files;
  for (const char* file : {"metrics.csv", "best.ckpt", "last.ckpt"}) {
    const bool same = read_file(dir.path() / "a" / file) == read_file(dir.path() / "b" / file);
    identical = identical && same;
    files += std::string(files.empty() ? "" : ", ") + file + (same ? " identical" : " DIFFER");
  }
  return {identical, "16 images at 16x16, 3 epochs, seed 11: " + files};
}

// 6. inpaint never touches known pixels.
Verdict compositing() {
  std::mt19937_64 gen(6006);
  std::size_t violations = 0;
  std::size_t checked = 0;
  NetConfig config;
  config.seed = 66;
  const Model model = build_model(config);
  for (std::uint64_t call = 0; call < 100; ++call) {
    const std::size_t res = 8 + 4 * (call % 4);
    const Tensor4 image = testing::random_tensor({1, 3, res, res}, gen, 0.0f, 1.0f);
    const Tensor4 mask = generate_mask(res, res, MaskSpec{}, call);
    const Tensor4 out = inpaint(model, image, mask);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t y = 0; y < res; ++y) {
        for (std::size_t x = 0; x < res; ++x) {
          if (mask(0, 0, y, x) == 0.0f) {
            ++checked;
            violations += out(0, c, y, x) == image(0, c, y, x) ? 0 : 1;
          }
        }
      }
    }
  }
  return {violations == 0, fmt("100 calls, %zu unmasked values checked, %zu differ", checked, violations)};
}

// 7. One 32x32 synthetic sample, default net, 300 epochs.
Verdict overfit() {
  const auto start = Clock::now();
  const std::uint64_t seed = 0;
  const SynthImage desc = describe_synth_image(derive_seed(seed, "synth"), 0, 32);
  const std::vector<Tensor4> images{to_tensor(render_synth_image(desc), 32)};
  NetConfig net;
  net.seed = derive_seed(seed, "init");
  MaskSpec mask;
  mask.seed = derive_seed(seed, "mask");
  TrainConfig config;
  config.seed = derive_seed(seed, "train");
  config.epochs = 300;
  config.batch_size = 1;
  config.resample_masks = false;
  const TrainResult r = train(build_model(net), images, images, mask, config);
  const double elapsed = seconds_since(start);
  const float final_loss = r.history.back().train_loss;
  // Same image and mask, inference mode (no noise), after the last update.
  const double settled = evaluate(r.model, images, training_mask_spec(mask));
  return {final_loss < 1e-3f && elapsed < 300.0,
          fmt("epoch-1 train MSE %.4g, epoch-300 train MSE %.4g (< 1e-3), noise-free MSE of final model %.4g; "
              "%.0fs (< 300s)",
              static_cast<double>(r.history.front().train_loss), static_cast<double>(final_loss), settled, elapsed)};
}

// 8. Synthetic corpus of 64 images, 20 epochs, defaults.
Verdict desk_scale() {
  const auto start = Clock::now();
  const testing::TempDir dir;
  const fs::path data = dir.path() / "data";
  const fs::path run = dir.path() / "run";
  if (quiet_cli({"make-dataset", "--count", "64", "--resolution", "32", "--out", data.string()}) != 0 ||
      quiet_cli({"train", "--data", data.string(), "--out", run.string()}) != 0) {
    return {false, "make-dataset or train failed"};
  }
  const std::vector<EpochMetrics> history = parse_metrics(read_file(run / "metrics.csv"));
  const double elapsed = seconds_since(start);
  if (history.size() != 20) {
    return {false, fmt("expected 20 epochs, got %zu", history.size())};
  }
  float best_val = history.front().val_loss;
  for (const EpochMetrics& m : history) {
    best_val = std::min(best_val, m.val_loss);
  }
  const float first_train = history.front().train_loss;
  const float last_train = history.back().train_loss;
  const float first_val = history.front().val_loss;
  const bool pass = last_train < 0.5f * first_train && best_val < first_val && elapsed < 900.0;
  return {pass, fmt("train loss %.4g -> %.4g (< 0.5x), val loss epoch 1 %.4g, best %.4g; %.0fs (< 900s)",
                    static_cast<double>(first_train), static_cast<double>(last_train),
                    static_cast<double>(first_val), static_cast<double>(best_val), elapsed)};
}

// 9. Checkpoint save/load preserves outputs bit for bit.
Verdict checkpoint_round_trip() {
  const testing::TempDir dir;
  NetConfig config;
  config.seed = 909;
  Model model = build_model(config);
  std::mt19937_64 gen(9009);
  for (NetLayer& layer : model.layers) {
    for (float& b : layer.conv.bias) {
      b = std::uniform_real_distribution<float>(-0.1f, 0.1f)(gen);
    }
  }
  const fs::path path = dir.path() / "model.ckpt";
  save_checkpoint(model, path);
  const Model loaded = load_checkpoint(path).model;
  std::size_t mismatches = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const ModelInput input = random_model_input(gen, 16, i);
    mismatches += predict(model, input) == predict(loaded, input) ? 0 : 1;
  }
  save_checkpoint(loaded, dir.path() / "again.ckpt");
  const bool same_bytes = read_file(path) == read_file(dir.path() / "again.ckpt");
  return {mismatches == 0 && same_bytes && loaded == model,
          fmt("10 random inputs, %zu output mismatches; re-save %s", mismatches,
              same_bytes ? "byte-identical" : "DIFFERS")};
}

// 10. Sample invariants.
Verdict sample_invariants() {
  std::mt19937_64 gen(1010);
  std::size_t violations = 0;
  for (std::uint64_t index = 0; index < 1000; ++index) {
    const std::size_t res = 8 + index % 25;
    const Tensor4 image = testing::random_tensor({1, 3, res, res}, gen, 0.0f, 1.0f);
    MaskSpec spec;
    spec.seed = index / 100;
    const Sample s = make_sample(image, spec, index);
    bool ok = s.ground_truth == image;
    bool any_hole = false;
    bool any_known = false;
    for (std::size_t y = 0; y < res; ++y) {
      for (std::size_t x = 0; x < res; ++x) {
        const float m = s.mask(0, 0, y, x);
        ok = ok && (m == 0.0f || m == 1.0f);
        any_hole = any_hole || m == 1.0f;
        any_known = any_known || m == 0.0f;
        for (std::size_t c = 0; c < 3; ++c) {
          ok = ok && s.corrupted(0, c, y, x) == image(0, c, y, x) * (1.0f - m);
        }
      }
    }
    violations += ok && any_hole && any_known ? 0 : 1;
  }
  return {violations == 0, fmt("1000 samples, %zu violations", violations)};
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"1", "conv2d matches nested-loop oracle", conv_oracle},
      {"2", "gradients match finite differences", gradients},
      {"3a", "Euler decay matches closed form", lif_decay_match},
      {"3b", "spike count monotone in current", lif_monotone},
      {"3c", "refractory window respected", lif_refractory},
      {"4", "spikes stay ternary", spike_domain},
      {"5", "train runs are byte-identical", determinism},
      {"6", "inpaint keeps known pixels", compositing},
      {"7", "single-sample overfit", overfit},
      {"8", "desk-scale learning", desk_scale},
      {"9", "checkpoint round trip", checkpoint_round_trip},
      {"10", "sample invariants", sample_invariants},
  };
  return all;
}

}  // namespace
}  // namespace scnn::acceptance

int main(int argc, char** argv) {
  using scnn::acceptance::criteria;
  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.empty()) {
    for (const auto& c : criteria()) {
      selected.push_back(c.id);
    }
  }
  int failures = 0;
  for (const std::string& id : selected) {
    const auto it = std::find_if(criteria().begin(), criteria().end(), [&](const auto& c) { return c.id == id; });
    if (it == criteria().end()) {
      std::cerr << "unknown criterion '" << id << "'\n";
      return 2;
    }
    scnn::acceptance::Verdict verdict;
    try {
      verdict = it->run();
    } catch (const std::exception& e) {
      verdict = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (verdict.pass ? "PASS" : "FAIL") << "  criterion " << it->id << ": " << it->title << " -- "
              << verdict.detail << std::endl;
    failures += verdict.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
