#include "sbg/model.hpp"

#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "oracles.hpp"

using namespace sbg;
using ad::NodeId;
using ad::Tape;
using ad::Tensor;

namespace {

ModelConfig toy_config(Variant variant = Variant::kFull) {
  ModelConfig cfg;
  cfg.m = 4;
  cfg.n = 3;
  cfg.future_offset = 5;
  cfg.enc_hidden = 6;
  cfg.dec_hidden = 8;
  cfg.disc_hidden = 7;
  cfg.z_dim = 4;
  cfg.user_dim = 25;
  cfg.robot_dim = 10;
  cfg.variant = variant;
  cfg.apply_variant();
  return cfg;
}

std::vector<Tensor> random_window(const ModelConfig& cfg, std::size_t batch, Rng& rng) {
  std::vector<Tensor> window;
  for (int t = 0; t < cfg.m; ++t) {
    Tensor x(batch, static_cast<std::size_t>(cfg.user_dim));
    for (double& v : x.v) v = rng.uniform(-1, 1);
    window.push_back(std::move(x));
  }
  return window;
}

Tensor random_pose(const ModelConfig& cfg, std::size_t batch, Rng& rng) {
  Tensor t(batch, static_cast<std::size_t>(cfg.robot_dim));
  for (double& v : t.v) v = rng.uniform(-1, 1);
  return t;
}

}  // namespace

TEST_CASE("variant names round trip and fix config fields") {
  for (Variant v : {Variant::kFull, Variant::kOriginalGan, Variant::kNoGan,
                    Variant::kUserPositions, Variant::kRobotVectors}) {
    CHECK(variant_from_name(variant_name(v)).value() == v);
  }
  CHECK(!variant_from_name("bogus").has_value());

  ModelConfig cfg;
  cfg.variant = Variant::kOriginalGan;
  cfg.apply_variant();
  CHECK(cfg.future_offset == 0);

  cfg = ModelConfig{};
  cfg.variant = Variant::kUserPositions;
  cfg.apply_variant();
  CHECK(cfg.user_dim == 27);

  cfg = ModelConfig{};
  cfg.variant = Variant::kRobotVectors;
  cfg.apply_variant();
  CHECK(cfg.robot_dim == 25);

  // defaults follow the published architecture
  ModelConfig defaults;
  CHECK(defaults.m == 15);
  CHECK(defaults.n == 5);
  CHECK(defaults.future_offset == 30);
  CHECK(defaults.enc_hidden == 256);
  CHECK(defaults.dec_hidden == 512);
  CHECK(defaults.z_dim == 128);
  CHECK(defaults.decode_steps() == 35);
}

TEST_CASE("encode emits z_dim values and zero propagates") {
  ModelConfig cfg;  // default sizes: z must come out 128-wide
  Rng rng(1);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  auto window = random_window(cfg, 2, rng);
  NodeId z = encode(tape, window, b, cfg);
  CHECK(tape.value(z).rows == 2);
  CHECK(tape.value(z).cols == 128);

  // zero weights and zero window: z = 0
  ModelParams zero = params;
  for (auto& [name, tensor] : zero.named_params()) {
    for (double& v : tensor->v) v = 0.0;
  }
  Tape tape2;
  TapeBindings b2 = TapeBindings::bind(tape2, zero);
  std::vector<Tensor> zwin(static_cast<std::size_t>(cfg.m), Tensor(1, 25));
  NodeId z2 = encode(tape2, zwin, b2, cfg);
  for (double v : tape2.value(z2).v) CHECK(v == 0.0);
}

TEST_CASE("encode distinguishes windows differing only in the first pose") {
  ModelConfig cfg = toy_config();
  Rng rng(2);
  ModelParams params = ModelParams::init(cfg, rng);
  auto window_a = random_window(cfg, 1, rng);
  auto window_b = window_a;
  for (double& v : window_b.front().v) v += 0.37;

  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  NodeId za = encode(tape, window_a, b, cfg);
  NodeId zb = encode(tape, window_b, b, cfg);
  double diff = 0.0;
  for (std::size_t i = 0; i < tape.value(za).size(); ++i) {
    diff += std::abs(tape.value(za).v[i] - tape.value(zb).v[i]);
  }
  CHECK(diff > 1e-9);
}

TEST_CASE("encode rejects a wrong window length") {
  ModelConfig cfg = toy_config();
  Rng rng(3);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  std::vector<Tensor> window(static_cast<std::size_t>(cfg.m - 1),
                             Tensor(1, static_cast<std::size_t>(cfg.user_dim)));
  CHECK_THROWS_AS(encode(tape, window, b, cfg), Error);
}

TEST_CASE("decode emits one pose per step and supports single-step mode") {
  ModelConfig cfg = toy_config();
  Rng rng(4);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  NodeId z = encode(tape, random_window(cfg, 2, rng), b, cfg);
  NodeId seed = tape.input(random_pose(cfg, 2, rng));

  DecodeResult five = decode(tape, z, seed, 5, nullptr, 0.0, nullptr, b, cfg);
  CHECK(five.outputs.size() == 5);
  for (NodeId id : five.outputs) {
    CHECK(tape.value(id).rows == 2);
    CHECK(tape.value(id).cols == static_cast<std::size_t>(cfg.robot_dim));
  }

  DecodeResult one = decode(tape, z, seed, 1, nullptr, 0.0, nullptr, b, cfg);
  CHECK(one.outputs.size() == 1);
}

TEST_CASE("decode with p_tf 1 feeds the ground-truth poses") {
  ModelConfig cfg = toy_config();
  Rng rng(5);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  NodeId z = encode(tape, random_window(cfg, 1, rng), b, cfg);
  Tensor seed = random_pose(cfg, 1, rng);

  std::vector<Tensor> targets;
  for (int s = 0; s < cfg.n; ++s) targets.push_back(random_pose(cfg, 1, rng));

  Rng tf_rng(99);
  DecodeTrace trace;
  DecodeResult dec =
      decode(tape, z, tape.input(seed), cfg.n, &targets, 1.0, &tf_rng, b, cfg, &trace);
  CHECK(dec.any_forced());
  REQUIRE(trace.step_inputs.size() == static_cast<std::size_t>(cfg.n));

  // step 1 sees (seed, seed); step s+1 sees (target_s, seed)
  const std::size_t rd = static_cast<std::size_t>(cfg.robot_dim);
  for (std::size_t j = 0; j < rd; ++j) {
    CHECK(tape.value(trace.step_inputs[0]).v[j] == seed.v[j]);
    CHECK(tape.value(trace.step_inputs[0]).v[rd + j] == seed.v[j]);
  }
  for (int s = 1; s < cfg.n; ++s) {
    for (std::size_t j = 0; j < rd; ++j) {
      CHECK(tape.value(trace.step_inputs[static_cast<std::size_t>(s)]).v[j] ==
            targets[static_cast<std::size_t>(s - 1)].v[j]);
    }
  }
}

TEST_CASE("decode with p_tf 0 feeds back its own outputs") {
  ModelConfig cfg = toy_config();
  Rng rng(6);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  NodeId z = encode(tape, random_window(cfg, 1, rng), b, cfg);
  NodeId seed = tape.input(random_pose(cfg, 1, rng));

  DecodeTrace trace;
  DecodeResult dec = decode(tape, z, seed, 6, nullptr, 0.0, nullptr, b, cfg, &trace);
  CHECK(!dec.any_forced());
  const std::size_t rd = static_cast<std::size_t>(cfg.robot_dim);
  for (std::size_t s = 1; s < 6; ++s) {
    for (std::size_t j = 0; j < rd; ++j) {
      CHECK(tape.value(trace.step_inputs[s]).v[j] == tape.value(dec.outputs[s - 1]).v[j]);
    }
  }
}

TEST_CASE("the seed reaches every decoder step") {
  ModelConfig cfg = toy_config();
  Rng rng(7);
  ModelParams params = ModelParams::init(cfg, rng);

  auto run = [&](double seed_value) {
    Tape tape;
    TapeBindings b = TapeBindings::bind(tape, params);
    Tensor z(1, static_cast<std::size_t>(cfg.z_dim));
    for (double& v : z.v) v = 0.3;
    Tensor seed(1, static_cast<std::size_t>(cfg.robot_dim));
    for (double& v : seed.v) v = seed_value;
    DecodeTrace trace;
    decode(tape, tape.input(z), tape.input(seed), 8, nullptr, 0.0, nullptr, b, cfg, &trace);
    std::vector<std::vector<double>> preacts;
    for (NodeId g : trace.gate_preacts) preacts.push_back(tape.value(g).v);
    return preacts;
  };

  auto with_seed = run(0.8);
  auto zero_seed = run(0.0);
  REQUIRE(with_seed.size() == zero_seed.size());
  for (std::size_t s = 0; s < with_seed.size(); ++s) {
    double diff = 0.0;
    for (std::size_t i = 0; i < with_seed[s].size(); ++i) {
      diff = std::max(diff, std::abs(with_seed[s][i] - zero_seed[s][i]));
    }
    CHECK(diff > 1e-9);  // pre-activations at step s depend on the seed
  }
}

TEST_CASE("rollout_future slices next and future windows out of one unroll") {
  ModelConfig cfg = toy_config();
  Rng rng(8);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  NodeId z = encode(tape, random_window(cfg, 1, rng), b, cfg);
  NodeId seed = tape.input(random_pose(cfg, 1, rng));

  RolloutResult roll = rollout_future(tape, z, seed, nullptr, 0.0, nullptr, b, cfg);
  REQUIRE(roll.next.size() == static_cast<std::size_t>(cfg.n));
  REQUIRE(roll.future.size() == static_cast<std::size_t>(cfg.n));

  // same unroll done manually must agree step by step
  DecodeResult manual =
      decode(tape, z, seed, cfg.n + cfg.future_offset, nullptr, 0.0, nullptr, b, cfg);
  for (int s = 0; s < cfg.n; ++s) {
    CHECK(tape.value(roll.next[s]).v == tape.value(manual.outputs[s]).v);
    CHECK(tape.value(roll.future[s]).v ==
          tape.value(manual.outputs[s + cfg.future_offset]).v);
  }
}

TEST_CASE("rollout_future aliases next and future for the original-gan variant") {
  ModelConfig cfg = toy_config(Variant::kOriginalGan);
  CHECK(cfg.future_offset == 0);
  Rng rng(9);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  NodeId z = encode(tape, random_window(cfg, 1, rng), b, cfg);
  RolloutResult roll = rollout_future(tape, z, tape.input(random_pose(cfg, 1, rng)), nullptr,
                                      0.0, nullptr, b, cfg);
  for (int s = 0; s < cfg.n; ++s) {
    CHECK(tape.value(roll.future[s]).v == tape.value(roll.next[s]).v);
  }
}

TEST_CASE("rollout_future refuses the no-gan variant") {
  ModelConfig cfg = toy_config(Variant::kNoGan);
  Rng rng(10);
  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  NodeId z = encode(tape, random_window(cfg, 1, rng), b, cfg);
  CHECK_THROWS_AS(rollout_future(tape, z, tape.input(random_pose(cfg, 1, rng)), nullptr, 0.0,
                                 nullptr, b, cfg),
                  Error);
}

TEST_CASE("discriminate outputs probabilities and matches a scalar chain") {
  ModelConfig cfg = toy_config();
  Rng rng(11);

  // all-zero weights: sigmoid(0) = 0.5
  ModelParams zero = ModelParams::init(cfg, rng);
  for (auto& [name, tensor] : zero.named_params()) {
    for (double& v : tensor->v) v = 0.0;
  }
  Tape ztape;
  TapeBindings zb = TapeBindings::bind(ztape, zero);
  std::vector<NodeId> zseq;
  for (int s = 0; s < cfg.n; ++s) zseq.push_back(ztape.input(random_pose(cfg, 1, rng)));
  CHECK(ztape.scalar_value(discriminate(ztape, zseq, zb, cfg)) == 0.5);

  ModelParams params = ModelParams::init(cfg, rng);
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  std::vector<NodeId> seq;
  std::vector<Tensor> poses;
  for (int s = 0; s < cfg.n; ++s) {
    poses.push_back(random_pose(cfg, 1, rng));
    seq.push_back(tape.input(poses.back()));
  }
  double p = tape.scalar_value(discriminate(tape, seq, b, cfg));
  CHECK(p > 0.0);
  CHECK(p < 1.0);

  // scalar reference chain
  std::size_t h = static_cast<std::size_t>(cfg.disc_hidden);
  std::vector<double> hh(h, 0.0), cc(h, 0.0);
  for (int s = 0; s < cfg.n; ++s) {
    auto ref = oracle::lstm_cell(poses[static_cast<std::size_t>(s)].v, hh, cc,
                                 params.disc_lstm.w_ih.v, params.disc_lstm.w_hh.v,
                                 params.disc_lstm.bias.v, h,
                                 static_cast<std::size_t>(cfg.robot_dim));
    hh = ref.h;
    cc = ref.c;
  }
  auto logits = oracle::dense(hh, params.disc_out_w.v, params.disc_out_b.v, 1, h);
  CHECK(p == doctest::Approx(oracle::sigmoid(logits[0])).epsilon(1e-12));
}

TEST_CASE("generate_step shape, purity and clamping") {
  ModelConfig cfg = toy_config();
  Rng rng(12);
  ModelParams params = ModelParams::init(cfg, rng);

  std::vector<double> window(static_cast<std::size_t>(cfg.m * cfg.user_dim));
  for (double& v : window) v = rng.uniform(-1, 1);
  std::vector<double> pose(static_cast<std::size_t>(cfg.robot_dim), 0.1);

  auto out1 = generate_step(window, pose, params, cfg);
  auto out2 = generate_step(window, pose, params, cfg);
  CHECK(out1.size() == static_cast<std::size_t>(cfg.robot_dim));
  CHECK(out1 == out2);

  JointLimits lim = JointLimits::defaults();
  for (std::size_t i = 0; i < out1.size(); ++i) {
    CHECK(out1[i] >= lim.intervals[i].lo);
    CHECK(out1[i] <= lim.intervals[i].hi);
  }
}

TEST_CASE("model checkpoint save and load round trip") {
  ModelConfig cfg = toy_config(Variant::kOriginalGan);
  Rng rng(13);
  ModelParams params = ModelParams::init(cfg, rng);
  const char* path = "model_test.ckpt";
  save_model(path, params, cfg);

  auto [loaded, loaded_cfg] = load_model(path);
  CHECK(loaded_cfg.variant == Variant::kOriginalGan);
  CHECK(loaded_cfg.future_offset == 0);
  CHECK(loaded_cfg.dec_hidden == cfg.dec_hidden);
  auto a = params.named_params();
  auto b = loaded.named_params();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].second->v == b[i].second->v);
  }
  std::remove(path);
}
