#include "sbg/model.hpp"

#include <cstring>

namespace sbg {

using ad::NodeId;
using ad::Tape;
using ad::Tensor;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kFull:          return "full";
    case Variant::kOriginalGan:   return "original-gan";
    case Variant::kNoGan:         return "no-gan";
    case Variant::kUserPositions: return "user-positions";
    case Variant::kRobotVectors:  return "robot-vectors";
  }
  return "full";
}

std::optional<Variant> variant_from_name(const std::string& name) {
  for (Variant v : {Variant::kFull, Variant::kOriginalGan, Variant::kNoGan,
                    Variant::kUserPositions, Variant::kRobotVectors}) {
    if (name == variant_name(v)) return v;
  }
  return std::nullopt;
}

void ModelConfig::apply_variant() {
  switch (variant) {
    case Variant::kOriginalGan:
      future_offset = 0;
      break;
    case Variant::kUserPositions:
      user_dim = 27;
      break;
    case Variant::kRobotVectors:
      robot_dim = 25;
      break;
    default:
      break;
  }
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("model config: ") + name + " must be >= 1");
    }
  };
  positive(m, "m");
  positive(n, "n");
  positive(enc_hidden, "enc_hidden");
  positive(dec_hidden, "dec_hidden");
  positive(disc_hidden, "disc_hidden");
  positive(z_dim, "z_dim");
  positive(user_dim, "user_dim");
  positive(robot_dim, "robot_dim");
  if (future_offset < 0) {
    throw Error(ErrorCode::kInvalidArgument, "model config: l must be >= 0");
  }
  if (variant == Variant::kOriginalGan && future_offset != 0) {
    throw Error(ErrorCode::kInvalidArgument, "model config: original-gan requires l = 0");
  }
  if (variant == Variant::kUserPositions && user_dim != 27) {
    throw Error(ErrorCode::kInvalidArgument, "model config: user-positions requires user_dim 27");
  }
  if (variant == Variant::kRobotVectors && robot_dim != 25) {
    throw Error(ErrorCode::kInvalidArgument, "model config: robot-vectors requires robot_dim 25");
  }
}

ModelParams ModelParams::init(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ModelParams p;
  std::size_t user_dim = static_cast<std::size_t>(cfg.user_dim);
  std::size_t robot_dim = static_cast<std::size_t>(cfg.robot_dim);
  std::size_t enc_h = static_cast<std::size_t>(cfg.enc_hidden);
  std::size_t dec_h = static_cast<std::size_t>(cfg.dec_hidden);
  std::size_t disc_h = static_cast<std::size_t>(cfg.disc_hidden);
  std::size_t z = static_cast<std::size_t>(cfg.z_dim);

  p.enc_lstm = ad::lstm_init(user_dim, enc_h, rng);
  p.enc_out_w = ad::uniform_init(z, enc_h, rng);
  p.enc_out_b = Tensor(1, z);

  p.bridge_h_w = ad::uniform_init(dec_h, z, rng);
  p.bridge_h_b = Tensor(1, dec_h);
  p.bridge_c_w = ad::uniform_init(dec_h, z, rng);
  p.bridge_c_b = Tensor(1, dec_h);

  // decoder input = previous pose concatenated with the seed pose
  p.dec_lstm = ad::lstm_init(2 * robot_dim, dec_h, rng);
  p.dec_out_w = ad::uniform_init(robot_dim, dec_h, rng);
  p.dec_out_b = Tensor(1, robot_dim);

  p.disc_lstm = ad::lstm_init(robot_dim, disc_h, rng);
  p.disc_out_w = ad::uniform_init(1, disc_h, rng);
  p.disc_out_b = Tensor(1, 1);
  return p;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named_params() {
  return {
      {"enc.lstm.w_ih", &enc_lstm.w_ih},   {"enc.lstm.w_hh", &enc_lstm.w_hh},
      {"enc.lstm.bias", &enc_lstm.bias},   {"enc.out.w", &enc_out_w},
      {"enc.out.b", &enc_out_b},           {"bridge.h.w", &bridge_h_w},
      {"bridge.h.b", &bridge_h_b},         {"bridge.c.w", &bridge_c_w},
      {"bridge.c.b", &bridge_c_b},         {"dec.lstm.w_ih", &dec_lstm.w_ih},
      {"dec.lstm.w_hh", &dec_lstm.w_hh},   {"dec.lstm.bias", &dec_lstm.bias},
      {"dec.out.w", &dec_out_w},           {"dec.out.b", &dec_out_b},
      {"disc.lstm.w_ih", &disc_lstm.w_ih}, {"disc.lstm.w_hh", &disc_lstm.w_hh},
      {"disc.lstm.bias", &disc_lstm.bias}, {"disc.out.w", &disc_out_w},
      {"disc.out.b", &disc_out_b},
  };
}

std::vector<Tensor*> ModelParams::generator_params() {
  return {&enc_lstm.w_ih, &enc_lstm.w_hh, &enc_lstm.bias, &enc_out_w, &enc_out_b,
          &bridge_h_w,    &bridge_h_b,    &bridge_c_w,    &bridge_c_b,
          &dec_lstm.w_ih, &dec_lstm.w_hh, &dec_lstm.bias, &dec_out_w, &dec_out_b};
}

std::vector<Tensor*> ModelParams::discriminator_params() {
  return {&disc_lstm.w_ih, &disc_lstm.w_hh, &disc_lstm.bias, &disc_out_w, &disc_out_b};
}

TapeBindings TapeBindings::bind(Tape& tape, const ModelParams& p) {
  TapeBindings b;
  b.enc_lstm = ad::register_lstm(tape, p.enc_lstm);
  b.enc_out_w = tape.param(p.enc_out_w);
  b.enc_out_b = tape.param(p.enc_out_b);
  b.bridge_h_w = tape.param(p.bridge_h_w);
  b.bridge_h_b = tape.param(p.bridge_h_b);
  b.bridge_c_w = tape.param(p.bridge_c_w);
  b.bridge_c_b = tape.param(p.bridge_c_b);
  b.dec_lstm = ad::register_lstm(tape, p.dec_lstm);
  b.dec_out_w = tape.param(p.dec_out_w);
  b.dec_out_b = tape.param(p.dec_out_b);
  b.disc_lstm = ad::register_lstm(tape, p.disc_lstm);
  b.disc_out_w = tape.param(p.disc_out_w);
  b.disc_out_b = tape.param(p.disc_out_b);
  return b;
}

std::vector<NodeId> TapeBindings::generator_ids() const {
  return {enc_lstm.w_ih, enc_lstm.w_hh, enc_lstm.bias, enc_out_w, enc_out_b,
          bridge_h_w,    bridge_h_b,    bridge_c_w,    bridge_c_b,
          dec_lstm.w_ih, dec_lstm.w_hh, dec_lstm.bias, dec_out_w, dec_out_b};
}

std::vector<NodeId> TapeBindings::discriminator_ids() const {
  return {disc_lstm.w_ih, disc_lstm.w_hh, disc_lstm.bias, disc_out_w, disc_out_b};
}

NodeId encode(Tape& tape, const std::vector<Tensor>& window, const TapeBindings& b,
              const ModelConfig& cfg) {
  if (window.size() != static_cast<std::size_t>(cfg.m)) {
    throw Error(ErrorCode::kShapeMismatch,
                "encode: window length " + std::to_string(window.size()) + ", expected m = " +
                    std::to_string(cfg.m));
  }
  std::size_t batch = window.front().rows;
  std::size_t hidden = static_cast<std::size_t>(cfg.enc_hidden);
  ad::LstmState state{tape.input(Tensor(batch, hidden)), tape.input(Tensor(batch, hidden))};
  for (const Tensor& x : window) {
    state = ad::lstm_cell(tape, tape.input(x), state, b.enc_lstm, hidden);
  }
  return tape.linear(state.h, b.enc_out_w, b.enc_out_b);
}

bool DecodeResult::any_forced() const {
  for (std::uint8_t f : forced_rows) {
    if (f) return true;
  }
  return false;
}

DecodeResult decode(Tape& tape, NodeId z, NodeId seed, int steps,
                    const std::vector<Tensor>* tf_targets, double p_tf, Rng* rng,
                    const TapeBindings& b, const ModelConfig& cfg, DecodeTrace* trace) {
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "decode: steps must be >= 1");
  std::size_t hidden = static_cast<std::size_t>(cfg.dec_hidden);
  std::size_t batch = tape.value(seed).rows;
  std::size_t rd = static_cast<std::size_t>(cfg.robot_dim);

  DecodeResult result;
  result.forced_rows.assign(batch, 0);
  if (tf_targets != nullptr && rng != nullptr && p_tf > 0.0) {
    for (std::size_t i = 0; i < batch; ++i) {
      result.forced_rows[i] = rng->bernoulli(p_tf) ? 1 : 0;
    }
  }

  // row masks for mixing forced rows with free-running rows
  NodeId forced_mask = ad::kNoNode, free_mask = ad::kNoNode;
  if (result.any_forced()) {
    Tensor mask(batch, rd), inverse(batch, rd);
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t j = 0; j < rd; ++j) {
        mask.at(i, j) = result.forced_rows[i] ? 1.0 : 0.0;
        inverse.at(i, j) = result.forced_rows[i] ? 0.0 : 1.0;
      }
    }
    forced_mask = tape.input(mask);
    free_mask = tape.input(inverse);
  }

  ad::LstmState state;
  state.h = tape.linear(z, b.bridge_h_w, b.bridge_h_b);
  state.c = tape.linear(z, b.bridge_c_w, b.bridge_c_b);

  result.outputs.reserve(static_cast<std::size_t>(steps));
  for (int step = 0; step < steps; ++step) {
    NodeId pose;
    if (step == 0) {
      pose = seed;
    } else if (forced_mask != ad::kNoNode &&
               static_cast<std::size_t>(step - 1) < tf_targets->size()) {
      NodeId target = tape.input((*tf_targets)[static_cast<std::size_t>(step - 1)]);
      pose = tape.add(tape.mul(forced_mask, target),
                      tape.mul(free_mask, result.outputs.back()));
    } else {
      pose = result.outputs.back();
    }
    NodeId x = tape.concat_cols(pose, seed);
    NodeId gates = ad::kNoNode;
    state = ad::lstm_cell(tape, x, state, b.dec_lstm, hidden, &gates);
    result.outputs.push_back(tape.linear(state.h, b.dec_out_w, b.dec_out_b));
    if (trace) {
      trace->step_inputs.push_back(x);
      trace->gate_preacts.push_back(gates);
    }
  }
  return result;
}

RolloutResult rollout_future(Tape& tape, NodeId z, NodeId seed,
                             const std::vector<Tensor>* tf_targets, double p_tf, Rng* rng,
                             const TapeBindings& b, const ModelConfig& cfg) {
  if (cfg.variant == Variant::kNoGan) {
    throw Error(ErrorCode::kInvalidArgument, "rollout_future: no-gan has no future rollout");
  }
  int steps = cfg.n + cfg.future_offset;
  DecodeResult dec = decode(tape, z, seed, steps, tf_targets, p_tf, rng, b, cfg);
  RolloutResult out;
  out.forced_rows = std::move(dec.forced_rows);
  out.next.assign(dec.outputs.begin(), dec.outputs.begin() + cfg.n);
  out.future.assign(dec.outputs.begin() + cfg.future_offset,
                    dec.outputs.begin() + cfg.future_offset + cfg.n);
  return out;
}

NodeId discriminate(Tape& tape, const std::vector<NodeId>& seq, const TapeBindings& b,
                    const ModelConfig& cfg) {
  if (seq.size() != static_cast<std::size_t>(cfg.n)) {
    throw Error(ErrorCode::kShapeMismatch,
                "discriminate: sequence length " + std::to_string(seq.size()) +
                    ", expected n = " + std::to_string(cfg.n));
  }
  std::size_t batch = tape.value(seq.front()).rows;
  std::size_t hidden = static_cast<std::size_t>(cfg.disc_hidden);
  ad::LstmState state{tape.input(Tensor(batch, hidden)), tape.input(Tensor(batch, hidden))};
  for (NodeId pose : seq) {
    state = ad::lstm_cell(tape, pose, state, b.disc_lstm, hidden);
  }
  return tape.sigmoid(tape.linear(state.h, b.disc_out_w, b.disc_out_b));
}

std::vector<double> generate_step(const std::vector<double>& user_window,
                                  const std::vector<double>& current_pose,
                                  const ModelParams& params, const ModelConfig& cfg,
                                  const JointLimits& limits) {
  if (user_window.size() != static_cast<std::size_t>(cfg.m * cfg.user_dim)) {
    throw Error(ErrorCode::kShapeMismatch, "generate_step: window size mismatch");
  }
  if (current_pose.size() != static_cast<std::size_t>(cfg.robot_dim)) {
    throw Error(ErrorCode::kShapeMismatch, "generate_step: pose size mismatch");
  }

  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params);
  std::vector<Tensor> window;
  window.reserve(static_cast<std::size_t>(cfg.m));
  for (int t = 0; t < cfg.m; ++t) {
    Tensor x(1, static_cast<std::size_t>(cfg.user_dim));
    std::memcpy(x.v.data(), user_window.data() + static_cast<std::size_t>(t) * cfg.user_dim,
                sizeof(double) * static_cast<std::size_t>(cfg.user_dim));
    window.push_back(std::move(x));
  }
  Tensor seed(1, static_cast<std::size_t>(cfg.robot_dim));
  seed.v = current_pose;

  NodeId z = encode(tape, window, b, cfg);
  DecodeResult dec = decode(tape, z, tape.input(seed), 1, nullptr, 0.0, nullptr, b, cfg);
  std::vector<double> pose = tape.value(dec.outputs[0]).v;

  if (cfg.robot_dim == kAngleCount) {
    RobotJointAngles a;
    std::copy(pose.begin(), pose.end(), a.angles.begin());
    a = clamp_joint_limits(a, limits);
    std::copy(a.angles.begin(), a.angles.end(), pose.begin());
  }
  return pose;
}

void write_model_records(CheckpointWriter& w, ModelParams& params, const ModelConfig& cfg) {
  w.put_string("config.variant", variant_name(cfg.variant));
  w.put_u64("config.m", static_cast<std::uint64_t>(cfg.m));
  w.put_u64("config.n", static_cast<std::uint64_t>(cfg.n));
  w.put_u64("config.l", static_cast<std::uint64_t>(cfg.future_offset));
  w.put_u64("config.enc_hidden", static_cast<std::uint64_t>(cfg.enc_hidden));
  w.put_u64("config.dec_hidden", static_cast<std::uint64_t>(cfg.dec_hidden));
  w.put_u64("config.disc_hidden", static_cast<std::uint64_t>(cfg.disc_hidden));
  w.put_u64("config.z_dim", static_cast<std::uint64_t>(cfg.z_dim));
  w.put_u64("config.user_dim", static_cast<std::uint64_t>(cfg.user_dim));
  w.put_u64("config.robot_dim", static_cast<std::uint64_t>(cfg.robot_dim));
  for (auto& [name, tensor] : params.named_params()) {
    w.put_tensor("param." + name, *tensor);
  }
}

void read_model_records(const CheckpointReader& r, ModelParams& params, ModelConfig& cfg) {
  auto variant = variant_from_name(r.get_string("config.variant"));
  if (!variant) throw Error(ErrorCode::kParseError, "checkpoint: unknown variant");
  cfg.variant = *variant;
  cfg.m = static_cast<int>(r.get_u64("config.m"));
  cfg.n = static_cast<int>(r.get_u64("config.n"));
  cfg.future_offset = static_cast<int>(r.get_u64("config.l"));
  cfg.enc_hidden = static_cast<int>(r.get_u64("config.enc_hidden"));
  cfg.dec_hidden = static_cast<int>(r.get_u64("config.dec_hidden"));
  cfg.disc_hidden = static_cast<int>(r.get_u64("config.disc_hidden"));
  cfg.z_dim = static_cast<int>(r.get_u64("config.z_dim"));
  cfg.user_dim = static_cast<int>(r.get_u64("config.user_dim"));
  cfg.robot_dim = static_cast<int>(r.get_u64("config.robot_dim"));
  cfg.validate();

  Rng dummy(0);
  params = ModelParams::init(cfg, dummy);
  for (auto& [name, tensor] : params.named_params()) {
    const ad::Tensor& stored = r.get_tensor("param." + name);
    if (!tensor->same_shape(stored)) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint: shape mismatch for " + name);
    }
    *tensor = stored;
  }
}

void save_model(const std::string& path, const ModelParams& params, const ModelConfig& cfg) {
  CheckpointWriter w(path);
  write_model_records(w, const_cast<ModelParams&>(params), cfg);
  w.close();
}

std::pair<ModelParams, ModelConfig> load_model(const std::string& path) {
  CheckpointReader r(path);
  ModelConfig cfg;
  ModelParams params;
  read_model_records(r, params, cfg);
  return {std::move(params), cfg};
}

}  // namespace sbg
