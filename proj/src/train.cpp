#include "sbg/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace sbg {

using ad::NodeId;
using ad::Tape;
using ad::Tensor;

void TrainConfig::validate() const {
  if (alpha1 < 0 || alpha2 < 0 || beta1 < 0 || beta2 < 0) {
    throw Error(ErrorCode::kInvalidArgument, "train config: loss weights must be >= 0");
  }
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "train config: batch_size must be >= 1");
  }
  if (epochs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "train config: epochs must be >= 1");
  }
  if (!(lr > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train config: lr must be > 0");
  }
  if (p_tf < 0.0 || p_tf > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "train config: p_tf must be in [0,1]");
  }
  if (!(max_grad_norm > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train config: max_grad_norm must be > 0");
  }
}

TrainConfig load_train_config(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, path + ": cannot open for reading");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string all = trim(line);
    if (all.empty()) continue;
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    char* end = nullptr;
    double num = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
      throw Error(ErrorCode::kParseError,
                  path + ":" + std::to_string(line_no) + ": bad value '" + value + "'");
    }
    if (key == "alpha1") base.alpha1 = num;
    else if (key == "alpha2") base.alpha2 = num;
    else if (key == "beta1") base.beta1 = num;
    else if (key == "beta2") base.beta2 = num;
    else if (key == "batch_size") base.batch_size = static_cast<int>(num);
    else if (key == "lr") base.lr = num;
    else if (key == "max_grad_norm") base.max_grad_norm = num;
    else if (key == "epochs") base.epochs = static_cast<int>(num);
    else if (key == "p_tf") base.p_tf = num;
    else if (key == "seed") base.rng_seed = static_cast<std::uint64_t>(num);
    else if (key == "max_steps") base.max_steps = static_cast<std::uint64_t>(num);
    else {
      throw Error(ErrorCode::kParseError,
                  path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  base.validate();
  return base;
}

BatchTensors make_batch(const std::vector<const TrainingPair*>& batch,
                        const ModelConfig& cfg) {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "make_batch: empty batch");
  }
  const std::size_t B = batch.size();
  const std::size_t ud = static_cast<std::size_t>(cfg.user_dim);
  const std::size_t rd = static_cast<std::size_t>(cfg.robot_dim);
  const std::size_t m = static_cast<std::size_t>(cfg.m);
  const std::size_t n = static_cast<std::size_t>(cfg.n);

  for (const TrainingPair* p : batch) {
    if (p->user_window.size() != m * ud || p->seed.size() != rd ||
        p->target.size() != n * rd || p->future_target.size() != n * rd) {
      throw Error(ErrorCode::kShapeMismatch,
                  "make_batch: pair dimensions disagree with the model config");
    }
  }

  BatchTensors out;
  out.window.assign(m, Tensor(B, ud));
  out.seed = Tensor(B, rd);
  out.gt_next = Tensor(B, n * rd);
  out.gt_next_steps.assign(n, Tensor(B, rd));
  out.gt_future_steps.assign(n, Tensor(B, rd));

  for (std::size_t i = 0; i < B; ++i) {
    const TrainingPair& p = *batch[i];
    for (std::size_t t = 0; t < m; ++t) {
      std::memcpy(out.window[t].v.data() + i * ud, p.user_window.data() + t * ud,
                  ud * sizeof(double));
    }
    std::memcpy(out.seed.v.data() + i * rd, p.seed.data(), rd * sizeof(double));
    std::memcpy(out.gt_next.v.data() + i * n * rd, p.target.data(), n * rd * sizeof(double));
    for (std::size_t s = 0; s < n; ++s) {
      std::memcpy(out.gt_next_steps[s].v.data() + i * rd, p.target.data() + s * rd,
                  rd * sizeof(double));
      std::memcpy(out.gt_future_steps[s].v.data() + i * rd, p.future_target.data() + s * rd,
                  rd * sizeof(double));
    }
  }
  return out;
}

NodeId loss_g(Tape& tape, const std::vector<NodeId>& gen_next, const Tensor& gt_next,
              NodeId disc_out_on_gen_future, const TrainConfig& cfg) {
  NodeId gen_concat = gen_next.front();
  for (std::size_t s = 1; s < gen_next.size(); ++s) {
    gen_concat = tape.concat_cols(gen_concat, gen_next[s]);
  }
  NodeId loss = tape.scale(tape.mse(tape.input(gt_next), gen_concat), cfg.alpha1);
  if (disc_out_on_gen_future != ad::kNoNode) {
    loss = tape.add(loss, tape.scale(tape.bce(disc_out_on_gen_future, 1.0), cfg.alpha2));
  }
  return loss;
}

NodeId loss_d(Tape& tape, NodeId d_real, NodeId d_gen, const TrainConfig& cfg) {
  return tape.add(tape.scale(tape.bce(d_real, 1.0), cfg.beta1),
                  tape.scale(tape.bce(d_gen, 0.0), cfg.beta2));
}

NodeId build_generator_loss(Tape& tape, const TapeBindings& b, const BatchTensors& batch,
                            const ModelConfig& mcfg, const TrainConfig& tcfg, Rng* tf_rng) {
  NodeId z = encode(tape, batch.window, b, mcfg);
  NodeId seed = tape.input(batch.seed);

  if (mcfg.variant == Variant::kNoGan) {
    DecodeResult dec = decode(tape, z, seed, mcfg.n, &batch.gt_next_steps, tcfg.p_tf, tf_rng,
                              b, mcfg);
    return loss_g(tape, dec.outputs, batch.gt_next, ad::kNoNode, tcfg);
  }

  RolloutResult roll =
      rollout_future(tape, z, seed, &batch.gt_next_steps, tcfg.p_tf, tf_rng, b, mcfg);
  NodeId d_gen = discriminate(tape, roll.future, b, mcfg);
  return loss_g(tape, roll.next, batch.gt_next, d_gen, tcfg);
}

NodeId build_discriminator_loss(Tape& tape, const TapeBindings& b, const BatchTensors& batch,
                                const std::vector<Tensor>& gen_future, const ModelConfig& mcfg,
                                const TrainConfig& tcfg, NodeId* d_real_out,
                                NodeId* d_gen_out) {
  std::vector<NodeId> real, gen;
  for (const Tensor& t : batch.gt_future_steps) real.push_back(tape.input(t));
  for (const Tensor& t : gen_future) gen.push_back(tape.input(t));
  NodeId d_real = discriminate(tape, real, b, mcfg);
  NodeId d_gen = discriminate(tape, gen, b, mcfg);
  if (d_real_out) *d_real_out = d_real;
  if (d_gen_out) *d_gen_out = d_gen;
  return loss_d(tape, d_real, d_gen, tcfg);
}

Trainer::Trainer(const ModelConfig& mcfg, const TrainConfig& tcfg, bool init_params)
    : mcfg_(mcfg), tcfg_(tcfg), rng_(tcfg.rng_seed) {
  mcfg_.validate();
  tcfg_.validate();
  if (init_params) params_ = ModelParams::init(mcfg_, rng_);
  adam_g_.cfg.lr = tcfg_.lr;
  adam_d_.cfg.lr = tcfg_.lr;
  adam_g_.init_like(params_.generator_params());
  adam_d_.init_like(params_.discriminator_params());
}

Trainer::Trainer(const ModelConfig& mcfg, const TrainConfig& tcfg)
    : Trainer(mcfg, tcfg, true) {}

void Trainer::apply_update(const std::vector<NodeId>& ids,
                           const std::vector<Tensor*>& params, Tape& tape,
                           ad::AdamState& opt) {
  std::vector<Tensor> grads;
  grads.reserve(ids.size());
  for (NodeId id : ids) grads.push_back(tape.grad(id));
  ad::clip_grad_norm(grads, tcfg_.max_grad_norm);

  double post = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.v) post += v * v;
  }
  if (std::sqrt(post) > tcfg_.max_grad_norm + 1e-12) {
    throw Error(ErrorCode::kGraphError, "gradient norm above the clip bound after clipping");
  }
  ad::adam_step(params, grads, opt);
}

double Trainer::generator_step(const BatchTensors& batch) {
  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params_);
  NodeId loss = build_generator_loss(tape, b, batch, mcfg_, tcfg_, &rng_);
  tape.backward(loss);
  apply_update(b.generator_ids(), params_.generator_params(), tape, adam_g_);
  ++gen_steps_;
  return tape.scalar_value(loss);
}

StepStats Trainer::discriminator_step(const BatchTensors& batch) {
  // free-running forward pass of the current generator supplies the fakes
  std::vector<Tensor> gen_future;
  {
    Tape scratch;
    TapeBindings sb = TapeBindings::bind(scratch, params_);
    NodeId z = encode(scratch, batch.window, sb, mcfg_);
    RolloutResult roll = rollout_future(scratch, z, scratch.input(batch.seed), nullptr, 0.0,
                                        nullptr, sb, mcfg_);
    for (NodeId id : roll.future) gen_future.push_back(scratch.value(id));
  }

  Tape tape;
  TapeBindings b = TapeBindings::bind(tape, params_);
  NodeId d_real = ad::kNoNode, d_gen = ad::kNoNode;
  NodeId loss =
      build_discriminator_loss(tape, b, batch, gen_future, mcfg_, tcfg_, &d_real, &d_gen);
  tape.backward(loss);
  apply_update(b.discriminator_ids(), params_.discriminator_params(), tape, adam_d_);

  StepStats stats;
  stats.loss_d = tape.scalar_value(loss);
  auto mean = [&](NodeId id) {
    const Tensor& t = tape.value(id);
    double acc = 0.0;
    for (double v : t.v) acc += v;
    return acc / static_cast<double>(t.size());
  };
  stats.d_real = mean(d_real);
  stats.d_gen = mean(d_gen);
  return stats;
}

StepStats Trainer::train_step(const std::vector<const TrainingPair*>& batch) {
  BatchTensors tensors = make_batch(batch, mcfg_);
  StepStats stats;
  if (mcfg_.variant != Variant::kNoGan) {
    stats = discriminator_step(tensors);
  }
  stats.loss_g = generator_step(tensors);
  return stats;
}

TrainReport Trainer::train_loop(const std::vector<TrainingPair>& pairs,
                                const std::string& checkpoint_dir) {
  if (pairs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "train_loop: no training pairs");
  }
  std::error_code ec;
  fs::create_directories(checkpoint_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, checkpoint_dir + ": " + ec.message());

  TrainReport report;
  bool step_cap_hit = tcfg_.max_steps > 0 && gen_steps_ >= tcfg_.max_steps;

  for (int epoch = epochs_done_ + 1; epoch <= tcfg_.epochs && !step_cap_hit; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng_.shuffle(order);

    TrainReportRow row;
    row.epoch = epoch;
    std::size_t samples_seen = 0;

    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(tcfg_.batch_size)) {
      if (tcfg_.max_steps > 0 && gen_steps_ >= tcfg_.max_steps) {
        step_cap_hit = true;
        break;
      }
      std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(tcfg_.batch_size));
      std::vector<const TrainingPair*> batch;
      batch.reserve(end - at);
      for (std::size_t i = at; i < end; ++i) batch.push_back(&pairs[order[i]]);

      StepStats stats = train_step(batch);
      double w = static_cast<double>(batch.size());
      row.mean_loss_g += stats.loss_g * w;
      row.mean_loss_d += stats.loss_d * w;
      row.mean_d_real += stats.d_real * w;
      row.mean_d_gen += stats.d_gen * w;
      samples_seen += batch.size();
      row.batches += 1;
    }

    if (samples_seen > 0) {
      double w = static_cast<double>(samples_seen);
      row.mean_loss_g /= w;
      row.mean_loss_d /= w;
      row.mean_d_real /= w;
      row.mean_d_gen /= w;
    }
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    epochs_done_ = epoch;
    std::string name = "epoch_" + std::to_string(epoch) + ".ckpt";
    save_checkpoint((fs::path(checkpoint_dir) / name).string());
    {
      std::ofstream latest(fs::path(checkpoint_dir) / "latest", std::ios::trunc);
      latest << name << "\n";
      if (!latest) {
        throw Error(ErrorCode::kIoError, checkpoint_dir + "/latest: write failed");
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

void Trainer::save_checkpoint(const std::string& path) {
  CheckpointWriter w(path);
  write_model_records(w, params_, mcfg_);
  w.put_u64("trainer.epoch", static_cast<std::uint64_t>(epochs_done_));
  w.put_u64("trainer.gen_steps", gen_steps_);
  w.put_u64("trainer.rng", rng_.state());
  w.put_u64("adam_g.step", adam_g_.step);
  w.put_u64("adam_d.step", adam_d_.step);
  for (std::size_t i = 0; i < adam_g_.m.size(); ++i) {
    w.put_tensor("adam_g.m." + std::to_string(i), adam_g_.m[i]);
    w.put_tensor("adam_g.v." + std::to_string(i), adam_g_.v[i]);
  }
  for (std::size_t i = 0; i < adam_d_.m.size(); ++i) {
    w.put_tensor("adam_d.m." + std::to_string(i), adam_d_.m[i]);
    w.put_tensor("adam_d.v." + std::to_string(i), adam_d_.v[i]);
  }
  w.close();
}

Trainer Trainer::resume(const std::string& checkpoint_path, const TrainConfig& tcfg) {
  CheckpointReader r(checkpoint_path);
  ModelConfig mcfg;
  ModelParams params;
  read_model_records(r, params, mcfg);

  Trainer t(mcfg, tcfg, false);
  t.params_ = std::move(params);
  t.adam_g_.init_like(t.params_.generator_params());
  t.adam_d_.init_like(t.params_.discriminator_params());
  t.epochs_done_ = static_cast<int>(r.get_u64("trainer.epoch"));
  t.gen_steps_ = r.get_u64("trainer.gen_steps");
  t.rng_.set_state(r.get_u64("trainer.rng"));
  t.adam_g_.step = r.get_u64("adam_g.step");
  t.adam_d_.step = r.get_u64("adam_d.step");
  for (std::size_t i = 0; i < t.adam_g_.m.size(); ++i) {
    t.adam_g_.m[i] = r.get_tensor("adam_g.m." + std::to_string(i));
    t.adam_g_.v[i] = r.get_tensor("adam_g.v." + std::to_string(i));
  }
  for (std::size_t i = 0; i < t.adam_d_.m.size(); ++i) {
    t.adam_d_.m[i] = r.get_tensor("adam_d.m." + std::to_string(i));
    t.adam_d_.v[i] = r.get_tensor("adam_d.v." + std::to_string(i));
  }
  return t;
}

void write_train_report(const TrainReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path + ": cannot open for writing");
  out << "epoch,loss_g,loss_d,d_real,d_gen,batches,seconds\n";
  char buf[200];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%llu,%.3f\n", r.epoch,
                  r.mean_loss_g, r.mean_loss_d, r.mean_d_real, r.mean_d_gen,
                  static_cast<unsigned long long>(r.batches), r.seconds);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::kIoError, path + ": write failed");
}

}  // namespace sbg
