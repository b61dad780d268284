#include "sbg/gradcheck.hpp"

#include <chrono>
#include <cmath>

#include "sbg/train.hpp"

namespace sbg {

namespace {

constexpr double kStep = 1e-5;
constexpr double kSmallAnalytic = 1e-4;

ModelConfig toy_model_config() {
  ModelConfig cfg;
  cfg.m = 4;
  cfg.n = 2;
  cfg.future_offset = 3;
  cfg.enc_hidden = 8;
  cfg.dec_hidden = 12;
  cfg.disc_hidden = 12;
  cfg.z_dim = 4;
  cfg.user_dim = 5;
  cfg.robot_dim = 3;
  return cfg;
}

struct ErrorTally {
  double max_rel = 0.0;
  double max_abs_small = 0.0;
  std::size_t checked = 0;

  void account(double analytic, double fd) {
    ++checked;
    if (std::abs(analytic) < kSmallAnalytic) {
      max_abs_small = std::max(max_abs_small, std::abs(analytic - fd));
    } else {
      max_rel = std::max(max_rel, std::abs(analytic - fd) / std::abs(analytic));
    }
  }
};

}  // namespace

GradCheckResult run_gradcheck(std::uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();

  ModelConfig mcfg = toy_model_config();
  TrainConfig tcfg;
  tcfg.batch_size = 3;

  Rng rng(seed);
  ModelParams params = ModelParams::init(mcfg, rng);

  std::vector<TrainingPair> pairs(3);
  for (auto& p : pairs) {
    p.scenario = 1;
    p.user_window.resize(static_cast<std::size_t>(mcfg.m * mcfg.user_dim));
    p.seed.resize(static_cast<std::size_t>(mcfg.robot_dim));
    p.target.resize(static_cast<std::size_t>(mcfg.n * mcfg.robot_dim));
    p.future_target.resize(static_cast<std::size_t>(mcfg.n * mcfg.robot_dim));
    for (auto* block : {&p.user_window, &p.seed, &p.target, &p.future_target}) {
      for (double& v : *block) v = rng.uniform(-0.8, 0.8);
    }
  }
  std::vector<const TrainingPair*> batch_ptrs;
  for (const auto& p : pairs) batch_ptrs.push_back(&p);
  BatchTensors batch = make_batch(batch_ptrs, mcfg);

  ErrorTally tally;

  // --- generator loss against every parameter -----------------------------
  auto eval_loss_g = [&]() {
    ad::Tape tape;
    TapeBindings b = TapeBindings::bind(tape, params);
    return tape.scalar_value(build_generator_loss(tape, b, batch, mcfg, tcfg, nullptr));
  };
  {
    ad::Tape tape;
    TapeBindings b = TapeBindings::bind(tape, params);
    tape.backward(build_generator_loss(tape, b, batch, mcfg, tcfg, nullptr));

    auto named = params.named_params();
    std::vector<ad::NodeId> all_ids = b.generator_ids();
    for (ad::NodeId id : b.discriminator_ids()) all_ids.push_back(id);
    std::vector<ad::Tensor*> all_params = params.generator_params();
    for (ad::Tensor* t : params.discriminator_params()) all_params.push_back(t);

    for (std::size_t k = 0; k < all_params.size(); ++k) {
      ad::Tensor* tensor = all_params[k];
      const ad::Tensor& analytic = tape.grad(all_ids[k]);
      for (std::size_t i = 0; i < tensor->size(); ++i) {
        double saved = tensor->v[i];
        tensor->v[i] = saved + kStep;
        double up = eval_loss_g();
        tensor->v[i] = saved - kStep;
        double down = eval_loss_g();
        tensor->v[i] = saved;
        tally.account(analytic.v[i], (up - down) / (2.0 * kStep));
      }
    }
  }

  // --- discriminator loss, generated futures held fixed --------------------
  std::vector<ad::Tensor> gen_future;
  {
    ad::Tape scratch;
    TapeBindings sb = TapeBindings::bind(scratch, params);
    ad::NodeId z = encode(scratch, batch.window, sb, mcfg);
    RolloutResult roll = rollout_future(scratch, z, scratch.input(batch.seed), nullptr, 0.0,
                                        nullptr, sb, mcfg);
    for (ad::NodeId id : roll.future) gen_future.push_back(scratch.value(id));
  }
  auto eval_loss_d = [&]() {
    ad::Tape tape;
    TapeBindings b = TapeBindings::bind(tape, params);
    return tape.scalar_value(
        build_discriminator_loss(tape, b, batch, gen_future, mcfg, tcfg));
  };
  {
    ad::Tape tape;
    TapeBindings b = TapeBindings::bind(tape, params);
    tape.backward(build_discriminator_loss(tape, b, batch, gen_future, mcfg, tcfg));

    std::vector<ad::NodeId> ids = b.discriminator_ids();
    std::vector<ad::Tensor*> tensors = params.discriminator_params();
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      const ad::Tensor& analytic = tape.grad(ids[k]);
      for (std::size_t i = 0; i < tensors[k]->size(); ++i) {
        double saved = tensors[k]->v[i];
        tensors[k]->v[i] = saved + kStep;
        double up = eval_loss_d();
        tensors[k]->v[i] = saved - kStep;
        double down = eval_loss_d();
        tensors[k]->v[i] = saved;
        tally.account(analytic.v[i], (up - down) / (2.0 * kStep));
      }
    }
  }

  GradCheckResult result;
  result.max_rel_err = tally.max_rel;
  result.max_abs_err_small = tally.max_abs_small;
  result.elements_checked = tally.checked;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace sbg
