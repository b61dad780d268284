#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbg/autodiff.hpp"
#include "sbg/dataio.hpp"
#include "sbg/model.hpp"

namespace sbg {

struct TrainConfig {
  double alpha1 = 100.0;  // generator MSE weight
  double alpha2 = 10.0;   // generator adversarial weight
  double beta1 = 0.5;     // discriminator real weight
  double beta2 = 0.5;     // discriminator fake weight
  int batch_size = 100;
  double lr = 1e-5;
  double max_grad_norm = 1.0;
  int epochs = 300;
  double p_tf = 0.5;  // teacher-forcing probability, one draw per rollout
  std::uint64_t rng_seed = 0;
  std::uint64_t max_steps = 0;  // generator-update cap, 0 = none

  void validate() const;
};

// `key = value` lines, '#' comments; unknown keys are rejected
TrainConfig load_train_config(const std::string& path, TrainConfig base = {});

// batch laid out as tape-ready tensors
struct BatchTensors {
  std::vector<ad::Tensor> window;           // m x [B x user_dim]
  ad::Tensor seed;                          // [B x robot_dim]
  ad::Tensor gt_next;                       // [B x n*robot_dim]
  std::vector<ad::Tensor> gt_next_steps;    // n x [B x robot_dim]
  std::vector<ad::Tensor> gt_future_steps;  // n x [B x robot_dim]
};

BatchTensors make_batch(const std::vector<const TrainingPair*>& batch,
                        const ModelConfig& cfg);

// alpha1*MSE(gt, gen) + alpha2*BCE(disc_out, 1); pass kNoNode to omit the
// adversarial term (the no-gan variant)
ad::NodeId loss_g(ad::Tape& tape, const std::vector<ad::NodeId>& gen_next,
                  const ad::Tensor& gt_next, ad::NodeId disc_out_on_gen_future,
                  const TrainConfig& cfg);

// beta1*BCE(D(real), 1) + beta2*BCE(D(gen), 0)
ad::NodeId loss_d(ad::Tape& tape, ad::NodeId d_real, ad::NodeId d_gen,
                  const TrainConfig& cfg);

// full generator loss graph for one batch: encode, rollout (with the
// teacher-forcing draw when rng is given), MSE plus the adversarial term
ad::NodeId build_generator_loss(ad::Tape& tape, const TapeBindings& b,
                                const BatchTensors& batch, const ModelConfig& mcfg,
                                const TrainConfig& tcfg, Rng* tf_rng);

// discriminator loss with the generated futures supplied as data
ad::NodeId build_discriminator_loss(ad::Tape& tape, const TapeBindings& b,
                                    const BatchTensors& batch,
                                    const std::vector<ad::Tensor>& gen_future,
                                    const ModelConfig& mcfg, const TrainConfig& tcfg,
                                    ad::NodeId* d_real_out = nullptr,
                                    ad::NodeId* d_gen_out = nullptr);

struct StepStats {
  double loss_g = 0.0;
  double loss_d = 0.0;
  double d_real = 0.0;  // mean discriminator output on real futures
  double d_gen = 0.0;   // mean on generated futures
};

struct TrainReportRow {
  int epoch = 0;
  double mean_loss_g = 0.0;
  double mean_loss_d = 0.0;
  double mean_d_real = 0.0;
  double mean_d_gen = 0.0;
  std::uint64_t batches = 0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<TrainReportRow> rows;
};

void write_train_report(const TrainReport& report, const std::string& path);

class Trainer {
 public:
  Trainer(const ModelConfig& mcfg, const TrainConfig& tcfg);

  // restores parameters, optimizer state, RNG and epoch counter
  static Trainer resume(const std::string& checkpoint_path, const TrainConfig& tcfg);

  // one discriminator update then one generator update (generator only for
  // the no-gan variant)
  StepStats train_step(const std::vector<const TrainingPair*>& batch);

  // separate updates, exposed so the two parameter sets can be driven and
  // inspected independently
  StepStats discriminator_step(const BatchTensors& batch);
  double generator_step(const BatchTensors& batch);

  // seeded shuffling, fixed-size batches (final partial batch kept), one
  // checkpoint per epoch plus a `latest` marker; stops early at max_steps
  TrainReport train_loop(const std::vector<TrainingPair>& pairs,
                         const std::string& checkpoint_dir);

  void save_checkpoint(const std::string& path);

  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }
  const ModelConfig& model_config() const { return mcfg_; }
  const TrainConfig& train_config() const { return tcfg_; }
  std::uint64_t generator_steps() const { return gen_steps_; }
  int epochs_done() const { return epochs_done_; }

 private:
  Trainer(const ModelConfig& mcfg, const TrainConfig& tcfg, bool init_params);
  void apply_update(const std::vector<ad::NodeId>& ids, const std::vector<ad::Tensor*>& params,
                    ad::Tape& tape, ad::AdamState& opt);

  ModelConfig mcfg_;
  TrainConfig tcfg_;
  ModelParams params_;
  ad::AdamState adam_g_, adam_d_;
  Rng rng_;
  std::uint64_t gen_steps_ = 0;
  int epochs_done_ = 0;
};

}  // namespace sbg
