#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sbg/autodiff.hpp"
#include "sbg/checkpoint.hpp"
#include "sbg/skeleton.hpp"

namespace sbg {

enum class Variant {
  kFull,
  kOriginalGan,    // discriminator sees the next window instead of the future one
  kNoGan,          // generator only, MSE loss alone
  kUserPositions,  // user pose as raw 3D positions (27 values)
  kRobotVectors,   // robot pose as direction vectors (25 values)
};

const char* variant_name(Variant v);
std::optional<Variant> variant_from_name(const std::string& name);

struct ModelConfig {
  int m = 15;             // user window length
  int n = 5;              // generated window length
  int future_offset = 30; // l: future rollout distance (n + 25)
  int enc_hidden = 256;
  int dec_hidden = 512;
  int disc_hidden = 512;
  int z_dim = 128;
  int user_dim = 25;
  int robot_dim = 10;
  Variant variant = Variant::kFull;

  // forces the fields implied by the variant (l = 0, user_dim = 27, ...)
  void apply_variant();
  void validate() const;

  int decode_steps() const {
    return variant == Variant::kNoGan ? n : n + future_offset;
  }
};

struct ModelParams {
  ad::LstmWeights enc_lstm;
  ad::Tensor enc_out_w, enc_out_b;
  ad::Tensor bridge_h_w, bridge_h_b;
  ad::Tensor bridge_c_w, bridge_c_b;
  ad::LstmWeights dec_lstm;
  ad::Tensor dec_out_w, dec_out_b;
  ad::LstmWeights disc_lstm;
  ad::Tensor disc_out_w, disc_out_b;

  static ModelParams init(const ModelConfig& cfg, Rng& rng);

  // stable name -> tensor listing, checkpoint order
  std::vector<std::pair<std::string, ad::Tensor*>> named_params();
  std::vector<ad::Tensor*> generator_params();
  std::vector<ad::Tensor*> discriminator_params();
};

// node ids of every parameter registered on one tape
struct TapeBindings {
  ad::LstmNodeIds enc_lstm;
  ad::NodeId enc_out_w, enc_out_b;
  ad::NodeId bridge_h_w, bridge_h_b;
  ad::NodeId bridge_c_w, bridge_c_b;
  ad::LstmNodeIds dec_lstm;
  ad::NodeId dec_out_w, dec_out_b;
  ad::LstmNodeIds disc_lstm;
  ad::NodeId disc_out_w, disc_out_b;

  static TapeBindings bind(ad::Tape& tape, const ModelParams& params);
  std::vector<ad::NodeId> generator_ids() const;
  std::vector<ad::NodeId> discriminator_ids() const;
};

// window: m tensors of [batch x user_dim], time order -> z [batch x z_dim]
ad::NodeId encode(ad::Tape& tape, const std::vector<ad::Tensor>& window,
                  const TapeBindings& b, const ModelConfig& cfg);

// optional per-step capture for tests
struct DecodeTrace {
  std::vector<ad::NodeId> step_inputs;  // concatenated (pose, seed) per step
  std::vector<ad::NodeId> gate_preacts;
};

struct DecodeResult {
  std::vector<ad::NodeId> outputs;       // one [batch x robot_dim] node per step
  std::vector<std::uint8_t> forced_rows; // per-sequence teacher-forcing draws
  bool any_forced() const;
};

// Unrolls the decoder. Step 1 consumes the seed; later steps consume the
// previous output, except that sequences whose per-rollout Bernoulli(p_tf)
// draw fired are fed the aligned ground-truth pose instead (one draw per
// sequence in the batch, held for the whole rollout). The seed is
// concatenated onto every step input: that is the skip connection from the
// decoder input to all recurrent units.
DecodeResult decode(ad::Tape& tape, ad::NodeId z, ad::NodeId seed, int steps,
                    const std::vector<ad::Tensor>* tf_targets, double p_tf, Rng* rng,
                    const TapeBindings& b, const ModelConfig& cfg,
                    DecodeTrace* trace = nullptr);

struct RolloutResult {
  std::vector<ad::NodeId> next;    // steps 1..n
  std::vector<ad::NodeId> future;  // steps l+1..l+n
  std::vector<std::uint8_t> forced_rows;
};

// One n + l unrolling. `next` may be teacher forced; `future` is always
// free-running. With future_offset = 0 the two windows alias.
RolloutResult rollout_future(ad::Tape& tape, ad::NodeId z, ad::NodeId seed,
                             const std::vector<ad::Tensor>* tf_targets, double p_tf,
                             Rng* rng, const TapeBindings& b, const ModelConfig& cfg);

// probability in (0,1) that the n-pose sequence came from data
ad::NodeId discriminate(ad::Tape& tape, const std::vector<ad::NodeId>& seq,
                        const TapeBindings& b, const ModelConfig& cfg);

// Operational mode: encode the window, decode a single step, no teacher
// forcing; joint-angle outputs are clamped into limits.
std::vector<double> generate_step(const std::vector<double>& user_window,
                                  const std::vector<double>& current_pose,
                                  const ModelParams& params, const ModelConfig& cfg,
                                  const JointLimits& limits = JointLimits::defaults());

// model checkpoint: parameters plus the embedded config record
void save_model(const std::string& path, const ModelParams& params, const ModelConfig& cfg);
void write_model_records(CheckpointWriter& w, ModelParams& params, const ModelConfig& cfg);
void read_model_records(const CheckpointReader& r, ModelParams& params, ModelConfig& cfg);
std::pair<ModelParams, ModelConfig> load_model(const std::string& path);

}  // namespace sbg
