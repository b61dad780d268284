#include "sbg.h"

#include <cstring>
#include <fstream>
#include <memory>

#include "sbg/dataio.hpp"
#include "sbg/eval.hpp"
#include "sbg/gradcheck.hpp"
#include "sbg/model.hpp"
#include "sbg/train.hpp"

struct sbg_dataset {
  std::vector<sbg::InteractionSample> samples;
};

struct sbg_model {
  sbg::ModelParams params;
  sbg::ModelConfig cfg;
};

namespace {

thread_local std::string g_error_message;
thread_local std::string g_error_name;

void clear_error() {
  g_error_message.clear();
  g_error_name.clear();
}

int error_class(sbg::ErrorCode code) {
  switch (code) {
    case sbg::ErrorCode::kIoError:
    case sbg::ErrorCode::kParseError:
      return SBG_ERR_IO;
    default:
      return SBG_ERR_VALIDATION;
  }
}

template <typename F>
int wrap(F&& f) {
  clear_error();
  try {
    f();
    return SBG_OK;
  } catch (const sbg::Error& e) {
    g_error_message = e.what();
    g_error_name = sbg::error_code_name(e.code());
    return error_class(e.code());
  } catch (const std::exception& e) {
    g_error_message = e.what();
    g_error_name = "INTERNAL";
    return SBG_ERR_VALIDATION;
  }
}

sbg::ModelConfig to_model_config(const sbg_model_config& c) {
  sbg::ModelConfig cfg;
  cfg.m = c.m;
  cfg.n = c.n;
  cfg.future_offset = c.l;
  cfg.enc_hidden = c.enc_hidden;
  cfg.dec_hidden = c.dec_hidden;
  cfg.disc_hidden = c.disc_hidden;
  cfg.z_dim = c.z_dim;
  cfg.user_dim = c.user_dim;
  cfg.robot_dim = c.robot_dim;
  auto variant = sbg::variant_from_name(c.variant);
  if (!variant) {
    throw sbg::Error(sbg::ErrorCode::kInvalidArgument,
                     std::string("unknown variant '") + c.variant + "'");
  }
  cfg.variant = *variant;
  return cfg;
}

sbg::TrainConfig to_train_config(const sbg_train_config& c) {
  sbg::TrainConfig cfg;
  cfg.alpha1 = c.alpha1;
  cfg.alpha2 = c.alpha2;
  cfg.beta1 = c.beta1;
  cfg.beta2 = c.beta2;
  cfg.batch_size = c.batch_size;
  cfg.lr = c.lr;
  cfg.max_grad_norm = c.max_grad_norm;
  cfg.epochs = c.epochs;
  cfg.p_tf = c.p_tf;
  cfg.rng_seed = c.rng_seed;
  cfg.max_steps = c.max_steps;
  return cfg;
}

void from_train_config(const sbg::TrainConfig& cfg, sbg_train_config* out) {
  out->alpha1 = cfg.alpha1;
  out->alpha2 = cfg.alpha2;
  out->beta1 = cfg.beta1;
  out->beta2 = cfg.beta2;
  out->batch_size = cfg.batch_size;
  out->lr = cfg.lr;
  out->max_grad_norm = cfg.max_grad_norm;
  out->epochs = cfg.epochs;
  out->p_tf = cfg.p_tf;
  out->rng_seed = cfg.rng_seed;
  out->max_steps = cfg.max_steps;
}

std::vector<sbg::InteractionSample> at_10hz(const std::vector<sbg::InteractionSample>& in) {
  std::vector<sbg::InteractionSample> out;
  out.reserve(in.size());
  for (const auto& s : in) {
    out.push_back(s.fps == 10.0 ? s : sbg::downsample(s, 10.0));
  }
  return out;
}

std::vector<sbg::InteractionSample> select_split(
    const std::vector<sbg::InteractionSample>& samples, const char* manifest_path,
    sbg::Split split) {
  if (!manifest_path) return samples;
  sbg::DatasetManifest manifest = sbg::read_manifest(manifest_path);
  std::vector<sbg::InteractionSample> out;
  for (const auto& s : samples) {
    auto assigned = manifest.lookup(s.sample_id);
    if (assigned && *assigned == split) out.push_back(s);
  }
  if (out.empty()) {
    throw sbg::Error(sbg::ErrorCode::kInvalidArgument,
                     std::string("manifest leaves no samples in the ") +
                         (split == sbg::Split::kTrain ? "train" : "test") + " split");
  }
  return out;
}

const char* kAngleColumns =
    "hip_pitch,head_pitch,l_shoulder_pitch,l_shoulder_roll,l_elbow_yaw,l_elbow_roll,"
    "r_shoulder_pitch,r_shoulder_roll,r_elbow_yaw,r_elbow_roll";

}  // namespace

extern "C" {

const char* sbg_last_error(void) { return g_error_message.c_str(); }
const char* sbg_last_error_name(void) { return g_error_name.c_str(); }
const char* sbg_version(void) { return "0.1.0"; }

void sbg_synth_config_defaults(sbg_synth_config* cfg) {
  sbg::SynthConfig d;
  cfg->rng_seed = d.rng_seed;
  cfg->samples_per_scenario = d.samples_per_scenario;
  cfg->min_frames = d.min_frames;
  cfg->max_frames = d.max_frames;
  cfg->amplitude_jitter = d.amplitude_jitter;
  cfg->offset_jitter = d.offset_jitter;
  cfg->noise_std = d.noise_std;
}

void sbg_model_config_defaults(sbg_model_config* cfg) {
  sbg::ModelConfig d;
  cfg->m = d.m;
  cfg->n = d.n;
  cfg->l = d.future_offset;
  cfg->enc_hidden = d.enc_hidden;
  cfg->dec_hidden = d.dec_hidden;
  cfg->disc_hidden = d.disc_hidden;
  cfg->z_dim = d.z_dim;
  cfg->user_dim = d.user_dim;
  cfg->robot_dim = d.robot_dim;
  std::snprintf(cfg->variant, sizeof(cfg->variant), "%s", sbg::variant_name(d.variant));
}

void sbg_train_config_defaults(sbg_train_config* cfg) {
  from_train_config(sbg::TrainConfig{}, cfg);
}

int sbg_train_config_load(const char* path, sbg_train_config* cfg) {
  return wrap([&] {
    sbg::TrainConfig merged = sbg::load_train_config(path, to_train_config(*cfg));
    from_train_config(merged, cfg);
  });
}

int sbg_model_config_apply_variant(sbg_model_config* cfg) {
  return wrap([&] {
    sbg::ModelConfig full = to_model_config(*cfg);
    full.apply_variant();
    full.validate();
    cfg->l = full.future_offset;
    cfg->user_dim = full.user_dim;
    cfg->robot_dim = full.robot_dim;
  });
}

int sbg_dataset_synthesize(const sbg_synth_config* cfg, sbg_dataset** out) {
  return wrap([&] {
    sbg::SynthConfig scfg;
    scfg.rng_seed = cfg->rng_seed;
    scfg.samples_per_scenario = cfg->samples_per_scenario;
    scfg.min_frames = cfg->min_frames;
    scfg.max_frames = cfg->max_frames;
    scfg.amplitude_jitter = cfg->amplitude_jitter;
    scfg.offset_jitter = cfg->offset_jitter;
    scfg.noise_std = cfg->noise_std;
    auto ds = std::make_unique<sbg_dataset>();
    ds->samples = sbg::synthesize_dataset(scfg);
    *out = ds.release();
  });
}

int sbg_dataset_load_dir(const char* dir, sbg_dataset** out) {
  return wrap([&] {
    auto ds = std::make_unique<sbg_dataset>();
    ds->samples = sbg::load_dataset_dir(dir);
    *out = ds.release();
  });
}

int sbg_dataset_load_file(const char* path, const int32_t* joint_map9, sbg_dataset** out) {
  return wrap([&] {
    std::array<int, 9> map{};
    if (joint_map9) {
      for (int i = 0; i < 9; ++i) map[i] = joint_map9[i];
    }
    auto ds = std::make_unique<sbg_dataset>();
    ds->samples.push_back(
        sbg::import_skeleton_file(path, joint_map9 ? &map : nullptr));
    *out = ds.release();
  });
}

int sbg_dataset_save_dir(const sbg_dataset* ds, const char* dir) {
  return wrap([&] { sbg::save_dataset_dir(ds->samples, dir); });
}

int sbg_dataset_downsample(sbg_dataset* ds, double dst_hz) {
  return wrap([&] {
    for (auto& s : ds->samples) s = sbg::downsample(s, dst_hz);
  });
}

size_t sbg_dataset_size(const sbg_dataset* ds) { return ds ? ds->samples.size() : 0; }

void sbg_dataset_free(sbg_dataset* ds) { delete ds; }

int sbg_extract_pairs_to_file(const sbg_dataset* ds, const sbg_model_config* cfg,
                              double d_max, const char* out_path) {
  return wrap([&] {
    sbg::ModelConfig mcfg = to_model_config(*cfg);
    sbg::ExtractConfig ecfg;
    ecfg.m = mcfg.m;
    ecfg.n = mcfg.n;
    ecfg.future_offset = mcfg.future_offset;
    ecfg.norm.d_max = d_max;
    ecfg.user_repr = mcfg.user_dim == 27 ? sbg::UserRepr::kPositions3d
                                         : sbg::UserRepr::kDirectionVectors;
    ecfg.robot_repr = mcfg.robot_dim == 25 ? sbg::RobotRepr::kDirectionVectors
                                           : sbg::RobotRepr::kJointAngles;
    std::vector<sbg::TrainingPair> pairs;
    for (const auto& s : at_10hz(ds->samples)) {
      auto p = sbg::extract_pairs(s, ecfg);
      pairs.insert(pairs.end(), p.begin(), p.end());
    }
    sbg::write_pair_archive(out_path, pairs, ecfg);
  });
}

int sbg_split_to_file(const sbg_dataset* ds, double test_fraction, uint64_t seed,
                      const char* manifest_path) {
  return wrap([&] {
    sbg::write_manifest(sbg::split_dataset(ds->samples, test_fraction, seed),
                        manifest_path);
  });
}

int sbg_train(const sbg_dataset* ds, const char* manifest_path,
              const sbg_model_config* mcfg_in, const sbg_train_config* tcfg_in,
              const char* checkpoint_dir, const char* report_path,
              const char* resume_checkpoint) {
  return wrap([&] {
    sbg::ModelConfig mcfg = to_model_config(*mcfg_in);
    sbg::TrainConfig tcfg = to_train_config(*tcfg_in);
    mcfg.validate();
    tcfg.validate();

    auto samples = select_split(at_10hz(ds->samples), manifest_path, sbg::Split::kTrain);
    sbg::ExtractConfig ecfg;
    ecfg.m = mcfg.m;
    ecfg.n = mcfg.n;
    ecfg.future_offset = mcfg.future_offset;
    ecfg.user_repr = mcfg.user_dim == 27 ? sbg::UserRepr::kPositions3d
                                         : sbg::UserRepr::kDirectionVectors;
    ecfg.robot_repr = mcfg.robot_dim == 25 ? sbg::RobotRepr::kDirectionVectors
                                           : sbg::RobotRepr::kJointAngles;
    std::vector<sbg::TrainingPair> pairs;
    for (const auto& s : samples) {
      auto p = sbg::extract_pairs(s, ecfg);
      pairs.insert(pairs.end(), p.begin(), p.end());
    }

    sbg::Trainer trainer = resume_checkpoint
                               ? sbg::Trainer::resume(resume_checkpoint, tcfg)
                               : sbg::Trainer(mcfg, tcfg);
    sbg::TrainReport report = trainer.train_loop(pairs, checkpoint_dir);
    if (report_path) sbg::write_train_report(report, report_path);
  });
}

int sbg_model_load(const char* checkpoint_path, sbg_model** out) {
  return wrap([&] {
    auto model = std::make_unique<sbg_model>();
    auto [params, cfg] = sbg::load_model(checkpoint_path);
    model->params = std::move(params);
    model->cfg = cfg;
    *out = model.release();
  });
}

void sbg_model_free(sbg_model* model) { delete model; }

int sbg_generate_to_file(const sbg_model* model, const sbg_dataset* ds,
                         const char* sample_id, const char* out_path) {
  return wrap([&] {
    const sbg::InteractionSample* found = nullptr;
    auto samples = at_10hz(ds->samples);
    for (const auto& s : samples) {
      if (s.sample_id == sample_id) {
        found = &s;
        break;
      }
    }
    if (!found) {
      throw sbg::Error(sbg::ErrorCode::kInvalidArgument,
                       std::string("sample '") + sample_id + "' not in the dataset");
    }
    sbg::SampleEval eval = sbg::closed_loop_generate(model->params, model->cfg, *found);

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
      throw sbg::Error(sbg::ErrorCode::kIoError,
                       std::string(out_path) + ": cannot open for writing");
    }
    // generated poses are joint angles regardless of the model's internal
    // robot representation
    out << "frame," << kAngleColumns << "\n";
    std::size_t first_frame = static_cast<std::size_t>(model->cfg.m) - 1;
    char buf[32];
    for (std::size_t i = 0; i < eval.gen.poses.size(); ++i) {
      out << (first_frame + i);
      for (int j = 0; j < sbg::kAngleCount; ++j) {
        std::snprintf(buf, sizeof(buf), ",%.17g", eval.gen.poses[i].angles[j]);
        out << buf;
      }
      out << "\n";
    }
    if (!out) {
      throw sbg::Error(sbg::ErrorCode::kIoError, std::string(out_path) + ": write failed");
    }
  });
}

int sbg_evaluate_to_file(const sbg_model* model, const sbg_dataset* ds,
                         const char* manifest_path, const char* report_path) {
  return wrap([&] {
    auto samples = select_split(at_10hz(ds->samples), manifest_path, sbg::Split::kTest);
    sbg::MetricReport report =
        sbg::evaluate_dataset(model->params, model->cfg, samples);
    sbg::write_metric_report(report, report_path);
  });
}

int sbg_gradcheck(uint64_t seed, double* max_rel_err, double* max_abs_err_small) {
  int rc = wrap([&] {
    sbg::GradCheckResult result = sbg::run_gradcheck(seed);
    if (max_rel_err) *max_rel_err = result.max_rel_err;
    if (max_abs_err_small) *max_abs_err_small = result.max_abs_err_small;
    if (!result.passed()) {
      throw sbg::Error(sbg::ErrorCode::kGraphError,
                       "gradient check failed: max rel err " +
                           std::to_string(result.max_rel_err) + ", max abs err " +
                           std::to_string(result.max_abs_err_small));
    }
  });
  return rc;
}

int sbg_normalize_user_pose(const double joints[27], double d_max, double out[25]) {
  return wrap([&] {
    std::array<double, 27> flat;
    std::memcpy(flat.data(), joints, sizeof(flat));
    sbg::NormalizationConfig cfg;
    cfg.d_max = d_max;
    sbg::UserPoseVec v = sbg::normalize_user_pose(sbg::flat27_to_pose(flat), cfg);
    std::memcpy(out, v.values.data(), sizeof(v.values));
  });
}

int sbg_pose_to_joint_angles(const double joints[27], double out[10]) {
  return wrap([&] {
    std::array<double, 27> flat;
    std::memcpy(flat.data(), joints, sizeof(flat));
    sbg::RobotJointAngles a = sbg::skeleton_to_joint_angles(sbg::flat27_to_pose(flat));
    std::memcpy(out, a.angles.data(), sizeof(a.angles));
  });
}

int sbg_forward_kinematics(const double angles[10], double out_positions[27]) {
  return wrap([&] {
    sbg::RobotJointAngles a;
    std::memcpy(a.angles.data(), angles, sizeof(a.angles));
    sbg::FKPose fk = sbg::forward_kinematics(a);
    for (int j = 0; j < sbg::kJointCount; ++j) {
      out_positions[3 * j + 0] = fk.positions[j].x;
      out_positions[3 * j + 1] = fk.positions[j].y;
      out_positions[3 * j + 2] = fk.positions[j].z;
    }
  });
}

}  // extern "C"
