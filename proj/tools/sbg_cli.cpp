// sbg command-line front end. Talks to the library exclusively through the
// C API in sbg.h, the same way an external binding would.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sbg.h"

namespace {

int report_error(int rc) {
  std::fprintf(stderr, "ERROR %s: %s\n", sbg_last_error_name(), sbg_last_error());
  return rc;
}

struct DatasetHandle {
  sbg_dataset* ds = nullptr;
  ~DatasetHandle() { sbg_dataset_free(ds); }
};

struct ModelHandle {
  sbg_model* model = nullptr;
  ~ModelHandle() { sbg_model_free(model); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"social behavior generation pipeline"};
  app.require_subcommand(1);

  // --- synth ----------------------------------------------------------
  sbg_synth_config synth_cfg;
  sbg_synth_config_defaults(&synth_cfg);
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic interaction dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_cfg.rng_seed, "RNG seed")->capture_default_str();
  synth->add_option("--samples-per-scenario", synth_cfg.samples_per_scenario,
                    "samples per scenario")->capture_default_str();
  synth->add_option("--min-frames", synth_cfg.min_frames, "minimum frames at 10 Hz")
      ->capture_default_str();
  synth->add_option("--max-frames", synth_cfg.max_frames, "maximum frames at 10 Hz")
      ->capture_default_str();
  synth->add_option("--amp-jitter", synth_cfg.amplitude_jitter, "amplitude jitter fraction")
      ->capture_default_str();
  synth->add_option("--offset-jitter", synth_cfg.offset_jitter, "timing jitter fraction")
      ->capture_default_str();
  synth->add_option("--noise-std", synth_cfg.noise_std, "joint noise std, meters")
      ->capture_default_str();

  // shared model options
  sbg_model_config model_cfg;
  sbg_model_config_defaults(&model_cfg);
  std::string variant = model_cfg.variant;
  auto add_model_options = [&](CLI::App* cmd) {
    cmd->add_option("--variant", variant,
                    "full|original-gan|no-gan|user-positions|robot-vectors")
        ->capture_default_str();
    cmd->add_option("--m", model_cfg.m, "user window length")->capture_default_str();
    cmd->add_option("--n", model_cfg.n, "generated window length")->capture_default_str();
    cmd->add_option("--l", model_cfg.l, "future rollout offset")->capture_default_str();
    cmd->add_option("--enc-hidden", model_cfg.enc_hidden, "encoder LSTM width")
        ->capture_default_str();
    cmd->add_option("--dec-hidden", model_cfg.dec_hidden, "decoder LSTM width")
        ->capture_default_str();
    cmd->add_option("--disc-hidden", model_cfg.disc_hidden, "discriminator LSTM width")
        ->capture_default_str();
    cmd->add_option("--z-dim", model_cfg.z_dim, "latent size")->capture_default_str();
  };

  // --- extract ----------------------------------------------------------
  std::string extract_data, extract_out;
  double d_max = 5.0;
  auto* extract = app.add_subcommand("extract", "extract a training-pair archive");
  extract->add_option("--data", extract_data, "dataset directory")->required();
  extract->add_option("--out", extract_out, "archive path")->required();
  extract->add_option("--d-max", d_max, "normalization distance bound, meters")
      ->capture_default_str();
  add_model_options(extract);

  // --- split ----------------------------------------------------------
  std::string split_data, split_out;
  double test_fraction = 0.1;
  std::uint64_t split_seed = 0;
  auto* split = app.add_subcommand("split", "write a person-disjoint train/test manifest");
  split->add_option("--data", split_data, "dataset directory")->required();
  split->add_option("--out", split_out, "manifest path")->required();
  split->add_option("--test-fraction", test_fraction, "test share of samples")
      ->capture_default_str();
  split->add_option("--seed", split_seed, "RNG seed")->capture_default_str();

  // --- train ----------------------------------------------------------
  sbg_train_config train_cfg;
  sbg_train_config_defaults(&train_cfg);
  std::string train_data, train_out, train_manifest, train_config_path, train_report,
      train_resume;
  auto* train = app.add_subcommand("train", "train a model and write checkpoints");
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--out", train_out, "checkpoint directory")->required();
  train->add_option("--manifest", train_manifest, "train on the manifest's train split");
  train->add_option("--config", train_config_path, "key = value training config file");
  train->add_option("--report", train_report, "per-epoch report path");
  train->add_option("--resume", train_resume, "checkpoint to continue from");
  auto* opt_epochs =
      train->add_option("--epochs", train_cfg.epochs, "training epochs")->capture_default_str();
  auto* opt_batch = train->add_option("--batch-size", train_cfg.batch_size, "mini-batch size")
                        ->capture_default_str();
  auto* opt_lr = train->add_option("--lr", train_cfg.lr, "learning rate")->capture_default_str();
  auto* opt_seed =
      train->add_option("--seed", train_cfg.rng_seed, "RNG seed")->capture_default_str();
  auto* opt_ptf = train->add_option("--p-tf", train_cfg.p_tf, "teacher forcing probability")
                      ->capture_default_str();
  auto* opt_steps =
      train->add_option("--max-steps", train_cfg.max_steps, "generator step cap, 0 = none")
          ->capture_default_str();
  add_model_options(train);

  // --- generate ----------------------------------------------------------
  std::string gen_model, gen_data, gen_sample, gen_out;
  auto* generate =
      app.add_subcommand("generate", "closed-loop robot poses for one sample");
  generate->add_option("--model", gen_model, "model checkpoint")->required();
  generate->add_option("--data", gen_data, "dataset directory")->required();
  generate->add_option("--sample", gen_sample, "sample id")->required();
  generate->add_option("--out", gen_out, "output pose file")->required();

  // --- eval ----------------------------------------------------------
  std::string eval_model, eval_data, eval_manifest, eval_out;
  auto* eval = app.add_subcommand("eval", "S1/S2/S3 metric report over a dataset");
  eval->add_option("--model", eval_model, "model checkpoint")->required();
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--manifest", eval_manifest, "evaluate the manifest's test split");
  eval->add_option("--out", eval_out, "report path")->required();

  // --- gradcheck ----------------------------------------------------------
  std::uint64_t gc_seed = 0;
  auto* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference check of all loss gradients");
  gradcheck->add_option("--seed", gc_seed, "RNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : SBG_ERR_VALIDATION;
  }

  std::snprintf(model_cfg.variant, sizeof(model_cfg.variant), "%s", variant.c_str());

  if (synth->parsed()) {
    DatasetHandle ds;
    int rc = sbg_dataset_synthesize(&synth_cfg, &ds.ds);
    if (rc != SBG_OK) return report_error(rc);
    rc = sbg_dataset_save_dir(ds.ds, synth_out.c_str());
    if (rc != SBG_OK) return report_error(rc);
    std::printf("wrote %zu samples to %s\n", sbg_dataset_size(ds.ds), synth_out.c_str());
    return 0;
  }

  if (extract->parsed()) {
    int rc = sbg_model_config_apply_variant(&model_cfg);
    if (rc != SBG_OK) return report_error(rc);
    DatasetHandle ds;
    rc = sbg_dataset_load_dir(extract_data.c_str(), &ds.ds);
    if (rc != SBG_OK) return report_error(rc);
    rc = sbg_extract_pairs_to_file(ds.ds, &model_cfg, d_max, extract_out.c_str());
    if (rc != SBG_OK) return report_error(rc);
    std::printf("wrote pair archive %s\n", extract_out.c_str());
    return 0;
  }

  if (split->parsed()) {
    DatasetHandle ds;
    int rc = sbg_dataset_load_dir(split_data.c_str(), &ds.ds);
    if (rc != SBG_OK) return report_error(rc);
    rc = sbg_split_to_file(ds.ds, test_fraction, split_seed, split_out.c_str());
    if (rc != SBG_OK) return report_error(rc);
    std::printf("wrote manifest %s\n", split_out.c_str());
    return 0;
  }

  if (train->parsed()) {
    // precedence: defaults < config file < explicit flags
    if (!train_config_path.empty()) {
      sbg_train_config from_file;
      sbg_train_config_defaults(&from_file);
      int rc = sbg_train_config_load(train_config_path.c_str(), &from_file);
      if (rc != SBG_OK) return report_error(rc);
      if (opt_epochs->count() == 0) train_cfg.epochs = from_file.epochs;
      if (opt_batch->count() == 0) train_cfg.batch_size = from_file.batch_size;
      if (opt_lr->count() == 0) train_cfg.lr = from_file.lr;
      if (opt_seed->count() == 0) train_cfg.rng_seed = from_file.rng_seed;
      if (opt_ptf->count() == 0) train_cfg.p_tf = from_file.p_tf;
      if (opt_steps->count() == 0) train_cfg.max_steps = from_file.max_steps;
      train_cfg.alpha1 = from_file.alpha1;
      train_cfg.alpha2 = from_file.alpha2;
      train_cfg.beta1 = from_file.beta1;
      train_cfg.beta2 = from_file.beta2;
      train_cfg.max_grad_norm = from_file.max_grad_norm;
    }
    int rc = sbg_model_config_apply_variant(&model_cfg);
    if (rc != SBG_OK) return report_error(rc);
    DatasetHandle ds;
    rc = sbg_dataset_load_dir(train_data.c_str(), &ds.ds);
    if (rc != SBG_OK) return report_error(rc);
    rc = sbg_train(ds.ds, train_manifest.empty() ? nullptr : train_manifest.c_str(),
                   &model_cfg, &train_cfg, train_out.c_str(),
                   train_report.empty() ? nullptr : train_report.c_str(),
                   train_resume.empty() ? nullptr : train_resume.c_str());
    if (rc != SBG_OK) return report_error(rc);
    std::printf("checkpoints in %s\n", train_out.c_str());
    return 0;
  }

  if (generate->parsed()) {
    ModelHandle model;
    int rc = sbg_model_load(gen_model.c_str(), &model.model);
    if (rc != SBG_OK) return report_error(rc);
    DatasetHandle ds;
    rc = sbg_dataset_load_dir(gen_data.c_str(), &ds.ds);
    if (rc != SBG_OK) return report_error(rc);
    rc = sbg_generate_to_file(model.model, ds.ds, gen_sample.c_str(), gen_out.c_str());
    if (rc != SBG_OK) return report_error(rc);
    std::printf("wrote %s\n", gen_out.c_str());
    return 0;
  }

  if (eval->parsed()) {
    ModelHandle model;
    int rc = sbg_model_load(eval_model.c_str(), &model.model);
    if (rc != SBG_OK) return report_error(rc);
    DatasetHandle ds;
    rc = sbg_dataset_load_dir(eval_data.c_str(), &ds.ds);
    if (rc != SBG_OK) return report_error(rc);
    rc = sbg_evaluate_to_file(model.model, ds.ds,
                              eval_manifest.empty() ? nullptr : eval_manifest.c_str(),
                              eval_out.c_str());
    if (rc != SBG_OK) return report_error(rc);
    std::printf("wrote %s\n", eval_out.c_str());
    return 0;
  }

  if (gradcheck->parsed()) {
    double max_rel = 0.0, max_abs = 0.0;
    int rc = sbg_gradcheck(gc_seed, &max_rel, &max_abs);
    std::printf("max rel err %.3e, max abs err %.3e\n", max_rel, max_abs);
    if (rc != SBG_OK) return report_error(rc);
    return 0;
  }

  return SBG_ERR_VALIDATION;
}
