// Exercises the extern-C surface through the shared library, the same link
// path the CLI uses.
#include "sbg.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str(const std::string& sub = "") const {
    return sub.empty() ? path.string() : (path / sub).string();
  }
};

// upright pose, arms hanging; torso at (0,0,2.5)
void rest_pose_joints(double joints[27]) {
  const double data[27] = {
      0.0,   0.0,   2.5,  // torso
      0.0,   0.3,   2.5,  // spine shoulder
      0.0,   0.45,  2.5,  // head
      0.18,  0.3,   2.5,  // left shoulder
      0.18,  0.05,  2.5,  // left elbow
      0.18,  -0.2,  2.5,  // left wrist
      -0.18, 0.3,   2.5,  // right shoulder
      -0.18, 0.05,  2.5,  // right elbow
      -0.18, -0.2,  2.5,  // right wrist
  };
  std::memcpy(joints, data, sizeof(data));
}

}  // namespace

TEST_CASE("geometry entry points") {
  double joints[27];
  rest_pose_joints(joints);

  double vec[25];
  REQUIRE(sbg_normalize_user_pose(joints, 5.0, vec) == SBG_OK);
  CHECK(vec[24] == doctest::Approx(0.5));
  CHECK(vec[1] == doctest::Approx(1.0));  // spine direction is +y

  double angles[10];
  REQUIRE(sbg_pose_to_joint_angles(joints, angles) == SBG_OK);
  for (int i = 0; i < 10; ++i) CHECK(angles[i] == doctest::Approx(0.0).epsilon(1e-9));

  double positions[27];
  REQUIRE(sbg_forward_kinematics(angles, positions) == SBG_OK);
  CHECK(positions[0] == 0.0);                           // torso pinned
  CHECK(positions[4] == doctest::Approx(0.3));          // spine shoulder y
  CHECK(positions[3 * 5 + 1] == doctest::Approx(0.0));  // left wrist y
}

TEST_CASE("degenerate pose reports a validation error") {
  double joints[27];
  rest_pose_joints(joints);
  // collapse left wrist onto the elbow
  joints[15] = joints[12];
  joints[16] = joints[13];
  joints[17] = joints[14];
  double vec[25];
  CHECK(sbg_normalize_user_pose(joints, 5.0, vec) == SBG_ERR_VALIDATION);
  CHECK(std::string(sbg_last_error_name()) == "DEGENERATE_SEGMENT");
  CHECK(std::string(sbg_last_error()).find("5") != std::string::npos);
}

TEST_CASE("dataset synthesis, save and reload") {
  TempDir dir("capi_ds_test");
  sbg_synth_config cfg;
  sbg_synth_config_defaults(&cfg);
  cfg.samples_per_scenario = 2;

  sbg_dataset* ds = nullptr;
  REQUIRE(sbg_dataset_synthesize(&cfg, &ds) == SBG_OK);
  CHECK(sbg_dataset_size(ds) == 14);
  REQUIRE(sbg_dataset_save_dir(ds, dir.str().c_str()) == SBG_OK);
  sbg_dataset_free(ds);

  sbg_dataset* back = nullptr;
  REQUIRE(sbg_dataset_load_dir(dir.str().c_str(), &back) == SBG_OK);
  CHECK(sbg_dataset_size(back) == 14);
  sbg_dataset_free(back);

  sbg_dataset* missing = nullptr;
  CHECK(sbg_dataset_load_dir(dir.str("nope").c_str(), &missing) == SBG_ERR_IO);
  CHECK(std::strlen(sbg_last_error()) > 0);
}

TEST_CASE("split and extract through the C API") {
  TempDir dir("capi_pipe_test");
  sbg_synth_config scfg;
  sbg_synth_config_defaults(&scfg);
  scfg.samples_per_scenario = 3;
  sbg_dataset* ds = nullptr;
  REQUIRE(sbg_dataset_synthesize(&scfg, &ds) == SBG_OK);

  std::string manifest = dir.str("manifest.csv");
  REQUIRE(sbg_split_to_file(ds, 0.2, 5, manifest.c_str()) == SBG_OK);
  std::ifstream mf(manifest);
  CHECK(mf.good());

  sbg_model_config mcfg;
  sbg_model_config_defaults(&mcfg);
  std::string archive = dir.str("pairs.bin");
  REQUIRE(sbg_extract_pairs_to_file(ds, &mcfg, 5.0, archive.c_str()) == SBG_OK);
  CHECK(std::filesystem::file_size(archive) > 1000);

  sbg_dataset_free(ds);
}

TEST_CASE("extract on a too-short sample is a validation error") {
  TempDir dir("capi_short_test");
  sbg_synth_config scfg;
  sbg_synth_config_defaults(&scfg);
  scfg.samples_per_scenario = 1;
  scfg.min_frames = scfg.max_frames = 19;  // below m + n = 20
  sbg_dataset* ds = nullptr;
  REQUIRE(sbg_dataset_synthesize(&scfg, &ds) == SBG_OK);

  sbg_model_config mcfg;
  sbg_model_config_defaults(&mcfg);
  std::string archive = dir.str("pairs.bin");
  CHECK(sbg_extract_pairs_to_file(ds, &mcfg, 5.0, archive.c_str()) == SBG_ERR_VALIDATION);
  CHECK(std::string(sbg_last_error_name()) == "TOO_SHORT");
  sbg_dataset_free(ds);
}

TEST_CASE("train, generate and evaluate a tiny model end to end") {
  TempDir dir("capi_train_test");
  sbg_synth_config scfg;
  sbg_synth_config_defaults(&scfg);
  scfg.samples_per_scenario = 1;
  scfg.min_frames = scfg.max_frames = 24;
  sbg_dataset* ds = nullptr;
  REQUIRE(sbg_dataset_synthesize(&scfg, &ds) == SBG_OK);

  sbg_model_config mcfg;
  sbg_model_config_defaults(&mcfg);
  mcfg.enc_hidden = 8;
  mcfg.dec_hidden = 12;
  mcfg.disc_hidden = 8;
  mcfg.z_dim = 4;
  mcfg.l = 6;

  sbg_train_config tcfg;
  sbg_train_config_defaults(&tcfg);
  tcfg.epochs = 2;
  tcfg.batch_size = 16;
  tcfg.lr = 1e-3;
  tcfg.rng_seed = 3;

  std::string ckpt_dir = dir.str("ckpts");
  std::string report = dir.str("train_report.csv");
  REQUIRE(sbg_train(ds, nullptr, &mcfg, &tcfg, ckpt_dir.c_str(), report.c_str(), nullptr) ==
          SBG_OK);
  CHECK(std::filesystem::exists(ckpt_dir + "/epoch_2.ckpt"));
  CHECK(std::filesystem::exists(ckpt_dir + "/latest"));
  CHECK(std::filesystem::exists(report));

  sbg_model* model = nullptr;
  REQUIRE(sbg_model_load((ckpt_dir + "/epoch_2.ckpt").c_str(), &model) == SBG_OK);

  std::string poses = dir.str("poses.csv");
  REQUIRE(sbg_generate_to_file(model, ds, "sc4_000", poses.c_str()) == SBG_OK);
  std::ifstream pf(poses);
  std::string header;
  std::getline(pf, header);
  CHECK(header.find("hip_pitch") != std::string::npos);
  int rows = 0;
  for (std::string line; std::getline(pf, line);) ++rows;
  CHECK(rows == 24 - 15 + 1);

  CHECK(sbg_generate_to_file(model, ds, "no_such_sample", poses.c_str()) ==
        SBG_ERR_VALIDATION);

  std::string metrics = dir.str("metrics.csv");
  REQUIRE(sbg_evaluate_to_file(model, ds, nullptr, metrics.c_str()) == SBG_OK);
  std::ifstream mf(metrics);
  std::getline(mf, header);
  CHECK(header.find("key_lwrist") != std::string::npos);

  sbg_model_free(model);
  sbg_dataset_free(ds);
}

TEST_CASE("gradcheck through the C API") {
  double max_rel = 1.0, max_abs = 1.0;
  REQUIRE(sbg_gradcheck(7, &max_rel, &max_abs) == SBG_OK);
  CHECK(max_rel < 1e-4);
  CHECK(max_abs < 1e-7);
}

TEST_CASE("train config defaults and file loading") {
  sbg_train_config cfg;
  sbg_train_config_defaults(&cfg);
  CHECK(cfg.alpha1 == 100.0);
  CHECK(cfg.alpha2 == 10.0);
  CHECK(cfg.beta1 == 0.5);
  CHECK(cfg.batch_size == 100);
  CHECK(cfg.lr == 1e-5);
  CHECK(cfg.epochs == 300);
  CHECK(cfg.p_tf == 0.5);
  CHECK(cfg.max_grad_norm == 1.0);

  const char* path = "capi_cfg_test.txt";
  {
    std::ofstream out(path);
    out << "lr = 0.01\nepochs = 3\n";
  }
  REQUIRE(sbg_train_config_load(path, &cfg) == SBG_OK);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.epochs == 3);
  CHECK(cfg.alpha1 == 100.0);
  std::remove(path);

  CHECK(sbg_train_config_load("missing_config.txt", &cfg) == SBG_ERR_IO);
}

TEST_CASE("variant application fixes coupled fields") {
  sbg_model_config cfg;
  sbg_model_config_defaults(&cfg);
  std::snprintf(cfg.variant, sizeof(cfg.variant), "original-gan");
  REQUIRE(sbg_model_config_apply_variant(&cfg) == SBG_OK);
  CHECK(cfg.l == 0);

  sbg_model_config_defaults(&cfg);
  std::snprintf(cfg.variant, sizeof(cfg.variant), "user-positions");
  REQUIRE(sbg_model_config_apply_variant(&cfg) == SBG_OK);
  CHECK(cfg.user_dim == 27);

  sbg_model_config_defaults(&cfg);
  std::snprintf(cfg.variant, sizeof(cfg.variant), "made-up");
  CHECK(sbg_model_config_apply_variant(&cfg) == SBG_ERR_VALIDATION);
}
