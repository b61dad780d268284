/*
 * sbg - social behavior generation library
 *
 * C interface to the behavior-generation pipeline: synthetic interaction
 * data, training-pair extraction, person-disjoint splits, Seq2Seq+GAN
 * training, closed-loop generation and metric evaluation.
 *
 * Every function returns SBG_OK or an error class; the detailed reason is
 * available from sbg_last_error() / sbg_last_error_name() (thread local).
 * Handles are opaque and freed with their matching *_free function.
 */
#ifndef SBG_H
#define SBG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  SBG_OK = 0,
  SBG_ERR_VALIDATION = 1, /* invalid arguments or data failing a precondition */
  SBG_ERR_IO = 2          /* filesystem, parse or format problems */
};

const char* sbg_last_error(void);      /* message, empty when no error */
const char* sbg_last_error_name(void); /* symbolic code, e.g. "TOO_SHORT" */
const char* sbg_version(void);

typedef struct sbg_dataset sbg_dataset;
typedef struct sbg_model sbg_model;

typedef struct sbg_synth_config {
  uint64_t rng_seed;
  int32_t samples_per_scenario;
  int32_t min_frames; /* at 10 Hz */
  int32_t max_frames;
  double amplitude_jitter;
  double offset_jitter;
  double noise_std; /* meters */
} sbg_synth_config;

typedef struct sbg_model_config {
  int32_t m;
  int32_t n;
  int32_t l;
  int32_t enc_hidden;
  int32_t dec_hidden;
  int32_t disc_hidden;
  int32_t z_dim;
  int32_t user_dim;
  int32_t robot_dim;
  char variant[24]; /* full | original-gan | no-gan | user-positions | robot-vectors */
} sbg_model_config;

typedef struct sbg_train_config {
  double alpha1;
  double alpha2;
  double beta1;
  double beta2;
  int32_t batch_size;
  double lr;
  double max_grad_norm;
  int32_t epochs;
  double p_tf;
  uint64_t rng_seed;
  uint64_t max_steps; /* generator-update cap, 0 = none */
} sbg_train_config;

void sbg_synth_config_defaults(sbg_synth_config* cfg);
void sbg_model_config_defaults(sbg_model_config* cfg);
void sbg_train_config_defaults(sbg_train_config* cfg);

/* `key = value` text file layered over *cfg */
int sbg_train_config_load(const char* path, sbg_train_config* cfg);

/* forces the fields implied by cfg->variant (l = 0, user_dim = 27, ...) */
int sbg_model_config_apply_variant(sbg_model_config* cfg);

/* --- datasets -------------------------------------------------------- */

int sbg_dataset_synthesize(const sbg_synth_config* cfg, sbg_dataset** out);
int sbg_dataset_load_dir(const char* dir, sbg_dataset** out);
/* joint_map9: source column index of each canonical joint, NULL = 0..8 */
int sbg_dataset_load_file(const char* path, const int32_t* joint_map9, sbg_dataset** out);
int sbg_dataset_save_dir(const sbg_dataset* ds, const char* dir);
int sbg_dataset_downsample(sbg_dataset* ds, double dst_hz);
size_t sbg_dataset_size(const sbg_dataset* ds);
void sbg_dataset_free(sbg_dataset* ds);

/* binary training-pair archive from all samples (10 Hz enforced) */
int sbg_extract_pairs_to_file(const sbg_dataset* ds, const sbg_model_config* cfg,
                              double d_max, const char* out_path);

/* person-disjoint train/test manifest */
int sbg_split_to_file(const sbg_dataset* ds, double test_fraction, uint64_t seed,
                      const char* manifest_path);

/* --- training and inference ------------------------------------------ */

/* Trains on the dataset (train split only when a manifest is given),
 * writing epoch checkpoints plus a `latest` marker into checkpoint_dir and
 * an optional per-epoch report. resume_checkpoint, when non-NULL, continues
 * a previous run up to tcfg->epochs. */
int sbg_train(const sbg_dataset* ds, const char* manifest_path,
              const sbg_model_config* mcfg, const sbg_train_config* tcfg,
              const char* checkpoint_dir, const char* report_path,
              const char* resume_checkpoint);

int sbg_model_load(const char* checkpoint_path, sbg_model** out);
void sbg_model_free(sbg_model* model);

/* closed-loop generation over one sample; CSV of per-frame robot poses */
int sbg_generate_to_file(const sbg_model* model, const sbg_dataset* ds,
                         const char* sample_id, const char* out_path);

/* S1/S2/S3 metric table over the dataset (test split when a manifest is
 * given), one row per scenario plus an aggregate row */
int sbg_evaluate_to_file(const sbg_model* model, const sbg_dataset* ds,
                         const char* manifest_path, const char* report_path);

/* finite-difference verification of all loss gradients at toy sizes */
int sbg_gradcheck(uint64_t seed, double* max_rel_err, double* max_abs_err_small);

/* --- geometry -------------------------------------------------------- */

/* joints: 9 x (x,y,z) in camera frame, canonical order (torso, spine
 * shoulder, head, L shoulder/elbow/wrist, R shoulder/elbow/wrist) */
int sbg_normalize_user_pose(const double joints[27], double d_max, double out[25]);
int sbg_pose_to_joint_angles(const double joints[27], double out[10]);
/* torso-relative positions from the 10 joint angles, default link lengths */
int sbg_forward_kinematics(const double angles[10], double out_positions[27]);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SBG_H */
