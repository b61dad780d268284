#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sbg/skeleton.hpp"

namespace sbg {

// One recorded two-person interaction: the initiator ("user") and the
// reactor ("responder"), tracked frame by frame.
struct InteractionSample {
  std::string sample_id;
  int scenario = 0;  // 1..7
  std::string subject_id;
  double fps = 10.0;
  std::vector<HumanPose> user_track;
  std::vector<HumanPose> responder_track;

  std::size_t frame_count() const { return user_track.size(); }
  void validate() const;  // throws on inconsistent tracks
};

// (m-step user window, seed pose, n-step target, n-step future target)
struct TrainingPair {
  std::vector<double> user_window;    // m * user_dim, time-major
  std::vector<double> seed;           // robot_dim
  std::vector<double> target;         // n * robot_dim
  std::vector<double> future_target;  // n * robot_dim
  int scenario = 0;
};

enum class UserRepr { kDirectionVectors, kPositions3d };
enum class RobotRepr { kJointAngles, kDirectionVectors };

struct ExtractConfig {
  int m = 15;
  int n = 5;
  int future_offset = 30;  // l
  NormalizationConfig norm;
  UserRepr user_repr = UserRepr::kDirectionVectors;
  RobotRepr robot_repr = RobotRepr::kJointAngles;
  JointLimits limits = JointLimits::defaults();

  int user_dim() const { return user_repr == UserRepr::kDirectionVectors ? 25 : 27; }
  int robot_dim() const { return robot_repr == RobotRepr::kJointAngles ? 10 : 25; }
};

enum class Split { kTrain, kTest };

struct ManifestEntry {
  std::string sample_id;
  int scenario = 0;
  std::string subject_id;
  Split split = Split::kTrain;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t count(Split s) const;
  std::optional<Split> lookup(const std::string& sample_id) const;
};

// Keeps frames 0, k, 2k, ... with k = round(src_hz / dst_hz). Throws
// InvalidRate when src_hz < dst_hz.
std::vector<HumanPose> downsample(const std::vector<HumanPose>& track, double src_hz,
                                  double dst_hz = 10.0);
InteractionSample downsample(const InteractionSample& sample, double dst_hz = 10.0);

// Sliding-window extraction over a 10 Hz sample: one pair per anchor frame,
// count = T - m - n + 1. The future target starts `future_offset` frames
// after the target and is padded by repeating the final pose past the end
// of the track. Throws TooShort when T < m + n.
std::vector<TrainingPair> extract_pairs(const InteractionSample& sample,
                                        const ExtractConfig& cfg);

// Assigns whole (scenario, subject) groups to train or test so that the
// test side approximates test_fraction of the samples. Deterministic for a
// given seed.
DatasetManifest split_dataset(const std::vector<InteractionSample>& samples,
                              double test_fraction, std::uint64_t rng_seed);

void write_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest read_manifest(const std::string& path);

// Interaction-sample text format: one header record `fps,<hz>` followed by
// one CSV record per frame:
//   sample_id,scenario,subject_id,frame_index,<3J user floats>,<3J responder floats>
// Exports always write the canonical 9 joints; imports accept any J with a
// map giving the source index of each canonical joint (default 0..8).
void export_sample(const InteractionSample& sample, const std::string& path);
InteractionSample import_skeleton_file(const std::string& path,
                                       const std::array<int, 9>* joint_map = nullptr);

// one `<sample_id>.csv` per sample
void save_dataset_dir(const std::vector<InteractionSample>& samples, const std::string& dir);
std::vector<InteractionSample> load_dataset_dir(const std::string& dir);

// binary training-pair archive
void write_pair_archive(const std::string& path, const std::vector<TrainingPair>& pairs,
                        const ExtractConfig& cfg);
std::vector<TrainingPair> read_pair_archive(const std::string& path, ExtractConfig* cfg_out);

// --- synthetic interaction generator -----------------------------------------

struct SynthConfig {
  std::uint64_t rng_seed = 1;
  int samples_per_scenario = 10;
  int min_frames = 40;  // at 10 Hz
  int max_frames = 52;
  double amplitude_jitter = 0.15; // fractional, on template amplitudes
  double offset_jitter = 0.06;    // fractional, on template timings
  double noise_std = 0.001;       // meters, per joint coordinate
};

// Seven scripted scenarios (enter/bow, walk/stare, stand/stare,
// handshake, cry/hug, threaten/block-face, leave/bow), jittered per sample.
// Deterministic for a given seed.
std::vector<InteractionSample> synthesize_dataset(const SynthConfig& cfg);

// Clean single handshake interaction with a chosen user arm-raise angle
// (radians); the responder's reach covaries with it. Used for adaptation
// probes.
InteractionSample synthesize_handshake(double user_raise_angle, int frames = 40);

}  // namespace sbg
