#pragma once

#include <string>
#include <vector>

#include "sbg/dataio.hpp"
#include "sbg/model.hpp"
#include "sbg/skeleton.hpp"

namespace sbg {

struct BehaviorSeq {
  std::vector<RobotJointAngles> poses;
  double fps = 10.0;
};

// Frame whose head/wrist displacement from the first frame is largest
// (FK positions, torso-relative); ties break to the smallest index.
std::size_t key_pose_index(const BehaviorSeq& behavior, const LinkLengths& links = {});

// whole-sequence RMSE over joint angles, radians
double metric_s1(const BehaviorSeq& gt, const BehaviorSeq& gen);

struct JointDistances {
  double head = 0.0;
  double left_wrist = 0.0;
  double right_wrist = 0.0;
  double total() const { return head + left_wrist + right_wrist; }
};

// head/wrist distances between the two key poses, meters (key poses are
// selected independently per sequence)
JointDistances metric_s2(const BehaviorSeq& gt, const BehaviorSeq& gen,
                         const LinkLengths& links = {});

// same distances at the two final poses
JointDistances metric_s3(const BehaviorSeq& gt, const BehaviorSeq& gen,
                         const LinkLengths& links = {});

struct MetricRow {
  std::string label;
  double s1 = 0.0;
  JointDistances key;
  JointDistances final_pose;
  std::size_t samples = 0;
};

struct MetricReport {
  std::vector<MetricRow> per_scenario;
  MetricRow aggregate;
};

// one evaluated sample: ground truth vs generated behavior
struct SampleEval {
  int scenario = 0;
  BehaviorSeq gt;
  BehaviorSeq gen;
};

MetricReport evaluate_behaviors(const std::vector<SampleEval>& samples,
                                const LinkLengths& links = {});

// Closed-loop generation over one sample: every step feeds the model its
// own previous output; the first seed is the ground-truth pose at the end
// of the first full window. Returns aligned (gt, gen) sequences that share
// that seed frame.
SampleEval closed_loop_generate(const ModelParams& params, const ModelConfig& cfg,
                                const InteractionSample& sample,
                                const NormalizationConfig& norm = {},
                                const JointLimits& limits = JointLimits::defaults(),
                                const LinkLengths& links = {});

// Runs closed-loop generation over every sample and aggregates the metrics
// per scenario plus one overall row.
MetricReport evaluate_dataset(const ModelParams& params, const ModelConfig& cfg,
                              const std::vector<InteractionSample>& samples,
                              const NormalizationConfig& norm = {},
                              const JointLimits& limits = JointLimits::defaults(),
                              const LinkLengths& links = {});

// delimited table: scenario, s1, key-pose head/lwrist/rwrist/s2,
// final-pose head/lwrist/rwrist/s3
void write_metric_report(const MetricReport& report, const std::string& path);
std::string format_metric_report(const MetricReport& report);

}  // namespace sbg
