#include "sbg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace sbg {

namespace {

constexpr int kTracked[3] = {kHead, kLeftWrist, kRightWrist};

std::vector<FKPose> fk_track(const BehaviorSeq& b, const LinkLengths& links) {
  std::vector<FKPose> out;
  out.reserve(b.poses.size());
  for (const auto& pose : b.poses) out.push_back(forward_kinematics(pose, links));
  return out;
}

JointDistances pose_distances(const FKPose& a, const FKPose& b) {
  JointDistances d;
  d.head = (a.positions[kHead] - b.positions[kHead]).norm();
  d.left_wrist = (a.positions[kLeftWrist] - b.positions[kLeftWrist]).norm();
  d.right_wrist = (a.positions[kRightWrist] - b.positions[kRightWrist]).norm();
  return d;
}

RobotJointAngles pose_vector_to_angles(const std::vector<double>& pose,
                                       const ModelConfig& cfg, const JointLimits& limits,
                                       const LinkLengths& links) {
  if (cfg.robot_dim == kAngleCount) {
    RobotJointAngles a;
    std::copy(pose.begin(), pose.end(), a.angles.begin());
    return clamp_joint_limits(a, limits);
  }
  UserPoseVec vec;
  std::copy(pose.begin(), pose.end(), vec.values.begin());
  return skeleton_to_joint_angles(vec25_to_pose(vec, links), limits);
}

}  // namespace

std::size_t key_pose_index(const BehaviorSeq& behavior, const LinkLengths& links) {
  if (behavior.poses.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "key_pose_index: empty behavior");
  }
  auto fk = fk_track(behavior, links);
  std::size_t best = 0;
  double best_sum = 0.0;
  for (std::size_t i = 0; i < fk.size(); ++i) {
    double sum = 0.0;
    for (int j : kTracked) sum += (fk[i].positions[j] - fk[0].positions[j]).norm();
    if (sum > best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return best;
}

double metric_s1(const BehaviorSeq& gt, const BehaviorSeq& gen) {
  if (gt.poses.size() != gen.poses.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "s1: sequence lengths " + std::to_string(gt.poses.size()) + " vs " +
                    std::to_string(gen.poses.size()));
  }
  if (gt.poses.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "s1: empty sequences");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.poses.size(); ++i) {
    for (int j = 0; j < kAngleCount; ++j) {
      double d = gt.poses[i].angles[j] - gen.poses[i].angles[j];
      acc += d * d;
    }
  }
  return std::sqrt(acc / static_cast<double>(gt.poses.size() * kAngleCount));
}

JointDistances metric_s2(const BehaviorSeq& gt, const BehaviorSeq& gen,
                         const LinkLengths& links) {
  std::size_t k_gt = key_pose_index(gt, links);
  std::size_t k_gen = key_pose_index(gen, links);
  return pose_distances(forward_kinematics(gt.poses[k_gt], links),
                        forward_kinematics(gen.poses[k_gen], links));
}

JointDistances metric_s3(const BehaviorSeq& gt, const BehaviorSeq& gen,
                         const LinkLengths& links) {
  if (gt.poses.empty() || gen.poses.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "s3: empty sequences");
  }
  return pose_distances(forward_kinematics(gt.poses.back(), links),
                        forward_kinematics(gen.poses.back(), links));
}

MetricReport evaluate_behaviors(const std::vector<SampleEval>& samples,
                                const LinkLengths& links) {
  if (samples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "evaluate_behaviors: no samples");
  }

  struct Acc {
    double s1 = 0.0;
    JointDistances key, fin;
    std::size_t count = 0;

    void add(double s1v, const JointDistances& k, const JointDistances& f) {
      s1 += s1v;
      key.head += k.head;
      key.left_wrist += k.left_wrist;
      key.right_wrist += k.right_wrist;
      fin.head += f.head;
      fin.left_wrist += f.left_wrist;
      fin.right_wrist += f.right_wrist;
      ++count;
    }

    MetricRow row(const std::string& label) const {
      MetricRow r;
      r.label = label;
      double w = static_cast<double>(count);
      r.s1 = s1 / w;
      r.key = {key.head / w, key.left_wrist / w, key.right_wrist / w};
      r.final_pose = {fin.head / w, fin.left_wrist / w, fin.right_wrist / w};
      r.samples = count;
      return r;
    }
  };

  std::map<int, Acc> per_scenario;
  Acc overall;
  for (const auto& s : samples) {
    double s1 = metric_s1(s.gt, s.gen);
    JointDistances key = metric_s2(s.gt, s.gen, links);
    JointDistances fin = metric_s3(s.gt, s.gen, links);
    per_scenario[s.scenario].add(s1, key, fin);
    overall.add(s1, key, fin);
  }

  MetricReport report;
  for (const auto& [scenario, acc] : per_scenario) {
    report.per_scenario.push_back(acc.row("scenario_" + std::to_string(scenario)));
  }
  report.aggregate = overall.row("all");
  return report;
}

SampleEval closed_loop_generate(const ModelParams& params, const ModelConfig& cfg,
                                const InteractionSample& sample,
                                const NormalizationConfig& norm, const JointLimits& limits,
                                const LinkLengths& links) {
  sample.validate();
  const std::size_t frames = sample.frame_count();
  const std::size_t m = static_cast<std::size_t>(cfg.m);
  if (frames < m + 1) {
    throw Error(ErrorCode::kTooShort,
                "sample '" + sample.sample_id + "' too short for a " + std::to_string(cfg.m) +
                    "-frame window");
  }

  const std::size_t ud = static_cast<std::size_t>(cfg.user_dim);
  std::vector<std::vector<double>> user(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    if (cfg.user_dim == kUserVecSize) {
      UserPoseVec v = normalize_user_pose(sample.user_track[t], norm);
      user[t].assign(v.values.begin(), v.values.end());
    } else {
      auto flat = pose_to_flat27(sample.user_track[t]);
      user[t].assign(flat.begin(), flat.end());
    }
  }

  // ground-truth responder poses, in the model's robot representation and
  // as joint angles for the metrics
  std::vector<std::vector<double>> gt_repr(frames);
  std::vector<RobotJointAngles> gt_angles(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    gt_angles[t] = skeleton_to_joint_angles(sample.responder_track[t], limits);
    if (cfg.robot_dim == kAngleCount) {
      gt_repr[t].assign(gt_angles[t].angles.begin(), gt_angles[t].angles.end());
    } else {
      UserPoseVec v = robot_pose_to_vec25(sample.responder_track[t], norm);
      gt_repr[t].assign(v.values.begin(), v.values.end());
    }
  }

  SampleEval out;
  out.scenario = sample.scenario;
  out.gt.fps = sample.fps;
  out.gen.fps = sample.fps;

  // both sequences share the seed frame m-1
  out.gt.poses.push_back(gt_angles[m - 1]);
  out.gen.poses.push_back(gt_angles[m - 1]);

  std::vector<double> current = gt_repr[m - 1];
  std::vector<double> window(m * ud);
  for (std::size_t t = m - 1; t + 1 < frames; ++t) {
    for (std::size_t k = 0; k < m; ++k) {
      std::copy(user[t + 1 - m + k].begin(), user[t + 1 - m + k].end(),
                window.begin() + static_cast<long>(k * ud));
    }
    current = generate_step(window, current, params, cfg, limits);
    out.gt.poses.push_back(gt_angles[t + 1]);
    out.gen.poses.push_back(pose_vector_to_angles(current, cfg, limits, links));
  }
  return out;
}

MetricReport evaluate_dataset(const ModelParams& params, const ModelConfig& cfg,
                              const std::vector<InteractionSample>& samples,
                              const NormalizationConfig& norm, const JointLimits& limits,
                              const LinkLengths& links) {
  std::vector<SampleEval> evals;
  evals.reserve(samples.size());
  for (const auto& sample : samples) {
    evals.push_back(closed_loop_generate(params, cfg, sample, norm, limits, links));
  }
  return evaluate_behaviors(evals, links);
}

std::string format_metric_report(const MetricReport& report) {
  std::string out =
      "scenario,s1,key_head,key_lwrist,key_rwrist,s2,final_head,final_lwrist,final_rwrist,"
      "s3,samples\n";
  char buf[256];
  auto emit = [&](const MetricRow& r) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%zu\n",
                  r.label.c_str(), r.s1, r.key.head, r.key.left_wrist, r.key.right_wrist,
                  r.key.total(), r.final_pose.head, r.final_pose.left_wrist,
                  r.final_pose.right_wrist, r.final_pose.total(), r.samples);
    out += buf;
  };
  for (const auto& row : report.per_scenario) emit(row);
  emit(report.aggregate);
  return out;
}

void write_metric_report(const MetricReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path + ": cannot open for writing");
  out << format_metric_report(report);
  if (!out) throw Error(ErrorCode::kIoError, path + ": write failed");
}

}  // namespace sbg
