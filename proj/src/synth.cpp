#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "sbg/dataio.hpp"
#include "sbg/rng.hpp"

namespace sbg {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// human-scale link lengths for both scripted bodies
LinkLengths human_links() {
  LinkLengths l;
  l.torso_spine = 0.35;
  l.spine_head = 0.18;
  l.left_upper_arm = l.right_upper_arm = 0.26;
  l.left_forearm = l.right_forearm = 0.24;
  l.left_shoulder_offset = l.right_shoulder_offset = 0.17;
  return l;
}

double smoothstep(double e0, double e1, double x) {
  double t = (x - e0) / (e1 - e0);
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// raised plateau: rises over [up0,up1], falls over [down0,down1]
double bump(double t, double up0, double up1, double down0, double down1) {
  return smoothstep(up0, up1, t) * (1.0 - smoothstep(down0, down1, t));
}

// per-sample draw; magnitudes of zero leave the template untouched
struct SampleJitter {
  double amp = 1.0;   // multiplies every template amplitude
  double shift = 0.0; // added to every template timing fraction
};

// frame scripts: joint angles plus a torso path, rendered through FK
struct BodyScript {
  std::function<RobotJointAngles(double)> angles;  // t in [0,1]
  std::function<Vec3(double)> torso;
};

std::vector<HumanPose> render_track(const BodyScript& script, int frames,
                                    const LinkLengths& links, Rng& rng, double noise_std) {
  std::vector<HumanPose> track;
  track.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    double t = frames > 1 ? static_cast<double>(f) / (frames - 1) : 0.0;
    FKPose fk = forward_kinematics(script.angles(t), links);
    Vec3 torso = script.torso(t);
    HumanPose pose;
    for (int j = 0; j < kJointCount; ++j) {
      pose.joints[j] = fk.positions[j] + torso;
      pose.joints[j].x += noise_std * rng.normal();
      pose.joints[j].y += noise_std * rng.normal();
      pose.joints[j].z += noise_std * rng.normal();
    }
    track.push_back(pose);
  }
  return track;
}

// walking arm swing; scaled by the sample's amplitude draw so the pace of
// the user is observable
void arm_swing(RobotJointAngles& a, double t, double envelope, double amp) {
  double swing = 0.1 * amp * std::sin(2.0 * kTau * t) * envelope;
  a.angles[kLShoulderPitch] += swing;
  a.angles[kRShoulderPitch] -= swing;
}

// responder reach covaries with how high the user lifted the arm
double handshake_response_pitch(double user_raise) { return 0.15 + 1.05 * user_raise; }

struct ScenarioTracks {
  BodyScript user, responder;
};

ScenarioTracks build_scenario(int scenario, const SampleJitter& jit, double user_raise) {
  const double A = jit.amp;
  const double s = jit.shift;
  ScenarioTracks out;

  // both actors face each other; the responder stays put
  out.responder.torso = [](double) { return Vec3{0.25, 0.0, 2.1}; };
  out.user.torso = [](double) { return Vec3{-0.2, 0.0, 2.6}; };

  switch (scenario) {
    case 1: {  // user enters the service area, responder bows
      out.user.torso = [=](double t) {
        double w = smoothstep(0.05 + s, 0.75 + s, t);
        return Vec3{-0.4 + 0.4 * w, 0.0, 4.2 - 2.0 * w};
      };
      out.user.angles = [=](double t) {
        RobotJointAngles a;
        arm_swing(a, t, 1.0 - smoothstep(0.6 + s, 0.8 + s, t), A);
        return a;
      };
      out.responder.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.28 + s, 0.46 + s, 0.7 + s, 0.9 + s);
        a.angles[kHipPitch] = 0.4 * b;
        a.angles[kHeadPitch] = 0.2 * b;
        return a;
      };
      break;
    }
    case 2: {  // user walks around, responder stares
      out.user.torso = [=](double t) {
        return Vec3{-0.7 + 1.4 * std::sin(std::numbers::pi * (t - s)), 0.0,
                    2.6 + 0.15 * A * std::sin(kTau * t)};
      };
      out.user.angles = [=](double t) {
        RobotJointAngles a;
        arm_swing(a, t, 1.0, A);
        return a;
      };
      out.responder.angles = [=](double t) {
        RobotJointAngles a;
        a.angles[kHeadPitch] = 0.14 * bump(t, 0.2 + s, 0.38 + s, 0.68 + s, 0.88 + s);
        return a;
      };
      break;
    }
    case 3: {  // user stands still, responder stares
      out.user.angles = [=](double t) {
        RobotJointAngles a;
        a.angles[kHipPitch] = 0.03 * A * std::sin(kTau * (t - s));
        return a;
      };
      out.responder.angles = [=](double t) {
        RobotJointAngles a;
        a.angles[kHeadPitch] = 0.12 * bump(t, 0.24 + s, 0.42 + s, 0.66 + s, 0.86 + s);
        return a;
      };
      break;
    }
    case 4: {  // user lifts an arm, responder shakes hands at matching height
      out.user.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.2 + s, 0.45 + s, 0.72 + s, 0.9 + s);
        a.angles[kRShoulderPitch] = user_raise * b;
        a.angles[kRElbowRoll] = 0.1 * A * b;
        return a;
      };
      out.responder.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.3 + s, 0.5 + s, 0.74 + s, 0.92 + s);
        a.angles[kRShoulderPitch] = handshake_response_pitch(user_raise) * b;
        a.angles[kRElbowRoll] = 0.1 * A * b;
        return a;
      };
      break;
    }
    case 5: {  // user covers face and cries, responder reaches out to hug
      out.user.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.15 + s, 0.4 + s, 0.75 + s, 0.95 + s);
        a.angles[kLShoulderPitch] = a.angles[kRShoulderPitch] = 0.8 * A * b;
        a.angles[kLElbowRoll] = a.angles[kRElbowRoll] = 1.4 * A * b;
        a.angles[kHeadPitch] = 0.3 * A * b;
        return a;
      };
      out.responder.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.34 + s, 0.56 + s, 0.76 + s, 0.94 + s);
        a.angles[kLShoulderPitch] = a.angles[kRShoulderPitch] = 0.75 * A * b;
        a.angles[kLShoulderRoll] = a.angles[kRShoulderRoll] = 0.12 * A * b;
        a.angles[kLElbowRoll] = a.angles[kRElbowRoll] = 0.1 * A * b;
        return a;
      };
      break;
    }
    case 6: {  // user threatens to hit, responder blocks the face
      out.user.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.2 + s, 0.45 + s, 0.7 + s, 0.88 + s);
        a.angles[kRShoulderPitch] = 1.3 * A * b;
        a.angles[kRElbowRoll] = 0.6 * A * b;
        return a;
      };
      out.responder.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.3 + s, 0.5 + s, 0.74 + s, 0.92 + s);
        a.angles[kLShoulderPitch] = a.angles[kRShoulderPitch] = 0.9 * A * b;
        a.angles[kLElbowRoll] = a.angles[kRElbowRoll] = 0.7 * A * b;
        a.angles[kHeadPitch] = -0.12 * A * b;
        return a;
      };
      break;
    }
    case 7: {  // user turns back and walks to the door, responder bows
      out.user.torso = [=](double t) {
        double w = smoothstep(0.2 + s, 0.9 + s, t);
        return Vec3{-0.2 + 0.5 * w, 0.0, 2.2 + 2.1 * w};
      };
      out.user.angles = [=](double t) {
        RobotJointAngles a;
        arm_swing(a, t, smoothstep(0.15 + s, 0.35 + s, t), A);
        return a;
      };
      out.responder.angles = [=](double t) {
        RobotJointAngles a;
        double b = bump(t, 0.2 + s, 0.38 + s, 0.6 + s, 0.84 + s);
        a.angles[kHipPitch] = 0.35 * b;
        a.angles[kHeadPitch] = 0.18 * b;
        return a;
      };
      break;
    }
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown scenario " + std::to_string(scenario));
  }
  return out;
}

constexpr double kBaseHandshakeRaise = 1.0;

}  // namespace

std::vector<InteractionSample> synthesize_dataset(const SynthConfig& cfg) {
  if (cfg.samples_per_scenario < 1 || cfg.min_frames < 1 || cfg.max_frames < cfg.min_frames ||
      cfg.amplitude_jitter < 0 || cfg.offset_jitter < 0 || cfg.noise_std < 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthesize_dataset: bad config");
  }

  Rng rng(cfg.rng_seed);
  const LinkLengths links = human_links();
  std::vector<InteractionSample> samples;
  samples.reserve(static_cast<std::size_t>(7 * cfg.samples_per_scenario));

  for (int scenario = 1; scenario <= 7; ++scenario) {
    for (int k = 0; k < cfg.samples_per_scenario; ++k) {
      int frames = cfg.min_frames + static_cast<int>(rng.index(
                       static_cast<std::size_t>(cfg.max_frames - cfg.min_frames + 1)));
      SampleJitter jit;
      jit.amp = 1.0 + cfg.amplitude_jitter * rng.uniform(-1.0, 1.0);
      jit.shift = cfg.offset_jitter * rng.uniform(-1.0, 1.0);
      double raise = kBaseHandshakeRaise * jit.amp;

      ScenarioTracks tracks = build_scenario(scenario, jit, raise);
      InteractionSample sample;
      char id[32];
      std::snprintf(id, sizeof(id), "sc%d_%03d", scenario, k);
      sample.sample_id = id;
      sample.scenario = scenario;
      sample.subject_id = "p" + std::to_string(k);
      sample.fps = 10.0;
      sample.user_track = render_track(tracks.user, frames, links, rng, cfg.noise_std);
      sample.responder_track =
          render_track(tracks.responder, frames, links, rng, cfg.noise_std);
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

InteractionSample synthesize_handshake(double user_raise_angle, int frames) {
  Rng rng(0);
  ScenarioTracks tracks = build_scenario(4, SampleJitter{}, user_raise_angle);
  InteractionSample sample;
  sample.sample_id = "handshake_probe";
  sample.scenario = 4;
  sample.subject_id = "probe";
  sample.fps = 10.0;
  sample.user_track = render_track(tracks.user, frames, human_links(), rng, 0.0);
  sample.responder_track = render_track(tracks.responder, frames, human_links(), rng, 0.0);
  return sample;
}

}  // namespace sbg
