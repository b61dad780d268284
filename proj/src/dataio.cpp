#include "sbg/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

#include "sbg/rng.hpp"

namespace fs = std::filesystem;

namespace sbg {

namespace {

[[noreturn]] void parse_error(const std::string& path, std::size_t line_no,
                              const std::string& what) {
  throw Error(ErrorCode::kParseError,
              path + ":" + std::to_string(line_no) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    parse_error(path, line_no, "bad number '" + s + "'");
  }
  return v;
}

long parse_int(const std::string& s, const std::string& path, std::size_t line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') parse_error(path, line_no, "bad integer '" + s + "'");
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

void InteractionSample::validate() const {
  if (user_track.size() != responder_track.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "sample '" + sample_id + "': track lengths differ");
  }
  if (user_track.empty()) {
    throw Error(ErrorCode::kTooShort, "sample '" + sample_id + "': no frames");
  }
  if (!(fps > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sample '" + sample_id + "': fps must be > 0");
  }
  if (scenario < 1 || scenario > 7) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample '" + sample_id + "': scenario out of range 1..7");
  }
}

std::size_t DatasetManifest::count(Split s) const {
  std::size_t n = 0;
  for (const auto& e : entries) {
    if (e.split == s) ++n;
  }
  return n;
}

std::optional<Split> DatasetManifest::lookup(const std::string& sample_id) const {
  for (const auto& e : entries) {
    if (e.sample_id == sample_id) return e.split;
  }
  return std::nullopt;
}

std::vector<HumanPose> downsample(const std::vector<HumanPose>& track, double src_hz,
                                  double dst_hz) {
  if (!(dst_hz > 0.0) || src_hz < dst_hz) {
    throw Error(ErrorCode::kInvalidRate,
                "cannot downsample " + std::to_string(src_hz) + " Hz to " +
                    std::to_string(dst_hz) + " Hz");
  }
  std::size_t stride = static_cast<std::size_t>(std::lround(src_hz / dst_hz));
  std::vector<HumanPose> out;
  for (std::size_t i = 0; i < track.size(); i += stride) out.push_back(track[i]);
  return out;
}

InteractionSample downsample(const InteractionSample& sample, double dst_hz) {
  InteractionSample out = sample;
  out.user_track = downsample(sample.user_track, sample.fps, dst_hz);
  out.responder_track = downsample(sample.responder_track, sample.fps, dst_hz);
  out.fps = dst_hz;
  return out;
}

std::vector<TrainingPair> extract_pairs(const InteractionSample& sample,
                                        const ExtractConfig& cfg) {
  sample.validate();
  const std::size_t frames = sample.frame_count();
  const std::size_t m = static_cast<std::size_t>(cfg.m);
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  if (frames < m + n) {
    throw Error(ErrorCode::kTooShort,
                "sample '" + sample.sample_id + "' has " + std::to_string(frames) +
                    " frames; need at least " + std::to_string(m + n));
  }

  // convert both tracks once
  const int user_dim = cfg.user_dim();
  const int robot_dim = cfg.robot_dim();
  std::vector<std::vector<double>> user(frames), robot(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    if (cfg.user_repr == UserRepr::kDirectionVectors) {
      UserPoseVec v = normalize_user_pose(sample.user_track[t], cfg.norm);
      user[t].assign(v.values.begin(), v.values.end());
    } else {
      auto flat = pose_to_flat27(sample.user_track[t]);
      user[t].assign(flat.begin(), flat.end());
    }
    if (cfg.robot_repr == RobotRepr::kJointAngles) {
      RobotJointAngles a = skeleton_to_joint_angles(sample.responder_track[t], cfg.limits);
      robot[t].assign(a.angles.begin(), a.angles.end());
    } else {
      UserPoseVec v = robot_pose_to_vec25(sample.responder_track[t], cfg.norm);
      robot[t].assign(v.values.begin(), v.values.end());
    }
  }

  std::vector<TrainingPair> pairs;
  pairs.reserve(frames - m - n + 1);
  for (std::size_t t = m - 1; t + n < frames; ++t) {
    TrainingPair pair;
    pair.scenario = sample.scenario;
    pair.user_window.reserve(m * user_dim);
    for (std::size_t k = t + 1 - m; k <= t; ++k) {
      pair.user_window.insert(pair.user_window.end(), user[k].begin(), user[k].end());
    }
    pair.seed = robot[t];
    pair.target.reserve(n * robot_dim);
    pair.future_target.reserve(n * robot_dim);
    for (std::size_t s = 1; s <= n; ++s) {
      pair.target.insert(pair.target.end(), robot[t + s].begin(), robot[t + s].end());
      std::size_t fut = std::min(t + cfg.future_offset + s, frames - 1);
      pair.future_target.insert(pair.future_target.end(), robot[fut].begin(),
                                robot[fut].end());
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

DatasetManifest split_dataset(const std::vector<InteractionSample>& samples,
                              double test_fraction, std::uint64_t rng_seed) {
  if (samples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "split_dataset: no samples");
  }

  // group ids in deterministic order
  std::map<std::pair<int, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    groups[{samples[i].scenario, samples[i].subject_id}].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> order;
  order.reserve(groups.size());
  for (const auto& [key, members] : groups) order.push_back(&members);

  Rng rng(rng_seed);
  rng.shuffle(order);

  const auto target =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(samples.size())));
  std::vector<Split> assigned(samples.size(), Split::kTrain);
  std::size_t test_count = 0;
  for (const auto* members : order) {
    if (test_count >= target) break;
    for (std::size_t idx : *members) assigned[idx] = Split::kTest;
    test_count += members->size();
  }

  DatasetManifest manifest;
  manifest.entries.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    manifest.entries.push_back(
        {samples[i].sample_id, samples[i].scenario, samples[i].subject_id, assigned[i]});
  }
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path + ": cannot open for writing");
  out << "# train=" << manifest.count(Split::kTrain) << " test=" << manifest.count(Split::kTest)
      << "\n";
  out << "sample_id,scenario,subject_id,split\n";
  for (const auto& e : manifest.entries) {
    out << e.sample_id << ',' << e.scenario << ',' << e.subject_id << ','
        << (e.split == Split::kTrain ? "train" : "test") << "\n";
  }
  if (!out) throw Error(ErrorCode::kIoError, path + ": write failed");
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, path + ": cannot open for reading");
  DatasetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line);
    if (fields.size() != 4) parse_error(path, line_no, "expected 4 fields");
    if (fields[0] == "sample_id") continue;  // column header
    ManifestEntry e;
    e.sample_id = fields[0];
    e.scenario = static_cast<int>(parse_int(fields[1], path, line_no));
    e.subject_id = fields[2];
    if (fields[3] == "train") {
      e.split = Split::kTrain;
    } else if (fields[3] == "test") {
      e.split = Split::kTest;
    } else {
      parse_error(path, line_no, "split must be 'train' or 'test'");
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void export_sample(const InteractionSample& sample, const std::string& path) {
  sample.validate();
  std::string buf;
  buf += "fps,";
  append_double(buf, sample.fps);
  buf += "\n";
  for (std::size_t t = 0; t < sample.frame_count(); ++t) {
    buf += sample.sample_id;
    buf += ',';
    buf += std::to_string(sample.scenario);
    buf += ',';
    buf += sample.subject_id;
    buf += ',';
    buf += std::to_string(t);
    for (const auto* track : {&sample.user_track, &sample.responder_track}) {
      for (const Vec3& j : (*track)[t].joints) {
        buf += ',';
        append_double(buf, j.x);
        buf += ',';
        append_double(buf, j.y);
        buf += ',';
        append_double(buf, j.z);
      }
    }
    buf += "\n";
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path + ": cannot open for writing");
  out << buf;
  if (!out) throw Error(ErrorCode::kIoError, path + ": write failed");
}

InteractionSample import_skeleton_file(const std::string& path,
                                       const std::array<int, 9>* joint_map) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, path + ": cannot open for reading");

  std::array<int, 9> map{};
  if (joint_map) {
    map = *joint_map;
  } else {
    for (int k = 0; k < 9; ++k) map[k] = k;
  }

  InteractionSample sample;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t source_joints = 0;
  std::size_t expect_fields = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line);

    if (!have_header) {
      if (fields.size() != 2 || fields[0] != "fps") {
        parse_error(path, line_no, "expected header record 'fps,<hz>'");
      }
      sample.fps = parse_double(fields[1], path, line_no);
      have_header = true;
      continue;
    }

    if (sample.user_track.empty() && expect_fields == 0) {
      // joint count per person from the first frame record
      if (fields.size() < 4 || (fields.size() - 4) % 6 != 0) {
        parse_error(path, line_no, "frame record must have 4 + 6*J fields");
      }
      source_joints = (fields.size() - 4) / 6;
      expect_fields = fields.size();
      for (int k = 0; k < 9; ++k) {
        if (map[k] < 0 || static_cast<std::size_t>(map[k]) >= source_joints) {
          throw Error(ErrorCode::kMissingJoint,
                      path + ": canonical joint " + std::to_string(k + 1) +
                          " maps to source joint " + std::to_string(map[k]) +
                          " but the file has only " + std::to_string(source_joints) +
                          " joints");
        }
      }
      sample.sample_id = fields[0];
      sample.scenario = static_cast<int>(parse_int(fields[1], path, line_no));
      sample.subject_id = fields[2];
    }

    if (fields.size() != expect_fields) {
      parse_error(path, line_no,
                  "expected " + std::to_string(expect_fields) + " fields, got " +
                      std::to_string(fields.size()));
    }
    if (fields[0] != sample.sample_id || fields[2] != sample.subject_id ||
        parse_int(fields[1], path, line_no) != sample.scenario) {
      parse_error(path, line_no, "frame record disagrees with the first record");
    }
    long frame_index = parse_int(fields[3], path, line_no);
    if (frame_index != static_cast<long>(sample.user_track.size())) {
      parse_error(path, line_no,
                  "frame_index " + std::to_string(frame_index) + " out of order");
    }

    auto read_pose = [&](std::size_t base) {
      HumanPose pose;
      for (int k = 0; k < 9; ++k) {
        std::size_t at = base + 3 * static_cast<std::size_t>(map[k]);
        pose.joints[k].x = parse_double(fields[at + 0], path, line_no);
        pose.joints[k].y = parse_double(fields[at + 1], path, line_no);
        pose.joints[k].z = parse_double(fields[at + 2], path, line_no);
      }
      return pose;
    };
    sample.user_track.push_back(read_pose(4));
    sample.responder_track.push_back(read_pose(4 + 3 * source_joints));
  }

  if (!have_header) {
    throw Error(ErrorCode::kParseError, path + ": missing 'fps' header record");
  }
  sample.validate();
  return sample;
}

void save_dataset_dir(const std::vector<InteractionSample>& samples, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, dir + ": " + ec.message());
  for (const auto& s : samples) {
    export_sample(s, (fs::path(dir) / (s.sample_id + ".csv")).string());
  }
}

std::vector<InteractionSample> load_dataset_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, dir + ": not a directory");
  }
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<InteractionSample> samples;
  samples.reserve(paths.size());
  for (const auto& p : paths) samples.push_back(import_skeleton_file(p));
  return samples;
}

namespace {
constexpr char kPairMagic[8] = {'S', 'B', 'G', 'P', 'A', 'I', 'R', '1'};
}

void write_pair_archive(const std::string& path, const std::vector<TrainingPair>& pairs,
                        const ExtractConfig& cfg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, path + ": cannot open for writing");
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  out.write(kPairMagic, 8);
  put_u64(pairs.size());
  put_u64(static_cast<std::uint64_t>(cfg.m));
  put_u64(static_cast<std::uint64_t>(cfg.n));
  put_u64(static_cast<std::uint64_t>(cfg.future_offset));
  put_u64(static_cast<std::uint64_t>(cfg.user_dim()));
  put_u64(static_cast<std::uint64_t>(cfg.robot_dim()));
  for (const auto& p : pairs) {
    put_u64(static_cast<std::uint64_t>(p.scenario));
    for (const auto* block : {&p.user_window, &p.seed, &p.target, &p.future_target}) {
      out.write(reinterpret_cast<const char*>(block->data()),
                static_cast<std::streamsize>(block->size() * sizeof(double)));
    }
  }
  if (!out) throw Error(ErrorCode::kIoError, path + ": write failed");
}

std::vector<TrainingPair> read_pair_archive(const std::string& path, ExtractConfig* cfg_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, path + ": cannot open for reading");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kPairMagic, 8) != 0) {
    throw Error(ErrorCode::kParseError, path + ": not a pair archive");
  }
  auto get_u64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  std::uint64_t count = get_u64();
  std::uint64_t m = get_u64(), n = get_u64(), l = get_u64();
  std::uint64_t user_dim = get_u64(), robot_dim = get_u64();
  if (!in) throw Error(ErrorCode::kParseError, path + ": truncated header");

  ExtractConfig cfg;
  cfg.m = static_cast<int>(m);
  cfg.n = static_cast<int>(n);
  cfg.future_offset = static_cast<int>(l);
  cfg.user_repr = user_dim == 25 ? UserRepr::kDirectionVectors : UserRepr::kPositions3d;
  cfg.robot_repr = robot_dim == 10 ? RobotRepr::kJointAngles : RobotRepr::kDirectionVectors;
  if (cfg_out) *cfg_out = cfg;

  std::vector<TrainingPair> pairs(count);
  for (auto& p : pairs) {
    p.scenario = static_cast<int>(get_u64());
    p.user_window.resize(m * user_dim);
    p.seed.resize(robot_dim);
    p.target.resize(n * robot_dim);
    p.future_target.resize(n * robot_dim);
    for (auto* block : {&p.user_window, &p.seed, &p.target, &p.future_target}) {
      in.read(reinterpret_cast<char*>(block->data()),
              static_cast<std::streamsize>(block->size() * sizeof(double)));
    }
    if (!in) throw Error(ErrorCode::kParseError, path + ": truncated pair data");
  }
  return pairs;
}

}  // namespace sbg
