#include "core/formats.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "core/binary_io.hpp"

namespace mmt {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

[[noreturn]] void parse_fail(const std::string& path, int64_t line, const std::string& msg) {
  throw Error(ErrorCode::Parse, path + ":" + std::to_string(line) + ": " + msg);
}

/// Reads a manifest up to end_header: first line must be `magic`, the rest
/// are `key value...` lines collected verbatim.
struct Manifest {
  std::map<std::string, std::string> entries;
  std::vector<std::string> anchors;  // repeated-key lines kept in order
  int64_t lines = 0;

  const std::string& need(const std::string& path, const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end())
      throw Error(ErrorCode::Parse, path + ": manifest is missing key '" + key + "'");
    return it->second;
  }

  int64_t need_int(const std::string& path, const std::string& key) const {
    const std::string& s = need(path, key);
    try {
      return std::stoll(s);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, path + ": key '" + key + "' has non-integer value '" + s + "'");
    }
  }

  double need_real(const std::string& path, const std::string& key) const {
    const std::string& s = need(path, key);
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, path + ": key '" + key + "' has non-numeric value '" + s + "'");
    }
  }
};

Manifest read_manifest(std::istream& in, const std::string& path, const std::string& magic) {
  Manifest m;
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++m.lines;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != magic)
    parse_fail(path, 1, "expected magic '" + magic + "', found '" + line + "'");
  for (;;) {
    if (!std::getline(in, line)) parse_fail(path, m.lines, "manifest has no end_header");
    ++m.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") break;
    auto space = line.find(' ');
    if (space == std::string::npos || space == 0)
      parse_fail(path, m.lines, "malformed manifest line '" + line + "'");
    std::string key = line.substr(0, space);
    std::string value = line.substr(space + 1);
    if (key == "anchor") {
      m.anchors.push_back(value);
    } else {
      if (m.entries.count(key)) parse_fail(path, m.lines, "duplicate key '" + key + "'");
      m.entries[key] = value;
    }
  }
  return m;
}

void read_f32_payload(std::istream& in, const std::string& path, size_t count, double* out) {
  std::vector<unsigned char> buf(count * 4);
  read_exact(in, buf.data(), buf.size(), path + " payload");
  for (size_t i = 0; i < count; ++i) {
    float f = bytes_to_f32_le(buf.data() + i * 4);
    out[i] = double(f);
  }
  char extra;
  if (in.read(&extra, 1) && in.gcount() == 1)
    throw Error(ErrorCode::Parse, path + ": trailing bytes after payload");
}

void write_f32_payload(std::ostream& out, const std::string& path, const double* values,
                       size_t count) {
  std::vector<unsigned char> buf(count * 4);
  for (size_t i = 0; i < count; ++i) f32_to_bytes_le(float(values[i]), buf.data() + i * 4);
  write_exact(out, buf.data(), buf.size(), path + " payload");
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_trajectories(const TrajectorySet& trajs, const std::string& path) {
  trajs.validate();
  auto out = open_out(path);
  out << "MMTJ\nversion 1\nK " << trajs.trajectory_count << "\nT " << trajs.frame_count
      << "\nscale " << format_real(trajs.scale) << "\nsource " << trajs.source
      << "\ncomponent_labels";
  for (int32_t l : trajs.labels) out << " " << l;
  out << "\nend_header\n";

  std::vector<double> flat;
  flat.reserve(trajs.positions.size() * 3);
  for (const Vec3& p : trajs.positions) {
    flat.push_back(p.x);
    flat.push_back(p.y);
    flat.push_back(p.z);
  }
  write_f32_payload(out, path, flat.data(), flat.size());
}

TrajectorySet load_trajectories(const std::string& path) {
  auto in = open_in(path);
  Manifest m = read_manifest(in, path, "MMTJ");
  if (m.need_int(path, "version") != 1)
    throw Error(ErrorCode::Unsupported, path + ": unsupported version");

  TrajectorySet trajs;
  trajs.trajectory_count = m.need_int(path, "K");
  trajs.frame_count = m.need_int(path, "T");
  trajs.scale = m.need_real(path, "scale");
  trajs.source = m.need(path, "source");
  if (trajs.trajectory_count < 0 || trajs.frame_count < 2)
    throw Error(ErrorCode::Parse, path + ": invalid K/T");
  if (trajs.source != "full" && trajs.source != "masked")
    throw Error(ErrorCode::Parse, path + ": source must be 'full' or 'masked'");

  std::istringstream labels(m.need(path, "component_labels"));
  int32_t l;
  while (labels >> l) trajs.labels.push_back(l);
  if (int64_t(trajs.labels.size()) != trajs.trajectory_count)
    throw Error(ErrorCode::Parse, path + ": component_labels has " +
                                      std::to_string(trajs.labels.size()) + " entries for K = " +
                                      std::to_string(trajs.trajectory_count));

  size_t count = size_t(trajs.trajectory_count * trajs.frame_count);
  std::vector<double> flat(count * 3);
  read_f32_payload(in, path, flat.size(), flat.data());
  trajs.positions.resize(count);
  for (size_t i = 0; i < count; ++i)
    trajs.positions[i] = {flat[i * 3], flat[i * 3 + 1], flat[i * 3 + 2]};
  trajs.validate();
  return trajs;
}

void save_prior(const SpatPrior& prior, const std::string& path) {
  prior.validate();
  auto out = open_out(path);
  out << "MMSP\nversion 1\nT " << prior.frame_count << "\ncomponents "
      << prior.component_count() << "\n";
  for (const Vec3& a : prior.anchors)
    out << "anchor " << format_real(a.x) << " " << format_real(a.y) << " " << format_real(a.z)
        << "\n";
  out << "end_header\n";

  std::vector<double> flat;
  flat.reserve(size_t(prior.step_count()) * prior.components.size() * 12);
  for (int64_t t = 0; t < prior.step_count(); ++t)
    for (const auto& seq : prior.components) {
      const RigidTransform& step = seq[size_t(t)];
      for (double v : step.rotation.m) flat.push_back(v);
      flat.push_back(step.translation.x);
      flat.push_back(step.translation.y);
      flat.push_back(step.translation.z);
    }
  write_f32_payload(out, path, flat.data(), flat.size());
}

SpatPrior load_prior(const std::string& path) {
  auto in = open_in(path);
  Manifest m = read_manifest(in, path, "MMSP");
  if (m.need_int(path, "version") != 1)
    throw Error(ErrorCode::Unsupported, path + ": unsupported version");

  SpatPrior prior;
  prior.frame_count = m.need_int(path, "T");
  int64_t c = m.need_int(path, "components");
  if (prior.frame_count < 2 || c < 1) throw Error(ErrorCode::Parse, path + ": invalid T/components");
  if (int64_t(m.anchors.size()) != c)
    throw Error(ErrorCode::Parse, path + ": expected " + std::to_string(c) + " anchor lines, got " +
                                      std::to_string(m.anchors.size()));
  for (const std::string& s : m.anchors) {
    std::istringstream ls(s);
    Vec3 a;
    if (!(ls >> a.x >> a.y >> a.z)) throw Error(ErrorCode::Parse, path + ": malformed anchor line");
    prior.anchors.push_back(a);
  }

  size_t count = size_t(prior.step_count()) * size_t(c) * 12;
  std::vector<double> flat(count);
  read_f32_payload(in, path, count, flat.data());

  prior.components.assign(size_t(c), std::vector<RigidTransform>(size_t(prior.step_count())));
  size_t at = 0;
  for (int64_t t = 0; t < prior.step_count(); ++t)
    for (int64_t ci = 0; ci < c; ++ci) {
      RigidTransform& step = prior.components[size_t(ci)][size_t(t)];
      for (int i = 0; i < 9; ++i) step.rotation.m[i] = flat[at++];
      step.translation = {flat[at], flat[at + 1], flat[at + 2]};
      at += 3;
      // float32 storage wobbles the rotation a few ulps past the SO(3)
      // tolerance; snap it back.
      if (rotation_drift(step.rotation) > 1e-10)
        step.rotation = orthonormalize(step.rotation);
    }
  prior.validate();
  return prior;
}

void save_field(const VelocityField& field, const std::string& path) {
  field.validate();
  auto out = open_out(path);
  out << "MMVF\nversion 1\nN " << field.point_count << "\nT " << field.frame_count()
      << "\nend_header\n";
  std::vector<double> flat;
  flat.reserve(field.v.size() * 3);
  for (const Vec3& v : field.v) {
    flat.push_back(v.x);
    flat.push_back(v.y);
    flat.push_back(v.z);
  }
  write_f32_payload(out, path, flat.data(), flat.size());
}

VelocityField load_field(const std::string& path) {
  auto in = open_in(path);
  Manifest m = read_manifest(in, path, "MMVF");
  if (m.need_int(path, "version") != 1)
    throw Error(ErrorCode::Unsupported, path + ": unsupported version");
  VelocityField field;
  field.point_count = m.need_int(path, "N");
  int64_t t = m.need_int(path, "T");
  if (field.point_count < 0 || t < 2) throw Error(ErrorCode::Parse, path + ": invalid N/T");
  field.steps = t - 1;
  std::vector<double> flat(size_t(field.steps * field.point_count) * 3);
  read_f32_payload(in, path, flat.size(), flat.data());
  field.v.resize(size_t(field.steps * field.point_count));
  for (size_t i = 0; i < field.v.size(); ++i)
    field.v[i] = {flat[i * 3], flat[i * 3 + 1], flat[i * 3 + 2]};
  field.validate();
  return field;
}

void save_tracks(const Track2DSet& tracks, const std::string& path) {
  tracks.validate();
  auto out = open_out(path);
  out << "MMTK\nK " << tracks.track_count << "\nT " << tracks.frame_count << "\nend_header\n";
  for (size_t i = 0; i < tracks.u.size(); ++i)
    out << format_real(tracks.u[i]) << " " << format_real(tracks.v[i]) << " "
        << int(tracks.visible[i] ? 1 : 0) << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

Track2DSet load_tracks(const std::string& path) {
  auto in = open_in(path);
  Manifest m = read_manifest(in, path, "MMTK");
  Track2DSet tracks;
  tracks.track_count = m.need_int(path, "K");
  tracks.frame_count = m.need_int(path, "T");
  if (tracks.track_count < 1 || tracks.frame_count < 2)
    throw Error(ErrorCode::Parse, path + ": invalid K/T");
  size_t count = size_t(tracks.track_count * tracks.frame_count);
  tracks.u.resize(count);
  tracks.v.resize(count);
  tracks.visible.resize(count);
  for (size_t i = 0; i < count; ++i) {
    double uu, vv;
    int vis;
    if (!(in >> uu >> vv >> vis))
      throw Error(ErrorCode::Parse,
                  path + ": truncated at sample " + std::to_string(i) + " of " +
                      std::to_string(count));
    tracks.u[i] = uu;
    tracks.v[i] = vv;
    tracks.visible[i] = vis ? 1 : 0;
  }
  tracks.validate();
  return tracks;
}

void save_cameras(std::span<const CameraModel> cameras, const std::string& path) {
  auto out = open_out(path);
  for (const CameraModel& cam : cameras) {
    out << format_real(cam.fx) << " " << format_real(cam.fy) << " " << format_real(cam.cx) << " "
        << format_real(cam.cy);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << " " << format_real(cam.pose.rotation(r, c));
      out << " " << format_real(cam.pose.translation[r]);
    }
    out << "\n";
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::vector<CameraModel> load_cameras(const std::string& path, int width, int height) {
  auto in = open_in(path);
  std::vector<CameraModel> cameras;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    CameraModel cam;
    cam.width = width;
    cam.height = height;
    double m[12];
    if (!(ls >> cam.fx >> cam.fy >> cam.cx >> cam.cy)) parse_fail(path, line_no, "bad intrinsics");
    for (int i = 0; i < 12; ++i)
      if (!(ls >> m[i])) parse_fail(path, line_no, "camera-to-world matrix needs 12 numbers");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cam.pose.rotation(r, c) = m[r * 4 + c];
      cam.pose.translation[r] = m[r * 4 + 3];
    }
    if (!is_rotation(cam.pose.rotation, 1e-6))
      parse_fail(path, line_no, "pose rotation is not orthonormal");
    // Text round-trips can still carry ~1e-7 wobble; snap to SO(3).
    cam.pose.rotation = orthonormalize(cam.pose.rotation);
    cameras.push_back(cam);
  }
  if (cameras.empty()) throw Error(ErrorCode::Parse, path + ": no camera lines");
  return cameras;
}

std::vector<int64_t> load_indices(const std::string& path) {
  auto in = open_in(path);
  std::vector<int64_t> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(std::stoll(line));
    } catch (const std::exception&) {
      parse_fail(path, line_no, "not an index: '" + line + "'");
    }
  }
  return out;
}

void save_indices(std::span<const int64_t> indices, const std::string& path) {
  auto out = open_out(path);
  for (int64_t i : indices) out << i << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::vector<int32_t> load_labels(const std::string& path) {
  auto in = open_in(path);
  std::vector<int32_t> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    try {
      out.push_back(int32_t(std::stol(line)));
    } catch (const std::exception&) {
      parse_fail(path, line_no, "not a label: '" + line + "'");
    }
  }
  return out;
}

void save_labels(std::span<const int32_t> labels, const std::string& path) {
  auto out = open_out(path);
  for (int32_t l : labels) out << l << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::vector<LabelSeed> load_label_seeds(const std::string& path) {
  auto in = open_in(path);
  std::vector<LabelSeed> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    LabelSeed seed;
    if (!(ls >> seed.index >> seed.label))
      parse_fail(path, line_no, "expected 'point_index component_label'");
    out.push_back(seed);
  }
  return out;
}

void write_loss_trace_csv(const std::vector<LossTraceRow>& trace, const std::string& path) {
  auto out = open_out(path);
  out << "sweep,t,L_kin,L_topo,L_total\n";
  for (const auto& row : trace)
    out << row.sweep << "," << row.step << "," << format_real(row.kinematic) << ","
        << format_real(row.topological) << "," << format_real(row.total) << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "frame,psnr_db,ssim\n";
  for (const auto& row : rows)
    out << row.frame << "," << format_real(row.psnr_db) << "," << format_real(row.ssim) << "\n";
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace mmt
