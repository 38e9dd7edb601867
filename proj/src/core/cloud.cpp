#include "core/cloud.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "core/binary_io.hpp"

namespace mmt {

int32_t TargetCloud::components() const {
  int32_t c = 0;
  for (int32_t l : labels) c = std::max(c, l + 1);
  return c;
}

void TargetCloud::validate() const {
  const size_t n = positions.size();
  if (colors.size() != n || labels.size() != n || radii.size() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "cloud arrays disagree on point count (" + std::to_string(n) + " positions, " +
                    std::to_string(colors.size()) + " colors, " + std::to_string(labels.size()) +
                    " labels, " + std::to_string(radii.size()) + " radii)");
  for (size_t i = 0; i < n; ++i) {
    if (!all_finite(positions[i]))
      throw Error(ErrorCode::InvalidArgument, "non-finite position at point " + std::to_string(i));
    if (labels[i] < 0)
      throw Error(ErrorCode::LabelOutOfRange, "negative label at point " + std::to_string(i));
    if (!(radii[i] > 0.0))
      throw Error(ErrorCode::InvalidArgument,
                  "non-positive splat radius at point " + std::to_string(i));
  }
  // Labels must be dense: every component in [0, C) occupied.
  int32_t c = components();
  std::vector<char> seen(size_t(c), 0);
  for (int32_t l : labels) seen[size_t(l)] = 1;
  for (int32_t l = 0; l < c; ++l)
    if (!seen[size_t(l)])
      throw Error(ErrorCode::LabelOutOfRange,
                  "labels are not dense: component " + std::to_string(l) + " is empty while " +
                      std::to_string(c - 1) + " is used");
}

namespace {

enum class PlyType { Char, UChar, Short, UShort, Int, UInt, Float, Double };

size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::Char:
    case PlyType::UChar: return 1;
    case PlyType::Short:
    case PlyType::UShort: return 2;
    case PlyType::Int:
    case PlyType::UInt:
    case PlyType::Float: return 4;
    case PlyType::Double: return 8;
  }
  return 0;
}

bool ply_type_from_name(const std::string& s, PlyType& out) {
  if (s == "char" || s == "int8") out = PlyType::Char;
  else if (s == "uchar" || s == "uint8") out = PlyType::UChar;
  else if (s == "short" || s == "int16") out = PlyType::Short;
  else if (s == "ushort" || s == "uint16") out = PlyType::UShort;
  else if (s == "int" || s == "int32") out = PlyType::Int;
  else if (s == "uint" || s == "uint32") out = PlyType::UInt;
  else if (s == "float" || s == "float32") out = PlyType::Float;
  else if (s == "double" || s == "float64") out = PlyType::Double;
  else return false;
  return true;
}

bool ply_type_is_integer(PlyType t) { return t != PlyType::Float && t != PlyType::Double; }

double ply_integer_max(PlyType t) {
  switch (t) {
    case PlyType::Char: return 127.0;
    case PlyType::UChar: return 255.0;
    case PlyType::Short: return 32767.0;
    case PlyType::UShort: return 65535.0;
    case PlyType::Int: return 2147483647.0;
    case PlyType::UInt: return 4294967295.0;
    default: return 1.0;
  }
}

double decode_le(PlyType t, const unsigned char* b) {
  switch (t) {
    case PlyType::Char: return double(int8_t(b[0]));
    case PlyType::UChar: return double(b[0]);
    case PlyType::Short: return double(int16_t(bytes_to_u16_le(b)));
    case PlyType::UShort: return double(bytes_to_u16_le(b));
    case PlyType::Int: return double(int32_t(bytes_to_u32_le(b)));
    case PlyType::UInt: return double(bytes_to_u32_le(b));
    case PlyType::Float: return double(bytes_to_f32_le(b));
    case PlyType::Double: return bytes_to_f64_le(b);
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float;
  bool is_list = false;
  PlyType count_type = PlyType::UChar;
};

struct PlyElement {
  std::string name;
  int64_t count = 0;
  std::vector<PlyProperty> properties;
};

// What each vertex property feeds. Slot -1 = skipped (warned once).
enum Slot { kX, kY, kZ, kRed, kGreen, kBlue, kLabel, kRadius, kSkip = -1 };

int slot_for(const std::string& name) {
  if (name == "x") return kX;
  if (name == "y") return kY;
  if (name == "z") return kZ;
  if (name == "red") return kRed;
  if (name == "green") return kGreen;
  if (name == "blue") return kBlue;
  if (name == "label") return kLabel;
  if (name == "radius") return kRadius;
  return kSkip;
}

[[noreturn]] void parse_fail(const std::string& path, int64_t line, const std::string& msg) {
  throw Error(ErrorCode::Parse, path + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

CloudLoadResult load_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");

  int64_t line_no = 0;
  auto next_line = [&](std::string& line) {
    if (!std::getline(in, line)) parse_fail(path, line_no, "unexpected end of header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  std::string line;
  next_line(line);
  if (line != "ply") parse_fail(path, line_no, "not a PLY file (magic line is '" + line + "')");

  bool binary = false;
  bool format_seen = false;
  std::vector<PlyElement> elements;
  for (;;) {
    next_line(line);
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word.empty() || word == "comment" || word == "obj_info") continue;
    if (word == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else if (fmt == "binary_big_endian")
        throw Error(ErrorCode::Unsupported, path + ": big-endian PLY is not supported");
      else parse_fail(path, line_no, "unknown format '" + fmt + "'");
      format_seen = true;
    } else if (word == "element") {
      PlyElement el;
      if (!(ls >> el.name >> el.count) || el.count < 0)
        parse_fail(path, line_no, "malformed element line");
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) parse_fail(path, line_no, "property before any element");
      PlyProperty prop;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, vt;
        if (!(ls >> ct >> vt >> prop.name)) parse_fail(path, line_no, "malformed list property");
        prop.is_list = true;
        if (!ply_type_from_name(ct, prop.count_type) || !ply_type_from_name(vt, prop.type))
          parse_fail(path, line_no, "unknown list property type");
      } else {
        if (!ply_type_from_name(t, prop.type))
          parse_fail(path, line_no, "unknown property type '" + t + "'");
        if (!(ls >> prop.name)) parse_fail(path, line_no, "property without a name");
      }
      elements.back().properties.push_back(prop);
    } else if (word == "end_header") {
      break;
    } else {
      parse_fail(path, line_no, "unrecognized header line '" + line + "'");
    }
  }
  if (!format_seen) parse_fail(path, line_no, "header has no format line");

  auto vertex_it = std::find_if(elements.begin(), elements.end(),
                                [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) parse_fail(path, line_no, "no vertex element");

  CloudLoadResult result;
  TargetCloud& cloud = result.cloud;
  const int64_t n = vertex_it->count;

  // Slot per property; warn once per skipped name.
  std::vector<int> slots;
  bool have[8] = {false, false, false, false, false, false, false, false};
  for (const auto& prop : vertex_it->properties) {
    int s = prop.is_list ? kSkip : slot_for(prop.name);
    slots.push_back(s);
    if (s == kSkip)
      result.warnings.push_back("skipped unsupported vertex property '" + prop.name + "'");
    else
      have[s] = true;
  }
  if (!(have[kX] && have[kY] && have[kZ]))
    parse_fail(path, line_no, "vertex element lacks x, y, z properties");
  const bool have_radius = have[kRadius];

  cloud.positions.resize(size_t(n));
  cloud.colors.assign(size_t(n), {0.5, 0.5, 0.5});
  cloud.labels.assign(size_t(n), 0);
  cloud.radii.assign(size_t(n), 0.0);

  auto store = [&](int64_t i, int slot, double value, PlyType type) {
    switch (slot) {
      case kX: cloud.positions[size_t(i)].x = value; break;
      case kY: cloud.positions[size_t(i)].y = value; break;
      case kZ: cloud.positions[size_t(i)].z = value; break;
      case kRed:
      case kGreen:
      case kBlue: {
        double c = ply_type_is_integer(type) ? value / ply_integer_max(type) : value;
        cloud.colors[size_t(i)][slot - kRed] = c;
        break;
      }
      case kLabel: cloud.labels[size_t(i)] = int32_t(value); break;
      case kRadius: cloud.radii[size_t(i)] = value; break;
      default: break;
    }
  };

  // Payload, element by element in declared order. Elements after vertex are
  // never needed; elements before it must be skippable.
  for (const auto& el : elements) {
    const bool is_vertex = (&el == &*vertex_it);
    if (!is_vertex) {
      if (&el > &*vertex_it) break;  // nothing past the vertices matters
      for (const auto& p : el.properties)
        if (p.is_list && binary)
          throw Error(ErrorCode::Unsupported,
                      "cannot skip binary list property '" + p.name + "' of element '" + el.name +
                          "' preceding the vertices in '" + path + "'");
    }

    if (binary) {
      std::vector<unsigned char> buf(8);
      for (int64_t i = 0; i < el.count; ++i) {
        for (size_t pi = 0; pi < el.properties.size(); ++pi) {
          const auto& p = el.properties[pi];
          if (p.is_list) {  // vertex lists were rejected above; skip payload
            read_exact(in, buf.data(), ply_type_size(p.count_type), path + " list count");
            int64_t cnt = int64_t(decode_le(p.count_type, buf.data()));
            for (int64_t j = 0; j < cnt; ++j)
              read_exact(in, buf.data(), ply_type_size(p.type), path + " list entry");
            continue;
          }
          read_exact(in, buf.data(), ply_type_size(p.type),
                     path + " " + el.name + " " + std::to_string(i) + " '" + p.name + "'");
          if (is_vertex) store(i, slots[pi], decode_le(p.type, buf.data()), p.type);
        }
      }
    } else {
      for (int64_t i = 0; i < el.count; ++i) {
        for (size_t pi = 0; pi < el.properties.size(); ++pi) {
          const auto& p = el.properties[pi];
          int64_t repeats = 1;
          if (p.is_list) {
            double cnt;
            if (!(in >> cnt))
              parse_fail(path, line_no, el.name + " " + std::to_string(i) + ": bad list count");
            repeats = int64_t(cnt);
          }
          for (int64_t j = 0; j < repeats; ++j) {
            double value;
            if (!(in >> value))
              parse_fail(path, line_no,
                         el.name + " " + std::to_string(i) + ": bad value for '" + p.name + "'");
            if (is_vertex && !p.is_list) store(i, slots[pi], value, p.type);
          }
        }
      }
    }
  }

  if (!have_radius) {
    double diag = n > 0 ? compute_aabb(cloud.positions).diagonal() : 0.0;
    double r = diag > 0.0 ? 0.01 * diag : 0.01;
    std::fill(cloud.radii.begin(), cloud.radii.end(), r);
  }

  cloud.validate();
  return result;
}

void save_cloud(const TargetCloud& cloud, const std::string& path, bool binary) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");

  out << "ply\n"
      << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "property int label\n"
      << "property double radius\n"
      << "end_header\n";

  auto quantize = [](double c) {
    long v = std::lround(std::clamp(c, 0.0, 1.0) * 255.0);
    return (unsigned char)(v);
  };

  if (binary) {
    std::vector<unsigned char> row(3 * 8 + 3 + 4 + 8);
    for (int64_t i = 0; i < cloud.size(); ++i) {
      unsigned char* b = row.data();
      f64_to_bytes_le(cloud.positions[size_t(i)].x, b);
      f64_to_bytes_le(cloud.positions[size_t(i)].y, b + 8);
      f64_to_bytes_le(cloud.positions[size_t(i)].z, b + 16);
      b[24] = quantize(cloud.colors[size_t(i)].x);
      b[25] = quantize(cloud.colors[size_t(i)].y);
      b[26] = quantize(cloud.colors[size_t(i)].z);
      u32_to_bytes_le(uint32_t(cloud.labels[size_t(i)]), b + 27);
      f64_to_bytes_le(cloud.radii[size_t(i)], b + 31);
      write_exact(out, row.data(), row.size(), path);
    }
  } else {
    char buf[256];
    for (int64_t i = 0; i < cloud.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d %d %d %d %.17g\n",
                    cloud.positions[size_t(i)].x, cloud.positions[size_t(i)].y,
                    cloud.positions[size_t(i)].z, int(quantize(cloud.colors[size_t(i)].x)),
                    int(quantize(cloud.colors[size_t(i)].y)),
                    int(quantize(cloud.colors[size_t(i)].z)), int(cloud.labels[size_t(i)]),
                    cloud.radii[size_t(i)]);
      out << buf;
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

NormalizeResult normalize_cloud(TargetCloud& cloud) {
  if (cloud.size() < 2)
    throw Error(ErrorCode::TooFewPoints, "normalization needs at least 2 points");
  Vec3 centroid;
  for (const Vec3& p : cloud.positions) centroid += p;
  centroid *= 1.0 / double(cloud.size());
  double diag = compute_aabb(cloud.positions).diagonal();
  if (!(diag > 0.0))
    throw Error(ErrorCode::DegenerateCloud, "bounding-box diagonal is zero; cannot normalize");

  for (Vec3& p : cloud.positions) p = (p - centroid) / diag;
  for (double& r : cloud.radii) r /= diag;
  return {diag, centroid};
}

void assign_labels(TargetCloud& cloud, std::span<const int32_t> labels) {
  if (int64_t(labels.size()) != cloud.size())
    throw Error(ErrorCode::DimensionMismatch,
                "label list has " + std::to_string(labels.size()) + " entries for " +
                    std::to_string(cloud.size()) + " points");
  cloud.labels.assign(labels.begin(), labels.end());
  cloud.validate();
}

void assign_labels_by_seeds(TargetCloud& cloud, const NeighborGraph& graph,
                            std::span<const LabelSeed> seeds) {
  const int64_t n = cloud.size();
  if (graph.count != n)
    throw Error(ErrorCode::DimensionMismatch, "graph was built over a different point count");
  if (seeds.empty()) throw Error(ErrorCode::InvalidSeed, "no labeling seeds given");
  for (const auto& s : seeds) {
    if (s.index < 0 || s.index >= n)
      throw Error(ErrorCode::InvalidSeed, "seed index " + std::to_string(s.index) + " out of range");
    if (s.label < 0)
      throw Error(ErrorCode::InvalidSeed, "seed label " + std::to_string(s.label) + " negative");
  }

  // Multi-source Dijkstra with Euclidean edge lengths. The (distance, point)
  // queue key makes the settle order — and thus tie resolution — deterministic.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(size_t(n), kInf);
  std::vector<int32_t> label(size_t(n), -1);
  using Entry = std::pair<double, int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (const auto& s : seeds) {
    if (dist[size_t(s.index)] == 0.0 && label[size_t(s.index)] != s.label)
      throw Error(ErrorCode::InvalidSeed,
                  "conflicting labels for seed point " + std::to_string(s.index));
    dist[size_t(s.index)] = 0.0;
    label[size_t(s.index)] = s.label;
    queue.push({0.0, s.index});
  }
  while (!queue.empty()) {
    auto [d, i] = queue.top();
    queue.pop();
    if (d > dist[size_t(i)]) continue;  // stale entry
    for (int64_t j : graph.of(i)) {
      double nd = d + norm(cloud.positions[size_t(j)] - cloud.positions[size_t(i)]);
      if (nd < dist[size_t(j)]) {
        dist[size_t(j)] = nd;
        label[size_t(j)] = label[size_t(i)];
        queue.push({nd, j});
      }
    }
  }
  for (int64_t i = 0; i < n; ++i)
    if (label[size_t(i)] < 0)
      throw Error(ErrorCode::InvalidSeed,
                  "point " + std::to_string(i) +
                      " is unreachable from every seed; the neighbor graph is disconnected");

  cloud.labels = std::move(label);
  cloud.validate();
}

}  // namespace mmt
