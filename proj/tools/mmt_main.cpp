// mmt — command-line driver for the motion-transfer pipeline.
//
// Subcommands: synth, extract, transfer, render, metrics, graph-dump.
// Every run resolves one flat configuration (defaults < config file < flags);
// --dump-config prints it in the same format the parser accepts, so a dumped
// config re-parses to an equal run. Exit codes: 0 success, 2 bad usage or
// invalid configuration, 3 a pipeline stage failed at runtime.
//
// stdout carries machine-readable results (config dumps, metric means);
// stderr carries progress, per-stage timing, and diagnostics.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mmt.h"

namespace {

namespace fs = std::filesystem;

/* ---- errors --------------------------------------------------------------- */

// Thrown anywhere under run(); carries the process exit code.
struct CliError {
  int code;
  std::string message;
};

// Statuses that mean the request itself was bad map to exit 2; genuine
// runtime failures (I/O, numerics, degenerate data) map to exit 3.
int exit_code_for(mm_status status) {
  switch (status) {
    case MM_E_INVALID_ARGUMENT:
    case MM_E_INVALID_SPEC:
    case MM_E_DIMENSION_MISMATCH:
    case MM_E_LABEL_OUT_OF_RANGE:
    case MM_E_LABEL_COUNT_MISMATCH:
    case MM_E_INDEX_OUT_OF_RANGE:
    case MM_E_INVALID_SEED:
    case MM_E_TOO_SMALL:
    case MM_E_RESOLUTION_MISMATCH:
    case MM_E_EMPTY_CLOUD:
    case MM_E_EMPTY_SEQUENCE:
    case MM_E_UNSUPPORTED:
      return 2;
    default:
      return 3;
  }
}

// Turns a failed library call into a stage-tagged CliError.
void check(mm_status status, const std::string& stage) {
  if (status != MM_OK)
    throw CliError{exit_code_for(status), stage + ": " + mm_last_error()};
}

/* ---- handle ownership ------------------------------------------------------ */

template <auto Free>
struct FnDeleter {
  template <typename T>
  void operator()(T* p) const {
    Free(p);
  }
};

using TrajectoriesPtr = std::unique_ptr<mm_trajectories, FnDeleter<mm_trajectories_free>>;
using PriorPtr = std::unique_ptr<mm_prior, FnDeleter<mm_prior_free>>;
using CloudPtr = std::unique_ptr<mm_cloud, FnDeleter<mm_cloud_free>>;
using GraphPtr = std::unique_ptr<mm_graph, FnDeleter<mm_graph_free>>;
using BoundaryPtr = std::unique_ptr<mm_boundary, FnDeleter<mm_boundary_free>>;
using FieldPtr = std::unique_ptr<mm_field, FnDeleter<mm_field_free>>;
using TracePtr = std::unique_ptr<mm_trace, FnDeleter<mm_trace_free>>;
using CamerasPtr = std::unique_ptr<mm_cameras, FnDeleter<mm_cameras_free>>;
using FramesPtr = std::unique_ptr<mm_frames, FnDeleter<mm_frames_free>>;

/* ---- stage timing ---------------------------------------------------------- */

template <typename Fn>
void stage(const std::string& name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "  %-22s %10.2f ms\n", name.c_str(), ms);
}

/* ---- configuration --------------------------------------------------------- */

// One table drives everything: config-file keys, the same-name CLI flags,
// and the --dump-config output. `arity` is the token count of the value
// (3 for vectors). Values live as strings until a subcommand consumes them,
// so a dump reproduces exactly what was parsed.
struct KeySpec {
  const char* section;
  const char* key;
  int arity;
  const char* preset;
  const char* help;
};

const KeySpec kKeys[] = {
    {"paths", "trajectories", 1, "", "trajectory-set file (synth output; extract/render input)"},
    {"paths", "tracks", 1, "", "2D track file to lift into trajectories"},
    {"paths", "depths", 1, "", "depth-map directory (16-bit PGM, frame order by name)"},
    {"paths", "masks", 1, "", "foreground-mask directory (PBM)"},
    {"paths", "cameras", 1, "", "camera file (fx fy cx cy + 3x4 pose per line)"},
    {"paths", "cloud", 1, "", "target point cloud (PLY)"},
    {"paths", "labels", 1, "", "per-point component-label file for the target"},
    {"paths", "label-seeds", 1, "", "`index label` seed file for geodesic labeling"},
    {"paths", "prior", 1, "", "motion-prior file (synth/extract output; transfer input)"},
    {"paths", "boundary-seeds", 1, "", "seed-index file for the motion-boundary flood fill"},
    {"paths", "field", 1, "", "velocity-field file (render input)"},
    {"paths", "candidate", 1, "", "candidate frame directory (metrics)"},
    {"paths", "reference", 1, "", "reference frame directory (metrics; transfer scoring)"},
    {"paths", "output", 1, "", "output directory"},
    {"synth", "motion", 1, "translation", "motion type: translation|rotation|oscillation"},
    {"synth", "frames", 1, "10", "frame count"},
    {"synth", "points", 1, "300", "total points across components"},
    {"synth", "components", 1, "1", "rigid component count (the last one moves)"},
    {"synth", "seed", 1, "1234", "random seed"},
    {"synth", "velocity", 3, "0.01 0 0", "translation displacement per frame"},
    {"synth", "axis", 3, "0 0 1", "rotation axis"},
    {"synth", "deg-per-frame", 1, "0", "rotation rate in degrees per frame"},
    {"synth", "amplitude", 3, "0.1 0 0", "oscillation amplitude"},
    {"synth", "frequency", 1, "0.1", "oscillation cycles per frame"},
    {"synth", "box-lo", 3, "-0.5 -0.5 -0.5", "sampling-box minimum corner"},
    {"synth", "box-hi", 3, "0.5 0.5 0.5", "sampling-box maximum corner"},
    {"extract", "window", 1, "1", "mask-voting window in frames"},
    {"extract", "normalize", 1, "0", "rescale input to unit first-frame extent (0|1)"},
    {"refine", "refine", 1, "1", "run field refinement during transfer (0|1)"},
    {"refine", "lambda-topo", 1, "1", "boundary-smoothness weight"},
    {"refine", "lambda-kin", 1, "1", "kinematic-consistency weight"},
    {"refine", "sweeps", 1, "5", "relaxation sweep count"},
    {"refine", "omega", 1, "0.5", "relaxation damping factor in (0, 1]"},
    {"refine", "epsilon", 1, "1e-5", "static-speed threshold"},
    {"refine", "knn", 1, "8", "neighbor cap for the point graph"},
    {"refine", "hops", 1, "2", "flood-fill depth from boundary seeds"},
    {"refine", "propagate", 1, "neighborhood", "static propagation: none|global|neighborhood"},
    {"render", "width", 1, "640", "frame width in pixels"},
    {"render", "height", 1, "480", "frame height in pixels"},
    {"render", "background", 3, "0 0 0", "background color, RGB in [0, 1]"},
    {"render", "radius", 1, "0.01", "point radius for trajectory rendering"},
    {"control", "speed", 1, "1", "velocity scale factor"},
    {"control", "repeats", 1, "1", "motion repetition count"},
    {"control", "mode", 1, "loop", "extension mode: loop|pingpong"},
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

class Config {
 public:
  Config() {
    entries_.reserve(std::size(kKeys));
    for (const KeySpec& spec : kKeys) entries_.push_back({&spec, spec.preset});
  }

  // Flat `key value` lines grouped under [section] headers; # starts a
  // comment line. Keys are unique across sections, but each must appear
  // under its own header so files keep a canonical shape.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError{2, "config: cannot open '" + path + "'"};
    std::string line;
    std::string section;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string text = trim(line);
      if (text.empty() || text.front() == '#') continue;
      const std::string where = path + ":" + std::to_string(lineno);
      if (text.front() == '[') {
        if (text.back() != ']') throw CliError{2, where + ": unterminated section header"};
        section = text.substr(1, text.size() - 2);
        if (!known_section(section)) throw CliError{2, where + ": unknown section [" + section + "]"};
        continue;
      }
      const auto split = text.find_first_of(" \t");
      const std::string key = text.substr(0, split);
      const std::string value = split == std::string::npos ? "" : trim(text.substr(split + 1));
      Entry* entry = find(key);
      if (!entry) throw CliError{2, where + ": unknown key '" + key + "'"};
      if (entry->spec->section != section)
        throw CliError{2, where + ": key '" + key + "' belongs under [" +
                              entry->spec->section + "]"};
      if (!seen.insert(key).second) throw CliError{2, where + ": duplicate key '" + key + "'"};
      entry->value = value;
    }
  }

  void set(const std::string& key, const std::string& value) {
    Entry* entry = find(key);
    if (!entry) throw CliError{2, "unknown configuration key '" + key + "'"};
    entry->value = value;
  }

  std::string dump() const {
    std::string out;
    const char* section = "";
    for (const Entry& entry : entries_) {
      if (std::string_view(section) != entry.spec->section) {
        section = entry.spec->section;
        if (!out.empty()) out += "\n";
        out += std::string("[") + section + "]\n";
      }
      out += entry.spec->key;
      if (!entry.value.empty()) out += " " + entry.value;
      out += "\n";
    }
    return out;
  }

  std::string str(const std::string& key) const { return get(key).value; }

  int64_t integer(const std::string& key) const {
    const std::string& value = get(key).value;
    int64_t parsed = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || end != value.data() + value.size())
      throw CliError{2, "config: " + key + ": expected an integer, got '" + value + "'"};
    return parsed;
  }

  uint64_t unsigned_integer(const std::string& key) const {
    const std::string& value = get(key).value;
    uint64_t parsed = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc() || end != value.data() + value.size())
      throw CliError{2, "config: " + key + ": expected a non-negative integer, got '" + value + "'"};
    return parsed;
  }

  double real(const std::string& key) const {
    const std::string& value = get(key).value;
    const double parsed = parse_real(value, key);
    return parsed;
  }

  bool boolean(const std::string& key) const {
    const std::string& value = get(key).value;
    if (value == "0" || value == "false") return false;
    if (value == "1" || value == "true") return true;
    throw CliError{2, "config: " + key + ": expected 0|1|true|false, got '" + value + "'"};
  }

  void vec3(const std::string& key, double out[3]) const {
    const std::string& value = get(key).value;
    std::istringstream parts(value);
    std::string token;
    int n = 0;
    while (parts >> token) {
      if (n == 3) break;
      out[n++] = parse_real(token, key);
    }
    if (n != 3 || (parts >> token))
      throw CliError{2, "config: " + key + ": expected three reals, got '" + value + "'"};
  }

 private:
  struct Entry {
    const KeySpec* spec;
    std::string value;
  };

  static double parse_real(const std::string& text, const std::string& key) {
    double parsed = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
    if (ec != std::errc() || end != text.data() + text.size())
      throw CliError{2, "config: " + key + ": expected a real number, got '" + text + "'"};
    return parsed;
  }

  static bool known_section(const std::string& name) {
    for (const KeySpec& spec : kKeys)
      if (name == spec.section) return true;
    return false;
  }

  Entry* find(const std::string& key) {
    for (Entry& entry : entries_)
      if (key == entry.spec->key) return &entry;
    return nullptr;
  }

  const Entry& get(const std::string& key) const {
    for (const Entry& entry : entries_)
      if (key == entry.spec->key) return entry;
    throw CliError{2, "unknown configuration key '" + key + "'"};
  }

  std::vector<Entry> entries_;
};

/* ---- path plumbing ---------------------------------------------------------- */

std::string required_input(const Config& cfg, const std::string& key) {
  const std::string value = cfg.str(key);
  if (value.empty()) throw CliError{2, "missing required input: --" + key};
  if (!fs::exists(value)) throw CliError{2, "--" + key + ": '" + value + "' does not exist"};
  return value;
}

std::string optional_input(const Config& cfg, const std::string& key) {
  const std::string value = cfg.str(key);
  if (!value.empty() && !fs::exists(value))
    throw CliError{2, "--" + key + ": '" + value + "' does not exist"};
  return value;
}

std::string required_output(const Config& cfg, const std::string& key) {
  const std::string value = cfg.str(key);
  if (value.empty()) throw CliError{2, "missing required output path: --" + key};
  return value;
}

// Deletes this run's outputs if the run dies partway, so a failed invocation
// never leaves artifacts that could pass for results.
class ArtifactGuard {
 public:
  ~ArtifactGuard() {
    if (!armed_) return;
    std::error_code ec;
    for (const fs::path& file : files_) fs::remove(file, ec);
    for (const fs::path& dir : dirs_) fs::remove_all(dir, ec);
  }
  void add_file(fs::path p) { files_.push_back(std::move(p)); }
  void add_dir(fs::path p) { dirs_.push_back(std::move(p)); }
  void disarm() { armed_ = false; }

 private:
  bool armed_ = true;
  std::vector<fs::path> files_;
  std::vector<fs::path> dirs_;
};

void log_trajectory_warnings(const mm_trajectories* trajs) {
  const int64_t n = mm_trajectories_warning_count(trajs);
  for (int64_t i = 0; i < n; ++i)
    std::fprintf(stderr, "  warning (trajectories): %s\n", mm_trajectories_warning(trajs, i));
}

void log_cloud_warnings(const mm_cloud* cloud) {
  const int64_t n = mm_cloud_warning_count(cloud);
  for (int64_t i = 0; i < n; ++i)
    std::fprintf(stderr, "  warning (cloud): %s\n", mm_cloud_warning(cloud, i));
}

/* ---- shared pieces ----------------------------------------------------------- */

CamerasPtr cameras_for_field(const Config& cfg, const mm_cloud* cloud, const mm_field* field,
                             const std::string& stage_name) {
  const std::string path = optional_input(cfg, "cameras");
  const int width = static_cast<int>(cfg.integer("width"));
  const int height = static_cast<int>(cfg.integer("height"));
  mm_cameras* raw = nullptr;
  if (!path.empty())
    check(mm_cameras_load(path.c_str(), width, height, &raw), stage_name);
  else
    check(mm_cameras_default(cloud, field, width, height, &raw), stage_name);
  return CamerasPtr(raw);
}

CamerasPtr cameras_for_trajectories(const Config& cfg, const mm_trajectories* trajs,
                                    const std::string& stage_name) {
  const std::string path = optional_input(cfg, "cameras");
  const int width = static_cast<int>(cfg.integer("width"));
  const int height = static_cast<int>(cfg.integer("height"));
  mm_cameras* raw = nullptr;
  if (!path.empty())
    check(mm_cameras_load(path.c_str(), width, height, &raw), stage_name);
  else
    check(mm_cameras_default_for_trajectories(trajs, width, height, &raw), stage_name);
  return CamerasPtr(raw);
}

/* ---- subcommands -------------------------------------------------------------- */

int cmd_synth(const Config& cfg) {
  const std::string traj_path = required_output(cfg, "trajectories");
  const std::string prior_path = required_output(cfg, "prior");

  mm_motion_spec spec;
  mm_motion_spec_init(&spec);
  const std::string motion = cfg.str("motion");
  if (motion == "translation")
    spec.type = MM_MOTION_TRANSLATION;
  else if (motion == "rotation")
    spec.type = MM_MOTION_ROTATION;
  else if (motion == "oscillation")
    spec.type = MM_MOTION_OSCILLATION;
  else
    throw CliError{2, "synth: motion must be translation|rotation|oscillation, got '" + motion + "'"};
  spec.frames = cfg.integer("frames");
  spec.points = cfg.integer("points");
  spec.component_count = static_cast<int32_t>(cfg.integer("components"));
  spec.seed = cfg.unsigned_integer("seed");
  cfg.vec3("velocity", spec.velocity);
  cfg.vec3("axis", spec.axis);
  spec.radians_per_frame = cfg.real("deg-per-frame") * std::numbers::pi / 180.0;
  cfg.vec3("amplitude", spec.amplitude);
  spec.frequency = cfg.real("frequency");
  cfg.vec3("box-lo", spec.box_lo);
  cfg.vec3("box-hi", spec.box_hi);

  mm_trajectories* traj_raw = nullptr;
  mm_prior* truth_raw = nullptr;
  stage("synth/generate",
        [&] { check(mm_synthesize(&spec, &traj_raw, &truth_raw), "synth/generate"); });
  TrajectoriesPtr trajs(traj_raw);
  PriorPtr truth(truth_raw);

  stage("synth/save", [&] {
    check(mm_trajectories_save(trajs.get(), traj_path.c_str()), "synth/save");
    check(mm_prior_save(truth.get(), prior_path.c_str()), "synth/save");
  });
  std::fprintf(stderr, "synth: %lld points x %lld frames -> %s (+ ground-truth prior)\n",
               static_cast<long long>(mm_trajectories_count(trajs.get())),
               static_cast<long long>(mm_trajectories_frames(trajs.get())), traj_path.c_str());
  return 0;
}

int cmd_extract(const Config& cfg) {
  const std::string prior_path = required_output(cfg, "prior");

  TrajectoriesPtr trajs;
  if (!cfg.str("tracks").empty()) {
    const std::string tracks = required_input(cfg, "tracks");
    const std::string depths = required_input(cfg, "depths");
    const std::string cameras = optional_input(cfg, "cameras");
    stage("extract/lift", [&] {
      mm_trajectories* raw = nullptr;
      check(mm_lift_tracks_files(tracks.c_str(), depths.c_str(),
                                 cameras.empty() ? nullptr : cameras.c_str(), &raw),
            "extract/lift");
      trajs.reset(raw);
    });
  } else {
    const std::string source = required_input(cfg, "trajectories");
    stage("extract/load", [&] {
      mm_trajectories* raw = nullptr;
      check(mm_trajectories_load(source.c_str(), &raw), "extract/load");
      trajs.reset(raw);
    });
  }
  log_trajectory_warnings(trajs.get());

  if (!cfg.str("masks").empty()) {
    const std::string masks = required_input(cfg, "masks");
    const std::string cameras = optional_input(cfg, "cameras");
    const int window = static_cast<int>(cfg.integer("window"));
    stage("extract/mask", [&] {
      mm_trajectories* kept = nullptr;
      int64_t dropped = 0;
      check(mm_mask_trajectories_files(trajs.get(), masks.c_str(),
                                       cameras.empty() ? nullptr : cameras.c_str(), window, &kept,
                                       &dropped),
            "extract/mask");
      trajs.reset(kept);
      std::fprintf(stderr, "  mask kept %lld trajectories, dropped %lld\n",
                   static_cast<long long>(mm_trajectories_count(kept)),
                   static_cast<long long>(dropped));
    });
  }

  if (cfg.boolean("normalize")) {
    stage("extract/normalize", [&] {
      double scale = 0.0;
      check(mm_trajectories_normalize(trajs.get(), &scale), "extract/normalize");
      std::fprintf(stderr, "  normalized by 1/%.17g\n", scale);
    });
  }

  PriorPtr prior;
  stage("extract/prior-fit", [&] {
    mm_prior* raw = nullptr;
    check(mm_prior_build(trajs.get(), &raw), "extract/prior-fit");
    prior.reset(raw);
  });

  const int32_t components = mm_prior_components(prior.get());
  std::vector<double> deviation(static_cast<size_t>(components));
  check(mm_prior_replay_deviation(prior.get(), trajs.get(), deviation.data(), components),
        "extract/prior-fit");
  for (int32_t c = 0; c < components; ++c)
    std::fprintf(stderr, "  component %d replay deviation %.3e\n", c, deviation[static_cast<size_t>(c)]);

  stage("extract/save", [&] { check(mm_prior_save(prior.get(), prior_path.c_str()), "extract/save"); });
  std::fprintf(stderr, "extract: %d component(s) over %lld steps -> %s\n", components,
               static_cast<long long>(mm_prior_frames(prior.get())), prior_path.c_str());
  return 0;
}

int cmd_transfer(const Config& cfg) {
  const std::string prior_path = required_input(cfg, "prior");
  const fs::path out_dir = required_output(cfg, "output");

  PriorPtr prior;
  stage("transfer/load-prior", [&] {
    mm_prior* raw = nullptr;
    check(mm_prior_load(prior_path.c_str(), &raw), "transfer/load-prior");
    prior.reset(raw);
  });

  // The target is either an explicit cloud or, for self-transfer, the first
  // frame of a trajectory set.
  CloudPtr cloud;
  if (!cfg.str("cloud").empty()) {
    const std::string path = required_input(cfg, "cloud");
    stage("transfer/load-target", [&] {
      mm_cloud* raw = nullptr;
      check(mm_cloud_load(path.c_str(), &raw), "transfer/load-target");
      cloud.reset(raw);
    });
  } else if (!cfg.str("trajectories").empty()) {
    const std::string path = required_input(cfg, "trajectories");
    stage("transfer/load-target", [&] {
      mm_trajectories* traw = nullptr;
      check(mm_trajectories_load(path.c_str(), &traw), "transfer/load-target");
      TrajectoriesPtr trajs(traw);
      mm_cloud* raw = nullptr;
      check(mm_cloud_from_trajectories(trajs.get(), &raw), "transfer/load-target");
      cloud.reset(raw);
    });
  } else {
    throw CliError{2, "transfer: need a target, either --cloud or --trajectories"};
  }
  log_cloud_warnings(cloud.get());

  const std::string labels_path = optional_input(cfg, "labels");
  if (!labels_path.empty()) {
    stage("transfer/labels", [&] {
      check(mm_cloud_apply_labels_file(cloud.get(), labels_path.c_str()), "transfer/labels");
    });
  }

  const bool refine = cfg.boolean("refine");
  const std::string propagate = cfg.str("propagate");
  if (propagate != "none" && propagate != "global" && propagate != "neighborhood")
    throw CliError{2, "transfer: propagate must be none|global|neighborhood, got '" + propagate + "'"};
  const std::string seeds_path = optional_input(cfg, "label-seeds");

  GraphPtr graph;
  if (refine || propagate != "none" || !seeds_path.empty()) {
    stage("transfer/graph", [&] {
      mm_graph* raw = nullptr;
      check(mm_graph_build(cloud.get(), cfg.integer("knn"), &raw), "transfer/graph");
      graph.reset(raw);
      std::fprintf(stderr, "  graph: %lld points, %lld edges\n",
                   static_cast<long long>(mm_graph_count(raw)),
                   static_cast<long long>(mm_graph_edge_count(raw)));
    });
  }

  if (!seeds_path.empty()) {
    stage("transfer/label-seeds", [&] {
      check(mm_cloud_apply_seeds_file(cloud.get(), graph.get(), seeds_path.c_str()),
            "transfer/label-seeds");
    });
  }

  FieldPtr field;
  stage("transfer/field", [&] {
    mm_field* raw = nullptr;
    check(mm_field_compute(prior.get(), cloud.get(), &raw), "transfer/field");
    field.reset(raw);
  });

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw CliError{3, "transfer: cannot create '" + out_dir.string() + "': " + ec.message()};
  ArtifactGuard guard;

  if (refine) {
    BoundaryPtr boundary;
    const std::string boundary_seeds = optional_input(cfg, "boundary-seeds");
    if (!boundary_seeds.empty()) {
      stage("transfer/boundary", [&] {
        mm_boundary* raw = nullptr;
        check(mm_boundary_flood_fill_file(graph.get(), cloud.get(), boundary_seeds.c_str(),
                                          static_cast<int>(cfg.integer("hops")), &raw),
              "transfer/boundary");
        boundary.reset(raw);
        std::fprintf(stderr, "  boundary: %lld points\n",
                     static_cast<long long>(mm_boundary_size(raw)));
      });
    }
    mm_refine_config rc;
    mm_refine_config_init(&rc);
    rc.lambda_topo = cfg.real("lambda-topo");
    rc.lambda_kin = cfg.real("lambda-kin");
    rc.sweeps = cfg.integer("sweeps");
    rc.omega = cfg.real("omega");
    rc.epsilon = cfg.real("epsilon");
    stage("transfer/refine", [&] {
      mm_field* refined = nullptr;
      mm_trace* trace_raw = nullptr;
      check(mm_field_refine(field.get(), graph.get(), boundary.get(), &rc, &refined, &trace_raw),
            "transfer/refine");
      field.reset(refined);
      TracePtr trace(trace_raw);
      const fs::path trace_path = out_dir / "trace.csv";
      guard.add_file(trace_path);
      check(mm_trace_save_csv(trace.get(), trace_path.string().c_str()), "transfer/refine");
      const int64_t rows = mm_trace_rows(trace.get());
      if (rows > 0) {
        // Rows are per (sweep, step); sum each end of the trace for the log.
        int64_t first_sweep = 0, last_sweep = 0;
        check(mm_trace_row(trace.get(), 0, &first_sweep, nullptr, nullptr, nullptr, nullptr),
              "transfer/refine");
        check(mm_trace_row(trace.get(), rows - 1, &last_sweep, nullptr, nullptr, nullptr, nullptr),
              "transfer/refine");
        double first_total = 0.0, last_total = 0.0;
        for (int64_t i = 0; i < rows; ++i) {
          int64_t sweep = 0;
          double total = 0.0;
          check(mm_trace_row(trace.get(), i, &sweep, nullptr, nullptr, nullptr, &total),
                "transfer/refine");
          if (sweep == first_sweep) first_total += total;
          if (sweep == last_sweep) last_total += total;
        }
        std::fprintf(stderr, "  refine loss %.6e -> %.6e over %lld sweeps\n", first_total,
                     last_total, static_cast<long long>(last_sweep));
      }
    });
  }

  if (propagate != "none") {
    stage("transfer/propagate", [&] {
      const int mode = propagate == "global" ? MM_PROPAGATE_GLOBAL : MM_PROPAGATE_NEIGHBORHOOD;
      mm_field* out = nullptr;
      check(mm_field_propagate_static(field.get(), cloud.get(), graph.get(), cfg.real("epsilon"),
                                      mode, &out),
            "transfer/propagate");
      field.reset(out);
    });
  }

  const double speed = cfg.real("speed");
  if (speed != 1.0) {
    stage("transfer/speed", [&] {
      mm_field* out = nullptr;
      check(mm_field_scale(field.get(), speed, &out), "transfer/speed");
      field.reset(out);
    });
  }

  const std::string mode_name = cfg.str("mode");
  if (mode_name != "loop" && mode_name != "pingpong")
    throw CliError{2, "transfer: mode must be loop|pingpong, got '" + mode_name + "'"};
  const int64_t repeats = cfg.integer("repeats");
  if (repeats != 1 || mode_name == "pingpong") {
    stage("transfer/extend", [&] {
      const int mode = mode_name == "loop" ? MM_EXTEND_LOOP : MM_EXTEND_PINGPONG;
      mm_field* out = nullptr;
      check(mm_field_extend(field.get(), repeats, mode, &out), "transfer/extend");
      field.reset(out);
    });
  }

  stage("transfer/save-field", [&] {
    const fs::path field_path = out_dir / "field.mmvf";
    guard.add_file(field_path);
    check(mm_field_save(field.get(), field_path.string().c_str()), "transfer/save-field");
  });

  CamerasPtr cameras;
  stage("transfer/cameras",
        [&] { cameras = cameras_for_field(cfg, cloud.get(), field.get(), "transfer/cameras"); });

  FramesPtr frames;
  stage("transfer/render", [&] {
    double background[3];
    cfg.vec3("background", background);
    mm_frames* raw = nullptr;
    check(mm_render_motion(cloud.get(), field.get(), cameras.get(), background, &raw),
          "transfer/render");
    frames.reset(raw);
  });

  const fs::path frames_dir = out_dir / "frames";
  stage("transfer/save-frames", [&] {
    fs::remove_all(frames_dir, ec);  // drop stale frames from earlier runs
    guard.add_dir(frames_dir);
    check(mm_frames_save_ppm_dir(frames.get(), frames_dir.string().c_str(), "frame_"),
          "transfer/save-frames");
  });

  const std::string reference = optional_input(cfg, "reference");
  if (!reference.empty()) {
    stage("transfer/metrics", [&] {
      mm_frames* ref_raw = nullptr;
      check(mm_frames_load_ppm_dir(reference.c_str(), &ref_raw), "transfer/metrics");
      FramesPtr ref(ref_raw);
      const fs::path csv = out_dir / "metrics.csv";
      guard.add_file(csv);
      double mean_psnr = 0.0, mean_ssim = 0.0;
      check(mm_frames_compare(frames.get(), ref.get(), csv.string().c_str(), &mean_psnr,
                              &mean_ssim),
            "transfer/metrics");
      std::printf("mean_psnr_db %.17g\nmean_ssim %.17g\n", mean_psnr, mean_ssim);
    });
  }

  guard.disarm();
  std::fprintf(stderr, "transfer: %lld frames -> %s\n",
               static_cast<long long>(mm_frames_count(frames.get())), frames_dir.string().c_str());
  return 0;
}

int cmd_render(const Config& cfg) {
  const fs::path out_dir = required_output(cfg, "output");
  double background[3];
  cfg.vec3("background", background);

  FramesPtr frames;
  if (!cfg.str("field").empty()) {
    const std::string field_path = required_input(cfg, "field");
    const std::string cloud_path = required_input(cfg, "cloud");
    CloudPtr cloud;
    FieldPtr field;
    stage("render/load", [&] {
      mm_cloud* craw = nullptr;
      check(mm_cloud_load(cloud_path.c_str(), &craw), "render/load");
      cloud.reset(craw);
      mm_field* fraw = nullptr;
      check(mm_field_load(field_path.c_str(), &fraw), "render/load");
      field.reset(fraw);
    });
    log_cloud_warnings(cloud.get());
    CamerasPtr cameras;
    stage("render/cameras",
          [&] { cameras = cameras_for_field(cfg, cloud.get(), field.get(), "render/cameras"); });
    stage("render/render", [&] {
      mm_frames* raw = nullptr;
      check(mm_render_motion(cloud.get(), field.get(), cameras.get(), background, &raw),
            "render/render");
      frames.reset(raw);
    });
  } else if (!cfg.str("trajectories").empty()) {
    const std::string traj_path = required_input(cfg, "trajectories");
    TrajectoriesPtr trajs;
    stage("render/load", [&] {
      mm_trajectories* raw = nullptr;
      check(mm_trajectories_load(traj_path.c_str(), &raw), "render/load");
      trajs.reset(raw);
    });
    log_trajectory_warnings(trajs.get());
    CamerasPtr cameras;
    stage("render/cameras",
          [&] { cameras = cameras_for_trajectories(cfg, trajs.get(), "render/cameras"); });
    stage("render/render", [&] {
      mm_frames* raw = nullptr;
      check(mm_render_trajectories(trajs.get(), cameras.get(), cfg.real("radius"), background,
                                   &raw),
            "render/render");
      frames.reset(raw);
    });
  } else {
    throw CliError{2, "render: need either --field with --cloud, or --trajectories"};
  }

  const fs::path frames_dir = out_dir / "frames";
  stage("render/save", [&] {
    std::error_code ec;
    fs::remove_all(frames_dir, ec);
    check(mm_frames_save_ppm_dir(frames.get(), frames_dir.string().c_str(), "frame_"),
          "render/save");
  });
  std::fprintf(stderr, "render: %lld frames -> %s\n",
               static_cast<long long>(mm_frames_count(frames.get())), frames_dir.string().c_str());
  return 0;
}

int cmd_metrics(const Config& cfg) {
  const std::string candidate = required_input(cfg, "candidate");
  const std::string reference = required_input(cfg, "reference");

  FramesPtr a, b;
  stage("metrics/load", [&] {
    mm_frames* raw = nullptr;
    check(mm_frames_load_ppm_dir(candidate.c_str(), &raw), "metrics/load");
    a.reset(raw);
    raw = nullptr;
    check(mm_frames_load_ppm_dir(reference.c_str(), &raw), "metrics/load");
    b.reset(raw);
  });

  std::string csv;
  if (!cfg.str("output").empty()) {
    const fs::path out_dir = cfg.str("output");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw CliError{3, "metrics: cannot create '" + out_dir.string() + "': " + ec.message()};
    csv = (out_dir / "metrics.csv").string();
  }

  stage("metrics/compare", [&] {
    double mean_psnr = 0.0, mean_ssim = 0.0;
    check(mm_frames_compare(a.get(), b.get(), csv.empty() ? nullptr : csv.c_str(), &mean_psnr,
                            &mean_ssim),
          "metrics/compare");
    std::printf("mean_psnr_db %.17g\nmean_ssim %.17g\n", mean_psnr, mean_ssim);
  });
  return 0;
}

int cmd_graph_dump(const Config& cfg) {
  const std::string cloud_path = required_input(cfg, "cloud");
  const fs::path out_dir = required_output(cfg, "output");

  CloudPtr cloud;
  stage("graph/load", [&] {
    mm_cloud* raw = nullptr;
    check(mm_cloud_load(cloud_path.c_str(), &raw), "graph/load");
    cloud.reset(raw);
  });
  log_cloud_warnings(cloud.get());

  GraphPtr graph;
  stage("graph/build", [&] {
    mm_graph* raw = nullptr;
    check(mm_graph_build(cloud.get(), cfg.integer("knn"), &raw), "graph/build");
    graph.reset(raw);
  });

  const int64_t count = mm_graph_count(graph.get());
  stage("graph/save", [&] {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
      throw CliError{3, "graph-dump: cannot create '" + out_dir.string() + "': " + ec.message()};
    const fs::path path = out_dir / "graph.txt";
    std::ofstream out(path);
    if (!out) throw CliError{3, "graph-dump: cannot write '" + path.string() + "'"};
    out << "# points " << count << " cap " << mm_graph_cap(graph.get()) << " edges "
        << mm_graph_edge_count(graph.get()) << "\n";
    for (int64_t i = 0; i < count; ++i) {
      const int64_t* neighbors = nullptr;
      int64_t degree = 0;
      check(mm_graph_neighbors(graph.get(), i, &neighbors, &degree), "graph/save");
      out << i << ":";
      for (int64_t j = 0; j < degree; ++j) out << " " << neighbors[j];
      out << "\n";
    }
    if (!out.flush()) throw CliError{3, "graph-dump: cannot write '" + path.string() + "'"};
  });

  int64_t min_degree = count > 0 ? mm_graph_degree(graph.get(), 0) : 0;
  int64_t max_degree = min_degree;
  for (int64_t i = 1; i < count; ++i) {
    const int64_t d = mm_graph_degree(graph.get(), i);
    min_degree = std::min(min_degree, d);
    max_degree = std::max(max_degree, d);
  }
  std::fprintf(stderr, "graph-dump: %lld points, %lld edges, degree %lld..%lld\n",
               static_cast<long long>(count),
               static_cast<long long>(mm_graph_edge_count(graph.get())),
               static_cast<long long>(min_degree), static_cast<long long>(max_degree));
  return 0;
}

/* ---- driver --------------------------------------------------------------------- */

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ' ';
    out += parts[i];
  }
  return out;
}

int parse_threads(const std::string& text, const char* origin) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value < 0)
    throw CliError{2, std::string(origin) + ": expected a thread count >= 0, got '" + text + "'"};
  return value;
}

void register_common(CLI::App* cmd) {
  cmd->add_option("--config", "configuration file (defaults < file < flags)");
  cmd->add_flag("--dump-config", "print the effective configuration to stdout and exit");
  cmd->add_option("--threads", "worker threads; 0 = all cores (default; env MM_THREADS)");
  for (const KeySpec& spec : kKeys) {
    CLI::Option* opt = cmd->add_option("--" + std::string(spec.key), spec.help);
    opt->expected(spec.arity);
    opt->group(std::string("[") + spec.section + "]");
  }
}

int run(CLI::App* sub) {
  Config cfg;
  if (CLI::Option* opt = sub->get_option_no_throw("--config"); opt && opt->count() > 0)
    cfg.load_file(opt->results().front());
  for (const KeySpec& spec : kKeys) {
    CLI::Option* opt = sub->get_option_no_throw("--" + std::string(spec.key));
    if (opt && opt->count() > 0) cfg.set(spec.key, join(opt->results()));
  }

  int threads = 0;
  if (CLI::Option* opt = sub->get_option_no_throw("--threads"); opt && opt->count() > 0)
    threads = parse_threads(opt->results().front(), "--threads");
  else if (const char* env = std::getenv("MM_THREADS"); env && *env)
    threads = parse_threads(env, "MM_THREADS");
  mm_set_threads(threads);

  if (CLI::Option* opt = sub->get_option_no_throw("--dump-config"); opt && opt->count() > 0) {
    std::fputs(cfg.dump().c_str(), stdout);
    return 0;
  }

  const auto start = std::chrono::steady_clock::now();
  const std::string name = sub->get_name();
  int code = 0;
  if (name == "synth")
    code = cmd_synth(cfg);
  else if (name == "extract")
    code = cmd_extract(cfg);
  else if (name == "transfer")
    code = cmd_transfer(cfg);
  else if (name == "render")
    code = cmd_render(cfg);
  else if (name == "metrics")
    code = cmd_metrics(cfg);
  else if (name == "graph-dump")
    code = cmd_graph_dump(cfg);
  else
    throw CliError{2, "unknown subcommand '" + name + "'"};
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "  %-22s %10.2f ms\n", "total", ms);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rigid motion transfer: synthesize, fit, retarget, render, score", "mmt"};
  app.require_subcommand(1);

  register_common(app.add_subcommand(
      "synth", "generate a synthetic rigid-motion scene (trajectories + ground-truth prior)"));
  register_common(app.add_subcommand(
      "extract", "fit a motion prior from trajectories or lifted 2D tracks"));
  register_common(app.add_subcommand(
      "transfer", "drive a target cloud with a prior: field, refinement, render, metrics"));
  register_common(app.add_subcommand(
      "render", "rasterize trajectories or a cloud + field into PPM frames"));
  register_common(app.add_subcommand(
      "metrics", "compare two frame directories (PSNR / SSIM)"));
  register_common(app.add_subcommand(
      "graph-dump", "build the neighbor graph over a cloud and dump its adjacency"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    return run(sub);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    if (e.code == 2)
      std::fprintf(stderr, "run 'mmt %s --help' for usage\n", sub->get_name().c_str());
    return e.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
