#pragma once

#include <string>
#include <vector>

#include "core/render.hpp"
#include "core/trajectory.hpp"

namespace mmt {

/// Binary PPM (P6), 8-bit.
void write_ppm(const Frame& frame, const std::string& path);
Frame read_ppm(const std::string& path);

/// Binary PGM (P5) depth in millimeters: 16-bit big-endian samples on write;
/// 8- or 16-bit accepted on read. Map values are meters in memory.
void write_pgm_depth(const DepthMap& map, const std::string& path);
DepthMap read_pgm_depth(const std::string& path);

/// Binary PBM (P4); set bits (black) are foreground.
void write_pbm(const MaskMap& mask, const std::string& path);
MaskMap read_pbm(const std::string& path);

/// Files with the given extension (e.g. ".pgm"), lexicographically sorted —
/// the frame order contract for depth/mask/frame directories.
std::vector<std::string> list_files(const std::string& dir, const std::string& extension);

}  // namespace mmt
