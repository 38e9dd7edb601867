#include "core/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "core/binary_io.hpp"

namespace mmt {

namespace {

/// Reads the next header token, skipping whitespace and '#' comments.
std::string netpbm_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(char(c));
  }
  if (tok.empty()) throw Error(ErrorCode::Parse, path + ": truncated header");
  return tok;
}

int netpbm_int(std::istream& in, const std::string& path, const char* what) {
  std::string tok = netpbm_token(in, path);
  try {
    size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, path + ": bad " + std::string(what) + " '" + tok + "'");
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_ppm(const Frame& frame, const std::string& path) {
  auto out = open_out(path);
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  write_exact(out, frame.rgb.data(), frame.rgb.size(), path);
}

Frame read_ppm(const std::string& path) {
  auto in = open_in(path);
  if (netpbm_token(in, path) != "P6") throw Error(ErrorCode::Parse, path + ": not a binary PPM");
  Frame frame;
  frame.width = netpbm_int(in, path, "width");
  frame.height = netpbm_int(in, path, "height");
  int maxval = netpbm_int(in, path, "maxval");
  if (maxval != 255) throw Error(ErrorCode::Unsupported, path + ": only maxval 255 supported");
  // The single whitespace byte after maxval was consumed by the tokenizer.
  frame.rgb.resize(size_t(frame.width) * size_t(frame.height) * 3);
  read_exact(in, frame.rgb.data(), frame.rgb.size(), path);
  return frame;
}

void write_pgm_depth(const DepthMap& map, const std::string& path) {
  auto out = open_out(path);
  out << "P5\n" << map.width << " " << map.height << "\n65535\n";
  std::vector<unsigned char> row(size_t(map.width) * 2);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double mm = std::clamp(map.at(x, y) * 1000.0, 0.0, 65535.0);
      u16_to_bytes_be(uint16_t(std::lround(mm)), row.data() + size_t(x) * 2);
    }
    write_exact(out, row.data(), row.size(), path);
  }
}

DepthMap read_pgm_depth(const std::string& path) {
  auto in = open_in(path);
  if (netpbm_token(in, path) != "P5") throw Error(ErrorCode::Parse, path + ": not a binary PGM");
  DepthMap map;
  map.width = netpbm_int(in, path, "width");
  map.height = netpbm_int(in, path, "height");
  int maxval = netpbm_int(in, path, "maxval");
  if (maxval <= 0 || maxval > 65535)
    throw Error(ErrorCode::Parse, path + ": bad maxval " + std::to_string(maxval));
  const bool wide = maxval > 255;
  map.depth.resize(size_t(map.width) * size_t(map.height));
  std::vector<unsigned char> row(size_t(map.width) * (wide ? 2 : 1));
  for (int y = 0; y < map.height; ++y) {
    read_exact(in, row.data(), row.size(), path);
    for (int x = 0; x < map.width; ++x) {
      uint16_t mm = wide ? bytes_to_u16_be(row.data() + size_t(x) * 2) : row[size_t(x)];
      map.depth[size_t(y) * size_t(map.width) + size_t(x)] = double(mm) / 1000.0;
    }
  }
  return map;
}

void write_pbm(const MaskMap& mask, const std::string& path) {
  auto out = open_out(path);
  out << "P4\n" << mask.width << " " << mask.height << "\n";
  const int stride = (mask.width + 7) / 8;
  std::vector<unsigned char> row(static_cast<size_t>(stride));
  for (int y = 0; y < mask.height; ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) row[size_t(x / 8)] |= (unsigned char)(0x80u >> (x % 8));
    write_exact(out, row.data(), row.size(), path);
  }
}

MaskMap read_pbm(const std::string& path) {
  auto in = open_in(path);
  if (netpbm_token(in, path) != "P4") throw Error(ErrorCode::Parse, path + ": not a binary PBM");
  MaskMap mask;
  mask.width = netpbm_int(in, path, "width");
  mask.height = netpbm_int(in, path, "height");
  mask.data.resize(size_t(mask.width) * size_t(mask.height));
  const int stride = (mask.width + 7) / 8;
  std::vector<unsigned char> row(static_cast<size_t>(stride));
  for (int y = 0; y < mask.height; ++y) {
    read_exact(in, row.data(), row.size(), path);
    for (int x = 0; x < mask.width; ++x)
      mask.data[size_t(y) * size_t(mask.width) + size_t(x)] =
          (row[size_t(x / 8)] >> (7 - x % 8)) & 1u;
  }
  return mask;
}

std::vector<std::string> list_files(const std::string& dir, const std::string& extension) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::Io, "'" + dir + "' is not a directory");
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == extension) out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mmt
