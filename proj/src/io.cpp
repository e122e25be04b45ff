#include "stmeta/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace stm {

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Next whitespace-delimited header token of a PGM, skipping comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

int parse_positive(const std::string& tok, const std::string& path, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ": bad PGM " + what + " '" + tok + "'");
  }
}

} // namespace

double Signal1D::at(double xq) const {
  if (x.empty()) throw IoError("empty signal");
  if (xq <= x.front()) return value.front();
  if (xq >= x.back()) return value.back();
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * value[i - 1] + w * value[i];
}

Signal1D read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,value")
    throw IoError(path + ": expected header 'x,value'");
  std::vector<std::pair<double, double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("comma");
      std::size_t u1 = 0, u2 = 0;
      const std::string a = trim(line.substr(0, comma)), b = trim(line.substr(comma + 1));
      const double xv = std::stod(a, &u1);
      const double vv = std::stod(b, &u2);
      if (u1 != a.size() || u2 != b.size() || !std::isfinite(xv) || !std::isfinite(vv))
        throw std::invalid_argument("number");
      rows.emplace_back(xv, vv);
    } catch (const std::exception&) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
  }
  if (rows.size() < 2) throw IoError(path + ": need at least two samples");
  std::sort(rows.begin(), rows.end());
  Signal1D s;
  for (const auto& [xv, vv] : rows) {
    if (!s.x.empty() && xv == s.x.back()) throw IoError(path + ": duplicate x " + std::to_string(xv));
    s.x.push_back(xv);
    s.value.push_back(vv);
  }
  return s;
}

void write_signal_csv(const std::string& path, const std::vector<double>& x, const std::vector<double>& value) {
  auto out = open_out(path);
  out << "x,value\n";
  char buf[96];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10e\n", x[i], value[i]);
    out << buf;
  }
}

double GrayImage::pixel(int col, int row) const {
  return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
}

double GrayImage::sample(double x, double y) const {
  auto locate = [](double s, int n, int& i0, double& w) {
    if (n == 1) {
      i0 = 0;
      w = 0.0;
      return;
    }
    const double p = std::clamp(s, 0.0, 1.0) * (n - 1);
    i0 = std::min(static_cast<int>(std::floor(p)), n - 2);
    w = p - i0;
  };
  int c0 = 0, r0 = 0;
  double wx = 0.0, wy = 0.0;
  locate(x, width, c0, wx);
  locate(1.0 - y, height, r0, wy); // row 0 is y = 1
  const int c1 = std::min(c0 + 1, width - 1), r1 = std::min(r0 + 1, height - 1);
  return (1 - wx) * (1 - wy) * pixel(c0, r0) + wx * (1 - wy) * pixel(c1, r0) + (1 - wx) * wy * pixel(c0, r1) +
         wx * wy * pixel(c1, r1);
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  if (pgm_token(in) != "P5") throw IoError(path + ": not a binary PGM (P5)");
  GrayImage img;
  img.width = parse_positive(pgm_token(in), path, "width");
  img.height = parse_positive(pgm_token(in), path, "height");
  img.maxval = parse_positive(pgm_token(in), path, "maxval");
  if (img.maxval > 255) throw IoError(path + ": only 8-bit PGM is supported");
  const auto n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  std::vector<unsigned char> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw IoError(path + ": truncated pixel data (expected " + std::to_string(n) + " bytes)");
  img.pixels.assign(bytes.begin(), bytes.end());
  return img;
}

void write_pgm(const std::string& path, int width, int height, const std::vector<unsigned char>& bytes) {
  if (bytes.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw IoError("write_pgm: pixel count does not match " + std::to_string(width) + "x" + std::to_string(height));
  auto out = open_out(path, true);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

IntensityMap normalize(GrayImage& image) {
  IntensityMap map;
  const auto [lo, hi] = std::minmax_element(image.pixels.begin(), image.pixels.end());
  map.min = *lo;
  map.max = *hi;
  const double range = map.max - map.min;
  for (auto& p : image.pixels) p = range > 0.0 ? (p - map.min) / range : 0.0;
  return map;
}

void write_frame_pgm(const std::string& path, const ImageFrame& frame, const IntensityMap& map) {
  std::vector<unsigned char> bytes(frame.values.size());
  for (int row = 0; row < frame.ny; ++row) {
    const int j = frame.ny - 1 - row; // top row is y = 1
    for (int i = 0; i < frame.nx; ++i) {
      const double v = std::clamp(frame.values[static_cast<std::size_t>(j * frame.nx + i)], 0.0, 1.0);
      bytes[static_cast<std::size_t>(row * frame.nx + i)] = static_cast<unsigned char>(std::lround(255.0 * v));
    }
  }
  write_pgm(path, frame.nx, frame.ny, bytes);
  char buf[96];
  std::snprintf(buf, sizeof buf, "min=%.10g max=%.10g\n", map.min, map.max);
  write_text(path + ".meta.txt", buf);
}

void write_frame_csv(const std::string& path, const ImageFrame& frame) {
  std::vector<double> x(static_cast<std::size_t>(frame.nx));
  for (int i = 0; i < frame.nx; ++i) x[static_cast<std::size_t>(i)] = frame.nx > 1 ? static_cast<double>(i) / (frame.nx - 1) : 0.0;
  write_signal_csv(path, x, {frame.values.begin(), frame.values.begin() + frame.nx});
}

void write_velocity_csv(const std::string& path, const SimplexMesh& mesh, const SpaceTimeVelocity& u) {
  auto out = open_out(path);
  out << (mesh.d == 1 ? "x,t,u\n" : "x,y,t,u,v\n");
  char buf[160];
  for (std::size_t dof = 0; dof < mesh.n_dofs; ++dof) {
    const Point& p = mesh.vertices[mesh.dof_node[dof]];
    if (mesh.d == 1) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10e\n", p[0], p[1], u.u.component(0)[dof]);
    } else {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10e,%.10e\n", p[0], p[1], p[2], u.u.component(0)[dof],
                    u.u.component(1)[dof]);
    }
    out << buf;
  }
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

} // namespace stm
