#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stmeta/outer.hpp"

namespace stm {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 1D samples from a CSV with header `x,value`, sorted by x.
struct Signal1D {
  std::vector<double> x;
  std::vector<double> value;

  /// Piecewise-linear interpolation, constant beyond the end samples.
  [[nodiscard]] double at(double xq) const;
};

Signal1D read_signal_csv(const std::string& path);
void write_signal_csv(const std::string& path, const std::vector<double>& x, const std::vector<double>& value);

/// 8-bit grayscale image; row 0 is the top row (largest y).
struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<double> pixels; // row-major raw values

  [[nodiscard]] double pixel(int col, int row) const;
  /// Bilinear sample at (x, y) in [0,1]^2 with pixel centres at the lattice
  /// points i / (width - 1), y = 1 on the top row.
  [[nodiscard]] double sample(double x, double y) const;
};

GrayImage read_pgm(const std::string& path);
void write_pgm(const std::string& path, int width, int height, const std::vector<unsigned char>& bytes);

/// Affine map original = min + v (max - min) between normalized values v in
/// [0,1] and the source intensities.
struct IntensityMap {
  double min = 0.0;
  double max = 1.0;
};

/// Rescales pixels to [0,1] by their own min/max. A constant image maps to 0.
IntensityMap normalize(GrayImage& image);

/// Writes a normalized frame as P5 (byte = round(255 clamp(v, 0, 1)), top row
/// y = 1) plus `<path>.meta.txt` holding `min=<float> max=<float>` of `map`.
void write_frame_pgm(const std::string& path, const ImageFrame& frame, const IntensityMap& map);

/// One CSV per 1D frame: `x,value`.
void write_frame_csv(const std::string& path, const ImageFrame& frame);

/// Nodal velocity per dof: `x,t,u` (d = 1) or `x,y,t,u,v` (d = 2).
void write_velocity_csv(const std::string& path, const SimplexMesh& mesh, const SpaceTimeVelocity& u);

void write_text(const std::string& path, const std::string& text);

} // namespace stm
