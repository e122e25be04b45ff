#include <cmath>
#include <memory>
#include <stdexcept>

#include "stmeta/analytic.hpp"

namespace stm {

namespace {

// Gaussian profile exp(-k s^2) and its derivative.
struct Gaussian {
  double k;
  [[nodiscard]] double value(double s) const { return std::exp(-k * s * s); }
};

// Sum of a 1D profile over the periodic images s + m, |m| <= 1.
template <class Profile>
double periodized(const Profile& p, double s, bool periodic) {
  if (!periodic) return p(s);
  return p(s - 1.0) + p(s) + p(s + 1.0);
}

SpaceTimeFn constant_fn(double c) {
  return [c](const Point&) { return c; };
}

ManufacturedCase d1_case0() {
  ManufacturedCase mc;
  mc.id = 0;
  mc.dim = 1;
  mc.description = "indicator of (0.6 - 0.2t, 0.8 - 0.2t), u = -0.2";
  mc.exact_image = [](const Point& p) {
    const double x = p[0], t = p[1];
    return (0.6 - 0.2 * t < x && x < 0.8 - 0.2 * t) ? 1.0 : 0.0;
  };
  mc.velocity = {constant_fn(-0.2)};
  mc.velocity_divergence = constant_fn(0.0);
  mc.forcing = constant_fn(0.0);
  mc.smooth = false;
  return mc;
}

ManufacturedCase d1_case1(SeamTreatment seam) {
  ManufacturedCase mc;
  mc.id = 1;
  mc.dim = 1;
  mc.description = "exp(-100 (x - t(1-t) - 0.5)^2), u = 1 - 2t";
  const bool per = seam == SeamTreatment::periodized;
  mc.exact_image = [per](const Point& p) {
    const Gaussian g{100.0};
    const double s = p[0] - p[1] * (1.0 - p[1]) - 0.5;
    return periodized([&](double v) { return g.value(v); }, s, per);
  };
  mc.velocity = {[](const Point& p) { return 1.0 - 2.0 * p[1]; }};
  mc.velocity_divergence = constant_fn(0.0);
  mc.forcing = constant_fn(0.0);
  return mc;
}

ManufacturedCase d1_case2(SeamTreatment seam) {
  ManufacturedCase mc;
  mc.id = 2;
  mc.dim = 1;
  mc.description = "exp(-125 (x - 0.4(1-t) - 0.3)^2), u = -0.4";
  const bool per = seam == SeamTreatment::periodized;
  mc.exact_image = [per](const Point& p) {
    const Gaussian g{125.0};
    const double s = p[0] - 0.4 * (1.0 - p[1]) - 0.3;
    return periodized([&](double v) { return g.value(v); }, s, per);
  };
  mc.velocity = {constant_fn(-0.4)};
  mc.velocity_divergence = constant_fn(0.0);
  mc.forcing = constant_fn(0.0);
  return mc;
}

// I = exp(-25 q^2), q = -4.3x + 5.16x^3 + 0.5 + t, u = exp(-(0.5 - x)^2).
struct Case3Profile {
  static double q(double x, double t) { return -4.3 * x + 5.16 * x * x * x + 0.5 + t; }
  static double image(double x, double t) {
    const double qq = q(x, t);
    return std::exp(-25.0 * qq * qq);
  }
  static double dt(double x, double t) { return -50.0 * q(x, t) * image(x, t); }
  static double dx(double x, double t) { return dt(x, t) * (-4.3 + 15.48 * x * x); }
};

ManufacturedCase d1_case3(SeamTreatment seam) {
  ManufacturedCase mc;
  mc.id = 3;
  mc.dim = 1;
  mc.description = "exp(-25 (-4.3x + 5.16x^3 + 0.5 + t)^2), u = exp(-(0.5 - x)^2), with forcing";
  mc.pure_transport = false;
  const bool per = seam == SeamTreatment::periodized;
  using P = Case3Profile;
  // Periodized form adds x (I(0,t) - I(1,t)) so both ends of the seam agree.
  mc.exact_image = [per](const Point& p) {
    const double x = p[0], t = p[1];
    double v = P::image(x, t);
    if (per) v += x * (P::image(0.0, t) - P::image(1.0, t));
    return v;
  };
  mc.velocity = {[](const Point& p) {
    const double s = 0.5 - p[0];
    return std::exp(-s * s);
  }};
  mc.velocity_divergence = [](const Point& p) {
    const double s = 0.5 - p[0];
    return 2.0 * s * std::exp(-s * s);
  };
  mc.forcing = [per](const Point& p) {
    const double x = p[0], t = p[1];
    const double s = 0.5 - x;
    const double u = std::exp(-s * s);
    double it = P::dt(x, t);
    double ix = P::dx(x, t);
    if (per) {
      it += x * (P::dt(0.0, t) - P::dt(1.0, t));
      ix += P::image(0.0, t) - P::image(1.0, t);
    }
    return it + u * ix;
  };
  return mc;
}

// exp(-25 |x - c(t)|^2) with c(t) = c0 + t v, u = v.
ManufacturedCase d2_translating(int id, std::array<double, 2> c0, std::array<double, 2> v,
                                std::string description, SeamTreatment seam) {
  ManufacturedCase mc;
  mc.id = id;
  mc.dim = 2;
  mc.description = std::move(description);
  const bool per = seam == SeamTreatment::periodized;
  mc.exact_image = [c0, v, per](const Point& p) {
    const Gaussian g{25.0};
    const double sx = p[0] - c0[0] - v[0] * p[2];
    const double sy = p[1] - c0[1] - v[1] * p[2];
    const auto gx = [&](double s) { return g.value(s); };
    return periodized(gx, sx, per) * periodized(gx, sy, per);
  };
  mc.velocity = {constant_fn(v[0]), constant_fn(v[1])};
  mc.velocity_divergence = constant_fn(0.0);
  mc.forcing = constant_fn(0.0);
  return mc;
}

} // namespace

FlowField ManufacturedCase::flow() const {
  FlowField f;
  f.d = dim;
  f.periodic = periodic;
  const auto vel = velocity;
  const int d = dim;
  f.velocity = [vel, d](const SpatialPoint& x, double t) {
    const Point p = d == 1 ? Point{x[0], t, 0.0} : Point{x[0], x[1], t};
    SpatialPoint out{0.0, 0.0};
    for (int k = 0; k < d; ++k) out[k] = vel[static_cast<std::size_t>(k)](p);
    return out;
  };
  if (velocity_divergence) {
    const auto div = velocity_divergence;
    f.divergence = [div, d](const SpatialPoint& x, double t) {
      return div(d == 1 ? Point{x[0], t, 0.0} : Point{x[0], x[1], t});
    };
  }
  return f;
}

ImageFn ManufacturedCase::trace(double t) const {
  const auto img = exact_image;
  const int d = dim;
  return [img, d, t](const SpatialPoint& x) {
    return img(d == 1 ? Point{x[0], t, 0.0} : Point{x[0], x[1], t});
  };
}

std::vector<ManufacturedCase> manufactured_catalog(SeamTreatment seam) {
  return {
      d1_case0(),
      d1_case1(seam),
      d1_case2(seam),
      d1_case3(seam),
      d2_translating(0, {0.3, 0.3}, {0.3, 0.3}, "Gaussian moving diagonally, u = (0.3, 0.3)", seam),
      d2_translating(1, {0.3, 0.5}, {0.4, 0.0}, "Gaussian moving along x, u = (0.4, 0)", seam),
      d2_translating(2, {0.5, 0.3}, {0.0, 0.4}, "Gaussian moving along y, u = (0, 0.4)", seam),
  };
}

ManufacturedCase manufactured_case(int dim, int id, SeamTreatment seam) {
  for (auto& mc : manufactured_catalog(seam)) {
    if (mc.dim == dim && mc.id == id) return mc;
  }
  throw std::out_of_range("unknown manufactured case " + std::to_string(id) + " for d = " +
                          std::to_string(dim) + "; valid ids are " + (dim == 2 ? "0-2" : "0-3") +
                          " for d = " + std::to_string(dim == 2 ? 2 : 1));
}

} // namespace stm
