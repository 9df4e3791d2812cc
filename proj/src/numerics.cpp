#include "modpot/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace modpot::numerics {

namespace {

// Kronrod 15-point nodes (non-negative half) and weights; Gauss 7-point
// weights for the embedded odd-indexed nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  int depth;
};

Panel gauss_kronrod(const std::function<double(double)>& g, double a, double b, int depth) {
  const double center = (a + b) / 2;
  const double half = (b - a) / 2;
  const double fc = g(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss), depth};
}

}  // namespace

namespace {

QuadratureResult adaptive_gk(const std::function<double(double)>& g, double lo, double hi,
                             const QuadratureOptions& opts);

}  // namespace

QuadratureResult integrate_singular(const std::function<double(double)>& f, double a, double b,
                                    SingularEnd singular_end, QuadratureOptions opts) {
  return integrate_singular_offset([&f](double x, double) { return f(x); }, a, b, singular_end,
                                   opts);
}

QuadratureResult integrate_singular_offset(const std::function<double(double, double)>& f,
                                           double a, double b, SingularEnd singular_end,
                                           QuadratureOptions opts) {
  if (!(a <= b)) throw DomainError("integrate_singular: require a <= b");
  if (a == b) return {};

  switch (singular_end) {
    case SingularEnd::None:
      return adaptive_gk([&f, b](double x) { return f(x, b - x); }, a, b, opts);
    case SingularEnd::Upper:
      return adaptive_gk([&f, b](double u) { return 2 * u * f(b - u * u, u * u); }, 0,
                         std::sqrt(b - a), opts);
    case SingularEnd::Lower:
      return adaptive_gk([&f, a](double u) { return 2 * u * f(a + u * u, u * u); }, 0,
                         std::sqrt(b - a), opts);
  }
  throw InternalError("integrate_singular: unknown endpoint flag");
}

namespace {

QuadratureResult adaptive_gk(const std::function<double(double)>& g, double lo, double hi,
                             const QuadratureOptions& opts) {
  // Global adaptive bisection: always split the panel with the largest error.
  std::vector<Panel> heap;
  auto by_error = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  heap.push_back(gauss_kronrod(g, lo, hi, 0));
  double total = heap.front().value;
  double total_error = heap.front().error;

  while (total_error > opts.abs_tol) {
    if (static_cast<int>(heap.size()) >= opts.max_panels) {
      throw ConvergenceError("integrate_singular: panel budget exhausted");
    }
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Panel worst = heap.back();
    heap.pop_back();
    if (worst.depth >= opts.max_depth) {
      throw ConvergenceError("integrate_singular: maximum subdivision depth reached");
    }
    const double mid = (worst.a + worst.b) / 2;
    const Panel left = gauss_kronrod(g, worst.a, mid, worst.depth + 1);
    const Panel right = gauss_kronrod(g, mid, worst.b, worst.depth + 1);
    if (!std::isfinite(left.value) || !std::isfinite(right.value)) {
      throw ConvergenceError("integrate_singular: non-finite integrand");
    }
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);

    // Resum occasionally; the running totals drift by rounding.
    if (heap.size() % 64 == 0) {
      total = 0;
      total_error = 0;
      for (const auto& p : heap) {
        total += p.value;
        total_error += p.error;
      }
    }
  }
  if (!std::isfinite(total)) throw ConvergenceError("integrate_singular: non-finite integrand");

  total = 0;
  total_error = 0;
  for (const auto& p : heap) {
    total += p.value;
    total_error += p.error;
  }
  return {total, total_error, static_cast<int>(heap.size())};
}

}  // namespace

// Carlson (1995), "Numerical computation of real or complex elliptic
// integrals", duplication with a fifth-order series tail.
double carlson_rf(double x, double y, double z) {
  if (x < 0 || y < 0 || z < 0 || (x == 0) + (y == 0) + (z == 0) > 1) {
    throw DomainError("carlson_rf: arguments must be non-negative, at most one zero");
  }
  constexpr double r = 1e-16;
  const double a0 = (x + y + z) / 3;
  const double q = std::pow(3 * r, -1.0 / 6.0) *
                   std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)});
  double a = a0;
  double xm = x, ym = y, zm = z;
  double scale = 1;  // 4^{-m}
  while (scale * q >= std::abs(a)) {
    const double sx = std::sqrt(xm), sy = std::sqrt(ym), sz = std::sqrt(zm);
    const double lambda = sx * sy + sx * sz + sy * sz;
    xm = (xm + lambda) / 4;
    ym = (ym + lambda) / 4;
    zm = (zm + lambda) / 4;
    a = (a + lambda) / 4;
    scale /= 4;
  }
  const double X = (a0 - x) * scale / a;
  const double Y = (a0 - y) * scale / a;
  const double Z = -(X + Y);
  const double e2 = X * Y - Z * Z;
  const double e3 = X * Y * Z;
  return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / std::sqrt(a);
}

double carlson_rd(double x, double y, double z) {
  if (x < 0 || y < 0 || z <= 0 || (x == 0 && y == 0)) {
    throw DomainError("carlson_rd: require x, y >= 0 (not both zero) and z > 0");
  }
  constexpr double r = 1e-16;
  const double a0 = (x + y + 3 * z) / 5;
  const double q = std::pow(r / 4, -1.0 / 6.0) *
                   std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)});
  double a = a0;
  double xm = x, ym = y, zm = z;
  double scale = 1;
  double sum = 0;
  while (scale * q >= std::abs(a)) {
    const double sx = std::sqrt(xm), sy = std::sqrt(ym), sz = std::sqrt(zm);
    const double lambda = sx * sy + sx * sz + sy * sz;
    sum += scale / (sz * (zm + lambda));
    xm = (xm + lambda) / 4;
    ym = (ym + lambda) / 4;
    zm = (zm + lambda) / 4;
    a = (a + lambda) / 4;
    scale /= 4;
  }
  const double X = (a0 - x) * scale / a;
  const double Y = (a0 - y) * scale / a;
  const double Z = -(X + Y) / 3;
  const double xy = X * Y;
  const double zz = Z * Z;
  const double e2 = xy - 6 * zz;
  const double e3 = (3 * xy - 8 * zz) * Z;
  const double e4 = 3 * (xy - zz) * zz;
  const double e5 = xy * zz * Z;
  const double series = 1 - 3 * e2 / 14 + e3 / 6 + 9 * e2 * e2 / 88 - 3 * e4 / 22 -
                        9 * e2 * e3 / 52 + 3 * e5 / 26;
  return scale * series / (a * std::sqrt(a)) + 3 * sum;
}

namespace {

double to_parameter(double m, EllipticConvention conv) {
  return conv == EllipticConvention::Modulus ? m * m : m;
}

void check_elliptic_args(double phi, double m) {
  if (!(phi >= 0 && phi <= std::numbers::pi / 2 + 1e-15)) {
    throw DomainError("elliptic integral: amplitude outside [0, pi/2]");
  }
  const double s = std::sin(phi);
  if (1 - m * s * s < 0) throw DomainError("elliptic integral: 1 - m sin^2(phi) < 0");
}

}  // namespace

double elliptic_F(double phi, double m, EllipticConvention conv) {
  m = to_parameter(m, conv);
  check_elliptic_args(phi, m);
  if (phi == 0) return 0;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  if (1 - m * s * s == 0) throw DomainError("elliptic_F: logarithmic singularity");
  return s * carlson_rf(c * c, 1 - m * s * s, 1);
}

double elliptic_E(double phi, double m, EllipticConvention conv) {
  m = to_parameter(m, conv);
  check_elliptic_args(phi, m);
  if (phi == 0) return 0;
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double cc = c * c;
  const double dd = 1 - m * s * s;
  if (m == 0) return phi;
  if (dd == 0) {
    // m = 1, phi = pi/2: E = 1 (R_D term degenerates with x = y = 0).
    return s;
  }
  return s * carlson_rf(cc, dd, 1) - m * s * s * s * carlson_rd(cc, dd, 1) / 3;
}

}  // namespace modpot::numerics
