#include "modpot/geometry.hpp"

#include <cmath>
#include <string>

namespace modpot {

namespace {

template <class Fn>
auto central_difference(const Fn& fn, const Vector& z, int i) {
  const double h = AffineControlSystem::fd_step(z);
  Vector zp = z, zm = z;
  zp(i) += h;
  zm(i) -= h;
  return ((fn(zp) - fn(zm)) / (2 * h)).eval();
}

}  // namespace

AffineControlSystem::AffineControlSystem(Data data) : d_(std::move(data)) {
  if (d_.state_dim <= 0 || d_.control_dim <= 0) {
    throw ConfigError("AffineControlSystem: dimensions must be positive");
  }
  if (!d_.control_fields || !d_.form || !d_.mu || !d_.unmoderated_cost) {
    throw ConfigError("AffineControlSystem: control_fields, form, mu and cost are required");
  }
}

Vector AffineControlSystem::drift(const Vector& z) const {
  if (!d_.drift) return Vector::Zero(d_.state_dim);
  Vector f = d_.drift(z);
  if (f.size() != d_.state_dim) throw ConfigError("drift: wrong dimension");
  return f;
}

Matrix AffineControlSystem::control_fields(const Vector& z) const {
  Matrix m = d_.control_fields(z);
  if (m.rows() != d_.state_dim || m.cols() != d_.control_dim) {
    throw ConfigError("control_fields: expected an n x k matrix");
  }
  return m;
}

Matrix AffineControlSystem::form(const Vector& z) const {
  Matrix p = d_.form(z);
  if (p.rows() != d_.control_dim || p.cols() != d_.control_dim) {
    throw ConfigError("form: expected a k x k matrix");
  }
  return p;
}

double AffineControlSystem::mu(const Vector& z) const {
  const double m = d_.mu(z);
  if (!(m > 0)) throw ConfigError("mu(z) must be positive, got " + std::to_string(m));
  return m;
}

double AffineControlSystem::unmoderated_cost(const Vector& z) const {
  return d_.unmoderated_cost(z);
}

Matrix AffineControlSystem::drift_jacobian(const Vector& z) const {
  if (d_.drift_jacobian) return d_.drift_jacobian(z);
  Matrix jac(d_.state_dim, d_.state_dim);
  if (!d_.drift) return Matrix::Zero(d_.state_dim, d_.state_dim);
  for (int i = 0; i < d_.state_dim; ++i) {
    jac.col(i) = central_difference([this](const Vector& x) { return drift(x); }, z, i);
  }
  return jac;
}

Matrix AffineControlSystem::control_fields_partial(const Vector& z, int i) const {
  if (d_.control_fields_partial) return d_.control_fields_partial(z, i);
  return central_difference([this](const Vector& x) { return control_fields(x); }, z, i);
}

Matrix AffineControlSystem::form_partial(const Vector& z, int i) const {
  if (d_.form_partial) return d_.form_partial(z, i);
  return central_difference([this](const Vector& x) { return form(x); }, z, i);
}

Vector AffineControlSystem::mu_gradient(const Vector& z) const {
  if (d_.mu_gradient) return d_.mu_gradient(z);
  Vector g(d_.state_dim);
  for (int i = 0; i < d_.state_dim; ++i) {
    g(i) = central_difference(
        [this](const Vector& x) { return Eigen::Matrix<double, 1, 1>(mu(x)); }, z, i)(0);
  }
  return g;
}

Vector AffineControlSystem::cost_gradient(const Vector& z) const {
  if (d_.cost_gradient) return d_.cost_gradient(z);
  Vector g(d_.state_dim);
  for (int i = 0; i < d_.state_dim; ++i) {
    g(i) = central_difference(
        [this](const Vector& x) { return Eigen::Matrix<double, 1, 1>(unmoderated_cost(x)); }, z,
        i)(0);
  }
  return g;
}

void AffineControlSystem::check_point(const CotangentPoint& pt) const {
  if (pt.z.size() != d_.state_dim || pt.psi.size() != d_.state_dim) {
    throw ConfigError("cotangent point dimension does not match the system");
  }
}

ControlGeometry control_geometry(const AffineControlSystem& sys, const CotangentPoint& pt) {
  sys.check_point(pt);
  ControlGeometry g;
  g.fields = sys.control_fields(pt.z);
  g.form = sys.form(pt.z);
  g.projected = g.fields.transpose() * pt.psi;
  Eigen::LLT<Matrix> llt(g.form);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("form matrix is not symmetric positive definite");
  }
  g.lambda = llt.solve(g.projected);
  // Q(lambda) = lambda^T P lambda = lambda^T M^T psi.
  const double q = g.lambda.dot(g.projected);
  if (q < -1e-14 * (1 + g.projected.squaredNorm())) {
    throw InternalError("negative Q(lambda); form matrix is broken");
  }
  g.ell = std::sqrt(std::max(q, 0.0));
  return g;
}

double quadratic_form_value(const AffineControlSystem& sys, const Vector& z, const Vector& u) {
  if (u.size() != sys.control_dim()) throw ConfigError("control dimension mismatch");
  return u.dot(sys.form(z) * u);
}

Vector lambda_map(const AffineControlSystem& sys, const CotangentPoint& pt) {
  return control_geometry(sys, pt).lambda;
}

double ell(const AffineControlSystem& sys, const CotangentPoint& pt) {
  return control_geometry(sys, pt).ell;
}

Vector optimal_control(const AffineControlSystem& sys, const DoglegParams& params,
                       const CotangentPoint& pt) {
  const ControlGeometry g = control_geometry(sys, pt);
  const double mu = sys.mu(pt.z);
  if (g.ell < kEllZeroThreshold * mu) return Vector::Zero(sys.control_dim());
  const double s = sigma(params, g.ell / mu);
  return (s / g.ell) * g.lambda;
}

Vector vector_field(const AffineControlSystem& sys, const Vector& z, const Vector& u) {
  if (quadratic_form_value(sys, z, u) > 1 + 1e-12) {
    throw DomainError("vector_field: control outside the admissible region");
  }
  return sys.drift(z) + sys.control_fields(z) * u;
}

}  // namespace modpot
