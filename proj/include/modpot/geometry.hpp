#pragma once

#include <Eigen/Dense>
#include <functional>

#include "modpot/dogleg.hpp"

namespace modpot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// State z paired with a covector psi, both in the same chart of R^n.
struct CotangentPoint {
  Vector z;
  Vector psi;
};

// Affinely controlled system  dz/dt = f(z) + M_z u  with admissible controls
// the unit ball of the quadratic form Q_z(u) = u^T P_z u, where P_z is the
// SPD matrix returned by `form` (so L_z = P_z^{-1}).
//
// Derivatives of the z-dependent data fall back to central differences with
// step 1e-6 (1 + |z|) when no analytic version is supplied. Immutable once
// constructed.
class AffineControlSystem {
 public:
  using VectorFn = std::function<Vector(const Vector&)>;
  using MatrixFn = std::function<Matrix(const Vector&)>;
  using ScalarFn = std::function<double(const Vector&)>;
  using PartialFn = std::function<Matrix(const Vector&, int)>;

  struct Data {
    int state_dim = 0;
    int control_dim = 0;
    VectorFn drift;             // f(z); zero drift when empty
    MatrixFn control_fields;    // M_z, n x k, columns g_j(z)
    MatrixFn form;              // P_z, k x k SPD
    ScalarFn mu;                // moderation strength, > 0
    ScalarFn unmoderated_cost;  // C^(z)

    // Optional analytic derivatives.
    MatrixFn drift_jacobian;         // df/dz, n x n
    PartialFn control_fields_partial;  // dM/dz_i
    PartialFn form_partial;            // dP/dz_i
    VectorFn mu_gradient;
    VectorFn cost_gradient;
  };

  explicit AffineControlSystem(Data data);

  int state_dim() const { return d_.state_dim; }
  int control_dim() const { return d_.control_dim; }

  Vector drift(const Vector& z) const;
  Matrix control_fields(const Vector& z) const;
  Matrix form(const Vector& z) const;
  double mu(const Vector& z) const;
  double unmoderated_cost(const Vector& z) const;

  Matrix drift_jacobian(const Vector& z) const;
  Matrix control_fields_partial(const Vector& z, int i) const;
  Matrix form_partial(const Vector& z, int i) const;
  Vector mu_gradient(const Vector& z) const;
  Vector cost_gradient(const Vector& z) const;

  // Central-difference step used for coordinate i at z.
  static double fd_step(const Vector& z) { return 1e-6 * (1 + z.norm()); }

  void check_point(const CotangentPoint& pt) const;

 private:
  Data d_;
};

// lambda, ell and the intermediate M^T psi at a cotangent point.
struct ControlGeometry {
  Vector projected;  // M_z^T psi
  Vector lambda;     // L_z M_z^T psi
  double ell = 0;    // sqrt(Q_z(lambda))
  Matrix fields;     // M_z
  Matrix form;       // P_z
};

ControlGeometry control_geometry(const AffineControlSystem& sys, const CotangentPoint& pt);

// Q_z(u) = u^T P_z u.
double quadratic_form_value(const AffineControlSystem& sys, const Vector& z, const Vector& u);

// lambda(psi) = L_z (M_z^T psi).
Vector lambda_map(const AffineControlSystem& sys, const CotangentPoint& pt);

// ell(psi) = sqrt(Q_z(lambda(psi))).
double ell(const AffineControlSystem& sys, const CotangentPoint& pt);

// Below this multiple of mu(z), ell is treated as zero in the feedback law.
inline constexpr double kEllZeroThreshold = 1e-14;

// Maximizing control v = sigma(ell / mu) lambda / ell, or 0 when ell = 0.
Vector optimal_control(const AffineControlSystem& sys, const DoglegParams& params,
                       const CotangentPoint& pt);

// X(z, u) = f(z) + M_z u; rejects controls with Q_z(u) > 1 + 1e-12.
Vector vector_field(const AffineControlSystem& sys, const Vector& z, const Vector& u);

}  // namespace modpot
