#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mixedspec/model.hpp"

namespace mixedspec {

/// Plain real 2x2 matrix [[a, b], [c, d]].
struct Matrix2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Matrix2 identity() { return {}; }
  double det() const noexcept { return a * d - b * c; }
  double trace() const noexcept { return a + d; }
  double frobenius() const noexcept;
  /// Largest singular value.
  double op_norm() const noexcept;
  Matrix2 scaled(double s) const noexcept { return {a * s, b * s, c * s, d * s}; }
  /// Inverse assuming det = 1 (adjugate).
  Matrix2 sl2_inverse() const noexcept { return {d, -b, -c, a}; }

  friend Matrix2 operator*(const Matrix2& x, const Matrix2& y) noexcept {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
  }
  friend Matrix2 operator+(const Matrix2& x, const Matrix2& y) noexcept {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
  }
  friend Matrix2 operator-(const Matrix2& x, const Matrix2& y) noexcept {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
  friend bool operator==(const Matrix2&, const Matrix2&) = default;
};

/// A real 2x2 matrix with unit determinant (within 1e-10 relative to the
/// size of its entries).
class SL2Matrix {
 public:
  SL2Matrix() = default;
  explicit SL2Matrix(const Matrix2& m);
  SL2Matrix(double a, double b, double c, double d)
      : SL2Matrix(Matrix2{a, b, c, d}) {}

  const Matrix2& matrix() const noexcept { return m_; }
  double a() const noexcept { return m_.a; }
  double b() const noexcept { return m_.b; }
  double c() const noexcept { return m_.c; }
  double d() const noexcept { return m_.d; }
  double trace() const noexcept { return m_.trace(); }
  SL2Matrix inverse() const noexcept;
  friend SL2Matrix operator*(const SL2Matrix& x, const SL2Matrix& y);

 private:
  Matrix2 m_;
};

/// A cocycle product held as e^{log_scale} * unit with ||unit||_F = 1.
struct ScaledProduct {
  Matrix2 unit;
  double log_scale = 0.0;

  /// log of the operator norm of the true product.
  double log_norm() const noexcept;
  /// log |det| of the true product (0 for SL(2,R) cocycles).
  double log_det() const noexcept;
  /// The true product; only meaningful when it fits in double range.
  SL2Matrix matrix() const;
};

/// A(theta, E) = [[V(theta) - E, -1], [1, 0]].
SL2Matrix step_matrix(const ModelParams& params, double theta, double energy);

/// A^n(theta, E) = A(theta + (n-1) w, E) ... A(theta + w, E) A(theta, E).
/// The running product is renormalised every step; the determinant drift is
/// folded back into log_scale periodically.
ScaledProduct product(const ModelParams& params, double theta, double energy,
                      std::size_t n);

/// Same product for the potential with frequency replaced by `omega`
/// (including inside V). Used for rational approximants.
ScaledProduct product_with_frequency(const ModelParams& params, double omega,
                                     double theta, double energy, std::size_t n);

/// Product of a general cocycle theta -> fiber(theta) over the rotation by
/// omega, in the same descending order.
ScaledProduct product_of(const std::function<Matrix2(double)>& fiber,
                         double omega, double theta, std::size_t n);

struct LyapunovEstimate {
  double energy = 0.0;
  double value = 0.0;
  std::size_t n_steps = 0;
  std::size_t n_phases = 0;
  double std_error = 0.0;  // spread across phases / sqrt(phases)
};

/// Offset applied to the equispaced phase grid (1/pi, irrational and far
/// from the golden mean's rational approximants).
inline constexpr double kPhaseOffset = 0.31830988618379067;

std::vector<double> phase_grid(std::size_t count);

/// Phase average of (1/n) log ||A^n(theta_j, E)|| over `phases` equispaced
/// points theta_j = (j + offset) / phases. Phases are spread over `workers`
/// threads; the reduction runs in phase order.
LyapunovEstimate finite_lyapunov(const ModelParams& params, double energy,
                                 std::size_t n, std::size_t phases,
                                 unsigned workers = 1);

/// Phase-averaged finite exponent of a general cocycle.
LyapunovEstimate finite_lyapunov_of(const std::function<Matrix2(double)>& fiber,
                                    double omega, std::size_t n,
                                    std::size_t phases, unsigned workers = 1);

/// L(E) for the constant potential V = 2 (K = 0).
double free_lyapunov(double energy);

struct GrowthBoundReport {
  double max_exponent = 0.0;
  double at_energy = 0.0;
  double at_theta = 0.0;
  std::size_t at_n = 0;
  /// 10K + 1 for K > 0. For K = 0 the 10K bound is vacuous and the
  /// envelope is log(2 + max|V - E|), which bounds log ||A|| directly.
  double envelope = 0.0;
  bool violated = false;
  bool degenerate_k0 = false;
};

/// Max of (1/n) log ||A^n(theta, E)|| over the sample sets.
GrowthBoundReport growth_bound_check(const ModelParams& params,
                                     std::span<const double> energies,
                                     std::span<const double> thetas,
                                     std::span<const std::size_t> steps);

/// Fibered rotation number in [0, 1/2]: half the density of sign changes of
/// the solution u of u_{k+1} = (V(theta + k w) - E) u_k - u_{k-1} started
/// from (u_0, u_{-1}) = (1, 0), i.e. half-turns of the projective lift of
/// A^n(theta, E) applied to e_1.
double rotation_number(const ModelParams& params, double energy, std::size_t n,
                       double theta);

}  // namespace mixedspec
