#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mixedspec/model.hpp"

namespace mixedspec {

/// Dirichlet truncation of (Hu)_n = -u_{n+1} - u_{n-1} + V(theta + n w) u_n
/// to n = 0..N-1: symmetric tridiagonal, off-diagonal -1.
class FiniteOperator {
 public:
  /// Diagonal entries must be strictly positive.
  explicit FiniteOperator(std::vector<double> diagonal, double theta = 0.0);

  std::size_t size() const noexcept { return diag_.size(); }
  std::span<const double> diagonal() const noexcept { return diag_; }
  double theta() const noexcept { return theta_; }
  /// Principal (N-1) x (N-1) truncation.
  FiniteOperator leading(std::size_t n) const;
  /// Gershgorin enclosure [min d - 2, max d + 2].
  std::pair<double, double> gershgorin() const noexcept;
  /// (H v)_n
  std::vector<double> apply(std::span<const double> v) const;

 private:
  std::vector<double> diag_;
  double theta_;
};

FiniteOperator build_finite(const ModelParams& params, double theta, std::size_t n);

/// Number of eigenvalues strictly below E (Sturm sequence).
std::size_t eigenvalue_count_below(const FiniteOperator& op, double energy);

/// The j-th eigenvalue (0-based, ascending) by bisection to width tol.
double eigenvalue_at(const FiniteOperator& op, std::size_t index, double tol);

/// All eigenvalues in [a, b], ascending, each bisected to width tol.
std::vector<double> eigenvalues_in(const FiniteOperator& op, double a, double b,
                                   double tol);

struct Eigenpair {
  double energy = 0.0;         // Rayleigh quotient of the returned vector
  std::vector<double> vector;  // unit 2-norm
  double residual = 0.0;       // ||H v - energy v||
  bool near_degenerate = false;
};

/// Inverse iteration at shift E. ConvergenceError if the residual stays
/// above 1e-6 (relative to 1 + |E|).
Eigenpair eigenvector(const FiniteOperator& op, double energy);

struct DecayFit {
  double rate = 0.0;          // max(0, -slope)
  double slope = 0.0;         // d log|v_n| / d|n - center|
  double fit_quality = 0.0;   // R^2 of the linear fit
  std::size_t center = 0;
  std::size_t points = 0;
};

/// Least-squares slope of log|v_n| against |n - argmax| over entries above
/// 1e-12, leaving out 10% of the vector at each end.
DecayFit decay_rate(std::span<const double> v);

struct SpectralEdges {
  double min_estimate = 0.0;
  double max_estimate = 0.0;
  double sup_f = 0.0;
  double edge_slack = 0.0;      // 2 - 2 cos(pi/(N+1)), the K = 0 bottom
  double upper_scale = 0.0;     // e^{K ||f||_inf}
  bool min_in_bracket = false;  // min in [-1e-8, edge_slack]
  bool max_in_bracket = false;  // max / upper_scale in [1/4, 4]
};

SpectralEdges spectral_edges(const ModelParams& params,
                             std::span<const double> thetas, std::size_t n);

struct Gap {
  double center = 0.0;
  double width = 0.0;
};

/// Maximal runs of resolution-sized cells of [a, b] that hold no eigenvalue
/// of any of the given operators.
std::vector<Gap> gap_profile(std::span<const FiniteOperator> ops, double a,
                             double b, double resolution);
std::vector<Gap> gap_profile(const ModelParams& params,
                             std::span<const double> thetas, std::size_t n,
                             double a, double b, double resolution);

/// (1/N) sum_j log|E - E_j|: the Thouless-formula exponent of the finite
/// eigenvalue counting measure.
double thouless_exponent(std::span<const double> eigenvalues, double energy);

struct SpectrumRow {
  double theta = 0.0;
  std::size_t n = 0;
  std::size_t index = 0;
  double energy = 0.0;
  double residual = 0.0;
  double decay_rate = 0.0;
  double fit_quality = 0.0;
};

/// Eigenvalues in [a, b] with residuals and decay fits (vectors of length
/// >= 50 only); rows ordered by index. Eigenvalues closer than 1e-12 are
/// merged.
std::vector<SpectrumRow> analyze(const FiniteOperator& op, double a, double b,
                                 double tol);

}  // namespace mixedspec
