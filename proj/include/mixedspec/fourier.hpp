#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace mixedspec {

using complex = std::complex<double>;

/// Truncated Fourier series sum_{|k|<=M} c_k e^{2 pi i k theta} of a
/// real-analytic function on the torus R/Z.
///
/// Strip widths are measured in units of theta: the function extends
/// holomorphically to |Im theta| < strip_h, and the Cauchy estimate reads
/// |c_k| <= ||f||_w e^{-2 pi w |k|} for every w < strip_h.
///
/// Coefficients are kept Hermitian (c_{-k} = conj(c_k)) so the function is
/// real on the real torus; small asymmetries are projected away, large ones
/// are rejected.
class FourierSeries {
 public:
  FourierSeries();
  /// `coeffs` holds c_{-M}..c_{M} (odd length).
  FourierSeries(std::vector<complex> coeffs, double strip_h,
                std::optional<double> declared_norm = std::nullopt);

  static FourierSeries zero(double strip_h = 1.0);
  static FourierSeries constant(double c, double strip_h = 1.0);
  /// amplitude * cos(2 pi theta)
  static FourierSeries cosine(double amplitude, double strip_h = 1.0);
  /// Builds from nonnegative modes; negative modes are filled by symmetry.
  static FourierSeries from_modes(const std::map<int, complex>& modes,
                                  double strip_h);
  /// Samples a real function on a power-of-two grid and keeps modes up to
  /// the smallest M with declared_norm * e^{-2 pi h M} < 1e-14.
  static FourierSeries sample(const std::function<double(double)>& fn,
                              double strip_h, double declared_norm);

  int order() const noexcept { return order_; }
  complex coeff(int k) const noexcept;
  std::span<const complex> coeffs() const noexcept { return coeffs_; }
  double strip_h() const noexcept { return strip_h_; }
  std::optional<double> declared_norm() const noexcept { return declared_; }
  double mean() const noexcept { return coeff(0).real(); }
  double max_abs_coeff() const noexcept;

  /// Real value on the real torus.
  double operator()(double theta) const noexcept;
  /// Value at theta + i*imag_shift (no strip check; see evaluate()).
  complex at(complex theta) const noexcept;

  /// Multiplies c_k by e^{2 pi i turns(k)}; turns(k) = k*alpha realises
  /// theta -> theta + alpha.
  FourierSeries rotated(const std::function<double(long)>& turns) const;
  FourierSeries shifted(double alpha) const;
  FourierSeries scaled(double s) const;
  FourierSeries derivative() const;
  FourierSeries with_strip(double strip_h,
                           std::optional<double> declared_norm) const;
  /// Drops trailing modes below rel_tol * max|c_k|.
  FourierSeries trimmed(double rel_tol) const;

  FourierSeries& operator+=(const FourierSeries& other);
  FourierSeries& operator-=(const FourierSeries& other);
  friend FourierSeries operator+(FourierSeries a, const FourierSeries& b) {
    return a += b;
  }
  friend FourierSeries operator-(FourierSeries a, const FourierSeries& b) {
    return a -= b;
  }

 private:
  std::vector<complex> coeffs_;
  int order_ = 0;
  double strip_h_ = 1.0;
  std::optional<double> declared_;
};

/// sum_k c_k e^{2 pi i k (theta + i imag_shift)}; DomainError unless
/// |imag_shift| < strip_h.
complex evaluate(const FourierSeries& series, double theta, double imag_shift);

/// Values on the uniform grid theta_j = j/n, evaluated on the line
/// Im theta = imag_shift. Requires n >= 2M+1.
std::vector<complex> grid_values(const FourierSeries& series, std::size_t n,
                                 double imag_shift = 0.0);

/// Fourier coefficients c_{-n/2}..c_{n/2-1} of grid samples (index k+n/2).
std::vector<complex> grid_coefficients(std::span<const complex> samples);

/// Coefficients of e^{scale * series(theta)} by grid sampling. grid_size must
/// be a power of two with grid_size >= 4*order; the grid is doubled until the
/// dropped tail is below 1e-12 of the largest coefficient and two successive
/// grids agree. ResolutionError if that does not happen by 2^22 points.
FourierSeries exp_of_series(const FourierSeries& series, double scale,
                            std::size_t grid_size);

/// sup |series(theta +- i*width)| over a dense grid. 0 <= at_width < strip_h.
double strip_norm(const FourierSeries& series, double at_width);

/// Same quantity without the strip check (for widths at the boundary of a
/// declared strip and for certificates).
double line_sup(const FourierSeries& series, double width,
                std::size_t grid = 0);

/// |c_k| <= slack * ||series||_width * e^{-2 pi width |k|} for every stored k.
bool decay_certificate(const FourierSeries& series, double width,
                       double slack = 1.01);

/// sup over the real torus of |fn|, by a 2^17-point grid search followed by
/// golden-section refinement around the best sample.
double refined_sup(const std::function<double(double)>& fn);

double sup_norm(const FourierSeries& series);
/// ||f||_{C^1} = sup|f| + sup|f'|.
double c1_norm(const FourierSeries& series);

nlohmann::json to_json(const FourierSeries& series);
FourierSeries series_from_json(const nlohmann::json& j);

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace mixedspec
