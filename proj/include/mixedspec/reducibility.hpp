#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "mixedspec/cocycle.hpp"
#include "mixedspec/model.hpp"

namespace mixedspec {

inline constexpr double kDivisorFloor = 1e-10;

/// Finite-stage beta used for strip bookkeeping: beta(omega, 30) for
/// irrational omega, 0 for rationals.
double beta_proxy(const Frequency& omega);

/// Fourier-division solution of the cohomological equation
///   g(theta + w) - g(theta) = rhs(theta + w)   (shift_arg = true)
///   g(theta + w) - g(theta) = rhs(theta)       (shift_arg = false)
/// with zero mean. The output strip is the input strip less beta_proxy/(2 pi)
/// (widths are in theta units). SmallDivisorError if some stored mode k has
/// |e^{2 pi i k w} - 1| < divisor_floor.
FourierSeries solve_homological(const FourierSeries& rhs, const Frequency& omega,
                                bool shift_arg,
                                double divisor_floor = kDivisorFloor);

/// Largest w in [0, w_max] (on a grid of `steps` widths) at which
/// decay_certificate holds.
double certified_width(const FourierSeries& series, double w_max,
                       std::size_t steps = 32);

struct StripBudget {
  double h = 0.0;   // strip of f
  double h1 = 0.0;  // after solving for g
  double h2 = 0.0;  // after solving for h
};

struct ConjugationResiduals {
  double hom1 = 0.0;  // relative forward residual of the g equation
  double hom2 = 0.0;  // relative forward residual of the h equation
  double conj = 0.0;  // sup ||C(t+w) A(t,0) C(t)^{-1} - A0||_F
};

/// C(theta) = [[1, h(theta)], [0, 1]] . [[0, e^{-K g(theta-w)}],
/// [-e^{K g(theta-w)}, e^{K g(theta)}]], conjugating A(theta, 0) to the
/// constant A0 = [[1, k_hat], [0, 1]]. Immutable once built.
class Conjugation {
 public:
  const FourierSeries& g() const noexcept { return g_; }
  const FourierSeries& h_series() const noexcept { return h_; }
  const FourierSeries& k_series() const noexcept { return k_; }
  double k_hat() const noexcept { return k_hat_; }
  double coupling() const noexcept { return coupling_; }
  double omega_value() const noexcept { return omega_; }
  double beta_proxy() const noexcept { return beta_; }
  const StripBudget& strip_budget() const noexcept { return budget_; }
  const ConjugationResiduals& residuals() const noexcept { return residuals_; }
  /// sup of the operator norm of C on Im theta = +-h2.
  double norm_C() const noexcept { return norm_c_; }
  /// Same for F(theta) = C(theta + w) diag(-1, 0) C(theta)^{-1}.
  double norm_F() const noexcept { return norm_f_; }

  SL2Matrix A0() const;
  /// The unipotent and the g-dependent factor of C(theta).
  Matrix2 h_factor(double theta) const;
  Matrix2 g_factor(double theta) const;
  SL2Matrix C(double theta) const;
  Matrix2 F(double theta) const;

 private:
  friend Conjugation build_conjugation(const ModelParams&, double);

  FourierSeries g_, g_prev_, h_, k_;
  double k_hat_ = 0.0;
  double coupling_ = 0.0;
  double omega_ = 0.0;
  double beta_ = 0.0;
  StripBudget budget_;
  ConjugationResiduals residuals_;
  double norm_c_ = 0.0;
  double norm_f_ = 0.0;
};

/// g -> k(theta) = -exp(-K g(theta - w) - K g(theta)) -> k_hat -> h -> C,
/// then residuals and strip norms. Errors name the failing stage.
Conjugation build_conjugation(const ModelParams& params,
                              double divisor_floor = kDivisorFloor);

/// A0 + E F(theta).
SL2Matrix perturbed_cocycle(const Conjugation& conj, double energy, double theta);

/// C(theta + w) A(theta, E) C(theta)^{-1}, computed directly.
Matrix2 conjugated_cocycle(const Conjugation& conj, const ModelParams& params,
                           double energy, double theta);

struct PerturbationReport {
  double norm_F = 0.0;
  double norm_A0 = 0.0;
  /// Heuristic 0.1 / (||A0|| ||F||); not a certified threshold.
  double threshold_heuristic = 0.0;
  double e_max = 0.0;
  bool e_max_below_heuristic = false;
};

PerturbationReport perturbation_report(const Conjugation& conj, double e_max);

struct ProbeRow {
  double energy = 0.0;
  double lyapunov = 0.0;
  double std_error = 0.0;
  double rotation = 0.0;
  bool flagged = false;  // lyapunov > 0.05
};

std::vector<ProbeRow> subcritical_probe(const ModelParams& params,
                                        std::span<const double> energies,
                                        std::size_t n, std::size_t phases = 16,
                                        unsigned workers = 1);

/// Finite Lyapunov exponent of the conjugated cocycle A0 + E F.
LyapunovEstimate conjugated_lyapunov(const Conjugation& conj, double energy,
                                     std::size_t n, std::size_t phases,
                                     unsigned workers = 1);

nlohmann::json to_json(const Conjugation& conj);

}  // namespace mixedspec
