#include "mixedspec/reducibility.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mixedspec/errors.hpp"

namespace mixedspec {

namespace {

constexpr const char* kModule = "reducibility";
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kCheckGrid = 4096;

double wrap(double x) { return x - std::floor(x); }

std::string nearest_denominator(const Frequency& omega, long k) {
  const mpz_class target(k);
  const std::size_t limit = std::min<std::size_t>(omega.available_terms(), 400);
  mpz_class best = 1;
  mpz_class best_gap = abs(target - 1);
  mpz_class q_prev = 0, q = 1;
  for (std::size_t n = 1; n <= limit; ++n) {
    mpz_class q_next = omega.coefficient(n) * q + q_prev;
    q_prev = q;
    q = q_next;
    const mpz_class gap = abs(target - q);
    if (gap < best_gap) {
      best_gap = gap;
      best = q;
    }
    if (q > target) break;
  }
  return best.get_str();
}

using CMatrix = std::array<complex, 4>;  // row-major 2x2

CMatrix cmul(const CMatrix& x, const CMatrix& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
          x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

// Largest singular value of a complex 2x2 matrix.
double cop_norm(const CMatrix& m) {
  const double fro = std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3]);
  const double det = std::abs(m[0] * m[3] - m[1] * m[2]);
  const double disc = std::max(0.0, fro * fro - 4.0 * det * det);
  return std::sqrt(0.5 * (fro + std::sqrt(disc)));
}

}  // namespace

double beta_proxy(const Frequency& omega) {
  if (omega.is_rational()) return 0.0;
  return beta(omega, 30).value;
}

FourierSeries solve_homological(const FourierSeries& rhs, const Frequency& omega,
                                bool shift_arg, double divisor_floor) {
  const char* stage = shift_arg ? "solve_g" : "solve_h";
  if (!(divisor_floor > 0.0))
    throw PreconditionError(kModule, stage, "divisor floor must be positive");
  const double scale = std::max(1.0, rhs.max_abs_coeff());
  if (std::abs(rhs.coeff(0)) > 1e-12 * scale)
    throw PreconditionError(kModule, stage,
                            "right-hand side has nonzero mean " +
                                std::to_string(rhs.coeff(0).real()));
  const int m = rhs.order();
  std::vector<complex> out(2 * static_cast<std::size_t>(m) + 1, complex{});
  for (int k = 1; k <= m; ++k) {
    const double d = omega.signed_distance(static_cast<long>(k));
    const double divisor = 2.0 * std::abs(std::sin(std::numbers::pi * d));
    if (divisor < divisor_floor)
      throw SmallDivisorError(stage, k, nearest_denominator(omega, k), divisor);
    const complex z = std::polar(1.0, kTwoPi * d);
    complex c = rhs.coeff(k) / (z - 1.0);
    if (shift_arg) c *= z;
    out[m + k] = c;
    out[m - k] = std::conj(c);
  }
  const double width = rhs.strip_h() - beta_proxy(omega) / kTwoPi;
  if (!(width > 0.0))
    throw DomainError(kModule, stage,
                      "strip budget exhausted: width " + std::to_string(rhs.strip_h()) +
                          " does not cover the loss beta/(2 pi)");
  FourierSeries g(std::move(out), width);
  if (!decay_certificate(g, 0.99 * width))
    throw ResolutionError(kModule, stage,
                          "solution fails its decay certificate at the budgeted width");
  return g;
}

double certified_width(const FourierSeries& series, double w_max,
                       std::size_t steps) {
  double best = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double w = w_max * static_cast<double>(i) / static_cast<double>(steps);
    if (!decay_certificate(series, w)) break;
    best = w;
  }
  return best;
}

SL2Matrix Conjugation::A0() const { return SL2Matrix(1.0, k_hat_, 0.0, 1.0); }

Matrix2 Conjugation::h_factor(double theta) const {
  return {1.0, h_(wrap(theta)), 0.0, 1.0};
}

Matrix2 Conjugation::g_factor(double theta) const {
  const double t = wrap(theta);
  const double gp = coupling_ * g_prev_(t);
  const double g = coupling_ * g_(t);
  return {0.0, std::exp(-gp), -std::exp(gp), std::exp(g)};
}

SL2Matrix Conjugation::C(double theta) const {
  return SL2Matrix(h_factor(theta) * g_factor(theta));
}

Matrix2 Conjugation::F(double theta) const {
  const Matrix2 next = C(theta + omega_).matrix();
  const Matrix2 inv = C(theta).matrix().sl2_inverse();
  return next * Matrix2{-1.0, 0.0, 0.0, 0.0} * inv;
}

Conjugation build_conjugation(const ModelParams& params, double divisor_floor) {
  const auto& f = params.f();
  const auto& omega = params.omega();
  const double K = params.coupling();
  Conjugation cj;
  cj.coupling_ = K;
  cj.omega_ = params.omega_value();
  cj.beta_ = beta_proxy(omega);
  cj.budget_.h = f.strip_h();

  cj.g_ = solve_homological(f, omega, true, divisor_floor);
  cj.budget_.h1 = cj.g_.strip_h();
  cj.g_prev_ = cj.g_.rotated(
      [&omega](long k) { return -omega.signed_distance(k); });

  if (K == 0.0) {
    // e^{0} = 1 is exact; skip the grid so that k = -1 and h = 0 exactly.
    cj.k_ = FourierSeries::constant(-1.0, cj.budget_.h1);
    cj.k_hat_ = -1.0;
    cj.h_ = FourierSeries::zero(std::max(cj.budget_.h1 - cj.beta_ / kTwoPi, 1e-3));
    cj.budget_.h2 = cj.budget_.h1 - cj.beta_ / kTwoPi;
  } else {
    const FourierSeries exponent = cj.g_prev_ + cj.g_;
    const std::size_t grid =
        next_power_of_two(std::max<std::size_t>(64, 4 * static_cast<std::size_t>(exponent.order())));
    FourierSeries e;
    try {
      e = exp_of_series(exponent, -K, grid);
    } catch (const ResolutionError& ex) {
      throw ResolutionError(kModule, "exp_k", ex.what());
    }
    e = e.with_strip(cj.budget_.h1, std::nullopt);
    cj.k_ = e.scaled(-1.0);
    cj.k_hat_ = cj.k_.mean();
    const FourierSeries r = e - FourierSeries::constant(e.mean(), cj.budget_.h1);
    cj.h_ = solve_homological(r, omega, false, divisor_floor);
    cj.budget_.h2 = cj.h_.strip_h();
  }

  // Forward residuals, evaluated pointwise rather than in coefficient space.
  double r1 = 0.0, g_sup = 0.0, r2 = 0.0, h_sup = 0.0, rc = 0.0;
  const SL2Matrix a0 = cj.A0();
  for (std::size_t j = 0; j < kCheckGrid; ++j) {
    const double t = static_cast<double>(j) / kCheckGrid;
    const double tn = wrap(t + cj.omega_);
    const double g_t = cj.g_(t), g_n = cj.g_(tn);
    r1 = std::max(r1, std::abs(g_n - g_t - f(tn)));
    g_sup = std::max(g_sup, std::abs(g_t));
    const double k_t = -std::exp(-K * (cj.g_prev_(t) + g_t));
    const double h_t = cj.h_(t), h_n = cj.h_(tn);
    r2 = std::max(r2, std::abs(h_n - h_t - (cj.k_hat_ - k_t)));
    h_sup = std::max(h_sup, std::abs(h_t));
    const Matrix2 a{potential(params, t), -1.0, 1.0, 0.0};
    const Matrix2 lhs = cj.C(tn).matrix() * a * cj.C(t).matrix().sl2_inverse();
    rc = std::max(rc, (lhs - a0.matrix()).frobenius());
  }
  cj.residuals_.hom1 = r1 == 0.0 ? 0.0 : r1 / g_sup;
  cj.residuals_.hom2 = r2 == 0.0 ? 0.0 : r2 / h_sup;
  cj.residuals_.conj = rc;

  // Strip norms of C and F on Im theta = +-h2.
  const double w = std::max(0.0, cj.budget_.h2);
  const auto c_at = [&cj](complex z) -> CMatrix {
    const complex gp = cj.coupling_ * cj.g_prev_.at(z);
    const complex g = cj.coupling_ * cj.g_.at(z);
    const complex hz = cj.h_.at(z);
    const CMatrix hf{1.0, hz, 0.0, 1.0};
    const CMatrix gf{0.0, std::exp(-gp), -std::exp(gp), std::exp(g)};
    return cmul(hf, gf);
  };
  constexpr std::size_t kNormGrid = 1024;
  for (double y : {w, -w}) {
    for (std::size_t j = 0; j < kNormGrid; ++j) {
      const complex z{static_cast<double>(j) / kNormGrid, y};
      const CMatrix c = c_at(z);
      const CMatrix cn = c_at(z + cj.omega_);
      const CMatrix inv{c[3], -c[1], -c[2], c[0]};
      const CMatrix fz = cmul(cmul(cn, CMatrix{-1.0, 0.0, 0.0, 0.0}), inv);
      cj.norm_c_ = std::max(cj.norm_c_, cop_norm(c));
      cj.norm_f_ = std::max(cj.norm_f_, cop_norm(fz));
    }
    if (w == 0.0) break;
  }
  return cj;
}

SL2Matrix perturbed_cocycle(const Conjugation& conj, double energy, double theta) {
  if (energy == 0.0) return conj.A0();
  return SL2Matrix(conj.A0().matrix() + conj.F(theta).scaled(energy));
}

Matrix2 conjugated_cocycle(const Conjugation& conj, const ModelParams& params,
                           double energy, double theta) {
  const Matrix2 a = step_matrix(params, theta, energy).matrix();
  return conj.C(theta + conj.omega_value()).matrix() * a *
         conj.C(theta).matrix().sl2_inverse();
}

PerturbationReport perturbation_report(const Conjugation& conj, double e_max) {
  PerturbationReport r;
  r.norm_F = conj.norm_F();
  r.norm_A0 = conj.A0().matrix().op_norm();
  r.threshold_heuristic = 0.1 / (r.norm_A0 * r.norm_F);
  r.e_max = e_max;
  r.e_max_below_heuristic = e_max < r.threshold_heuristic;
  return r;
}

std::vector<ProbeRow> subcritical_probe(const ModelParams& params,
                                        std::span<const double> energies,
                                        std::size_t n, std::size_t phases,
                                        unsigned workers) {
  std::vector<ProbeRow> rows;
  rows.reserve(energies.size());
  for (double e : energies) {
    if (!(e > 0.0))
      throw PreconditionError(kModule, "subcritical_probe", "energies must be > 0");
    const auto est = finite_lyapunov(params, e, n, phases, workers);
    ProbeRow row;
    row.energy = e;
    row.lyapunov = est.value;
    row.std_error = est.std_error;
    row.rotation = rotation_number(params, e, n, kPhaseOffset);
    row.flagged = est.value > 0.05;
    rows.push_back(row);
  }
  return rows;
}

LyapunovEstimate conjugated_lyapunov(const Conjugation& conj, double energy,
                                     std::size_t n, std::size_t phases,
                                     unsigned workers) {
  const Matrix2 a0 = conj.A0().matrix();
  auto fiber = [&conj, a0, energy](double theta) {
    return a0 + conj.F(theta).scaled(energy);
  };
  auto est = finite_lyapunov_of(fiber, conj.omega_value(), n, phases, workers);
  est.energy = energy;
  return est;
}

nlohmann::json to_json(const Conjugation& conj) {
  const auto& b = conj.strip_budget();
  const auto& r = conj.residuals();
  return {{"k_hat", conj.k_hat()},
          {"K", conj.coupling()},
          {"beta_proxy", conj.beta_proxy()},
          {"strip_budget", {b.h, b.h1, b.h2}},
          {"norms", {{"C", conj.norm_C()}, {"F", conj.norm_F()}}},
          {"residuals", {{"hom1", r.hom1}, {"hom2", r.hom2}, {"conj", r.conj}}}};
}

}  // namespace mixedspec
