#include "mixedspec/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "mixedspec/errors.hpp"

namespace mixedspec {

namespace {

constexpr const char* kModule = "cocycle";
constexpr std::size_t kDetFoldPeriod = 32;

double wrap(double x) { return x - std::floor(x); }

// Running renormalised product. Scale factors are multiplied into `pending`
// and only logged when it grows large.
class ProductAccumulator {
 public:
  void left_multiply_schrodinger(double x) {
    // [[x, -1], [1, 0]] * [[a, b], [c, d]]
    const Matrix2 m{x * m_.a - m_.c, x * m_.b - m_.d, m_.a, m_.b};
    absorb(m);
  }

  void left_multiply(const Matrix2& step) { absorb(step * m_); }

  ScaledProduct finish() {
    flush();
    fold_determinant();
    return {m_, log_scale_};
  }

 private:
  void absorb(const Matrix2& m) {
    const double s = m.frobenius();
    m_ = m.scaled(1.0 / s);
    pending_ *= s;
    if (pending_ > 1e150 || pending_ < 1e-150) flush();
    if (++count_ % kDetFoldPeriod == 0) {
      flush();
      fold_determinant();
    }
  }

  void flush() {
    log_scale_ += std::log(pending_);
    pending_ = 1.0;
  }

  // The true product has det 1, so while det(unit) is still resolved in
  // double precision the scale is pinned by it. For strongly hyperbolic
  // products det(unit) ~ ||A^n||^{-2} is below rounding noise and the fold
  // is skipped.
  void fold_determinant() {
    const double det = m_.det();
    if (det > 1e-6) log_scale_ = -0.5 * std::log(det);
  }

  Matrix2 m_ = Matrix2::identity().scaled(1.0 / std::sqrt(2.0));
  double log_scale_ = 0.5 * std::log(2.0);
  double pending_ = 1.0;
  std::size_t count_ = 0;
};

template <class PerPhase>
std::vector<double> map_phases(std::size_t phases, unsigned workers,
                               PerPhase per_phase) {
  std::vector<double> values(phases);
  const std::vector<double> thetas = phase_grid(phases);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(phases)));
  if (workers == 1) {
    for (std::size_t j = 0; j < phases; ++j) values[j] = per_phase(thetas[j]);
    return values;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t j = w; j < phases; j += workers)
        values[j] = per_phase(thetas[j]);
    });
  }
  for (auto& t : pool) t.join();
  return values;
}

LyapunovEstimate summarize(const std::vector<double>& values, std::size_t n) {
  LyapunovEstimate est;
  est.n_steps = n;
  est.n_phases = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  est.value = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.value) * (v - est.value);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    est.std_error = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return est;
}

}  // namespace

double Matrix2::frobenius() const noexcept {
  return std::sqrt(a * a + b * b + c * c + d * d);
}

double Matrix2::op_norm() const noexcept {
  const double f2 = a * a + b * b + c * c + d * d;
  const double dt = det();
  const double disc = std::max(0.0, f2 * f2 - 4.0 * dt * dt);
  return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
}

SL2Matrix::SL2Matrix(const Matrix2& m) : m_(m) {
  const double scale = std::max(1.0, std::abs(m.a * m.d) + std::abs(m.b * m.c));
  if (!(std::abs(m.det() - 1.0) <= 1e-10 * scale))
    throw DomainError(kModule, "sl2", "determinant " + std::to_string(m.det()) +
                                          " is not 1");
}

SL2Matrix SL2Matrix::inverse() const noexcept {
  SL2Matrix out;
  out.m_ = m_.sl2_inverse();
  return out;
}

SL2Matrix operator*(const SL2Matrix& x, const SL2Matrix& y) {
  return SL2Matrix(x.m_ * y.m_);
}

double ScaledProduct::log_norm() const noexcept {
  return log_scale + std::log(unit.op_norm());
}

double ScaledProduct::log_det() const noexcept {
  return 2.0 * log_scale + std::log(std::abs(unit.det()));
}

SL2Matrix ScaledProduct::matrix() const {
  return SL2Matrix(unit.scaled(std::exp(log_scale)));
}

SL2Matrix step_matrix(const ModelParams& params, double theta, double energy) {
  return SL2Matrix(potential(params, theta) - energy, -1.0, 1.0, 0.0);
}

ScaledProduct product_with_frequency(const ModelParams& params, double omega,
                                     double theta, double energy,
                                     std::size_t n) {
  if (n == 0) throw PreconditionError(kModule, "product", "n must be >= 1");
  PotentialOrbit orbit(params.f(), params.coupling(), omega, theta);
  ProductAccumulator acc;
  for (std::size_t k = 0; k < n; ++k)
    acc.left_multiply_schrodinger(orbit.next() - energy);
  return acc.finish();
}

ScaledProduct product(const ModelParams& params, double theta, double energy,
                      std::size_t n) {
  return product_with_frequency(params, params.omega_value(), theta, energy, n);
}

ScaledProduct product_of(const std::function<Matrix2(double)>& fiber,
                         double omega, double theta, std::size_t n) {
  if (n == 0) throw PreconditionError(kModule, "product", "n must be >= 1");
  ProductAccumulator acc;
  for (std::size_t k = 0; k < n; ++k)
    acc.left_multiply(fiber(wrap(theta + static_cast<double>(k) * omega)));
  return acc.finish();
}

std::vector<double> phase_grid(std::size_t count) {
  std::vector<double> thetas(count);
  for (std::size_t j = 0; j < count; ++j)
    thetas[j] = (static_cast<double>(j) + kPhaseOffset) / static_cast<double>(count);
  return thetas;
}

LyapunovEstimate finite_lyapunov(const ModelParams& params, double energy,
                                 std::size_t n, std::size_t phases,
                                 unsigned workers) {
  if (n == 0 || phases == 0)
    throw PreconditionError(kModule, "finite_lyapunov", "n and phases must be >= 1");
  const auto values = map_phases(phases, workers, [&](double theta) {
    return product(params, theta, energy, n).log_norm() / static_cast<double>(n);
  });
  auto est = summarize(values, n);
  est.energy = energy;
  return est;
}

LyapunovEstimate finite_lyapunov_of(const std::function<Matrix2(double)>& fiber,
                                    double omega, std::size_t n,
                                    std::size_t phases, unsigned workers) {
  if (n == 0 || phases == 0)
    throw PreconditionError(kModule, "finite_lyapunov", "n and phases must be >= 1");
  const auto values = map_phases(phases, workers, [&](double theta) {
    return product_of(fiber, omega, theta, n).log_norm() / static_cast<double>(n);
  });
  return summarize(values, n);
}

double free_lyapunov(double energy) {
  const double t = std::abs(2.0 - energy);
  return t > 2.0 ? std::acosh(t / 2.0) : 0.0;
}

GrowthBoundReport growth_bound_check(const ModelParams& params,
                                     std::span<const double> energies,
                                     std::span<const double> thetas,
                                     std::span<const std::size_t> steps) {
  GrowthBoundReport r;
  r.max_exponent = -std::numeric_limits<double>::infinity();
  const double K = params.coupling();
  double max_dev = 0.0;
  for (double e : energies) {
    for (double t : thetas) {
      max_dev = std::max(max_dev, std::abs(potential(params, t) - e));
      for (std::size_t n : steps) {
        const double v = product(params, t, e, n).log_norm() / static_cast<double>(n);
        if (v > r.max_exponent) {
          r.max_exponent = v;
          r.at_energy = e;
          r.at_theta = t;
          r.at_n = n;
        }
      }
    }
  }
  if (K == 0.0) {
    r.degenerate_k0 = true;
    r.envelope = std::log(2.0 + max_dev);
  } else {
    r.envelope = 10.0 * std::abs(K) + 1.0;
  }
  r.violated = r.max_exponent > r.envelope;
  return r;
}

double rotation_number(const ModelParams& params, double energy, std::size_t n,
                       double theta) {
  if (n == 0) throw PreconditionError(kModule, "rotation_number", "n must be >= 1");
  PotentialOrbit orbit(params.f(), params.coupling(), params.omega_value(), theta);
  double u_prev = 0.0, u = 1.0;
  std::size_t nodes = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u_next = (orbit.next() - energy) * u - u_prev;
    if (u_next == 0.0 || (u_next < 0.0) != (u < 0.0)) {
      if (u != 0.0) ++nodes;
    }
    u_prev = u;
    u = u_next;
    const double m = std::max(std::abs(u), std::abs(u_prev));
    if (m > 1e100) {
      u /= m;
      u_prev /= m;
    }
  }
  return std::min(0.5, static_cast<double>(nodes) / (2.0 * static_cast<double>(n)));
}

}  // namespace mixedspec
