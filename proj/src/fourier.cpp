#include "mixedspec/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "mixedspec/errors.hpp"

namespace mixedspec {

namespace {

constexpr const char* kModule = "fourier";
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMaxGrid = std::size_t{1} << 22;

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

// Unnormalised DFT, sign -1 (forward) or +1 (backward).
std::vector<complex> dft(std::span<const complex> in, int sign) {
  const std::size_t n = in.size();
  FftwBuffer a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.data[i][0] = in[i].real();
    a.data[i][1] = in[i].imag();
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), a.data, b.data,
                            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<complex> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {b.data[i][0], b.data[i][1]};
  return out;
}

double scale_of(std::span<const complex> c) {
  double s = 0.0;
  for (const auto& z : c) s = std::max(s, std::abs(z));
  return s;
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept {
  return n != 0 && (n & (n - 1)) == 0;
}

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FourierSeries::FourierSeries() : coeffs_{complex{0.0, 0.0}} {}

FourierSeries::FourierSeries(std::vector<complex> coeffs, double strip_h,
                             std::optional<double> declared_norm)
    : coeffs_(std::move(coeffs)), strip_h_(strip_h), declared_(declared_norm) {
  if (coeffs_.size() % 2 == 0)
    throw DomainError(kModule, "series", "coefficient vector must have odd length");
  if (!(strip_h_ > 0.0) || !std::isfinite(strip_h_))
    throw DomainError(kModule, "series", "strip width must be positive and finite");
  order_ = static_cast<int>(coeffs_.size() / 2);
  const double scale = std::max(scale_of(coeffs_), 1e-300);
  const double tol = 1e-12 * scale;

  complex& c0 = coeffs_[order_];
  if (std::abs(c0.imag()) > tol)
    throw DomainError(kModule, "series",
                      "mean coefficient has imaginary part above 1e-12");
  c0 = {c0.real(), 0.0};
  for (int k = 1; k <= order_; ++k) {
    complex& pos = coeffs_[order_ + k];
    complex& neg = coeffs_[order_ - k];
    if (std::abs(neg - std::conj(pos)) > tol)
      throw DomainError(kModule, "series",
                        "coefficients are not Hermitian at mode " +
                            std::to_string(k));
    const complex sym = 0.5 * (pos + std::conj(neg));
    pos = sym;
    neg = std::conj(sym);
  }
  if (declared_) {
    if (*declared_ < 0.0)
      throw DomainError(kModule, "series", "declared norm must be >= 0");
    for (int k = -order_; k <= order_; ++k) {
      const double bound =
          *declared_ * std::exp(-kTwoPi * strip_h_ * std::abs(k)) * (1.0 + 1e-9) +
          1e-15 * scale;
      if (std::abs(coeffs_[order_ + k]) > bound)
        throw DomainError(kModule, "series",
                          "coefficient at mode " + std::to_string(k) +
                              " exceeds the declared strip-norm bound");
    }
  }
}

FourierSeries FourierSeries::zero(double strip_h) {
  return FourierSeries({complex{}}, strip_h, 0.0);
}

FourierSeries FourierSeries::constant(double c, double strip_h) {
  return FourierSeries({complex{c, 0.0}}, strip_h, std::abs(c));
}

FourierSeries FourierSeries::cosine(double amplitude, double strip_h) {
  const complex half{0.5 * amplitude, 0.0};
  return FourierSeries({half, complex{}, half}, strip_h,
                       std::abs(amplitude) * std::cosh(kTwoPi * strip_h));
}

FourierSeries FourierSeries::from_modes(const std::map<int, complex>& modes,
                                        double strip_h) {
  int order = 0;
  for (const auto& [k, c] : modes) {
    if (k < 0)
      throw DomainError(kModule, "from_modes", "give nonnegative modes only");
    order = std::max(order, k);
  }
  std::vector<complex> coeffs(2 * order + 1);
  for (const auto& [k, c] : modes) {
    coeffs[order + k] = c;
    if (k > 0) coeffs[order - k] = std::conj(c);
  }
  return FourierSeries(std::move(coeffs), strip_h);
}

FourierSeries FourierSeries::sample(const std::function<double(double)>& fn,
                                    double strip_h, double declared_norm) {
  if (!(declared_norm > 0.0))
    throw DomainError(kModule, "sample", "declared norm must be > 0");
  const int order = std::max(
      0, static_cast<int>(std::ceil(std::log(declared_norm / 1e-14) /
                                    (kTwoPi * strip_h))));
  const std::size_t n = next_power_of_two(4 * static_cast<std::size_t>(order) + 4);
  std::vector<complex> samples(n);
  for (std::size_t j = 0; j < n; ++j)
    samples[j] = fn(static_cast<double>(j) / static_cast<double>(n));
  const auto all = grid_coefficients(samples);
  std::vector<complex> coeffs(2 * order + 1);
  for (int k = -order; k <= order; ++k) coeffs[order + k] = all[n / 2 + k];
  return FourierSeries(std::move(coeffs), strip_h);
}

complex FourierSeries::coeff(int k) const noexcept {
  if (k < -order_ || k > order_) return {};
  return coeffs_[order_ + k];
}

double FourierSeries::max_abs_coeff() const noexcept { return scale_of(coeffs_); }

double FourierSeries::operator()(double theta) const noexcept {
  const complex z = std::polar(1.0, kTwoPi * theta);
  complex zk = 1.0;
  double sum = coeffs_[order_].real();
  for (int k = 1; k <= order_; ++k) {
    zk *= z;
    sum += 2.0 * (coeffs_[order_ + k] * zk).real();
  }
  return sum;
}

complex FourierSeries::at(complex theta) const noexcept {
  const complex i{0.0, 1.0};
  const complex z = std::exp(kTwoPi * i * theta);
  const complex zinv = 1.0 / z;
  complex sum = coeffs_[order_];
  complex zp = 1.0, zn = 1.0;
  for (int k = 1; k <= order_; ++k) {
    zp *= z;
    zn *= zinv;
    sum += coeffs_[order_ + k] * zp + coeffs_[order_ - k] * zn;
  }
  return sum;
}

FourierSeries FourierSeries::rotated(
    const std::function<double(long)>& turns) const {
  std::vector<complex> out(coeffs_);
  for (int k = 1; k <= order_; ++k) {
    const complex phase = std::polar(1.0, kTwoPi * turns(k));
    out[order_ + k] *= phase;
    out[order_ - k] *= std::conj(phase);
  }
  return FourierSeries(std::move(out), strip_h_, declared_);
}

FourierSeries FourierSeries::shifted(double alpha) const {
  return rotated([alpha](long k) {
    const long double t = static_cast<long double>(k) * alpha;
    return static_cast<double>(t - std::floor(t));
  });
}

FourierSeries FourierSeries::scaled(double s) const {
  std::vector<complex> out(coeffs_);
  for (auto& c : out) c *= s;
  std::optional<double> d;
  if (declared_) d = *declared_ * std::abs(s);
  return FourierSeries(std::move(out), strip_h_, d);
}

FourierSeries FourierSeries::derivative() const {
  std::vector<complex> out(coeffs_);
  for (int k = -order_; k <= order_; ++k)
    out[order_ + k] *= complex{0.0, kTwoPi * k};
  return FourierSeries(std::move(out), strip_h_);
}

FourierSeries FourierSeries::with_strip(double strip_h,
                                        std::optional<double> declared) const {
  return FourierSeries(coeffs_, strip_h, declared);
}

FourierSeries FourierSeries::trimmed(double rel_tol) const {
  const double cut = rel_tol * max_abs_coeff();
  int m = order_;
  while (m > 0 && std::abs(coeffs_[order_ + m]) <= cut) --m;
  std::vector<complex> out(coeffs_.begin() + (order_ - m),
                           coeffs_.begin() + (order_ + m + 1));
  return FourierSeries(std::move(out), strip_h_, declared_);
}

FourierSeries& FourierSeries::operator+=(const FourierSeries& other) {
  const int m = std::max(order_, other.order_);
  std::vector<complex> out(2 * m + 1);
  for (int k = -m; k <= m; ++k) out[m + k] = coeff(k) + other.coeff(k);
  std::optional<double> d;
  if (declared_ && other.declared_) d = *declared_ + *other.declared_;
  *this = FourierSeries(std::move(out), std::min(strip_h_, other.strip_h_), d);
  return *this;
}

FourierSeries& FourierSeries::operator-=(const FourierSeries& other) {
  return *this += other.scaled(-1.0);
}

complex evaluate(const FourierSeries& series, double theta, double imag_shift) {
  if (!(std::abs(imag_shift) < series.strip_h()))
    throw DomainError(kModule, "evaluate",
                      "imaginary shift lies outside the analytic strip");
  return series.at(complex{theta, imag_shift});
}

std::vector<complex> grid_values(const FourierSeries& series, std::size_t n,
                                 double imag_shift) {
  const int m = series.order();
  if (n < static_cast<std::size_t>(2 * m + 1))
    throw PreconditionError(kModule, "grid_values", "grid too coarse for the series");
  std::vector<complex> spectrum(n);
  for (int k = -m; k <= m; ++k) {
    const std::size_t idx = static_cast<std::size_t>((k % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n));
    spectrum[idx] += series.coeff(k) * std::exp(-kTwoPi * k * imag_shift);
  }
  return dft(spectrum, +1);
}

std::vector<complex> grid_coefficients(std::span<const complex> samples) {
  const std::size_t n = samples.size();
  const auto raw = dft(samples, -1);
  std::vector<complex> out(n);
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    // raw[i] is mode i for i < n/2, mode i - n otherwise
    const std::size_t k_index = i < n / 2 ? i + n / 2 : i - n / 2;
    out[k_index] = raw[i] * inv;
  }
  return out;
}

namespace {

// Coefficients c_{-n/2}..c_{n/2-1} of exp(scale * f) sampled on n points.
std::vector<complex> exp_coefficients(const FourierSeries& series, double scale,
                                      std::size_t n) {
  auto values = grid_values(series, n);
  for (auto& v : values) {
    v = std::exp(scale * v.real());
    if (!std::isfinite(v.real()))
      throw ResolutionError(kModule, "exp_of_series", "exponential overflows double range");
  }
  return grid_coefficients(values);
}

// Smallest M with every |c_k|, |k| > M, below rel * max.
int tail_order(const std::vector<complex>& c, double rel) {
  const std::size_t n = c.size();
  const double cut = rel * scale_of(c);
  int m = static_cast<int>(n / 2) - 1;
  while (m > 0) {
    const double lo = std::abs(c[n / 2 - m]);
    const double hi = std::abs(c[n / 2 + m]);
    if (std::max(lo, hi) >= cut) break;
    --m;
  }
  return m;
}

}  // namespace

FourierSeries exp_of_series(const FourierSeries& series, double scale,
                            std::size_t grid_size) {
  if (!is_power_of_two(grid_size) ||
      grid_size < 4 * static_cast<std::size_t>(series.order()))
    throw PreconditionError(kModule, "exp_of_series",
                            "grid size must be a power of two >= 4 * order");
  constexpr double kTail = 1e-12;
  std::size_t n = std::max<std::size_t>(grid_size, 8);
  auto coarse = exp_coefficients(series, scale, n);
  while (true) {
    const int m = tail_order(coarse, kTail);
    if (2 * n > kMaxGrid)
      throw ResolutionError(kModule, "exp_of_series",
                            "coefficient tail did not converge on grids up to " +
                                std::to_string(kMaxGrid) + " points");
    auto fine = exp_coefficients(series, scale, 2 * n);
    if (4 * static_cast<std::size_t>(m) <= n) {
      // Aliasing monitor: the retained modes must agree across grids.
      double diff = 0.0;
      for (int k = -m; k <= m; ++k)
        diff = std::max(diff, std::abs(coarse[n / 2 + k] - fine[n + k]));
      if (diff <= 1e-11 * scale_of(fine)) {
        const int m_fine = std::max(tail_order(fine, kTail), m);
        std::vector<complex> out(2 * m_fine + 1);
        for (int k = -m_fine; k <= m_fine; ++k) out[m_fine + k] = fine[n + k];
        std::optional<double> declared;
        if (series.declared_norm()) {
          const double bound = std::exp(std::abs(scale) * *series.declared_norm());
          if (std::isfinite(bound)) declared = bound;
        }
        return FourierSeries(std::move(out), series.strip_h(), declared);
      }
    }
    coarse = std::move(fine);
    n *= 2;
  }
}

double line_sup(const FourierSeries& series, double width, std::size_t grid) {
  if (grid == 0)
    grid = std::max<std::size_t>(
        4096, next_power_of_two(8 * static_cast<std::size_t>(series.order()) + 8));
  double best = 0.0;
  for (double y : {width, -width}) {
    for (const auto& v : grid_values(series, grid, y))
      best = std::max(best, std::abs(v));
    if (width == 0.0) break;
  }
  return best;
}

double strip_norm(const FourierSeries& series, double at_width) {
  if (!(at_width >= 0.0) || !(at_width < series.strip_h()))
    throw DomainError(kModule, "strip_norm", "width must lie in [0, strip_h)");
  return line_sup(series, at_width);
}

bool decay_certificate(const FourierSeries& series, double width, double slack) {
  const double norm = line_sup(series, width);
  for (int k = -series.order(); k <= series.order(); ++k) {
    const double bound = slack * norm * std::exp(-kTwoPi * width * std::abs(k));
    if (std::abs(series.coeff(k)) > bound + 1e-300) return false;
  }
  return true;
}

double refined_sup(const std::function<double(double)>& fn) {
  constexpr std::size_t n = std::size_t{1} << 17;
  double best = -1.0;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double v = std::abs(fn(static_cast<double>(j) / n));
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  // golden-section maximisation of |fn| on the bracketing cell pair
  const double h = 1.0 / n;
  double a = static_cast<double>(arg) * h - h;
  double b = static_cast<double>(arg) * h + h;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = std::abs(fn(c)), fd = std::abs(fn(d));
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = std::abs(fn(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = std::abs(fn(d));
    }
  }
  return std::max({best, fc, fd});
}

double sup_norm(const FourierSeries& series) {
  return refined_sup([&](double t) { return series(t); });
}

double c1_norm(const FourierSeries& series) {
  const FourierSeries d = series.derivative();
  return sup_norm(series) + refined_sup([&](double t) { return d(t); });
}

nlohmann::json to_json(const FourierSeries& series) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (int k = -series.order(); k <= series.order(); ++k) {
    const complex c = series.coeff(k);
    coeffs.push_back({k, c.real(), c.imag()});
  }
  nlohmann::json j{{"h", series.strip_h()}, {"coeffs", coeffs}};
  return j;
}

FourierSeries series_from_json(const nlohmann::json& j) {
  const double h = j.at("h").get<double>();
  int order = 0;
  for (const auto& row : j.at("coeffs"))
    order = std::max(order, std::abs(row.at(0).get<int>()));
  std::vector<complex> coeffs(2 * order + 1);
  std::vector<bool> seen(2 * order + 1, false);
  for (const auto& row : j.at("coeffs")) {
    const int k = row.at(0).get<int>();
    coeffs[order + k] = {row.at(1).get<double>(), row.at(2).get<double>()};
    seen[order + k] = true;
  }
  // allow one-sided listings: fill missing conjugates
  for (int k = 1; k <= order; ++k) {
    if (seen[order + k] && !seen[order - k])
      coeffs[order - k] = std::conj(coeffs[order + k]);
    if (!seen[order + k] && seen[order - k])
      coeffs[order + k] = std::conj(coeffs[order - k]);
  }
  return FourierSeries(std::move(coeffs), h);
}

}  // namespace mixedspec
