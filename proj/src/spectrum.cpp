#include "mixedspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixedspec/errors.hpp"

namespace mixedspec {

namespace {

constexpr const char* kModule = "spectrum";

struct TridiagonalLU {
  std::vector<double> dl, d, du, du2;
  std::vector<char> swapped;
};

// LU with partial pivoting of H - shift*I (off-diagonals -1), as in LAPACK
// dgttrf. Exactly singular pivots are replaced by a tiny multiple of the
// matrix scale so that inverse iteration at an eigenvalue still proceeds.
TridiagonalLU factor_shifted(std::span<const double> diag, double shift) {
  const std::size_t n = diag.size();
  TridiagonalLU f;
  f.d.resize(n);
  f.dl.assign(n - 1, -1.0);
  f.du.assign(n - 1, -1.0);
  f.du2.assign(n > 2 ? n - 2 : 0, 0.0);
  f.swapped.assign(n - 1, 0);
  double scale = 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    f.d[i] = diag[i] - shift;
    scale = std::max(scale, std::abs(f.d[i]) + 2.0);
  }
  const double tiny = std::numeric_limits<double>::epsilon() * scale;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(f.d[i]) >= std::abs(f.dl[i])) {
      if (f.d[i] == 0.0) f.d[i] = tiny;
      const double fact = f.dl[i] / f.d[i];
      f.dl[i] = fact;
      f.d[i + 1] -= fact * f.du[i];
    } else {
      const double fact = f.d[i] / f.dl[i];
      f.d[i] = f.dl[i];
      f.dl[i] = fact;
      const double temp = f.du[i];
      f.du[i] = f.d[i + 1];
      f.d[i + 1] = temp - fact * f.d[i + 1];
      if (i + 2 < n) {
        f.du2[i] = f.du[i + 1];
        f.du[i + 1] = -fact * f.du[i + 1];
      }
      f.swapped[i] = 1;
    }
  }
  if (f.d[n - 1] == 0.0) f.d[n - 1] = tiny;
  return f;
}

void solve_in_place(const TridiagonalLU& f, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (f.swapped[i]) std::swap(b[i], b[i + 1]);
    b[i + 1] -= f.dl[i] * b[i];
  }
  b[n - 1] /= f.d[n - 1];
  if (n >= 2) b[n - 2] = (b[n - 2] - f.du[n - 2] * b[n - 1]) / f.d[n - 2];
  for (std::size_t i = n - 2; i-- > 0;)
    b[i] = (b[i] - f.du[i] * b[i + 1] - f.du2[i] * b[i + 2]) / f.d[i];
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FiniteOperator::FiniteOperator(std::vector<double> diagonal, double theta)
    : diag_(std::move(diagonal)), theta_(theta) {
  if (diag_.size() < 2)
    throw PreconditionError(kModule, "finite_operator", "size must be >= 2");
  for (double d : diag_) {
    if (!(d > 0.0))
      throw DomainError(kModule, "finite_operator",
                        "diagonal entries must be strictly positive");
  }
}

FiniteOperator FiniteOperator::leading(std::size_t n) const {
  return FiniteOperator(std::vector<double>(diag_.begin(), diag_.begin() + n),
                        theta_);
}

std::pair<double, double> FiniteOperator::gershgorin() const noexcept {
  const auto [lo, hi] = std::minmax_element(diag_.begin(), diag_.end());
  return {*lo - 2.0, *hi + 2.0};
}

std::vector<double> FiniteOperator::apply(std::span<const double> v) const {
  const std::size_t n = diag_.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag_[i] * v[i];
    if (i > 0) s -= v[i - 1];
    if (i + 1 < n) s -= v[i + 1];
    out[i] = s;
  }
  return out;
}

FiniteOperator build_finite(const ModelParams& params, double theta,
                            std::size_t n) {
  if (n < 2) throw PreconditionError(kModule, "build_finite", "N must be >= 2");
  std::vector<double> diag(n);
  PotentialOrbit orbit(params.f(), params.coupling(), params.omega_value(), theta);
  for (auto& d : diag) d = orbit.next();
  return FiniteOperator(std::move(diag), theta);
}

std::size_t eigenvalue_count_below(const FiniteOperator& op, double energy) {
  const auto diag = op.diagonal();
  const double pivmin = std::numeric_limits<double>::min() * 4.0;
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    q = (diag[i] - energy) - (i == 0 ? 0.0 : 1.0 / q);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

namespace {

double bisect_index(const FiniteOperator& op, std::size_t index, double lo,
                    double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eigenvalue_count_below(op, mid) > index)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double eigenvalue_at(const FiniteOperator& op, std::size_t index, double tol) {
  if (index >= op.size())
    throw DomainError(kModule, "eigenvalue_at", "index out of range");
  if (!(tol > 0.0)) throw PreconditionError(kModule, "eigenvalue_at", "tol must be > 0");
  const auto [lo, hi] = op.gershgorin();
  return bisect_index(op, index, lo, hi, tol);
}

std::vector<double> eigenvalues_in(const FiniteOperator& op, double a, double b,
                                   double tol) {
  if (!(a < b)) throw PreconditionError(kModule, "eigenvalues_in", "need a < b");
  if (!(tol > 0.0)) throw PreconditionError(kModule, "eigenvalues_in", "tol must be > 0");
  const double b_closed = std::nextafter(b, std::numeric_limits<double>::infinity());
  const std::size_t first = eigenvalue_count_below(op, a);
  const std::size_t last = eigenvalue_count_below(op, b_closed);
  const auto [g_lo, g_hi] = op.gershgorin();
  const double lo = std::max(a, g_lo);
  const double hi = std::min(b_closed, g_hi);
  std::vector<double> out;
  out.reserve(last - first);
  for (std::size_t j = first; j < last; ++j) {
    const double e = bisect_index(op, j, lo, hi, tol);
    out.push_back(std::clamp(e, a, b));
  }
  return out;
}

Eigenpair eigenvector(const FiniteOperator& op, double energy) {
  const std::size_t n = op.size();
  const auto lu = factor_shifted(op.diagonal(), energy);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  double ny = norm2(y);
  for (auto& x : y) x /= ny;

  Eigenpair out;
  const double target = 1e-6 * (1.0 + std::abs(energy));
  for (int it = 0; it < 12; ++it) {
    solve_in_place(lu, y);
    ny = norm2(y);
    if (!std::isfinite(ny) || ny == 0.0)
      throw ConvergenceError(kModule, "eigenvector", "inverse iteration broke down");
    for (auto& x : y) x /= ny;
    const auto hy = op.apply(y);
    double rq = 0.0;
    for (std::size_t i = 0; i < n; ++i) rq += y[i] * hy[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (hy[i] - rq * y[i]) * (hy[i] - rq * y[i]);
    out.energy = rq;
    out.residual = std::sqrt(res);
    if (it >= 1 && out.residual < 1e-12 * (1.0 + std::abs(rq))) break;
  }
  if (!(out.residual <= target))
    throw ConvergenceError(kModule, "eigenvector",
                           "residual " + std::to_string(out.residual) +
                               " above 1e-6 after inverse iteration");
  out.vector = std::move(y);
  const std::size_t near = eigenvalue_count_below(op, energy + 1e-8) -
                           eigenvalue_count_below(op, energy - 1e-8);
  out.near_degenerate = near >= 2;
  return out;
}

DecayFit decay_rate(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 50) throw PreconditionError(kModule, "decay_rate", "vector length must be >= 50");
  DecayFit fit;
  fit.center = static_cast<std::size_t>(
      std::max_element(v.begin(), v.end(),
                       [](double a, double b) { return std::abs(a) < std::abs(b); }) -
      v.begin());
  const std::size_t buffer = n / 10;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t m = 0;
  for (std::size_t j = buffer; j < n - buffer; ++j) {
    const double a = std::abs(v[j]);
    if (!(a > 1e-12)) continue;
    const double x = std::abs(static_cast<double>(j) - static_cast<double>(fit.center));
    const double y = std::log(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++m;
  }
  fit.points = m;
  if (m < 2) return fit;
  const double md = static_cast<double>(m);
  const double vx = sxx - sx * sx / md;
  const double vy = syy - sy * sy / md;
  const double cxy = sxy - sx * sy / md;
  if (vx <= 0.0) return fit;
  fit.slope = cxy / vx;
  fit.rate = std::max(0.0, -fit.slope);
  fit.fit_quality = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
  return fit;
}

SpectralEdges spectral_edges(const ModelParams& params,
                             std::span<const double> thetas, std::size_t n) {
  if (n < 100) throw PreconditionError(kModule, "spectral_edges", "N must be >= 100");
  if (thetas.empty())
    throw PreconditionError(kModule, "spectral_edges", "need at least one theta");
  SpectralEdges e;
  e.min_estimate = std::numeric_limits<double>::infinity();
  e.max_estimate = -std::numeric_limits<double>::infinity();
  for (double theta : thetas) {
    const auto op = build_finite(params, theta, n);
    e.min_estimate = std::min(e.min_estimate, eigenvalue_at(op, 0, 1e-13));
    const double top = eigenvalue_at(op, n - 1, 1e-12 * op.gershgorin().second);
    e.max_estimate = std::max(e.max_estimate, top);
  }
  e.sup_f = params.f_sup();
  e.edge_slack =
      2.0 - 2.0 * std::cos(std::numbers::pi / static_cast<double>(n + 1));
  e.upper_scale = std::exp(std::abs(params.coupling()) * e.sup_f);
  e.min_in_bracket = e.min_estimate >= -1e-8 && e.min_estimate <= e.edge_slack + 1e-12;
  const double ratio = e.max_estimate / e.upper_scale;
  e.max_in_bracket = ratio >= 0.25 && ratio <= 4.0;
  return e;
}

std::vector<Gap> gap_profile(std::span<const FiniteOperator> ops, double a,
                             double b, double resolution) {
  if (!(resolution > 0.0))
    throw PreconditionError(kModule, "gap_profile", "resolution must be > 0");
  if (!(a < b)) throw PreconditionError(kModule, "gap_profile", "need a < b");
  const auto cells = static_cast<std::size_t>(std::ceil((b - a) / resolution));
  std::vector<double> edges(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    edges[i] = std::min(b, a + static_cast<double>(i) * resolution);
  std::vector<char> occupied(cells, 0);
  for (const auto& op : ops) {
    std::size_t prev = eigenvalue_count_below(op, edges[0]);
    for (std::size_t i = 0; i < cells; ++i) {
      const double right = i + 1 == cells
                                ? std::nextafter(b, std::numeric_limits<double>::infinity())
                                : edges[i + 1];
      const std::size_t c = eigenvalue_count_below(op, right);
      if (c > prev) occupied[i] = 1;
      prev = c;
    }
  }
  std::vector<Gap> gaps;
  std::size_t i = 0;
  while (i < cells) {
    if (occupied[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cells && !occupied[j]) ++j;
    const double lo = edges[i], hi = edges[j];
    gaps.push_back({0.5 * (lo + hi), hi - lo});
    i = j;
  }
  return gaps;
}

std::vector<Gap> gap_profile(const ModelParams& params,
                             std::span<const double> thetas, std::size_t n,
                             double a, double b, double resolution) {
  std::vector<FiniteOperator> ops;
  ops.reserve(thetas.size());
  for (double t : thetas) ops.push_back(build_finite(params, t, n));
  return gap_profile(ops, a, b, resolution);
}

double thouless_exponent(std::span<const double> eigenvalues, double energy) {
  if (eigenvalues.empty())
    throw PreconditionError(kModule, "thouless_exponent", "no eigenvalues");
  double s = 0.0;
  for (double e : eigenvalues) s += std::log(std::abs(energy - e));
  return s / static_cast<double>(eigenvalues.size());
}

std::vector<SpectrumRow> analyze(const FiniteOperator& op, double a, double b,
                                 double tol) {
  auto values = eigenvalues_in(op, a, b, tol);
  values.erase(std::unique(values.begin(), values.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-12; }),
               values.end());
  std::vector<SpectrumRow> rows;
  rows.reserve(values.size());
  const std::size_t offset = eigenvalue_count_below(op, a);
  for (std::size_t j = 0; j < values.size(); ++j) {
    SpectrumRow row;
    row.theta = op.theta();
    row.n = op.size();
    row.index = offset + j;
    const auto pair = eigenvector(op, values[j]);
    row.energy = values[j];
    row.residual = pair.residual;
    if (op.size() >= 50) {
      const auto fit = decay_rate(pair.vector);
      row.decay_rate = fit.rate;
      row.fit_quality = fit.fit_quality;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mixedspec
