#include "mixedspec/gordon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixedspec/errors.hpp"
#include "mixedspec/reducibility.hpp"

namespace mixedspec {

namespace {

constexpr const char* kModule = "gordon";
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap(double x) { return x - std::floor(x); }

struct Stage {
  unsigned long p = 0;
  unsigned long q = 1;
};

Stage stage_of(const Frequency& omega, std::size_t n_stage, const char* stage) {
  const auto conv = convergents_from_zero(omega, n_stage);
  const auto& c = conv[n_stage];
  if (c.q > kMaxGordonLength)
    throw ResourceError(kModule, stage,
                        "q_" + std::to_string(n_stage) + " = " + c.q.get_str() +
                            " exceeds the product-length budget " +
                            std::to_string(kMaxGordonLength));
  return {c.p.get_ui(), c.q.get_ui()};
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Running product held as e^{log} * unit, renormalised each step.
struct Scaled {
  Matrix2 unit;
  double log = 0.0;
  void normalise() {
    const double s = unit.frobenius();
    unit = unit.scaled(1.0 / s);
    log += std::log(s);
  }
  double log_norm() const { return log + std::log(unit.op_norm()); }
};

Matrix2 step(const FourierSeries& f, double k, double omega, double theta,
             double energy) {
  return {potential_at(f, k, omega, theta) - energy, -1.0, 1.0, 0.0};
}

double log_apply(const ScaledProduct& p, double x, double y) {
  const Matrix2& u = p.unit;
  return p.log_scale + std::log(std::hypot(u.a * x + u.b * y, u.c * x + u.d * y));
}

double log_apply_inverse(const ScaledProduct& p, double x, double y) {
  const Matrix2 u = p.unit.sl2_inverse();  // adjugate
  return p.log_scale + std::log(std::hypot(u.a * x + u.b * y, u.c * x + u.d * y));
}

// ||B2 - tr(B) B + I||_F / max(1, ||B||_F^2) for B = e^{s} U, B2 = e^{s2} U2.
double ch_scaled(const ScaledProduct& b, const ScaledProduct& b2) {
  const double s = b.log_scale;
  const Matrix2& u = b.unit;
  const double w = std::exp(b2.log_scale - 2.0 * s);
  const double id = std::exp(-2.0 * s);
  const Matrix2 r = b2.unit.scaled(w) - u.scaled(u.trace()) + Matrix2{id, 0.0, 0.0, id};
  const double nb2 = std::exp(2.0 * s) * std::pow(u.frobenius(), 2);
  return r.frobenius() * std::exp(2.0 * s) / std::max(1.0, nb2);
}

}  // namespace

CriterionResult criterion(const ModelParams& params) {
  CriterionResult r;
  r.beta_proxy = beta_proxy(params.omega());
  const double k = params.coupling();
  r.margin = r.beta_proxy - 40.0 * k;
  r.met = r.margin > 0.0;
  r.degenerate_k0 = k == 0.0;
  r.caveat =
      "beta_proxy is the finite-stage running max over 30 stages; the limsup "
      "may be larger, so 'false' is not a certificate";
  if (r.degenerate_k0) r.caveat += "; K = 0 reduces the test to beta > 0";
  return r;
}

ApproximantGap approximant_gap(const ModelParams& params, double energy,
                               double theta, std::size_t n_stage) {
  const Stage st = stage_of(params.omega(), n_stage, "approximant_gap");
  const double w = params.omega_value();
  const double alpha = static_cast<double>(st.p) / static_cast<double>(st.q);
  const std::size_t q = st.q;
  const auto& f = params.f();
  const double k = params.coupling();

  ApproximantGap out;
  out.q = st.q;
  out.distance = std::abs(w - alpha);
  const ScaledProduct a_w = product_with_frequency(params, w, theta, energy, q);
  const ScaledProduct a_r = product_with_frequency(params, alpha, theta, energy, q);
  out.log_scale = a_w.log_norm();
  const double s = std::max(a_w.log_scale, a_r.log_scale);
  const Matrix2 d = a_w.unit.scaled(std::exp(a_w.log_scale - s)) -
                    a_r.unit.scaled(std::exp(a_r.log_scale - s));
  const double dn = d.op_norm();
  out.log_gap = dn == 0.0 ? -kInf : s + std::log(dn);
  out.gap = std::exp(out.log_gap);
  out.relative = std::exp(out.log_gap - out.log_scale);
  out.envelope = static_cast<double>(q) * std::exp(10.0 * k * static_cast<double>(q)) *
                 out.distance;

  // Telescoping: A_w^q - A_r^q = sum_j S_j (A_w(t_j) - A_r(t'_j)) P_j with
  // S_j = A_w(t_{q-1}) ... A_w(t_{j+1}) and P_j = A_r^j(theta).
  std::vector<double> log_suffix(q, 0.0);
  Scaled suffix;
  for (std::size_t j = q; j-- > 0;) {
    log_suffix[j] = suffix.log_norm();
    suffix.unit = suffix.unit * step(f, k, w, wrap(theta + static_cast<double>(j) * w), energy);
    suffix.normalise();
  }
  Scaled prefix;
  double log_sum = -kInf;
  for (std::size_t j = 0; j < q; ++j) {
    const double tj = wrap(theta + static_cast<double>(j) * w);
    const double rj = wrap(theta + static_cast<double>(j) * alpha);
    const double dv = std::abs(potential_at(f, k, w, tj) - potential_at(f, k, alpha, rj));
    if (dv > 0.0) log_sum = log_add(log_sum, log_suffix[j] + std::log(dv) + prefix.log_norm());
    prefix.unit = step(f, k, alpha, rj, energy) * prefix.unit;
    prefix.normalise();
  }
  out.telescoping = std::exp(log_sum);
  return out;
}

double cayley_hamilton_residual(const SL2Matrix& b) {
  const Matrix2& m = b.matrix();
  const Matrix2 r = m * m - m.scaled(m.trace()) + Matrix2::identity();
  return r.frobenius() / std::max(1.0, std::pow(m.frobenius(), 2));
}

CayleyHamilton cayley_hamilton_quantity(const ModelParams& params, double energy,
                                        double theta, std::size_t n_stage) {
  const Stage st = stage_of(params.omega(), n_stage, "cayley_hamilton");
  const double w = params.omega_value();
  const double alpha = static_cast<double>(st.p) / static_cast<double>(st.q);
  const std::size_t q = st.q;

  CayleyHamilton out;
  out.q = st.q;
  const ScaledProduct b = product_with_frequency(params, w, theta, energy, q);
  const ScaledProduct b2 = product_with_frequency(params, w, theta, energy, 2 * q);
  const ScaledProduct b_back = product_with_frequency(
      params, w, wrap(theta - static_cast<double>(q) * w), energy, q);
  out.residual = ch_scaled(b, b2);

  const ScaledProduct r = product_with_frequency(params, alpha, theta, energy, q);
  ScaledProduct r2;
  r2.unit = r.unit * r.unit;
  r2.log_scale = 2.0 * r.log_scale;
  out.periodic_residual = ch_scaled(r, r2);

  auto probe = [&](double x, double y) {
    return std::max({log_apply(b, x, y), log_apply(b2, x, y),
                     log_apply_inverse(b_back, x, y)});
  };
  double best = probe(1.0, 0.0);
  out.lower_bound_e1 = std::exp(best);
  best = std::min(best, probe(0.0, 1.0));
  constexpr int kAngles = 64;
  for (int i = 1; i < kAngles; ++i) {
    const double phi = std::numbers::pi * i / kAngles;
    best = std::min(best, probe(std::cos(phi), std::sin(phi)));
  }
  out.lower_bound = std::exp(best);
  return out;
}

GordonReport gordon_report(const ModelParams& params, double energy, double theta,
                           std::size_t n_stages) {
  GordonReport rep;
  rep.coupling = params.coupling();
  rep.energy = energy;
  rep.theta = theta;
  rep.criterion = criterion(params);
  const std::size_t avail = params.omega().available_terms();
  unsigned long last_q = 0;
  for (std::size_t n = 0; n <= std::min(n_stages, avail); ++n) {
    ApproximantGap gap;
    CayleyHamilton ch;
    try {
      gap = approximant_gap(params, energy, theta, n);
      ch = cayley_hamilton_quantity(params, energy, theta, n);
    } catch (const ResourceError&) {
      break;
    }
    if (gap.q <= last_q) continue;
    last_q = gap.q;
    ScaleRow row;
    row.n = n;
    row.q = gap.q;
    row.approximant_error = gap.relative;
    row.log_gap = gap.log_gap;
    row.envelope = gap.envelope;
    row.telescoping = gap.telescoping;
    row.ch_quantity = ch.residual;
    row.lower_bound = ch.lower_bound;
    rep.per_scale.push_back(row);
  }
  return rep;
}

nlohmann::json to_json(const GordonReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  const auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : "-inf";
  };
  for (const auto& r : report.per_scale) {
    rows.push_back({{"n", r.n},
                    {"q", r.q},
                    {"approximant_error", num(r.approximant_error)},
                    {"log_gap", num(r.log_gap)},
                    {"envelope", num(r.envelope)},
                    {"telescoping", num(r.telescoping)},
                    {"ch_quantity", num(r.ch_quantity)},
                    {"lower_bound", num(r.lower_bound)}});
  }
  const auto& c = report.criterion;
  return {{"K", report.coupling},
          {"E", report.energy},
          {"theta", report.theta},
          {"beta_proxy", c.beta_proxy},
          {"criterion_met", c.met},
          {"margin", c.margin},
          {"degenerate_k0", c.degenerate_k0},
          {"caveat", c.caveat},
          {"per_scale", rows}};
}

}  // namespace mixedspec
