#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixedspec/cocycle.hpp"
#include "mixedspec/model.hpp"

namespace mixedspec {

/// Longest product A^q the probes will form (A^{2q} is also formed).
inline constexpr unsigned long kMaxGordonLength = 1ul << 22;

struct CriterionResult {
  bool met = false;
  double beta_proxy = 0.0;
  double margin = 0.0;         // beta_proxy - 40 K
  bool degenerate_k0 = false;  // K = 0: the test reads beta > 0
  std::string caveat;
};

/// beta_proxy > 40 K, where beta_proxy is the finite-stage running max (a
/// lower bound for what the limsup could be, not a certificate).
CriterionResult criterion(const ModelParams& params);

struct ApproximantGap {
  unsigned long q = 0;
  double log_gap = 0.0;       // log ||A_w^q - A_{p/q}^q||; -inf when equal
  double log_scale = 0.0;     // log ||A_w^q||
  double relative = 0.0;      // gap / ||A_w^q||
  double gap = 0.0;           // absolute (may overflow to inf)
  double distance = 0.0;      // |w - p/q|
  /// q e^{10 K q} |w - p/q|
  double envelope = 0.0;
  /// sum_j ||A_w^{q-1-j}|| |V_w - V_{p/q}|(theta_j) ||A_{p/q}^j||, the
  /// triangle-inequality bound on the gap.
  double telescoping = 0.0;
};

/// Compares A^{q_n}(theta, E) for w and for its n-th convergent p_n/q_n
/// (index 0 is 0/1). ResourceError when q_n exceeds kMaxGordonLength.
ApproximantGap approximant_gap(const ModelParams& params, double energy,
                               double theta, std::size_t n_stage);

struct CayleyHamilton {
  unsigned long q = 0;
  /// ||A^{2q} - tr(A^q) A^q + I|| / max(1, ||A^q||^2), true frequency.
  double residual = 0.0;
  /// Same quantity for the periodic approximant (0 up to rounding).
  double periodic_residual = 0.0;
  /// min over unit v of max(||A^q v||, ||A^{2q} v||, ||A^{-q} v||) with
  /// A^{-q}(theta) = A^q(theta - q w)^{-1}; v scans e1, e2 and 64 angles.
  double lower_bound = 0.0;
  double lower_bound_e1 = 0.0;
};

CayleyHamilton cayley_hamilton_quantity(const ModelParams& params, double energy,
                                        double theta, std::size_t n_stage);

/// ||B^2 - tr(B) B + I|| / max(1, ||B||^2) for a single matrix.
double cayley_hamilton_residual(const SL2Matrix& b);

struct ScaleRow {
  std::size_t n = 0;
  unsigned long q = 0;
  double approximant_error = 0.0;  // relative gap
  double log_gap = 0.0;
  double envelope = 0.0;
  double telescoping = 0.0;
  double ch_quantity = 0.0;
  double lower_bound = 0.0;
};

struct GordonReport {
  double coupling = 0.0;
  double energy = 0.0;
  double theta = 0.0;
  CriterionResult criterion;
  std::vector<ScaleRow> per_scale;  // increasing q
};

/// Probes stages 0..n_stages (duplicate denominators skipped), stopping early
/// at the product-length budget.
GordonReport gordon_report(const ModelParams& params, double energy, double theta,
                           std::size_t n_stages);

nlohmann::json to_json(const GordonReport& report);

}  // namespace mixedspec
