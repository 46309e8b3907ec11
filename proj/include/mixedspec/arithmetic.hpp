#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace mixedspec {

/// An irrational (or, for test values, rational) frequency in (0,1), held as
/// its continued-fraction expansion [0; a_1, a_2, ...]. The coefficients are
/// an explicit prefix followed by an optional periodic block; an empty block
/// means the expansion terminates and the value is rational. The floating
/// value is a derived view; arithmetic questions go through exact integers.
class Frequency {
 public:
  Frequency(std::vector<mpz_class> prefix, std::vector<unsigned long> periodic,
            std::string name = "cf", std::string note = "");

  static Frequency golden_mean();
  /// sqrt(2) - 1 = [0; 2, 2, 2, ...]
  static Frequency silver_mean();
  static Frequency rational(unsigned long p, unsigned long q);
  static Frequency from_terms(const std::vector<unsigned long>& terms,
                              std::vector<unsigned long> periodic = {},
                              std::string name = "cf");

  bool is_rational() const noexcept { return periodic_.empty(); }
  /// Number of coefficients available; SIZE_MAX for infinite expansions.
  std::size_t available_terms() const noexcept;
  /// a_n for n >= 1.
  mpz_class coefficient(std::size_t n) const;

  double value() const noexcept { return value_; }
  /// k*omega minus the nearest integer, in [-1/2, 1/2), computed from a
  /// convergent deep enough that the rounding is exact to double precision.
  double signed_distance(const mpz_class& k) const;
  double signed_distance(long k) const { return signed_distance(mpz_class(k)); }

  const std::vector<mpz_class>& prefix() const noexcept { return prefix_; }
  const std::vector<unsigned long>& periodic() const noexcept {
    return periodic_;
  }
  const std::string& name() const noexcept { return name_; }
  const std::string& note() const noexcept { return note_; }

 private:
  std::vector<mpz_class> prefix_;
  std::vector<unsigned long> periodic_;
  std::string name_;
  std::string note_;
  double value_ = 0.0;
};

struct Convergent {
  mpz_class p;
  mpz_class q;
};

/// Convergents p_n/q_n for n = 1..n_max (p_0/q_0 = 0/1 is implicit).
std::vector<Convergent> convergents(const Frequency& omega, std::size_t n_max);

/// Convergents for n = 0..n_max, including the trivial 0/1.
std::vector<Convergent> convergents_from_zero(const Frequency& omega,
                                              std::size_t n_max);

struct StageRatio {
  std::size_t n;         // stage index, uses (q_n, a_{n+1}, q_{n+1})
  double log_q_next;     // log(q_{n+1}) / q_n
  double log_a_next;     // log(a_{n+1}) / q_n
  double q;              // q_n (may be +inf for enormous denominators)
};

/// Finite-stage data for beta(omega) = limsup log(q_{n+1}) / q_n.
///
/// `value` is the running max over stages 0 <= n < n_max of log(a_{n+1})/q_n.
/// This has the same limsup as log(q_{n+1})/q_n (the two differ by
/// O(log(q_n)/q_n)) but does not carry the log(q)/q offset that makes small
/// stages of bounded-type frequencies look Liouville. `tail` is
/// log(q_{n_max}) / q_{n_max - 1}, the last raw ratio.
struct BetaEstimate {
  double value = 0.0;
  double tail = 0.0;
  std::size_t argmax_stage = 0;
  std::vector<StageRatio> stages;
};

/// Throws DegenerateError for terminating expansions with fewer than n_max
/// terms and PreconditionError for n_max < 3.
BetaEstimate beta(const Frequency& omega, std::size_t n_max);

struct DiophantineParams {
  double kappa = 0.1;
  double tau = 2.0;

  DiophantineParams() = default;
  DiophantineParams(double kappa, double tau);
};

/// Result of a finite-range Diophantine scan. `pass` means no violation for
/// 1 <= |n| <= checked_up_to; it is never a membership claim.
struct DiophantineVerdict {
  bool pass = true;
  bool vacuous = false;
  mpz_class witness = 0;     // minimizer of ||n w|| / modulus(n)
  double log_margin = std::numeric_limits<double>::infinity();
  mpz_class checked_up_to = 0;

  double margin() const;
};

/// ||n w|| >= kappa / |n|^tau for 1 <= |n| <= n_range. The minimum of
/// ||n w|| * |n|^tau over a range is attained at a convergent denominator,
/// so only those are inspected.
DiophantineVerdict check_dc(const Frequency& omega,
                            const DiophantineParams& params,
                            const mpz_class& n_range);

/// ||n w|| >= kappa / (|n| log(|n|+1)^2) for 1 <= |n| <= n_range.
DiophantineVerdict check_sdc(const Frequency& omega, double kappa,
                             const mpz_class& n_range);

struct LiouvilleOptions {
  /// Upper bound on the bit length of any generated denominator.
  std::size_t budget_bits = 1u << 14;
  std::vector<mpz_class> prefix;
};

/// Frequency whose coefficients follow a_{n+1} = max(1, round(e^{b q_n}/q_n))
/// so that log(q_{n+1})/q_n tracks b. Stages stop when the next denominator
/// would exceed the bit budget; the expansion then continues with 1s and the
/// note records how many Liouville stages were realised. Throws
/// ResourceError if not even one stage fits.
Frequency make_liouville(double target_beta, std::size_t n_terms,
                         const LiouvilleOptions& options = {});

/// Same construction, prefixed with omega0's coefficients until the cylinder
/// of the prefix has diameter below delta, so |omega - omega0| < delta.
Frequency make_liouville_near(const Frequency& omega0, double delta,
                              double target_beta, std::size_t n_terms,
                              LiouvilleOptions options = {});

/// Diameter of the set of numbers whose expansion starts with `prefix`.
double cylinder_diameter(const std::vector<mpz_class>& prefix);

nlohmann::json to_json(const Frequency& omega);
Frequency frequency_from_json(const nlohmann::json& j);

/// Parses "golden", "silver", "p/q", "cf:1,2,3" (terminating),
/// "cf:1,1;2" (prefix;periodic) and "liouville:BETA".
Frequency parse_frequency(const std::string& text);

double log_of(const mpz_class& x);

}  // namespace mixedspec
