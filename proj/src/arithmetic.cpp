#include "mixedspec/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixedspec/errors.hpp"

namespace mixedspec {

namespace {

constexpr const char* kModule = "arithmetic";

// Iterates the convergent recurrence over the coefficient stream.
struct Recurrence {
  mpz_class p_prev = 1, q_prev = 0;  // n = -1
  mpz_class p = 0, q = 1;            // n = 0

  void push(const mpz_class& a) {
    mpz_class p_next = a * p + p_prev;
    mpz_class q_next = a * q + q_prev;
    p_prev = std::move(p);
    q_prev = std::move(q);
    p = std::move(p_next);
    q = std::move(q_next);
  }
};

// Deepest convergent with q >= min_q (or the exact value for rationals).
Convergent deep_convergent(const Frequency& omega, const mpz_class& min_q) {
  Recurrence r;
  const std::size_t avail = omega.available_terms();
  for (std::size_t n = 1; n <= avail; ++n) {
    r.push(omega.coefficient(n));
    if (r.q >= min_q) break;
  }
  return {r.p, r.q};
}

mpz_class nearest_int_fraction(const mpz_class& num, const mpz_class& den,
                               mpq_class& frac) {
  // frac = num/den - round(num/den) in [-1/2, 1/2)
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  mpz_class rem = num - fl * den;
  if (2 * rem >= den) {
    rem -= den;
    fl += 1;
  }
  frac = mpq_class(rem, den);
  frac.canonicalize();
  return fl;
}

}  // namespace

double log_of(const mpz_class& x) {
  if (sgn(x) <= 0) return -std::numeric_limits<double>::infinity();
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, x.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp2) * std::log(2.0);
}

Frequency::Frequency(std::vector<mpz_class> prefix,
                     std::vector<unsigned long> periodic, std::string name,
                     std::string note)
    : prefix_(std::move(prefix)),
      periodic_(std::move(periodic)),
      name_(std::move(name)),
      note_(std::move(note)) {
  for (const auto& a : prefix_) {
    if (sgn(a) <= 0)
      throw DomainError(kModule, "frequency",
                        "continued-fraction coefficients must be positive");
  }
  for (auto a : periodic_) {
    if (a == 0)
      throw DomainError(kModule, "frequency",
                        "continued-fraction coefficients must be positive");
  }
  if (prefix_.empty() && periodic_.empty())
    throw DomainError(kModule, "frequency", "empty continued fraction");
  if (is_rational() && prefix_.size() == 1 && prefix_[0] == 1)
    throw DomainError(kModule, "frequency", "[0; 1] = 1 is not in (0,1)");

  const Convergent c = deep_convergent(*this, mpz_class(1) << 128);
  value_ = mpq_class(c.p, c.q).get_d();
}

Frequency Frequency::golden_mean() {
  return Frequency({}, {1}, "golden", "(sqrt(5)-1)/2");
}

Frequency Frequency::silver_mean() {
  return Frequency({}, {2}, "silver", "sqrt(2)-1");
}

Frequency Frequency::rational(unsigned long p, unsigned long q) {
  if (q == 0 || p == 0 || p >= q)
    throw DomainError(kModule, "frequency", "rational frequency must lie in (0,1)");
  std::vector<mpz_class> terms;
  unsigned long num = q, den = p;  // expand q/p
  while (den != 0) {
    terms.emplace_back(num / den);
    const unsigned long r = num % den;
    num = den;
    den = r;
  }
  return Frequency(std::move(terms), {},
                   std::to_string(p) + "/" + std::to_string(q));
}

Frequency Frequency::from_terms(const std::vector<unsigned long>& terms,
                                std::vector<unsigned long> periodic,
                                std::string name) {
  std::vector<mpz_class> prefix(terms.begin(), terms.end());
  return Frequency(std::move(prefix), std::move(periodic), std::move(name));
}

std::size_t Frequency::available_terms() const noexcept {
  return periodic_.empty() ? prefix_.size()
                           : std::numeric_limits<std::size_t>::max();
}

mpz_class Frequency::coefficient(std::size_t n) const {
  if (n == 0) throw DomainError(kModule, "coefficient", "index starts at 1");
  if (n <= prefix_.size()) return prefix_[n - 1];
  if (periodic_.empty())
    throw InsufficientDataError(kModule, "coefficient",
                                "continued fraction has only " +
                                    std::to_string(prefix_.size()) + " terms");
  return mpz_class(periodic_[(n - prefix_.size() - 1) % periodic_.size()]);
}

double Frequency::signed_distance(const mpz_class& k) const {
  const mpz_class ak = abs(k);
  // |w - P/Q| < 1/Q^2, so k*P/Q is within |k|/Q^2 of k*w.
  const Convergent c = deep_convergent(*this, (ak * ak + 1) << 80);
  mpq_class frac;
  nearest_int_fraction(k * c.p, c.q, frac);
  return frac.get_d();
}

std::vector<Convergent> convergents_from_zero(const Frequency& omega,
                                              std::size_t n_max) {
  if (n_max > omega.available_terms())
    throw InsufficientDataError(
        kModule, "convergents",
        "requested " + std::to_string(n_max) + " convergents but only " +
            std::to_string(omega.available_terms()) + " coefficients exist");
  std::vector<Convergent> out;
  out.reserve(n_max + 1);
  Recurrence r;
  out.push_back({r.p, r.q});
  for (std::size_t n = 1; n <= n_max; ++n) {
    r.push(omega.coefficient(n));
    out.push_back({r.p, r.q});
  }
  return out;
}

std::vector<Convergent> convergents(const Frequency& omega, std::size_t n_max) {
  auto all = convergents_from_zero(omega, n_max);
  all.erase(all.begin());
  return all;
}

BetaEstimate beta(const Frequency& omega, std::size_t n_max) {
  if (n_max < 3)
    throw PreconditionError(kModule, "beta", "n_max must be at least 3");
  if (omega.is_rational() && omega.available_terms() < n_max)
    throw DegenerateError(kModule, "beta",
                          "beta is undefined for a terminating expansion (" +
                              std::to_string(omega.available_terms()) +
                              " terms)");
  const auto conv = convergents_from_zero(omega, n_max);
  BetaEstimate est;
  est.value = 0.0;
  for (std::size_t n = 0; n < n_max; ++n) {
    const double log_q = log_of(conv[n].q);
    const double q = std::exp(log_q);
    StageRatio s;
    s.n = n;
    s.q = q;
    s.log_q_next = log_of(conv[n + 1].q) / q;
    s.log_a_next = log_of(omega.coefficient(n + 1)) / q;
    if (!std::isfinite(q)) s.log_q_next = s.log_a_next = 0.0;
    if (s.log_a_next > est.value) {
      est.value = s.log_a_next;
      est.argmax_stage = n;
    }
    est.stages.push_back(s);
  }
  est.tail = est.stages.back().log_q_next;
  return est;
}

DiophantineParams::DiophantineParams(double kappa_, double tau_)
    : kappa(kappa_), tau(tau_) {
  if (!(kappa > 0.0) || kappa > 0.5)
    throw DomainError(kModule, "diophantine", "kappa must lie in (0, 1/2]");
  if (!(tau > 0.0)) throw DomainError(kModule, "diophantine", "tau must be > 0");
}

double DiophantineVerdict::margin() const { return std::exp(log_margin); }

namespace {

template <class LogModulus>
DiophantineVerdict scan_convergents(const Frequency& omega,
                                    const mpz_class& n_range,
                                    LogModulus log_modulus) {
  DiophantineVerdict v;
  v.checked_up_to = n_range;
  if (n_range <= 0) {
    v.vacuous = true;
    return v;
  }
  Recurrence r;
  mpz_class last_q = 0;
  const std::size_t avail = omega.available_terms();
  // Denominators q_0 = 1, q_1, ...; each dominates the range up to the next.
  for (std::size_t n = 0;; ++n) {
    if (n > 0) {
      if (n > avail) break;
      r.push(omega.coefficient(n));
    }
    if (r.q > n_range) break;
    if (r.q == last_q) continue;
    last_q = r.q;
    const double dist = std::abs(omega.signed_distance(r.q));
    const double log_ratio = std::log(dist) - log_modulus(r.q);
    if (log_ratio < v.log_margin) {
      v.log_margin = log_ratio;
      v.witness = r.q;
    }
  }
  v.pass = v.log_margin >= 0.0;
  return v;
}

}  // namespace

DiophantineVerdict check_dc(const Frequency& omega,
                            const DiophantineParams& params,
                            const mpz_class& n_range) {
  const double log_kappa = std::log(params.kappa);
  return scan_convergents(omega, n_range, [&](const mpz_class& n) {
    return log_kappa - params.tau * log_of(n);
  });
}

DiophantineVerdict check_sdc(const Frequency& omega, double kappa,
                             const mpz_class& n_range) {
  if (kappa < 0.0) throw DomainError(kModule, "check_sdc", "kappa must be >= 0");
  if (kappa == 0.0) {
    DiophantineVerdict v;
    v.vacuous = true;
    v.checked_up_to = n_range;
    return v;
  }
  const double log_kappa = std::log(kappa);
  return scan_convergents(omega, n_range, [&](const mpz_class& n) {
    const double ln = log_of(n);
    const double log_n1 = std::log(std::log1p(std::exp(ln)));
    return log_kappa - ln - 2.0 * log_n1;
  });
}

double cylinder_diameter(const std::vector<mpz_class>& prefix) {
  Recurrence r;
  for (const auto& a : prefix) r.push(a);
  // endpoints p_m/q_m and (p_m + p_{m-1})/(q_m + q_{m-1})
  return std::exp(-(log_of(r.q) + log_of(r.q + r.q_prev)));
}

namespace {

// round(e^{x}) for x possibly far beyond double range, via 2^{x/ln 2}.
mpz_class exp_to_integer(double x) {
  if (x < 700.0) return mpz_class(std::max(1.0, std::round(std::exp(x))));
  const double e2 = x / std::log(2.0);
  const double whole = std::floor(e2);
  const double frac = e2 - whole;
  mpz_class mant(std::ldexp(std::exp2(frac), 52));
  return mant << static_cast<unsigned long>(whole - 52.0);
}

Frequency liouville_from(std::vector<mpz_class> prefix, double target_beta,
                         std::size_t n_terms, std::size_t budget_bits,
                         std::string name) {
  if (!(target_beta > 0.0))
    throw PreconditionError(kModule, "make_liouville", "target beta must be > 0");
  Recurrence r;
  for (const auto& a : prefix) r.push(a);
  const std::size_t prefix_len = prefix.size();
  std::vector<mpz_class> terms = std::move(prefix);
  std::size_t stages = 0;
  bool budget_hit = false;
  while (terms.size() < n_terms) {
    const double log_q = log_of(r.q);
    const double q = std::exp(log_q);
    const double log_a = target_beta * q - log_q;
    // bits of q_{n+1} ~ (log a + log q) / ln 2
    const double bits = (std::max(log_a, 0.0) + log_q) / std::log(2.0);
    if (!std::isfinite(bits) || bits > static_cast<double>(budget_bits)) {
      budget_hit = true;
      break;
    }
    mpz_class a = log_a <= 0.0 ? mpz_class(1) : exp_to_integer(log_a);
    if (a < 1) a = 1;
    r.push(a);
    terms.push_back(std::move(a));
    ++stages;
  }
  if (stages == 0 && budget_hit)
    throw ResourceError(kModule, "make_liouville",
                        "first Liouville stage already exceeds the " +
                            std::to_string(budget_bits) + "-bit budget");
  std::ostringstream note;
  note << "liouville target beta=" << target_beta << "; prefix " << prefix_len
       << " terms; " << stages << " constructed stages";
  if (budget_hit)
    note << "; stopped at the " << budget_bits << "-bit budget";
  note << "; continued with 1s";
  return Frequency(std::move(terms), {1}, std::move(name), note.str());
}

}  // namespace

Frequency make_liouville(double target_beta, std::size_t n_terms,
                         const LiouvilleOptions& options) {
  std::ostringstream name;
  name << "liouville(" << target_beta << ")";
  return liouville_from(options.prefix, target_beta, n_terms,
                        options.budget_bits, name.str());
}

Frequency make_liouville_near(const Frequency& omega0, double delta,
                              double target_beta, std::size_t n_terms,
                              LiouvilleOptions options) {
  if (!(delta > 0.0))
    throw PreconditionError(kModule, "make_liouville_near", "delta must be > 0");
  std::vector<mpz_class> prefix = options.prefix;
  std::size_t n = 1;
  while (prefix.empty() || cylinder_diameter(prefix) >= delta) {
    if (n > omega0.available_terms())
      throw InsufficientDataError(kModule, "make_liouville_near",
                                  "omega0 expansion too short for delta");
    prefix.push_back(omega0.coefficient(n++));
  }
  std::ostringstream name;
  name << "liouville(" << target_beta << ")~" << omega0.name();
  return liouville_from(std::move(prefix), target_beta,
                        std::max(n_terms, prefix.size() + 1),
                        options.budget_bits, name.str());
}

nlohmann::json to_json(const Frequency& omega) {
  nlohmann::json cf = nlohmann::json::array();
  for (const auto& a : omega.prefix()) {
    if (a.fits_ulong_p())
      cf.push_back(a.get_ui());
    else
      cf.push_back(a.get_str());
  }
  nlohmann::json j{{"cf", cf}, {"note", omega.note()}, {"name", omega.name()}};
  if (!omega.periodic().empty()) j["periodic_tail"] = omega.periodic();
  return j;
}

Frequency frequency_from_json(const nlohmann::json& j) {
  std::vector<mpz_class> prefix;
  for (const auto& a : j.at("cf")) {
    if (a.is_string())
      prefix.emplace_back(a.get<std::string>());
    else
      prefix.emplace_back(a.get<unsigned long>());
  }
  std::vector<unsigned long> periodic;
  if (j.contains("periodic_tail"))
    periodic = j.at("periodic_tail").get<std::vector<unsigned long>>();
  return Frequency(std::move(prefix), std::move(periodic),
                   j.value("name", std::string("cf")),
                   j.value("note", std::string()));
}

Frequency parse_frequency(const std::string& text) {
  auto parse_list = [](const std::string& s) {
    std::vector<unsigned long> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(std::stoul(item));
    return out;
  };
  if (text == "golden") return Frequency::golden_mean();
  if (text == "silver") return Frequency::silver_mean();
  if (text.rfind("liouville:", 0) == 0)
    return make_liouville(std::stod(text.substr(10)), 30);
  if (text.rfind("cf:", 0) == 0) {
    const std::string body = text.substr(3);
    const auto semi = body.find(';');
    if (semi == std::string::npos) return Frequency::from_terms(parse_list(body));
    return Frequency::from_terms(parse_list(body.substr(0, semi)),
                                 parse_list(body.substr(semi + 1)));
  }
  const auto slash = text.find('/');
  if (slash != std::string::npos)
    return Frequency::rational(std::stoul(text.substr(0, slash)),
                               std::stoul(text.substr(slash + 1)));
  throw DomainError(kModule, "parse_frequency",
                    "unrecognised frequency '" + text + "'");
}

}  // namespace mixedspec
