#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixedspec/arithmetic.hpp"
#include "mixedspec/errors.hpp"

using namespace mixedspec;

namespace {

// ||n w|| from exact integers: w is replaced by a convergent deep enough that
// the difference is far below double resolution at these n.
double dist_to_int(const mpq_class& x) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  mpq_class frac = x - mpq_class(fl);
  mpq_class other = 1 - frac;
  return std::min(frac.get_d(), other.get_d());
}

struct BruteVerdict {
  bool pass = true;
  long witness = 0;
  double log_margin = INFINITY;
};

// Scan every n in [1, range]: log(||n w|| * modulus(n) / kappa), minimum.
template <class LogModulus>
BruteVerdict brute_scan(const Frequency& w, double kappa, long range, LogModulus lm) {
  const auto conv = convergents(w, 60);
  const mpq_class deep(conv.back().p, conv.back().q);
  BruteVerdict v;
  for (long n = 1; n <= range; ++n) {
    const double d = dist_to_int(deep * n);
    const double m = std::log(d) + lm(static_cast<double>(n)) - std::log(kappa);
    if (m < v.log_margin) {
      v.log_margin = m;
      v.witness = n;
    }
  }
  v.pass = v.log_margin >= 0.0;
  return v;
}

}  // namespace

TEST_CASE("golden and silver convergents by hand") {
  const auto g = convergents(Frequency::golden_mean(), 5);
  const long expect_g[5][2] = {{1, 1}, {1, 2}, {2, 3}, {3, 5}, {5, 8}};
  REQUIRE(g.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(g[i].p == expect_g[i][0]);
    CHECK(g[i].q == expect_g[i][1]);
  }
  const auto s = convergents(Frequency::silver_mean(), 3);
  const long expect_s[3][2] = {{1, 2}, {2, 5}, {5, 12}};
  for (int i = 0; i < 3; ++i) {
    CHECK(s[i].p == expect_s[i][0]);
    CHECK(s[i].q == expect_s[i][1]);
  }
  const auto z = convergents_from_zero(Frequency::golden_mean(), 2);
  CHECK(z[0].p == 0);
  CHECK(z[0].q == 1);
}

TEST_CASE("values of the quadratic irrationals") {
  CHECK(std::abs(Frequency::golden_mean().value() - (std::sqrt(5.0) - 1.0) / 2.0) < 2.5e-16);
  CHECK(std::abs(Frequency::silver_mean().value() - (std::sqrt(2.0) - 1.0)) < 2.5e-16);
  CHECK(Frequency::rational(3, 7).value() == 3.0 / 7.0);
}

TEST_CASE("recurrence identities and approximation bound") {
  for (const auto& w : {Frequency::golden_mean(), Frequency::silver_mean(),
                        Frequency::from_terms({3, 1, 4, 1, 5}, {9, 2, 6}),
                        make_liouville(3.0, 8)}) {
    const auto c = convergents_from_zero(w, 9);
    const mpq_class deep(convergents(w, 12).back().p, convergents(w, 12).back().q);
    for (std::size_t n = 0; n + 1 < c.size(); ++n) {
      const mpz_class cross = c[n + 1].p * c[n].q - c[n].p * c[n + 1].q;
      CHECK(abs(cross) == 1);
      CHECK(gcd(c[n].p, c[n].q) == 1);
      const mpq_class err = abs(deep - mpq_class(c[n].p, c[n].q));
      CHECK(err < mpq_class(1, c[n].q * c[n + 1].q));
    }
  }
}

TEST_CASE("terminating expansions run out of data") {
  const auto r = Frequency::rational(3, 7);  // [0; 2, 3]
  CHECK(r.is_rational());
  CHECK(r.available_terms() == 2);
  CHECK_NOTHROW(convergents(r, 2));
  CHECK_THROWS_AS(convergents(r, 3), InsufficientDataError);
  CHECK_THROWS_AS(r.coefficient(3), InsufficientDataError);
  CHECK_THROWS_AS(beta(r, 5), DegenerateError);
  CHECK_THROWS_AS(beta(Frequency::golden_mean(), 2), PreconditionError);
}

TEST_CASE("signed distance is exact against rational arithmetic") {
  const auto w = Frequency::golden_mean();
  const auto deep = convergents(w, 80).back();
  for (long k : {1L, 2L, 13L, 89L, 1000L, 832040L, 123456789L}) {
    const mpq_class x = mpq_class(deep.p, deep.q) * k;
    mpz_class near;
    mpz_class twice_num = 2 * x.get_num() + x.get_den();
    mpz_fdiv_q(near.get_mpz_t(), twice_num.get_mpz_t(), mpz_class(2 * x.get_den()).get_mpz_t());
    const double expect = mpq_class(x - mpq_class(near)).get_d();
    CHECK(std::abs(w.signed_distance(k) - expect) <= 1e-16 * std::abs(expect) + 1e-300);
  }
  CHECK(Frequency::rational(2, 5).signed_distance(5) == 0.0);
}

TEST_CASE("beta of the golden mean vanishes") {
  const auto b = beta(Frequency::golden_mean(), 30);
  CHECK(b.value < 0.05);
  CHECK(b.tail < 1e-4);
  CHECK(b.stages.size() == 30);
}

TEST_CASE("beta is a running max: monotone in n_max") {
  for (const auto& w : {Frequency::golden_mean(), make_liouville(2.0, 10),
                        Frequency::from_terms({1, 7, 1, 30, 2}, {1, 3})}) {
    double prev = -1.0;
    for (std::size_t n = 3; n <= 12; ++n) {
      const double v = beta(w, n).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("make_liouville recovers its target") {
  const auto w = make_liouville(3.0, 6);
  CHECK(w.coefficient(1) == 20);  // round(e^3)
  const auto b = beta(w, 6);
  CHECK(b.value >= 2.9);
  CHECK(b.value <= 3.1);
  // the q_n = 20 stage: log q_{n+1} / q_n against the target, 5%
  bool seen = false;
  for (const auto& s : b.stages) {
    if (std::abs(s.q - 20.0) < 1e-9) {
      seen = true;
      CHECK(std::abs(s.log_q_next - 3.0) < 0.15);
    }
  }
  CHECK(seen);
}

TEST_CASE("small targets collapse to ones") {
  const auto w = make_liouville(1e-3, 20);
  for (std::size_t n = 1; n <= 12; ++n) CHECK(w.coefficient(n) == 1);
  CHECK(beta(w, 20).value < 0.1);
}

TEST_CASE("beta 45 and the precision budget") {
  const auto w = make_liouville(45.0, 5);
  CHECK(std::abs(log_of(w.coefficient(1)) - 45.0) < 1e-9);
  const auto b = beta(w, 30);
  CHECK(std::abs(b.value - 45.0) < 1e-6);
  CHECK_FALSE(w.note().empty());
  CHECK_THROWS_AS(make_liouville(1e5, 3), ResourceError);
  LiouvilleOptions tight;
  tight.budget_bits = 8;
  CHECK_THROWS_AS(make_liouville(45.0, 3, tight), ResourceError);
  CHECK_THROWS(make_liouville(-1.0, 3));
}

TEST_CASE("nearby Liouville frequencies stay in the ball") {
  const auto w0 = Frequency::golden_mean();
  // the target shrinks with delta so that e^{beta q} fits the bit budget
  const double cases[3][2] = {{1e-2, 3.0}, {1e-5, 3.0}, {1e-9, 0.3}};
  for (const auto& [delta, target] : cases) {
    const auto w = make_liouville_near(w0, delta, target, 6);
    CHECK(std::abs(w.value() - w0.value()) < delta);
    CHECK(beta(w, 30).value > 0.9 * target);
  }
  CHECK_THROWS_AS(make_liouville_near(w0, 1e-9, 3.0, 6), ResourceError);
  std::vector<mpz_class> prefix{1, 1, 1};  // cylinder around [0;1,1,1,...]
  // q_3 = 3, q_2 = 2: diameter 1/(3 * 5)
  CHECK(std::abs(cylinder_diameter(prefix) - 1.0 / 15.0) < 1e-15);
}

TEST_CASE("DC check agrees with a brute-force scan") {
  const auto g = Frequency::golden_mean();
  const DiophantineParams p(0.2, 2.0);
  const auto v = check_dc(g, p, 10000);
  const auto brute = brute_scan(g, 0.2, 10000, [](double n) { return 2.0 * std::log(n); });
  CHECK(v.pass);
  CHECK(v.pass == brute.pass);
  CHECK(v.witness == brute.witness);
  CHECK(std::abs(v.log_margin - brute.log_margin) < 1e-9);

  for (const auto& w : {Frequency::silver_mean(), Frequency::from_terms({2, 9, 1, 40}, {1}),
                        make_liouville(1.5, 8)}) {
    for (double tau : {1.0, 1.5, 2.0}) {
      const auto a = check_dc(w, DiophantineParams(0.1, tau), 5000);
      const auto b = brute_scan(w, 0.1, 5000, [tau](double n) { return tau * std::log(n); });
      CHECK(a.pass == b.pass);
      CHECK(a.witness == b.witness);
      CHECK(std::abs(a.log_margin - b.log_margin) < 1e-8);
    }
  }
}

TEST_CASE("Liouville frequencies fail DC at a convergent denominator") {
  const auto w = make_liouville(3.0, 6);
  const auto v = check_dc(w, DiophantineParams(0.2, 2.0), mpz_class("1000000000000"));
  CHECK_FALSE(v.pass);
  CHECK(v.witness == 20);  // q_1, followed by the huge a_2
  CHECK(v.log_margin < -40.0);
}

TEST_CASE("SDC check agrees with a brute-force scan") {
  const auto g = Frequency::golden_mean();
  const auto v = check_sdc(g, 0.05, 10000);
  const auto sdc = [](double n) { return std::log(n) + 2.0 * std::log(std::log(n + 1.0)); };
  const auto brute = brute_scan(g, 0.05, 10000, sdc);
  CHECK(v.pass);
  CHECK(v.witness == brute.witness);
  CHECK(std::abs(v.log_margin - brute.log_margin) < 1e-9);
  const auto w = Frequency::from_terms({1, 50, 1, 1, 200}, {1});
  const auto a = check_sdc(w, 0.3, 3000);
  const auto b = brute_scan(w, 0.3, 3000, sdc);
  CHECK(a.pass == b.pass);
  CHECK(a.witness == b.witness);
}

TEST_CASE("DC(kappa, 1) failures are SDC failures for the scaled constant") {
  const auto w = Frequency::from_terms({1, 3, 25, 1, 2, 400}, {1});
  const double kappa = 0.05;
  const auto dc = check_dc(w, DiophantineParams(kappa, 1.0), 100000);
  REQUIRE_FALSE(dc.pass);
  const double n = dc.witness.get_d();
  const double scaled = kappa * std::pow(std::log(n + 1.0), 2);
  const auto sdc = check_sdc(w, scaled, dc.witness);
  CHECK_FALSE(sdc.pass);
}

TEST_CASE("vacuous cases") {
  const auto g = Frequency::golden_mean();
  const auto v0 = check_dc(g, DiophantineParams(0.2, 2.0), 0);
  CHECK(v0.pass);
  CHECK(v0.vacuous);
  const auto s0 = check_sdc(g, 0.0, 1000);
  CHECK(s0.pass);
  CHECK(s0.vacuous);
  CHECK_THROWS(DiophantineParams(0.6, 2.0));
  CHECK_THROWS(DiophantineParams(0.1, 0.0));
}

TEST_CASE("frequency text and JSON forms") {
  CHECK(parse_frequency("golden").value() == Frequency::golden_mean().value());
  CHECK(parse_frequency("silver").value() == Frequency::silver_mean().value());
  CHECK(parse_frequency("3/7").value() == 3.0 / 7.0);
  const auto cf = parse_frequency("cf:2,3");
  CHECK(cf.value() == 3.0 / 7.0);
  const auto per = parse_frequency("cf:1,1;2");
  CHECK(per.coefficient(3) == 2);
  CHECK(per.coefficient(10) == 2);
  CHECK(parse_frequency("liouville:3").coefficient(1) == 20);
  CHECK_THROWS(parse_frequency("bogus"));
  CHECK_THROWS(parse_frequency("cf:"));

  const auto w = make_liouville(45.0, 4);
  const auto j = to_json(w);
  CHECK(j.contains("cf"));
  CHECK(j.contains("note"));
  CHECK(j.at("cf").at(0).is_string());  // e^45 does not fit 64 bits
  const auto back = frequency_from_json(j);
  for (std::size_t n = 1; n <= 6; ++n) CHECK(back.coefficient(n) == w.coefficient(n));
  CHECK(back.value() == w.value());
}
