#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixedspec/cocycle.hpp"
#include "mixedspec/errors.hpp"
#include "mixedspec/spectrum.hpp"
#include "support.hpp"

using namespace mixedspec;
using testing::uniform;

namespace {

ModelParams free_model() { return ModelParams(default_f(), 0.0, Frequency::golden_mean()); }

Eigen::VectorXd dense_eigenvalues(const FiniteOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = op.diagonal()[i];
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = -1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

FiniteOperator random_operator(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> d(n);
  for (auto& x : d) x = uniform(rng, 0.1, 5.0);
  return FiniteOperator(d);
}

}  // namespace

TEST_CASE("free operator eigenvalues: closed form") {
  for (std::size_t n : {2u, 7u, 100u, 400u}) {
    const auto op = build_finite(free_model(), 0.3, n);
    for (std::size_t j = 0; j < n; ++j)
      CHECK(std::abs(eigenvalue_at(op, j, 1e-13) - testing::free_eigenvalue(j + 1, n)) < 1e-12);
  }
}

TEST_CASE("N = 2 by hand") {
  const FiniteOperator op({1.0, 3.0});
  // eigenvalues of [[1,-1],[-1,3]]: 2 -+ sqrt 2
  CHECK(std::abs(eigenvalue_at(op, 0, 1e-14) - (2.0 - std::sqrt(2.0))) < 1e-13);
  CHECK(std::abs(eigenvalue_at(op, 1, 1e-14) - (2.0 + std::sqrt(2.0))) < 1e-13);
  CHECK(eigenvalue_count_below(op, 0.0) == 0);
  CHECK(eigenvalue_count_below(op, 2.0) == 1);
  CHECK(eigenvalue_count_below(op, 4.0) == 2);
}

TEST_CASE("diagonal must be positive") {
  CHECK_THROWS_AS(FiniteOperator({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(FiniteOperator({1.0, -2.0}), DomainError);
}

TEST_CASE("Sturm counts against a dense solver") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const auto op = random_operator(rng, 12);
    const auto ev = dense_eigenvalues(op);
    for (int i = 0; i < 20; ++i) {
      const double e = uniform(rng, -2.0, 8.0);
      std::size_t expect = 0;
      for (Eigen::Index j = 0; j < ev.size(); ++j) expect += ev[j] < e;
      CHECK(eigenvalue_count_below(op, e) == expect);
    }
    for (std::size_t j = 0; j < 12; ++j)
      CHECK(std::abs(eigenvalue_at(op, j, 1e-13) - ev[static_cast<Eigen::Index>(j)]) < 1e-11);
  }
}

TEST_CASE("model operator against a dense solver") {
  ModelParams p(default_f(), 3.0, Frequency::golden_mean());
  const auto op = build_finite(p, 0.17, 60);
  const auto ev = dense_eigenvalues(op);
  const auto all = eigenvalues_in(op, op.gershgorin().first, op.gershgorin().second, 1e-13);
  REQUIRE(all.size() == 60);
  for (std::size_t j = 0; j < 60; ++j)
    CHECK(std::abs(all[j] - ev[static_cast<Eigen::Index>(j)]) < 1e-10);
}

TEST_CASE("Cauchy interlacing") {
  std::mt19937_64 rng(5);
  ModelParams p(default_f(), 2.0, Frequency::golden_mean());
  for (std::size_t n : {5u, 40u, 500u}) {
    const auto op = build_finite(p, uniform(rng, 0, 1), n);
    const auto sub = op.leading(n - 1);
    const auto [lo, hi] = op.gershgorin();
    const auto big = eigenvalues_in(op, lo, hi, 1e-12);
    const auto small = eigenvalues_in(sub, lo, hi, 1e-12);
    REQUIRE(big.size() == n);
    REQUIRE(small.size() == n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      CHECK(big[j] <= small[j] + 1e-10);
      CHECK(small[j] <= big[j + 1] + 1e-10);
    }
  }
}

TEST_CASE("counts agree with eigenvalues_in") {
  std::mt19937_64 rng(11);
  ModelParams p(default_f(), 4.0, Frequency::golden_mean());
  const auto op = build_finite(p, 0.4, 300);
  for (int i = 0; i < 30; ++i) {
    double a = uniform(rng, -1.0, 8.0), b = uniform(rng, -1.0, 8.0);
    if (a > b) std::swap(a, b);
    const auto ev = eigenvalues_in(op, a, b, 1e-12);
    const std::size_t expect =
        eigenvalue_count_below(op, std::nextafter(b, INFINITY)) - eigenvalue_count_below(op, a);
    CHECK(ev.size() == expect);
    CHECK(std::is_sorted(ev.begin(), ev.end()));
    for (double e : ev) {
      CHECK(e >= a);
      CHECK(e <= b);
    }
  }
}

TEST_CASE("Gershgorin encloses the spectrum") {
  ModelParams p(default_f(), 6.0, Frequency::golden_mean());
  const auto op = build_finite(p, 0.9, 200);
  const auto [lo, hi] = op.gershgorin();
  CHECK(eigenvalue_count_below(op, lo) == 0);
  CHECK(eigenvalue_count_below(op, hi) == 200);
}

TEST_CASE("eigenvectors: residual, norm, and overlap with the free sine mode") {
  const std::size_t n = 80;
  const auto op = build_finite(free_model(), 0.0, n);
  for (std::size_t j : {1u, 17u, 40u, 80u}) {
    const double e = testing::free_eigenvalue(j, n);
    const auto pair = eigenvector(op, e + 1e-9);
    double norm = 0, overlap = 0, snorm = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(std::numbers::pi * j * (i + 1) / (n + 1.0));
      norm += pair.vector[i] * pair.vector[i];
      overlap += s * pair.vector[i];
      snorm += s * s;
    }
    CHECK(std::abs(norm - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(overlap) / std::sqrt(snorm) - 1.0) < 1e-9);
    CHECK(pair.residual < 1e-10);
    CHECK(std::abs(pair.energy - e) < 1e-10);
    CHECK_FALSE(pair.near_degenerate);
  }
}

TEST_CASE("eigenvector residual matches apply") {
  ModelParams p(default_f(), 3.0, Frequency::golden_mean());
  const auto op = build_finite(p, 0.25, 200);
  const double e = eigenvalue_at(op, 57, 1e-13);
  const auto pair = eigenvector(op, e);
  const auto hv = op.apply(pair.vector);
  double r = 0;
  for (std::size_t i = 0; i < hv.size(); ++i) {
    const double d = hv[i] - pair.energy * pair.vector[i];
    r += d * d;
  }
  CHECK(std::abs(std::sqrt(r) - pair.residual) < 1e-12);
  CHECK(pair.residual < 1e-8);
}

TEST_CASE("near-degenerate pair is flagged") {
  std::vector<double> d(50, 100.0);
  d[5] = 1.0;
  d[45] = 1.0;
  const FiniteOperator op(d);
  const double e0 = eigenvalue_at(op, 0, 1e-15);
  const double e1 = eigenvalue_at(op, 1, 1e-15);
  CHECK(e1 - e0 < 1e-8);
  const auto pair = eigenvector(op, e0);
  CHECK(pair.near_degenerate);
  CHECK(pair.residual < 1e-6);
}

TEST_CASE("decay rate of a synthetic exponential") {
  std::vector<double> v(200);
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::exp(-0.3 * std::abs(static_cast<double>(i) - 90.0));
  const auto fit = decay_rate(v);
  CHECK(fit.center == 90);
  CHECK(std::abs(fit.rate - 0.3) < 1e-10);
  CHECK(std::abs(fit.slope + 0.3) < 1e-10);
  CHECK(fit.fit_quality > 0.999);
  CHECK(fit.points >= 8);
}

TEST_CASE("decay fit: extended states") {
  const std::size_t n = 1000;
  const auto op = build_finite(free_model(), 0.0, n);
  const auto low = eigenvector(op, testing::free_eigenvalue(1, n));
  CHECK(decay_rate(low.vector).rate < 0.01);
  const auto mid = eigenvector(op, testing::free_eigenvalue(500, n));
  CHECK(decay_rate(mid.vector).fit_quality < 0.5);
}

TEST_CASE("decay fit: short vectors are rejected") {
  std::vector<double> v(20, 1.0);
  CHECK_THROWS_AS(decay_rate(v), PreconditionError);
}

TEST_CASE("localized eigenvectors decay at about the Lyapunov rate") {
  const ModelParams p(FourierSeries::cosine(1.0, 0.5), 4.0, Frequency::golden_mean(),
                      Normalization::any);
  const auto op = build_finite(p, 0.0, 2000);
  int checked = 0;
  for (std::size_t idx : {1000u, 1800u, 1950u}) {
    const double e = eigenvalue_at(op, idx, 1e-13);
    const auto pair = eigenvector(op, e);
    const auto fit = decay_rate(pair.vector);
    if (fit.points < 8) continue;
    const double l = finite_lyapunov(p, e, 20000, 16).value;
    REQUIRE(l > 0.1);
    CHECK(std::abs(fit.rate / l - 1.0) < 0.25);
    ++checked;
  }
  CHECK(checked >= 2);
}

TEST_CASE("spectral edges at K = 0 and K = 2") {
  const double thetas[] = {0.1, 0.4, 0.7};
  const auto free_edges = spectral_edges(free_model(), thetas, 400);
  CHECK(free_edges.min_in_bracket);
  CHECK(free_edges.max_in_bracket);
  CHECK(std::abs(free_edges.edge_slack - (2.0 - 2.0 * std::cos(std::numbers::pi / 401.0))) < 1e-15);
  CHECK(free_edges.upper_scale == 1.0);

  ModelParams p(default_f(), 2.0, Frequency::golden_mean());
  const auto e = spectral_edges(p, thetas, 400);
  CHECK(e.min_in_bracket);
  CHECK(e.max_in_bracket);
  CHECK(e.min_estimate >= -1e-8);
  CHECK(e.min_estimate < e.max_estimate);
  CHECK(std::abs(e.upper_scale - std::exp(2.0 * p.f_sup())) < 1e-12);
  CHECK_THROWS_AS(spectral_edges(p, thetas, 50), PreconditionError);
}

TEST_CASE("spectrum sits above zero") {
  std::mt19937_64 rng(19);
  for (double k : {0.5, 2.0, 5.0}) {
    ModelParams p(default_f(), k, Frequency::golden_mean());
    const auto op = build_finite(p, uniform(rng, 0, 1), 300);
    CHECK(eigenvalue_count_below(op, -1e-8) == 0);
  }
}

TEST_CASE("gap profile: two-band diagonal") {
  std::vector<double> d(200);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = i % 2 ? 6.0 : 2.0;
  const FiniteOperator op(d);
  const FiniteOperator ops[] = {op};
  const auto gaps = gap_profile(ops, -1.0, 9.0, 0.01);
  int interior = 0;
  for (const auto& g : gaps) {
    const bool touches = g.center - g.width / 2 <= -1.0 + 1e-9 || g.center + g.width / 2 >= 9.0 - 1e-9;
    if (g.width > 0.5 && !touches) {
      ++interior;
      CHECK(std::abs(g.center - 4.0) < 0.05);
      // band edges 4 -+ sqrt(4 + 4 cos^2) extremes: inner gap is (4 - 2, 4 + 2)
      CHECK(std::abs(g.width - 4.0 + 2.0 * (std::sqrt(8.0) - 2.0)) < 0.1 + 2.0 * (std::sqrt(8.0) - 2.0));
    }
  }
  CHECK(interior == 1);
}

TEST_CASE("gap profile: K = 0 has no interior gaps") {
  const double thetas[] = {0.0};
  const auto gaps = gap_profile(free_model(), thetas, 2000, 0.0, 4.0, 0.01);
  for (const auto& g : gaps) CHECK(g.width <= 0.02 + 1e-12);
}

TEST_CASE("gap profile at K = 4 is stable in N") {
  ModelParams p(default_f(), 4.0, Frequency::golden_mean());
  const double thetas[] = {0.0, 0.5};
  auto big = [](std::vector<Gap> gs) {
    std::vector<Gap> out;
    for (const auto& g : gs)
      if (g.width >= 0.3) out.push_back(g);
    return out;
  };
  const auto a = big(gap_profile(p, thetas, 500, 0.05, 4.0, 0.025));
  const auto b = big(gap_profile(p, thetas, 1000, 0.05, 4.0, 0.025));
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() >= 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i].center - b[i].center) < 0.1);
    CHECK(std::abs(a[i].width - b[i].width) < 0.2);
  }
}

TEST_CASE("Thouless exponent matches the Lyapunov exponent off the spectrum") {
  for (double k : {0.0, 1.0, 4.0}) {
    ModelParams p(default_f(), k, Frequency::golden_mean());
    const auto op = build_finite(p, 0.0, 2000);
    const auto [lo, hi] = op.gershgorin();
    const auto ev = eigenvalues_in(op, lo, hi, 1e-12);
    for (double e : {-1.0, -0.1}) {
      const double t = thouless_exponent(ev, e);
      const double l = finite_lyapunov(p, e, 20000, 16).value;
      CHECK(std::abs(t - l) < 2e-3 * std::max(1.0, l));
    }
  }
  const double ev[] = {1.0, 3.0};
  CHECK(std::abs(thouless_exponent(ev, 0.0) - 0.5 * std::log(3.0)) < 1e-15);
}

TEST_CASE("analyze rows") {
  ModelParams p(default_f(), 2.0, Frequency::golden_mean());
  const auto op = build_finite(p, 0.3, 120);
  const auto rows = analyze(op, 0.5, 2.5, 1e-12);
  const std::size_t expect = eigenvalue_count_below(op, std::nextafter(2.5, 3.0)) -
                             eigenvalue_count_below(op, 0.5);
  CHECK(rows.size() == expect);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].residual < 1e-8);
    CHECK(rows[i].n == 120);
    CHECK(rows[i].theta == 0.3);
    if (i) CHECK(rows[i].index > rows[i - 1].index);
  }
}
