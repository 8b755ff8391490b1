#include <doctest.h>

#include "oracles.hpp"
#include "sovchain/poly.hpp"
#include "sovchain/random.hpp"

using namespace sovchain;

namespace {
Poly random_poly(Rng& rng, int degree, double lo = 1e-3, double hi = 1e3) {
  std::vector<cplx> c;
  for (int k = 0; k <= degree; ++k) {
    const double mag = std::exp(rng.uniform(std::log(lo), std::log(hi)));
    c.push_back(std::polar(mag, rng.uniform(0.0, 6.283185307179586)));
  }
  return Poly(c);
}
}  // namespace

TEST_CASE("poly_roots on factored polynomials") {
  auto r = poly_roots(Poly({6.0, -5.0, 1.0}));
  REQUIRE(r.values.size() == 2);
  CHECK(std::abs(r.values[0] - cplx(2.0)) < 1e-12);
  CHECK(std::abs(r.values[1] - cplx(3.0)) < 1e-12);
  CHECK_FALSE(r.clustered);

  auto d = poly_roots(Poly({0.0, 0.0, 1.0}));
  REQUIRE(d.values.size() == 2);
  CHECK(std::abs(d.values[0]) < 1e-12);
  CHECK(std::abs(d.values[1]) < 1e-12);
  CHECK(d.clustered);
}

TEST_CASE("poly_roots errors") {
  CHECK_THROWS_AS(poly_roots(Poly()), Error);
  try {
    poly_roots(Poly({cplx(3.0)}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConstantPolynomial);
  }
  try {
    poly_roots(Poly({0.0, 0.0}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroPolynomial);
  }
}

TEST_CASE("root residual property over random polynomials") {
  Rng rng(7);
  double worst = 0.0, unit_worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int deg = 1 + static_cast<int>(rng.next() % 12);
    const Poly p = random_poly(rng, deg);
    const auto roots = poly_roots(p);
    REQUIRE(static_cast<int>(roots.values.size()) == p.degree());
    for (const auto& r : roots.values) {
      const double bound = p.scale() * std::pow(std::max(1.0, std::abs(r)), deg);
      worst = std::max(worst, std::abs(oracle::power_sum(p.coeffs(), r)) / bound);
      if (std::abs(r) <= 1.0) unit_worst = std::max(unit_worst, std::abs(oracle::power_sum(p.coeffs(), r)) / p.scale());
    }
  }
  CHECK(worst < 1e-9);
  CHECK(unit_worst < 1e-9);
}

TEST_CASE("degree-5 random roots residual") {
  Rng rng(11);
  const Poly p = random_poly(rng, 5, 0.1, 10.0);
  for (const auto& r : poly_roots(p).values) CHECK(std::abs(oracle::power_sum(p.coeffs(), r)) / p.scale() < 1e-10);
}

TEST_CASE("trimming and degree") {
  CHECK(Poly({1.0, 2.0, 0.0, 0.0}).degree() == 1);
  CHECK(Poly({1.0, 2.0, 1e-14}).degree() == 1);
  CHECK(Poly().degree() == Poly::kZeroDegree);
  CHECK(Poly({0.0}).is_zero());
  // Dual coefficients drop only when structurally zero.
  BasicPoly<Dual> pd({Dual(1.0), Dual(0.0, {1.0})});
  CHECK(pd.degree() == 1);
}

TEST_CASE("poly_derivative") {
  const Poly d = poly_derivative(Poly({6.0, -5.0, 1.0}));
  REQUIRE(d.degree() == 1);
  CHECK(d.coeff(0) == cplx(-5.0));
  CHECK(d.coeff(1) == cplx(2.0));
  CHECK(poly_derivative(Poly({7.0})).is_zero());

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Poly p = random_poly(rng, 6, 0.1, 10.0);
    const Poly dp = poly_derivative(p);
    const cplx u = rng.complex_square();
    const cplx fd = oracle::central_difference([&](cplx z) { return oracle::power_sum(p.coeffs(), z); }, u, 1e-6);
    CHECK(std::abs(fd - dp(u)) < 1e-8 * std::max(1.0, std::abs(dp(u))) * 10.0);
  }
}

TEST_CASE("derivative linearity") {
  Rng rng(5);
  const Poly p = random_poly(rng, 5, 0.1, 10.0), q = random_poly(rng, 3, 0.1, 10.0);
  const cplx a = rng.complex_square(), b = rng.complex_square();
  const Poly lhs = poly_derivative(p * a + q * b);
  const Poly rhs = poly_derivative(p) * a + poly_derivative(q) * b;
  for (int k = 0; k <= 5; ++k) CHECK(std::abs(lhs.coeff(k) - rhs.coeff(k)) <= 1e-13 * (1.0 + std::abs(rhs.coeff(k))));
}

TEST_CASE("ratfn_eval") {
  const RationalFn f(Poly({1.0}), Poly({-1.0, 1.0}));
  CHECK(std::abs(ratfn_eval(f, 3.0) - cplx(0.5)) < 1e-15);
  try {
    ratfn_eval(f, 1.0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoleEvaluation);
  }
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Poly n = random_poly(rng, 4, 0.1, 10.0), d = random_poly(rng, 3, 0.1, 10.0);
    const cplx u = rng.complex_square(2.0);
    const cplx ref = oracle::power_sum(n.coeffs(), u) / oracle::power_sum(d.coeffs(), u);
    CHECK(std::abs(ratfn_eval(RationalFn(n, d), u) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("dual number primitives against finite differences") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const cplx a = rng.complex_square() + 2.0, b = rng.complex_square() + 2.0;
    const std::vector<cplx> x = {a, b};
    const auto seeded = seed_all(x);
    const std::vector<std::pair<std::function<Dual(const std::vector<Dual>&)>, std::function<cplx(const std::vector<cplx>&)>>>
        ops = {
            {[](const auto& v) { return v[0] + v[1]; }, [](const auto& v) { return v[0] + v[1]; }},
            {[](const auto& v) { return v[0] * v[1]; }, [](const auto& v) { return v[0] * v[1]; }},
            {[](const auto& v) { return v[0] / v[1]; }, [](const auto& v) { return v[0] / v[1]; }},
            {[](const auto& v) { return powi(v[0], 5) - powi(v[1], -2); },
             [](const auto& v) { return std::pow(v[0], 5) - std::pow(v[1], -2); }},
            {[](const auto& v) { return sqrt(v[0] * v[1]); }, [](const auto& v) { return std::sqrt(v[0] * v[1]); }},
            {[](const auto& v) { return log(v[0]) * exp(v[1]); },
             [](const auto& v) { return std::log(v[0]) * std::exp(v[1]); }},
        };
    for (const auto& [dual_fn, plain_fn] : ops) {
      const Dual d = dual_fn(seeded);
      const auto fd = oracle::fd_gradient(plain_fn, x);
      for (int i = 0; i < 2; ++i) CHECK(std::abs(d.partial(i) - fd[i]) <= 1e-7 * std::max(1.0, std::abs(fd[i])));
    }
  }
}

TEST_CASE("xoshiro stream is reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  Rng c(1);
  const double u = c.uniform();
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
}
