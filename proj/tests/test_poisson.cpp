#include <doctest.h>

#include "oracles.hpp"
#include "sovchain/model.hpp"
#include "sovchain/poisson.hpp"

using namespace sovchain;

namespace {
PhasePoint random_phase(Model m, int sites, Rng& rng) {
  PhasePoint xi(m, sites);
  for (auto& c : xi.coords()) c = rng.complex_square();
  return xi;
}

// Random quadratic polynomial observable in the coordinates.
Observable random_quadratic(int dim, Rng& rng) {
  std::vector<cplx> lin(dim);
  for (auto& c : lin) c = rng.complex_square();
  const int a = static_cast<int>(rng.next() % dim), b = static_cast<int>(rng.next() % dim);
  const cplx q = rng.complex_square();
  return Observable([lin, a, b, q](const std::vector<Dual>& x) {
    Dual s = Dual(q) * x[a] * x[b];
    for (std::size_t i = 0; i < lin.size(); ++i) s += Dual(lin[i]) * x[i];
    return s;
  });
}
}  // namespace

TEST_CASE("rational bivector structure constants") {
  Rng rng(1);
  const PoissonBivector pi = build_bivector(Model::Rational, 1);
  const PhasePoint xi = random_phase(Model::Rational, 1, rng);
  const auto m = pi.evaluate(xi);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          CHECK(std::abs(m(2 * i + j, 2 * k + l) - oracle::gl2_bracket(i, j, k, l, xi.coords().data())) < 1e-15);
  CHECK(std::abs(m(rat::S11, rat::S12) - xi.coords()[rat::S12]) < 1e-15);
  const cplx b = bracket(Observable::coordinate(rat::S12), Observable::coordinate(rat::S21), pi, xi);
  CHECK(std::abs(b - (xi.coords()[rat::S11] - xi.coords()[rat::S22])) < 1e-15);
}

TEST_CASE("trigonometric bivector relations") {
  Rng rng(2);
  const PoissonBivector pi = build_bivector(Model::Trigonometric, 1);
  const PhasePoint xi = random_phase(Model::Trigonometric, 1, rng);
  const auto& s = xi.coords();
  const auto m = pi.evaluate(xi);
  using namespace trig;
  CHECK(std::abs(m(S01, S12) - 0.25 * s[S11] * s[S12]) < 1e-15);
  CHECK(std::abs(m(S12, S21) - (s[S02] * s[S11] - s[S01] * s[S22])) < 1e-15);
  CHECK(std::abs(m(S01, S02)) == 0.0);
  CHECK(std::abs(m(S11, S22)) == 0.0);
}

TEST_CASE("inter-site brackets vanish and antisymmetry") {
  Rng rng(3);
  for (Model model : {Model::Rational, Model::Trigonometric}) {
    const PoissonBivector pi = build_bivector(model, 3);
    const PhasePoint xi = random_phase(model, 3, rng);
    const auto m = pi.evaluate(xi);
    const int w = site_width(model);
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) {
        CHECK(std::abs(m(a, b) + m(b, a)) == 0.0);
        if (a / w != b / w) CHECK(m(a, b) == cplx(0.0));
      }
  }
}

TEST_CASE("Jacobi identity on coordinate triples") {
  Rng rng(4);
  for (Model model : {Model::Rational, Model::Trigonometric}) {
    const PoissonBivector pi = build_bivector(model, 2);
    const PhasePoint xi = random_phase(model, 2, rng);
    const int n = xi.size();
    auto nested = [&](int a, int b, int c) {
      // {x_a, {x_b, x_c}} with the inner bracket as an observable
      Observable inner([&pi, b, c](const std::vector<Dual>& x) {
        // Pi_bc as a polynomial in the (dual) coordinates
        const int w = site_width(pi.model());
        if (b / w != c / w) return Dual(0.0);
        const int base = (b / w) * w;
        Dual s(0.0);
        for (const auto& t : pi.local_terms(b % w, c % w)) {
          Dual term(t.coef);
          if (t.i >= 0) term *= x[base + t.i];
          if (t.j >= 0) term *= x[base + t.j];
          s += term;
        }
        return s;
      });
      return bracket(Observable::coordinate(a), inner, pi, xi);
    };
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) worst = std::max(worst, std::abs(nested(a, b, c) + nested(b, c, a) + nested(c, a, b)));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("antisymmetry and Leibniz over random observables") {
  Rng rng(5);
  for (Model model : {Model::Rational, Model::Trigonometric}) {
    const PoissonBivector pi = build_bivector(model, 2);
    double anti = 0.0, leib = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const PhasePoint xi = random_phase(model, 2, rng);
      const Observable f = random_quadratic(xi.size(), rng), g = random_quadratic(xi.size(), rng);
      anti = std::max(anti, std::abs(bracket(f, g, pi, xi) + bracket(g, f, pi, xi)));
      if (trial < 100) {
        const Observable h = random_quadratic(xi.size(), rng);
        const cplx lhs = bracket(f * g, h, pi, xi);
        const cplx rhs = f.value(xi) * bracket(g, h, pi, xi) + g.value(xi) * bracket(f, h, pi, xi);
        leib = std::max(leib, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
    }
    CHECK(anti < 1e-12);
    CHECK(leib < 1e-9);
  }
  const PoissonBivector pi = build_bivector(Model::Rational, 1);
  const PhasePoint xi = random_phase(Model::Rational, 1, rng);
  const Observable f = random_quadratic(4, rng);
  CHECK(bracket(f, f, pi, xi) == cplx(0.0));
  CHECK(bracket(Observable::constant(2.0), f, pi, xi) == cplx(0.0));
}

TEST_CASE("Hamiltonian vector field") {
  Rng rng(6);
  for (Model model : {Model::Rational, Model::Trigonometric}) {
    const PoissonBivector pi = build_bivector(model, 2);
    const PhasePoint xi = random_phase(model, 2, rng);
    CHECK(hamiltonian_vector_field(Observable::constant(3.0), pi, xi).norm() == 0.0);

    const Observable h = random_quadratic(xi.size(), rng), f = random_quadratic(xi.size(), rng);
    const Eigen::VectorXcd field = hamiltonian_vector_field(h, pi, xi);
    // Directional derivative of f along the field by central differences.
    const double eps = 1e-6;
    std::vector<cplx> xp = xi.coords(), xm = xi.coords();
    for (int a = 0; a < xi.size(); ++a) {
      xp[a] += eps * field(a);
      xm[a] -= eps * field(a);
    }
    const cplx dir = (f.value(PhasePoint(model, 2, xp)) - f.value(PhasePoint(model, 2, xm))) / (2 * eps);
    CHECK(std::abs(dir - bracket(f, h, pi, xi)) < 1e-7 * std::max(1.0, std::abs(dir)));
  }
}

TEST_CASE("Casimirs generate no flow and annihilate every coordinate") {
  Rng rng(7);
  for (Model model : {Model::Rational, Model::Trigonometric}) {
    const ChainSpec spec = ChainSpec::make(model, {0.7, -1.3}, TwistMatrix::diag(1.0, 0.0));
    const PoissonBivector pi = build_bivector(spec);
    const PhasePoint xi = random_point(spec, rng);
    for (const auto& [name, cas] : casimir_observables(spec)) {
      CAPTURE(name);
      CHECK(hamiltonian_vector_field(cas, pi, xi).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("observable gradient against finite differences") {
  Rng rng(8);
  const ChainSpec spec = ChainSpec::make(Model::Trigonometric, {0.5, 1.5}, TwistMatrix::diag(1.0, 0.4));
  const PhasePoint xi = random_point(spec, rng);
  const Observable f = integral_observable(spec, 1);
  const auto g = f.gradient(xi);
  const auto fd = oracle::fd_gradient([&](const std::vector<cplx>& x) { return f.value(PhasePoint(spec.model, 2, x)); },
                                      xi.coords());
  for (int a = 0; a < xi.size(); ++a) CHECK(std::abs(g(a) - fd[a]) <= 1e-7 * std::max(1.0, std::abs(fd[a])));
}
