#include <doctest.h>

#include "oracles.hpp"
#include "sovchain/sov.hpp"

using namespace sovchain;

namespace {
ChainSpec rational_spec(int n, const TwistMatrix& c) {
  std::vector<cplx> nu;
  for (int k = 0; k < n; ++k) nu.push_back(cplx(1.0 - 2.0 * k / std::max(1, n - 1), 0.1 * k));
  return ChainSpec::make(Model::Rational, nu, c);
}
ChainSpec trig_spec(int n, const TwistMatrix& c) {
  std::vector<cplx> nu;
  for (int k = 0; k < n; ++k) nu.push_back(cplx(0.6 + 0.5 * k, 0.2 - 0.15 * k));
  return ChainSpec::make(Model::Trigonometric, nu, c);
}
Eigen::Matrix2cd oracle_lax(const ChainSpec& spec, const PhasePoint& xi, cplx u) {
  return oracle::chain_product(spec.model == Model::Rational, xi.coords(), spec.nu, spec.twist.matrix(), u);
}
template <class E>
ErrorKind kind_of(E&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::ConfigInvalid;
}
}  // namespace

TEST_CASE("separating functions") {
  Rng rng(1);
  const ChainSpec rs = rational_spec(2, TwistMatrix::diag(1.0, 0.0));
  const PhasePoint xi = random_point(rs, rng);
  const auto sf = separating_functions(rs, xi);
  CHECK(sf.A.num().degree() == 2);
  CHECK(std::abs(sf.A.num().leading() - cplx(1.0)) < 1e-14);
  CHECK_FALSE(sf.swapped);
  CHECK(kind_of([&] { separating_functions(rational_spec(2, TwistMatrix::from_entries(0, 1, 1, 0)), xi); }) ==
        ErrorKind::DegenerateTwistRow);
  CHECK(kind_of([] { trig_spec(2, TwistMatrix::from_entries(0, 1, 1, 0)); }) == ErrorKind::InvalidSpec);

  const ChainSpec sw = rational_spec(2, TwistMatrix::from_entries(0.0, 0.0, 0.4, 1.0));
  CHECK(separating_functions(sw, xi).swapped);

  const cplx c11(1.2, -0.3);
  const ChainSpec ts = trig_spec(3, TwistMatrix::diag(c11, 0.0));
  const PhasePoint tx = random_point(ts, rng);
  cplx a0 = c11;
  for (int k = 0; k < 3; ++k) a0 *= 2.0 * tx.at(k, trig::S01) - tx.at(k, trig::S11);
  CHECK(std::abs(separating_functions(ts, tx).A.num().coeff(3) - a0) < 1e-13);
}

TEST_CASE("separate: special case roots match the quadratic in the integrals") {
  Rng rng(2);
  const cplx c11(0.8, 0.4);
  const ChainSpec spec = rational_spec(2, TwistMatrix::from_entries(c11, 0.0, 0.3, 0.0));
  const auto gs = sample_generic_point(spec, rng, Convention::Nonstandard);
  const auto in = integrals(spec, gs.xi).coeffs;
  const cplx disc = std::sqrt(in[1] * in[1] - 4.0 * c11 * in[2]);
  std::vector<cplx> ref = {(-in[1] + disc) / (2.0 * c11), (-in[1] - disc) / (2.0 * c11)};
  sort_lexicographic(ref);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(gs.point.x[i] - ref[i]) < 1e-10);

  CHECK(kind_of([&] { separate(spec, PhasePoint(Model::Rational, 2), Convention::Nonstandard); }) ==
        ErrorKind::DegenerateDegree);
  // Standard convention with c21 = 0: B has fewer roots.
  const ChainSpec no21 = rational_spec(2, TwistMatrix::diag(1.0, 0.0));
  CHECK(kind_of([&] { separate(no21, random_point(no21, rng), Convention::Standard); }) == ErrorKind::DegenerateDegree);
}

TEST_CASE("separate: residual oracle") {
  Rng rng(3);
  for (Convention conv : {Convention::Nonstandard, Convention::Standard}) {
    const ChainSpec spec = rational_spec(3, random_degenerate_twist(rng));
    const auto gs = sample_generic_point(spec, rng, conv);
    for (int i = 0; i < 3; ++i) {
      const Eigen::Matrix2cd l = oracle_lax(spec, gs.xi, gs.point.x[i]);
      const cplx root_val = conv == Convention::Nonstandard ? l(0, 0) : l(1, 0);
      const cplx mom_val = conv == Convention::Nonstandard ? l(1, 0) : l(0, 0);
      CHECK(std::abs(root_val) < 1e-9);
      CHECK(std::abs(gs.point.p[i] - mom_val) < 1e-9 * std::max(1.0, std::abs(mom_val)));
    }
    for (std::size_t i = 1; i < gs.point.x.size(); ++i) {
      const cplx a = gs.point.x[i - 1], b = gs.point.x[i];
      CHECK((a.real() < b.real() || (a.real() == b.real() && a.imag() <= b.imag())));
    }
  }
}

TEST_CASE("derived gradients against perturbation and finite differences") {
  Rng rng(4);
  for (Model model : {Model::Rational, Model::Trigonometric}) {
    const ChainSpec spec = model == Model::Rational ? rational_spec(3, random_degenerate_twist(rng))
                                                    : trig_spec(3, TwistMatrix::diag(1.1, 0.0));
    const auto gs = sample_generic_point(spec, rng, Convention::Nonstandard);
    const SeparatedJet jet = separate_with_gradients(spec, gs.xi, Convention::Nonstandard);
    const int n = gs.xi.size();
    Eigen::VectorXcd delta(n);
    for (int a = 0; a < n; ++a) delta(a) = rng.complex_square();
    // Re-root at xi +- eps*delta, match roots by nearest neighbour.
    const double eps = 1e-6;
    auto shifted = [&](double s) {
      PhasePoint y = gs.xi;
      for (int a = 0; a < n; ++a) y.coords()[a] += s * delta(a);
      return separate(spec, y, Convention::Nonstandard);
    };
    const SeparatedPoint plus = shifted(eps), minus = shifted(-eps);
    for (int i = 0; i < 3; ++i) {
      auto nearest = [&](const SeparatedPoint& sp) {
        int best = 0;
        for (int j = 1; j < 3; ++j)
          if (std::abs(sp.x[j] - gs.point.x[i]) < std::abs(sp.x[best] - gs.point.x[i])) best = j;
        return best;
      };
      const int ip = nearest(plus), im = nearest(minus);
      const cplx fdx = (plus.x[ip] - minus.x[im]) / (2 * eps);
      const cplx fdp = (plus.p[ip] - minus.p[im]) / (2 * eps);
      cplx sx = 0.0, spp = 0.0;
      for (int a = 0; a < n; ++a) {
        sx += jet.dx(i, a) * delta(a);
        spp += jet.dp(i, a) * delta(a);
      }
      CHECK(std::abs(fdx - sx) < 1e-6 * std::max(1.0, std::abs(sx)));
      CHECK(std::abs(fdp - spp) < 1e-6 * std::max(1.0, std::abs(spp)));
    }
    // Casimir flows leave every x_i fixed.
    const Eigen::MatrixXcd pi = build_bivector(spec).evaluate(gs.xi);
    for (const auto& [name, cas] : casimir_observables(spec)) {
      const Eigen::VectorXcd field = pi * cas.gradient(gs.xi);
      CHECK((jet.dx * field).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("quasi-canonical bracket matrix") {
  Rng rng(5);
  for (int n : {2, 3}) {
    const ChainSpec rs = rational_spec(n, random_degenerate_twist(rng));
    const ChainSpec rg = rational_spec(n, random_twist(rng));
    const ChainSpec ts = trig_spec(n, TwistMatrix::diag(0.9, 0.0));
    const ChainSpec tg = trig_spec(n, TwistMatrix::diag(0.9, cplx(0.3, 0.2)));
    for (const ChainSpec* spec : {&rs, &rg, &ts, &tg})
      for (Convention conv : {Convention::Nonstandard, Convention::Standard}) {
        if (conv == Convention::Standard && spec->model == Model::Trigonometric) continue;  // B numerator degree < N
        for (int t = 0; t < 5; ++t) {
          const auto gs = sample_generic_point(*spec, rng, conv);
          const BracketMatrix bm = bracket_matrix(*spec, gs.xi, conv);
          CAPTURE(n);
          CAPTURE(to_string(spec->model));
          CAPTURE(to_string(conv));
          CHECK(bm.relative() < 1e-8);
        }
      }
  }
}

TEST_CASE("separating algebra") {
  Rng rng(6);
  const ChainSpec r3 = rational_spec(3, random_twist(rng));
  const ChainSpec t2 = trig_spec(2, TwistMatrix::diag(1.3, 0.5));
  const ChainSpec sw = rational_spec(2, TwistMatrix::from_entries(0.0, 0.2, 0.7, 1.0));
  const ChainSpec tsw = trig_spec(2, TwistMatrix::diag(0.0, 0.8));
  for (const ChainSpec* spec : {&r3, &t2, &sw, &tsw})
    for (int t = 0; t < 10; ++t) {
      const PhasePoint xi = random_point(*spec, rng);
      cplx u, v;
      do {
        std::tie(u, v) = sample_spectral_pair(rng);
      } while (!away_from_poles(*spec, u, 0.1) || !away_from_poles(*spec, v, 0.1));
      CHECK(check_separating_algebra(*spec, xi, u, v).max_relative() < 1e-9);
    }

  // Limit v -> u: the closed form tends to B'(u)A(u) - B(u)A'(u) (rational).
  const PhasePoint xi = random_point(r3, rng);
  const cplx u(0.3, 0.45);
  const auto sf = separating_functions(r3, xi);
  const double h = 1e-4;
  const cplx a = sf.A(u), b = sf.B(u);
  const cplx da = oracle::central_difference([&](cplx z) { return sf.A(z); }, u, 1e-5);
  const cplx db = oracle::central_difference([&](cplx z) { return sf.B(z); }, u, 1e-5);
  const cplx closed = separating_ab_closed_form(r3, u, u + h, a, sf.A(u + h), b, sf.B(u + h));
  const double scale = (std::abs(a) + std::abs(da)) * (std::abs(b) + std::abs(db));
  CHECK(std::abs(closed - (db * a - b * da)) < 1e-4 * scale);
  CHECK_THROWS(check_separating_algebra(r3, xi, u, u));
}

TEST_CASE("separability iff det C = 0") {
  Rng rng(7);
  const ChainSpec deg = rational_spec(2, TwistMatrix::from_entries(1.0, 0.5, 0.0, 0.0));
  for (int t = 0; t < 20; ++t) {
    const auto gs = sample_generic_point(deg, rng, Convention::Nonstandard);
    CHECK(separation_residual(deg, gs.xi, Convention::Nonstandard).max_relative() < 1e-9);
  }
  const ChainSpec id = rational_spec(2, TwistMatrix());
  int large = 0;
  for (int t = 0; t < 100; ++t) {
    const auto gs = sample_generic_point(id, rng, Convention::Nonstandard);
    if (separation_residual(id, gs.xi, Convention::Nonstandard).max_relative() > 1e-3) ++large;
  }
  CHECK(large >= 99);

  const ChainSpec ts = trig_spec(3, TwistMatrix::diag(0.7, 0.0));
  const auto gs = sample_generic_point(ts, rng, Convention::Nonstandard);
  const auto sr = separation_residual(ts, gs.xi, Convention::Nonstandard);
  for (const auto& r : sr.residual) CHECK(std::abs(r) < 1e-10);
}

TEST_CASE("standard pairs satisfy I(x) = p under a degenerate twist") {
  Rng rng(8);
  const ChainSpec spec = rational_spec(2, random_degenerate_twist(rng));
  const auto gs = sample_generic_point(spec, rng, Convention::Standard);
  const auto in = integrals(spec, gs.xi);
  for (int i = 0; i < 2; ++i)
    CHECK(std::abs(in.generating(gs.point.x[i]) - gs.point.p[i]) < 1e-9 * std::max(1.0, std::abs(gs.point.p[i])));
  CHECK(separation_residual(spec, gs.xi, Convention::Standard).max_relative() < 1e-9);
  const auto gn = sample_generic_point(spec, rng, Convention::Nonstandard);
  CHECK(separation_residual(spec, gn.xi, Convention::Nonstandard).max_relative() < 1e-9);
}

TEST_CASE("identity for I(u) in terms of A, B and the untwisted product") {
  Rng rng(9);
  for (int n = 1; n <= 4; ++n) {
    const ChainSpec spec = rational_spec(n, random_twist(rng));
    CHECK(identity_iu_residual(spec, random_point(spec, rng)) < 1e-10);
  }
}

TEST_CASE("actions commute with the integrals in the special case") {
  Rng rng(10);
  const ChainSpec rs = rational_spec(3, TwistMatrix::from_entries(1.1, 0.0, 0.4, 0.0));
  const ChainSpec ts = trig_spec(3, TwistMatrix::diag(0.8, 0.0));
  for (const ChainSpec* spec : {&rs, &ts}) {
    const auto gs = sample_generic_point(*spec, rng, Convention::Nonstandard);
    const Eigen::MatrixXcd b = integral_root_brackets(*spec, gs.xi, Convention::Nonstandard);
    const double scale = std::max(1.0, integral_gradients(*spec, gs.xi).cwiseAbs().maxCoeff());
    CHECK(b.cwiseAbs().maxCoeff() < 1e-9 * scale);
  }
}
