#include <doctest.h>

#include "fixtures.hpp"
#include "sovchain/reconstruct.hpp"

using namespace sovchain;
using fixture::kind_of;

namespace {

double rel_distance(const PhasePoint& a, const PhasePoint& b) {
  double d = 0.0, s = 1.0;
  for (int k = 0; k < a.size(); ++k) {
    d = std::max(d, std::abs(a.coords()[k] - b.coords()[k]));
    s = std::max(s, std::abs(b.coords()[k]));
  }
  return d / s;
}

cplx random_c11(Rng& rng) {
  cplx c = rng.complex_square();
  while (std::abs(c) < 0.3) c = rng.complex_square();
  return c;
}

}  // namespace

TEST_CASE("rational inverse: round trip and structure") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const cplx c11 = random_c11(rng);
    const ChainSpec spec = reconstruction_spec(Model::Rational, c11);
    const GenericSample g = sample_reduced_generic(spec, rng);
    const CasimirSet cas = casimirs_of(g.xi);
    const ReconstructionResult r = reconstruct_rational_n2(g.point.x, g.point.p, cas, c11);
    CHECK(rel_distance(r.point, g.xi) < 1e-8);
    CHECK(r.forward_residual < 1e-8);
    CHECK(r.point.at(0, rat::S22) == -r.point.at(0, rat::S11));
    CHECK(r.point.at(1, rat::S22) == -r.point.at(1, rat::S11));
    const CasimirSet back = casimirs_of(r.point);
    CHECK(std::abs(back.C1 - cas.C1) < 1e-9 * std::max(1.0, std::abs(cas.C1)));
    CHECK(std::abs(back.C2 - cas.C2) < 1e-9 * std::max(1.0, std::abs(cas.C2)));
  }
}

TEST_CASE("rational inverse: c12 does not enter the separated variables") {
  Rng rng(32);
  const cplx c11(0.8, 0.1);
  const ChainSpec a = reconstruction_spec(Model::Rational, c11);
  const ChainSpec b = reconstruction_spec(Model::Rational, c11, cplx(0.4, -0.7));
  const GenericSample g = sample_reduced_generic(a, rng);
  const SeparatedPoint sb = separate(b, g.xi, Convention::Nonstandard);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(sb.x[i] - g.point.x[i]) < 1e-12);
    CHECK(std::abs(sb.p[i] - g.point.p[i]) < 1e-12);
  }
}

TEST_CASE("rational inverse: error paths") {
  const CasimirSet cas = CasimirSet::rational(0.3, -0.2);
  CHECK(kind_of([&] { reconstruct_rational_n2({0.5, 0.5}, {1.0, 2.0}, cas, 1.0); }) == ErrorKind::CoincidentRoots);
  CHECK(kind_of([&] { reconstruct_rational_n2({1.0, 0.5}, {1.0, 2.0}, cas, 1.0); }) == ErrorKind::PoleCollision);
  CHECK(kind_of([&] { reconstruct_rational_n2({0.2, -1.0}, {1.0, 2.0}, cas, 1.0); }) == ErrorKind::PoleCollision);
  // p1 = p2 = 0 kills every term of the denominator.
  CHECK(kind_of([&] { reconstruct_rational_n2({0.2, 0.5}, {0.0, 0.0}, cas, 1.0); }) == ErrorKind::ZeroDenominator);
  // p2 = 0 leaves the denominator alone but makes T12 vanish.
  CHECK(kind_of([&] { reconstruct_rational_n2({0.2, 0.5}, {1.0, 0.0}, cas, 1.0); }) == ErrorKind::ZeroOffDiagonal);
}

TEST_CASE("trigonometric inverse: round trip up to the sign orbit") {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const cplx c11 = random_c11(rng);
    const ChainSpec spec = reconstruction_spec(Model::Trigonometric, c11);
    const GenericSample g = sample_reduced_generic(spec, rng);
    const CasimirSet cas = casimirs_of(g.xi);
    const ReconstructionResult r = reconstruct_trig_n2(g.point.x, g.point.p, cas, c11);
    CHECK(r.forward_residual < 1e-8);
    CHECK(r.candidates.size() == 4);
    CHECK(distance_to_fibre(r, g.xi) < 1e-7);
    for (const auto& c : r.candidates) {
      CHECK(reduction_defect(c) == 0.0);
      const CasimirSet back = casimirs_of(c);
      CHECK(std::abs(back.C1 - cas.C1) < 1e-9 * std::max(1.0, std::abs(cas.C1)));
      CHECK(std::abs(back.K2sq - cas.K2sq) < 1e-9 * std::max(1.0, std::abs(cas.K2sq)));
    }

    // T12 display.
    const auto [d1, d2] = trig_inverse_denominators(g.point.x[0], g.point.x[1], g.point.p[0], g.point.p[1], cas);
    const cplx x1 = g.point.x[0], x2 = g.point.x[1], p1 = g.point.p[0], p2 = g.point.p[1];
    const cplx t12 = r.point.at(1, trig::S12);
    const cplx mag = 2.0 * (x1 - x2) * (x1 * x1 - 1.0) * (x2 * x2 - 1.0) * p2 * p1 / (c11 * std::sqrt(d1 * d2));
    // Equal to the display up to the signs of C2 and the square root.
    CHECK(std::abs(std::abs(t12) - std::abs(mag * std::sqrt(cas.C2sq))) < 1e-9 * std::abs(t12));
  }
}

TEST_CASE("trigonometric inverse: error paths") {
  const CasimirSet cas = CasimirSet::trigonometric(0.3, 0.5, -0.2, 0.7);
  CHECK(kind_of([&] { reconstruct_trig_n2({0.5, 0.5}, {1.0, 2.0}, cas, 1.0); }) == ErrorKind::CoincidentRoots);
  CHECK(kind_of([&] { reconstruct_trig_n2({0.0, 0.5}, {1.0, 2.0}, cas, 1.0); }) == ErrorKind::PoleCollision);
  CHECK(kind_of([&] { reconstruct_trig_n2({0.2, 0.5}, {0.0, 0.0}, cas, 1.0); }) == ErrorKind::ZeroDenominator);
}

TEST_CASE("Hamiltonians in separated variables") {
  Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx c11 = random_c11(rng), c12 = rng.complex_square();
    const ChainSpec spec = reconstruction_spec(Model::Rational, c11, c12);
    const GenericSample g = sample_generic_point(spec, rng, Convention::Nonstandard);
    const auto [i1, i2] = hamiltonians_from_separated(g.point.x, g.point.p, c11, c12);
    const auto in = integrals(spec, g.xi).coeffs;
    CHECK(std::abs(i1 - in[1]) < 1e-8 * std::max(1.0, std::abs(in[1])));
    CHECK(std::abs(i2 - in[2]) < 1e-8 * std::max(1.0, std::abs(in[2])));
    const auto [j1, j2] = hamiltonians_from_separated({g.point.x[1], g.point.x[0]}, {g.point.p[1], g.point.p[0]}, c11, c12);
    CHECK(std::abs(j1 - i1) < 1e-12 * std::max(1.0, std::abs(i1)));
    CHECK(std::abs(j2 - i2) < 1e-12 * std::max(1.0, std::abs(i2)));
  }
  const cplx c11(1.3, 0.2), x1(0.4, 0.1), x2(-0.3, 0.6);
  const auto [i1, i2] = hamiltonians_from_separated({x1, x2}, {2.0, 3.0}, c11, 0.0);
  CHECK(std::abs(i1 + c11 * (x1 + x2)) < 1e-15);
  CHECK(std::abs(i2 - c11 * x1 * x2) < 1e-15);
  CHECK(kind_of([&] { hamiltonians_from_separated({x1, x1}, {2.0, 3.0}, c11, 0.0); }) == ErrorKind::CoincidentRoots);
}

TEST_CASE("reconstructed coordinates carry the model brackets") {
  Rng rng(35);
  for (Model m : {Model::Rational, Model::Trigonometric}) {
    const BracketPreservationReport rep = bracket_preservation_check(m, 20, rng);
    CHECK(rep.samples == 20);
    CHECK(rep.max_deviation < 1e-7);
    CHECK(rep.cross_block < 1e-7);
  }
}
