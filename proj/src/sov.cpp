#include "sovchain/sov.hpp"

#include <algorithm>
#include <cmath>

#include "sovchain/errors.hpp"

namespace sovchain {

std::string_view to_string(Convention c) { return c == Convention::Standard ? "standard" : "nonstandard"; }

Convention parse_convention(std::string_view name) {
  if (name == "standard") return Convention::Standard;
  if (name == "nonstandard") return Convention::Nonstandard;
  throw Error(ErrorKind::InvalidSpec, "convention: expected 'standard' or 'nonstandard'");
}

SeparatingRoles separating_roles(const ChainSpec& spec) {
  const double tol = 1e-12 * std::max(spec.twist.scale(), 1e-300);
  if (std::abs(spec.twist.c11()) > tol) return {0, 0, 1, 0, false};
  if (std::abs(spec.twist.c22()) > tol) return {1, 1, 0, 1, true};
  throw Error(ErrorKind::DegenerateTwistRow, "twist has c11 = c22 = 0; no separating functions");
}

SeparatingFunctions separating_functions(const ChainSpec& spec, const PhasePoint& xi) {
  const SeparatingRoles r = separating_roles(spec);
  const LaxMatrix<cplx> l = chain_lax(spec, xi);
  return {l.entry(r.a_row, r.a_col), l.entry(r.b_row, r.b_col), r.swapped};
}

namespace {

struct EntryChoice {
  int root_row, root_col, mom_row, mom_col;
};

EntryChoice entries_for(const ChainSpec& spec, Convention convention) {
  const SeparatingRoles r = separating_roles(spec);
  if (convention == Convention::Nonstandard) return {r.a_row, r.a_col, r.b_row, r.b_col};
  return {r.b_row, r.b_col, r.a_row, r.a_col};
}

SeparatedPoint separate_from(const ChainSpec& spec, const Poly& root_num, const Poly& mom_num, const Poly& den,
                             Convention convention) {
  if (root_num.degree() < spec.N || root_num.degree() == Poly::kZeroDegree)
    throw Error(ErrorKind::DegenerateDegree, "separating polynomial has degree below N");
  const RootList roots = poly_roots(root_num);
  if (roots.clustered) throw Error(ErrorKind::ClusteredRoots, "separating polynomial has clustered roots");
  SeparatedPoint sp;
  sp.convention = convention;
  sp.x = roots.values;
  sp.min_separation = roots.min_separation;
  const RationalFn mom(mom_num, den);
  const Poly droot = root_num.derivative();
  for (const auto& x : sp.x) {
    // A root sitting on a pole cancels against the denominator: the separating
    // function itself has lower degree than N.
    if (std::abs(den(x)) <= 1e-10 * den.scale() * std::pow(std::max(1.0, std::abs(x)), den.degree()))
      throw Error(ErrorKind::DegenerateDegree, "separating function has a root on a pole");
    sp.p.push_back(mom(x));
    sp.root_condition.push_back(std::abs(droot(x) / den(x)));
  }
  return sp;
}

}  // namespace

SeparatedPoint separate(const ChainSpec& spec, const PhasePoint& xi, Convention convention) {
  const EntryChoice e = entries_for(spec, convention);
  const LaxMatrix<cplx> l = chain_lax(spec, xi);
  return separate_from(spec, l.num[e.root_row][e.root_col], l.num[e.mom_row][e.mom_col], l.den, convention);
}

SeparatedJet separate_with_gradients(const ChainSpec& spec, const PhasePoint& xi, Convention convention) {
  const EntryChoice e = entries_for(spec, convention);
  const LaxMatrix<Dual> l = chain_lax(spec, seed_all(xi.coords()));
  const BasicPoly<Dual>& nr = l.num[e.root_row][e.root_col];
  const BasicPoly<Dual>& nm = l.num[e.mom_row][e.mom_col];
  const Poly nr_val = nr.values(), nm_val = nm.values();
  SeparatedJet jet{separate_from(spec, nr_val, nm_val, l.den, convention), {}, {}};

  const int n = xi.size();
  const Poly dnr = nr_val.derivative(), dnm = nm_val.derivative(), dden = l.den.derivative();
  jet.dx.resize(spec.N, n);
  jet.dp.resize(spec.N, n);
  for (int i = 0; i < spec.N; ++i) {
    const cplx x = jet.point.x[i];
    const cplx slope = dnr(x);
    if (std::abs(slope) <= 1e-10 * nr_val.scale() * std::pow(std::max(1.0, std::abs(x)), spec.N))
      throw Error(ErrorKind::ClusteredRoots, "separating polynomial has a near-multiple root");
    const Eigen::VectorXcd dx = -gradient_of(nr(x), n) / slope;
    const cplx d = l.den(x);
    // p(u) = Nm(u)/den(u); total derivative along xi includes the root motion.
    const cplx dpdu = (dnm(x) * d - nm_val(x) * dden(x)) / (d * d);
    const Eigen::VectorXcd dp = gradient_of(nm(x), n) / d + dpdu * dx;
    jet.dx.row(i) = dx.transpose();
    jet.dp.row(i) = dp.transpose();
  }
  return jet;
}

Eigen::VectorXcd derived_observable_gradient(const ChainSpec& spec, const PhasePoint& xi, Convention convention,
                                             DerivedKind kind, int index) {
  const SeparatedJet jet = separate_with_gradients(spec, xi, convention);
  return (kind == DerivedKind::Coordinate ? jet.dx : jet.dp).row(index).transpose();
}

cplx quasi_canonical_value(Model model, cplx x, cplx p) { return model == Model::Rational ? p : x * p; }

BracketMatrix bracket_matrix(const ChainSpec& spec, const PhasePoint& xi, Convention convention) {
  const SeparatedJet jet = separate_with_gradients(spec, xi, convention);
  const Eigen::MatrixXcd pi = build_bivector(spec).evaluate(xi);
  const int n = spec.N;
  Eigen::MatrixXcd g(2 * n, xi.size());
  g.topRows(n) = jet.dx;
  g.bottomRows(n) = jet.dp;
  BracketMatrix out;
  out.point = jet.point;
  const Eigen::MatrixXcd raw = g * pi * g.transpose();
  out.brackets = 0.5 * (raw - raw.transpose());
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    expected(i, n + i) = quasi_canonical_value(spec.model, jet.point.x[i], jet.point.p[i]);
    expected(n + i, i) = -expected(i, n + i);
  }
  out.max_deviation = (out.brackets - expected).cwiseAbs().maxCoeff();
  out.scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
  return out;
}

double SeparatingAlgebraResiduals::max_relative() const { return std::max({bb, aa, ab}) / scale; }

cplx separating_ab_closed_form(const ChainSpec& spec, cplx u, cplx v, cplx au, cplx av, cplx bu, cplx bv) {
  // {A(u), B(v)} = (r_{aa,bb} - r_{aa,aa}) B(v) A(u) + r_{ab,ba} B(u) A(v), with a
  // the row of A and b the other index.
  const SeparatingRoles roles = separating_roles(spec);
  const RMatrix r = rmatrix(spec);
  const int a = roles.a_row + 1, b = 3 - a;
  const cplx k1 = r.component(a, a, b, b, u, v) - r.component(a, a, a, a, u, v);
  const cplx k2 = r.component(a, b, b, a, u, v);
  return k1 * bv * au + k2 * bu * av;
}

SeparatingAlgebraResiduals check_separating_algebra(const ChainSpec& spec, const PhasePoint& xi, cplx u, cplx v) {
  if (std::abs(u - v) <= RMatrix::kCoincidenceTolerance * std::max({1.0, std::abs(u), std::abs(v)}))
    throw Error(ErrorKind::CoincidingSpectralParameters, "separating algebra needs u != v");
  const SeparatingRoles roles = separating_roles(spec);
  const LaxJet ju = lax_jet(spec, xi, u), jv = lax_jet(spec, xi, v);
  const Eigen::MatrixXcd pi = build_bivector(spec).evaluate(xi);
  const auto& gau = ju.grad[roles.a_row][roles.a_col];
  const auto& gav = jv.grad[roles.a_row][roles.a_col];
  const auto& gbu = ju.grad[roles.b_row][roles.b_col];
  const auto& gbv = jv.grad[roles.b_row][roles.b_col];
  const cplx au = ju.value[roles.a_row][roles.a_col], av = jv.value[roles.a_row][roles.a_col];
  const cplx bu = ju.value[roles.b_row][roles.b_col], bv = jv.value[roles.b_row][roles.b_col];

  SeparatingAlgebraResiduals res;
  res.bb = std::abs(bracket(gbu, gbv, pi));
  res.aa = std::abs(bracket(gau, gav, pi));
  const cplx ab = bracket(gau, gbv, pi);
  const cplx closed = separating_ab_closed_form(spec, u, v, au, av, bu, bv);
  res.ab = std::abs(ab - closed);
  const RMatrix r = rmatrix(spec);
  const double rscale = r(u, v).cwiseAbs().maxCoeff();
  res.scale = std::max({1e-300, std::abs(ab), rscale * std::max({std::abs(au * bv), std::abs(bu * av), std::abs(au * av),
                                                                  std::abs(bu * bv)})});
  return res;
}

double SeparationResidual::max_relative() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i)
    worst = std::max(worst, std::abs(residual[i]) / std::max(scale[i], 1e-30));
  return worst;
}

namespace {
double term_magnitude(const Poly& p, cplx u) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) s += std::abs(p.coeffs()[k]) * std::pow(std::abs(u), k);
  return s;
}
}  // namespace

SeparationResidual separation_residual(const ChainSpec& spec, const PhasePoint& xi, Convention convention) {
  const SeparatedPoint sp = separate(spec, xi, convention);
  const LaxMatrix<cplx> l = chain_lax(spec, xi);
  const Poly tr = l.num[0][0] + l.num[1][1];
  SeparationResidual out;
  for (int i = 0; i < spec.N; ++i) {
    const cplx x = sp.x[i], p = sp.p[i];
    const cplx d = l.den(x);
    const cplx ix = tr(x) / d;
    const double ix_terms = term_magnitude(tr, x) / std::abs(d);
    if (convention == Convention::Standard) {
      const Mat2<cplx> m = l.eval(x);
      out.residual.push_back((m[0][0] - p) * (m[1][1] - p) - m[0][1] * m[1][0]);
      out.scale.push_back(std::abs(m[0][0] * m[1][1]) + std::abs(m[0][1] * m[1][0]) +
                          std::abs(p) * (std::abs(m[0][0]) + std::abs(m[1][1])) + std::norm(p));
    } else if (spec.model == Model::Rational) {
      const SeparatingRoles r = separating_roles(spec);
      const cplx c_off = spec.twist(r.a_row, 1 - r.a_row), c_diag = spec.twist(r.a_row, r.a_row);
      out.residual.push_back(c_off * p - c_diag * ix);
      out.scale.push_back(std::max({std::abs(c_diag * ix), std::abs(c_off * p), std::abs(c_diag) * ix_terms}));
    } else {
      out.residual.push_back(ix);
      out.scale.push_back(ix_terms);
    }
  }
  return out;
}

double identity_iu_residual(const ChainSpec& spec, const PhasePoint& xi) {
  const LaxMatrix<cplx> twisted = chain_lax(spec, xi);
  const LaxMatrix<cplx> bare = chain_lax<cplx>(spec, xi.coords(), false);
  const cplx c11 = spec.twist.c11(), c12 = spec.twist.c12();
  const Poly tr = twisted.num[0][0] + twisted.num[1][1];
  const std::vector<Poly> terms = {tr, twisted.num[1][0] * cplx(-c12 / c11), twisted.num[0][0] * cplx(-1.0),
                                   bare.num[1][1] * cplx(-spec.twist.det() / c11)};
  // Sum without trimming so tiny residual coefficients survive.
  std::size_t len = 0;
  double scale = 1e-300;
  for (const auto& t : terms) {
    len = std::max(len, t.coeffs().size());
    scale = std::max(scale, t.scale());
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    cplx s = 0.0;
    for (const auto& t : terms) s += t.coeff(static_cast<int>(k));
    worst = std::max(worst, std::abs(s));
  }
  return worst / scale;
}

Eigen::MatrixXcd integral_root_brackets(const ChainSpec& spec, const PhasePoint& xi, Convention convention) {
  const SeparatedJet jet = separate_with_gradients(spec, xi, convention);
  const Eigen::MatrixXcd gi = integral_gradients(spec, xi);
  const Eigen::MatrixXcd pi = build_bivector(spec).evaluate(xi);
  Eigen::MatrixXcd out(spec.N + 1, spec.N);
  for (int k = 0; k <= spec.N; ++k)
    for (int i = 0; i < spec.N; ++i) out(k, i) = bracket(gi.row(k).transpose(), jet.dx.row(i).transpose(), pi);
  return out;
}

bool is_generic(const ChainSpec& spec, const PhasePoint& xi, Convention convention, const GenericityOptions& opts,
                SeparatedPoint* out) {
  try {
    const EntryChoice e = entries_for(spec, convention);
    const LaxMatrix<cplx> l = chain_lax(spec, xi);
    const Poly& root_num = l.num[e.root_row][e.root_col];
    if (std::abs(root_num.coeff(spec.N)) < opts.min_end_coefficient ||
        std::abs(root_num.coeff(0)) < opts.min_end_coefficient)
      return false;
    SeparatedPoint sp = separate_from(spec, root_num, l.num[e.mom_row][e.mom_col], l.den, convention);
    double xmax = 1.0;
    for (const auto& x : sp.x) xmax = std::max(xmax, std::abs(x));
    if (sp.min_separation < opts.min_root_gap * xmax) return false;
    for (std::size_t i = 0; i < sp.x.size(); ++i) {
      if (!away_from_poles(spec, sp.x[i], opts.min_pole_distance)) return false;
      if (std::abs(sp.x[i]) < opts.min_abs_root) return false;
      if (std::abs(sp.p[i]) < 1e-6) return false;
    }
    if (out) *out = std::move(sp);
    return true;
  } catch (const Error&) {
    return false;
  }
}

GenericSample sample_generic_point(const ChainSpec& spec, Rng& rng, Convention convention, const GenericityOptions& opts) {
  return sample_generic_point_with(spec, [&] { return random_point(spec, rng); }, convention, opts);
}

}  // namespace sovchain
