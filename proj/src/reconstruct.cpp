#include "sovchain/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sovchain/errors.hpp"

namespace sovchain {

CasimirSet CasimirSet::rational(cplx c1, cplx c2) {
  CasimirSet c;
  c.model = Model::Rational;
  c.C1 = c1;
  c.C2 = c2;
  return c;
}

CasimirSet CasimirSet::trigonometric(cplx c1, cplx c2sq, cplx k1, cplx k2sq) {
  CasimirSet c;
  c.model = Model::Trigonometric;
  c.C1 = c1;
  c.C2sq = c2sq;
  c.K1 = k1;
  c.K2sq = k2sq;
  return c;
}

ChainSpec reconstruction_spec(Model model, cplx c11, cplx c12) {
  const TwistMatrix twist =
      model == Model::Rational ? TwistMatrix::from_entries(c11, c12, 0.0, 0.0) : TwistMatrix::diag(c11, 0.0);
  return ChainSpec::make(model, {1.0, -1.0}, twist);
}

CasimirSet casimirs_of(const PhasePoint& xi) {
  if (xi.sites() != 2) throw Error(ErrorKind::InvalidSpec, "reconstruction needs two sites");
  const int w = site_width(xi.model());
  const auto s = site_casimirs(xi.model(), xi.coords().data());
  const auto t = site_casimirs(xi.model(), xi.coords().data() + w);
  auto get = [](const auto& list, const char* name) {
    for (const auto& [n, v] : list)
      if (n == name) return v;
    return cplx{};
  };
  if (xi.model() == Model::Rational) return CasimirSet::rational(get(s, "C"), get(t, "C"));
  return CasimirSet::trigonometric(get(s, "C1"), get(s, "C2"), get(t, "C1"), get(t, "C2"));
}

double reduction_defect(const PhasePoint& xi) {
  double d = 0.0;
  for (int k = 0; k < xi.sites(); ++k) {
    if (xi.model() == Model::Rational) {
      d = std::max(d, std::abs(xi.at(k, rat::S11) + xi.at(k, rat::S22)));
    } else {
      d = std::max(d, std::abs(xi.at(k, trig::S01) - xi.at(k, trig::S02)));
      d = std::max(d, std::abs(xi.at(k, trig::S11) + xi.at(k, trig::S22)));
    }
  }
  return d;
}

PhasePoint sample_reduced_point(const ChainSpec& spec, Rng& rng) {
  PhasePoint xi(spec.model, spec.N);
  for (int k = 0; k < spec.N; ++k) {
    if (spec.model == Model::Rational) {
      const cplx s11 = rng.complex_square();
      xi.at(k, rat::S11) = s11;
      xi.at(k, rat::S22) = -s11;
      xi.at(k, rat::S12) = rng.complex_square();
      xi.at(k, rat::S21) = rng.complex_square();
    } else {
      const cplx s01 = rng.complex_square(), s11 = rng.complex_square();
      xi.at(k, trig::S01) = s01;
      xi.at(k, trig::S02) = s01;
      xi.at(k, trig::S11) = s11;
      xi.at(k, trig::S22) = -s11;
      xi.at(k, trig::S12) = rng.complex_square();
      xi.at(k, trig::S21) = rng.complex_square();
    }
  }
  return xi;
}

GenericSample sample_reduced_generic(const ChainSpec& spec, Rng& rng, const GenericityOptions& opts) {
  GenericityOptions o = opts;
  if (spec.model == Model::Trigonometric) o.min_abs_root = std::max(o.min_abs_root, 1e-2);
  return sample_generic_point_with(spec, [&] { return sample_reduced_point(spec, rng); }, Convention::Nonstandard, o);
}

// ---------------------------------------------------------------- closed forms

template <class T>
std::array<T, 8> rational_inverse(const T& x1, const T& x2, const T& p1, const T& p2, cplx C1, cplx C2, cplx c11) {
  const T m1 = x1 - 1.0, q1 = x1 + 1.0, m2 = x2 - 1.0, q2 = x2 + 1.0;
  const T d12 = x1 - x2;
  const T den = (m1 * q1 * p1 - m2 * q2 * p2) * C1 + m2 * m2 * m1 * q1 * p1 - m2 * q2 * m1 * m1 * p2;
  const T s11 = ((q1 * m1 * m1 * p1 - q2 * m2 * m2 * p2) * C1 + m2 * m2 * q1 * m1 * m1 * p1 - q2 * m2 * m2 * m1 * m1 * p2) / den;
  const T s21 = c11 * (d12 * C1 * C1 + d12 * (x1 * x1 - 2.0 * x1 + x2 * x2 + 2.0 - 2.0 * x2) * C1 + m2 * m2 * m1 * m1 * d12) / den;
  const T s22 = -s11;
  const T s12 = (s11 * s22 - C1) / s21;
  const T t11 = ((m1 * q1 * q2 * p1 - m2 * q2 * q1 * p2) * C1 + q2 * m2 * m2 * m1 * q1 * p1 - m2 * q2 * q1 * m1 * m1 * p2) / den;
  const T t12 = p1 * p2 / c11 * m2 * q2 * m1 * q1 * d12 / den;
  const T t22 = -t11;
  const T t21 = (t11 * t22 - C2) / t12;
  return {s11, s12, s21, s22, t11, t12, t21, t22};
}

template <class T>
std::array<T, 12> trig_inverse(const T& x1, const T& x2, const T& p1, const T& p2, const CasimirSet& cas, cplx c11,
                               const TrigBranch& br) {
  using std::sqrt;
  const cplx i(0.0, 1.0);
  // The closed forms use a quarter of the C1, K1 Casimirs.
  const cplx c1q = cas.C1 / 4.0, k1q = cas.K1 / 4.0;
  const cplx c2sq = cas.C2sq, k2sq = cas.K2sq;
  const cplx C2 = double(br.c2) * std::sqrt(c2sq), K2 = double(br.k2) * std::sqrt(k2sq);

  const T a = 4.0 * c1q * x2 + c2sq + c2sq * x2 * x2;
  const T b = c2sq * x1 * x1 + c2sq + 4.0 * c1q * x1;
  const T e1 = x1 * x1 - 1.0, e2 = x2 * x2 - 1.0;
  const T D1 = e1 * a * p1 - e2 * b * p2;
  const T D2 = x1 * e1 * a * p1 - x2 * e2 * b * p2;
  const T sD = double(br.sqrt_d1d2) * sqrt(D1 * D2);
  const T sq = double(br.sqrt_x1x2) * sqrt(x1 * x2);
  const T d12 = x1 - x2;

  const T s01 = -C2 / (4.0 * sD) * ((x1 - 1.0) * (x1 + 1.0) * (x1 + 1.0) * a * p1 - (x2 - 1.0) * (x2 + 1.0) * (x2 + 1.0) * b * p2);
  const T s11 = -C2 / (2.0 * sD) * ((x1 + 1.0) * (x1 - 1.0) * (x1 - 1.0) * a * p1 - (x2 + 1.0) * (x2 - 1.0) * (x2 - 1.0) * b * p2);
  const T s21 = -i * K2 * c11 / (8.0 * sq * sD) * d12 * a * b;
  const T s12 = -2.0 * i * sq / (d12 * c11 * K2 * sD) *
                (e1 * e1 * a * p1 * p1 -
                 2.0 * e2 * e1 * (c2sq * x1 * x2 + 2.0 * c1q * x1 + 2.0 * c1q * x2 + c2sq) * p2 * p1 +
                 e2 * e2 * b * p2 * p2);
  const T t01 = i * (x2 - 1.0) * (x1 - 1.0) * K2 / (4.0 * sq * sD) * ((x1 + 1.0) * x1 * a * p1 - (x2 + 1.0) * x2 * b * p2);
  const T t11 = i * (x1 + 1.0) * (x2 + 1.0) * K2 / (2.0 * sq * sD) * (x1 * (x1 - 1.0) * a * p1 - x2 * (x2 - 1.0) * b * p2);
  const T t21 = -c11 / (8.0 * d12 * e1 * e2 * p2 * p1 * C2 * x1 * x2 * sD) *
                (x1 * x1 * e1 * e1 * a * a * (-k2sq * x2 * x2 + 4.0 * k1q * x2 - k2sq) * p1 * p1 -
                 2.0 * x1 * x2 * e2 * e1 * a * b * (-x1 * k2sq * x2 + 2.0 * x1 * k1q + 2.0 * k1q * x2 - k2sq) * p2 * p1 +
                 x2 * x2 * e2 * e2 * b * b * (-k2sq * x1 * x1 + 4.0 * x1 * k1q - k2sq) * p2 * p2);
  const T t12 = 2.0 * d12 * e1 * e2 * p2 * p1 * C2 / (c11 * sD);
  return {s01, s01, s11, -s11, s12, s21, t01, t01, t11, -t11, t12, t21};
}

template std::array<cplx, 8> rational_inverse(const cplx&, const cplx&, const cplx&, const cplx&, cplx, cplx, cplx);
template std::array<Dual, 8> rational_inverse(const Dual&, const Dual&, const Dual&, const Dual&, cplx, cplx, cplx);
template std::array<cplx, 12> trig_inverse(const cplx&, const cplx&, const cplx&, const cplx&, const CasimirSet&, cplx,
                                           const TrigBranch&);
template std::array<Dual, 12> trig_inverse(const Dual&, const Dual&, const Dual&, const Dual&, const CasimirSet&, cplx,
                                           const TrigBranch&);

std::pair<cplx, cplx> trig_inverse_denominators(cplx x1, cplx x2, cplx p1, cplx p2, const CasimirSet& cas) {
  const cplx c1q = cas.C1 / 4.0;
  const cplx a = 4.0 * c1q * x2 + cas.C2sq + cas.C2sq * x2 * x2;
  const cplx b = cas.C2sq * x1 * x1 + cas.C2sq + 4.0 * c1q * x1;
  return {(x1 * x1 - 1.0) * a * p1 - (x2 * x2 - 1.0) * b * p2,
          x1 * (x1 * x1 - 1.0) * a * p1 - x2 * (x2 * x2 - 1.0) * b * p2};
}

// ---------------------------------------------------------------- reconstruction

namespace {

constexpr double kForwardTolerance = 1e-6;

void check_inputs(const std::vector<cplx>& x, const std::vector<cplx>& p, Model model) {
  if (x.size() != 2 || p.size() != 2) throw Error(ErrorKind::InvalidSpec, "reconstruction needs two roots and momenta");
  const double sc = std::max({std::abs(x[0]), std::abs(x[1]), 1.0});
  if (std::abs(x[0] - x[1]) < 1e-8 * sc) throw Error(ErrorKind::CoincidentRoots, "x1 = x2");
  for (const cplx xi : x) {
    const bool hit = std::abs(xi - 1.0) < 1e-8 || std::abs(xi + 1.0) < 1e-8 ||
                     (model == Model::Trigonometric && std::abs(xi) < 1e-8);
    if (hit) throw Error(ErrorKind::PoleCollision, "separated coordinate sits on an excluded point");
  }
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

PhasePoint make_point(Model model, const cplx* v) {
  const int n = 2 * site_width(model);
  return PhasePoint(model, 2, std::vector<cplx>(v, v + n));
}

bool all_finite(const PhasePoint& xi) {
  for (const auto& v : xi.coords())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double coord_distance(const PhasePoint& a, const PhasePoint& b) {
  double d = 0.0, s = 1.0;
  for (int k = 0; k < a.size(); ++k) {
    d = std::max(d, std::abs(a.coords()[k] - b.coords()[k]));
    s = std::max(s, std::abs(b.coords()[k]));
  }
  return d / s;
}

}  // namespace

std::vector<double> forward_residuals(const ChainSpec& spec, const PhasePoint& xi, const std::vector<cplx>& x,
                                      const std::vector<cplx>& p, const CasimirSet& cas) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> r(spec.model == Model::Rational ? 6 : 8, inf);
  if (!all_finite(xi)) return r;
  SeparatedPoint sp;
  try {
    sp = separate(spec, xi, Convention::Nonstandard);
  } catch (const Error&) {
    return r;
  }
  const bool swap = std::abs(sp.x[0] - x[1]) + std::abs(sp.x[1] - x[0]) < std::abs(sp.x[0] - x[0]) + std::abs(sp.x[1] - x[1]);
  for (int i = 0; i < 2; ++i) {
    const int j = swap ? 1 - i : i;
    r[i] = rel(sp.x[j], x[i]);
    r[2 + i] = rel(sp.p[j], p[i]);
  }
  const CasimirSet got = casimirs_of(xi);
  if (spec.model == Model::Rational) {
    r[4] = rel(got.C1, cas.C1);
    r[5] = rel(got.C2, cas.C2);
  } else {
    r[4] = rel(got.C1, cas.C1);
    r[5] = rel(got.C2sq, cas.C2sq);
    r[6] = rel(got.K1, cas.K1);
    r[7] = rel(got.K2sq, cas.K2sq);
  }
  return r;
}

ReconstructionResult reconstruct_rational_n2(const std::vector<cplx>& x, const std::vector<cplx>& p,
                                             const CasimirSet& cas, cplx c11) {
  check_inputs(x, p, Model::Rational);
  const cplx x1 = x[0], x2 = x[1], p1 = p[0], p2 = p[1];
  const cplx m1 = x1 - 1.0, q1 = x1 + 1.0, m2 = x2 - 1.0, q2 = x2 + 1.0;
  const cplx terms[] = {m1 * q1 * p1 * cas.C1, m2 * q2 * p2 * cas.C1, m2 * m2 * m1 * q1 * p1, m2 * q2 * m1 * m1 * p2};
  double scale = 0.0;
  for (const auto& t : terms) scale += std::abs(t);
  const cplx den = terms[0] - terms[1] + terms[2] - terms[3];
  if (std::abs(den) <= 1e-10 * scale) throw Error(ErrorKind::ZeroDenominator, "reconstruction denominator vanishes");

  // Guard the two divisions before evaluating the closed forms.
  const cplx d12 = x1 - x2;
  const cplx s21 = c11 * (d12 * cas.C1 * cas.C1 + d12 * (x1 * x1 - 2.0 * x1 + x2 * x2 + 2.0 - 2.0 * x2) * cas.C1 +
                          m2 * m2 * m1 * m1 * d12) / den;
  const cplx t12 = p1 * p2 / c11 * m2 * q2 * m1 * q1 * d12 / den;
  if (std::abs(s21) <= 1e-12 || std::abs(t12) <= 1e-12)
    throw Error(ErrorKind::ZeroOffDiagonal, "off-diagonal entry vanishes; cannot solve for its partner");

  const auto v = rational_inverse(x1, x2, p1, p2, cas.C1, cas.C2, c11);
  ReconstructionResult out{make_point(Model::Rational, v.data()), {}, {}, {}, 0.0};
  out.candidates.push_back(out.point);
  out.residuals = forward_residuals(reconstruction_spec(Model::Rational, c11), out.point, x, p, cas);
  out.forward_residual = *std::max_element(out.residuals.begin(), out.residuals.end());
  return out;
}

ReconstructionResult reconstruct_trig_n2(const std::vector<cplx>& x, const std::vector<cplx>& p, const CasimirSet& cas,
                                         cplx c11) {
  check_inputs(x, p, Model::Trigonometric);
  const auto [D1, D2] = trig_inverse_denominators(x[0], x[1], p[0], p[1], cas);
  {
    const cplx c1q = cas.C1 / 4.0;
    const double sa = std::abs(4.0 * c1q * x[1]) + std::abs(cas.C2sq) * (1.0 + std::norm(x[1]));
    const double sb = std::abs(4.0 * c1q * x[0]) + std::abs(cas.C2sq) * (1.0 + std::norm(x[0]));
    const double s1 = std::abs(x[0] * x[0] - 1.0) * sa * std::abs(p[0]) + std::abs(x[1] * x[1] - 1.0) * sb * std::abs(p[1]);
    const double s2 = std::abs(x[0]) * std::abs(x[0] * x[0] - 1.0) * sa * std::abs(p[0]) +
                      std::abs(x[1]) * std::abs(x[1] * x[1] - 1.0) * sb * std::abs(p[1]);
    if (std::abs(D1 * D2) <= 1e-10 * s1 * s2) throw Error(ErrorKind::ZeroDenominator, "D1 D2 vanishes");
  }
  if (std::abs(cas.C2sq) <= 1e-14 || std::abs(cas.K2sq) <= 1e-14)
    throw Error(ErrorKind::ZeroDenominator, "C2 or K2 vanishes");

  const ChainSpec spec = reconstruction_spec(Model::Trigonometric, c11);
  struct Tried {
    TrigBranch branch;
    PhasePoint point;
    std::vector<double> residuals;
    double worst;
  };
  std::vector<Tried> tried;
  for (int m = 0; m < 16; ++m) {
    TrigBranch br{m & 1 ? -1 : 1, m & 2 ? -1 : 1, m & 4 ? -1 : 1, m & 8 ? -1 : 1};
    const auto v = trig_inverse(x[0], x[1], p[0], p[1], cas, c11, br);
    PhasePoint pt = make_point(Model::Trigonometric, v.data());
    auto res = forward_residuals(spec, pt, x, p, cas);
    const double worst = *std::max_element(res.begin(), res.end());
    tried.push_back({br, std::move(pt), std::move(res), worst});
  }
  std::stable_sort(tried.begin(), tried.end(), [](const Tried& a, const Tried& b) { return a.worst < b.worst; });
  const Tried& best = tried.front();
  if (best.worst > kForwardTolerance) {
    for (std::size_t k = 1; k < tried.size(); ++k)
      if (coord_distance(tried[k].point, best.point) > 1e-8 && tried[k].worst < 10.0 * best.worst)
        throw Error(ErrorKind::BranchAmbiguity, "several square-root branches fit equally badly");
  }
  ReconstructionResult out{best.point, {}, best.branch, best.residuals, best.worst};
  const double accept = std::max(kForwardTolerance, best.worst);
  for (const auto& t : tried) {
    if (t.worst > accept) continue;
    bool fresh = true;
    for (const auto& c : out.candidates)
      if (coord_distance(t.point, c) <= 1e-8) fresh = false;
    if (fresh) out.candidates.push_back(t.point);
  }
  return out;
}

double distance_to_fibre(const ReconstructionResult& r, const PhasePoint& xi) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : r.candidates) d = std::min(d, coord_distance(c, xi));
  return d;
}

std::pair<cplx, cplx> hamiltonians_from_separated(const std::vector<cplx>& x, const std::vector<cplx>& p, cplx c11,
                                                  cplx c12) {
  if (x.size() != 2 || p.size() != 2) throw Error(ErrorKind::InvalidSpec, "need two roots and momenta");
  const cplx x1 = x[0], x2 = x[1], p1 = p[0], p2 = p[1];
  if (std::abs(x1 - x2) < 1e-8 * std::max({std::abs(x1), std::abs(x2), 1.0}))
    throw Error(ErrorKind::CoincidentRoots, "x1 = x2");
  const cplx d = c11 * (x1 - x2);
  const cplx i1 = c12 * (x1 * x1 - 1.0) * p1 / d - c12 * (x2 * x2 - 1.0) * p2 / d - (x1 + x2) * c11;
  const cplx i2 = -c12 * x2 * (x1 * x1 - 1.0) * p1 / d + c12 * x1 * (x2 * x2 - 1.0) * p2 / d + x1 * x2 * c11;
  return {i1, i2};
}

BracketPreservationReport bracket_preservation_check(Model model, int samples, Rng& rng) {
  BracketPreservationReport rep;
  for (int s = 0; s < samples; ++s) {
    cplx c11 = rng.complex_square();
    while (std::abs(c11) < 0.3) c11 = rng.complex_square();
    const ChainSpec spec = reconstruction_spec(model, c11);
    const GenericSample g = sample_reduced_generic(spec, rng);
    const CasimirSet cas = casimirs_of(g.xi);
    const auto& x = g.point.x;
    const auto& p = g.point.p;
    std::vector<Dual> v(4);
    for (int i = 0; i < 2; ++i) {
      v[i] = Dual::variable(x[i], i, 4);
      v[2 + i] = Dual::variable(p[i], 2 + i, 4);
    }
    std::vector<Dual> coords;
    if (model == Model::Rational) {
      const auto r = rational_inverse(v[0], v[1], v[2], v[3], cas.C1, cas.C2, c11);
      coords.assign(r.begin(), r.end());
    } else {
      const ReconstructionResult res = reconstruct_trig_n2(x, p, cas, c11);
      const auto r = trig_inverse(v[0], v[1], v[2], v[3], cas, c11, res.branch);
      coords.assign(r.begin(), r.end());
    }
    std::vector<cplx> values;
    for (const auto& c : coords) values.push_back(c.value());
    const PoissonBivector pi = build_bivector(spec);
    const int n = static_cast<int>(coords.size()), w = site_width(model);
    // Quasi-canonical weights {x_i, p_i}.
    const cplx wt[2] = {quasi_canonical_value(model, x[0], p[0]), quasi_canonical_value(model, x[1], p[1])};
    double scale = 1.0, dev = 0.0, cross = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) scale = std::max(scale, std::abs(pi.entry(a, b, values)));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cplx br = 0.0;
        for (int i = 0; i < 2; ++i)
          br += wt[i] * (coords[a].partial(i) * coords[b].partial(2 + i) - coords[a].partial(2 + i) * coords[b].partial(i));
        dev = std::max(dev, std::abs(br - pi.entry(a, b, values)));
        if (a / w != b / w) cross = std::max(cross, std::abs(br));
      }
    rep.max_deviation = std::max(rep.max_deviation, dev / scale);
    rep.cross_block = std::max(rep.cross_block, cross / scale);
    ++rep.samples;
  }
  return rep;
}

}  // namespace sovchain
