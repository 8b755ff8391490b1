#include "sovchain/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sovchain/errors.hpp"

namespace sovchain {

// ---------------------------------------------------------------- twist / spec

TwistMatrix::TwistMatrix(const Eigen::Matrix2cd& c) : c_(c) {
  det_ = c_(0, 0) * c_(1, 1) - c_(0, 1) * c_(1, 0);
  scale_ = c_.cwiseAbs().maxCoeff();
  degenerate_ = std::abs(det_) <= 1e-12 * std::max(scale_ * scale_, 1e-300);
}

TwistMatrix TwistMatrix::diag(cplx a, cplx b) { return from_entries(a, 0.0, 0.0, b); }

TwistMatrix TwistMatrix::from_entries(cplx c11, cplx c12, cplx c21, cplx c22) {
  Eigen::Matrix2cd m;
  m << c11, c12, c21, c22;
  return TwistMatrix(m);
}

bool TwistMatrix::diagonal() const {
  return std::abs(c_(0, 1)) <= 1e-12 * scale_ && std::abs(c_(1, 0)) <= 1e-12 * scale_;
}

ChainSpec ChainSpec::make(Model model, std::vector<cplx> nu, TwistMatrix twist) {
  if (nu.empty()) throw Error(ErrorKind::InvalidSpec, "nu: at least one site is required");
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (!std::isfinite(nu[i].real()) || !std::isfinite(nu[i].imag()))
      throw Error(ErrorKind::InvalidSpec, "nu: pole positions must be finite");
    if (model == Model::Trigonometric && std::abs(nu[i]) <= 1e-9)
      throw Error(ErrorKind::InvalidSpec, "nu: trigonometric poles must be nonzero");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(nu[i] - nu[j]) <= 1e-9) throw Error(ErrorKind::InvalidSpec, "nu: pole positions must be distinct");
  }
  if (model == Model::Trigonometric && !twist.diagonal())
    throw Error(ErrorKind::InvalidSpec, "twist: the trigonometric model requires a diagonal twist");
  ChainSpec s;
  s.model = model;
  s.N = static_cast<int>(nu.size());
  s.nu = std::move(nu);
  s.twist = twist;
  return s;
}

PoissonBivector build_bivector(const ChainSpec& spec) { return PoissonBivector(spec.model, spec.N); }

// ---------------------------------------------------------------- r-matrices

RMatrix RMatrix::rational() {
  return RMatrix("rational", [](cplx u, cplx v) {
    const cplx f = 1.0 / (u - v);
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(2 * i + j, 2 * j + i) = f;
    return r;
  });
}

RMatrix RMatrix::trigonometric() {
  return RMatrix("trigonometric", [](cplx u, cplx v) {
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    r(0, 0) = r(3, 3) = 0.5 * (u + v) / (u - v);
    r(1, 2) = u / (u - v);
    r(2, 1) = v / (u - v);
    return r;
  });
}

RMatrix RMatrix::custom(std::string name, Fn fn) { return RMatrix(std::move(name), std::move(fn)); }

Eigen::Matrix4cd RMatrix::operator()(cplx u, cplx v) const {
  if (std::abs(u - v) <= kCoincidenceTolerance * std::max({1.0, std::abs(u), std::abs(v)}))
    throw Error(ErrorKind::CoincidingSpectralParameters, "r(u, v) evaluated at u = v");
  return fn_(u, v);
}

cplx RMatrix::component(int i, int j, int k, int l, cplx u, cplx v) const {
  return (*this)(u, v)(2 * (i - 1) + (k - 1), 2 * (j - 1) + (l - 1));
}

RMatrix rmatrix(const ChainSpec& spec) {
  return spec.model == Model::Rational ? RMatrix::rational() : RMatrix::trigonometric();
}

std::pair<cplx, cplx> sample_spectral_pair(Rng& rng) {
  for (;;) {
    const cplx u = rng.complex_square(2.0);
    const cplx v = rng.complex_square(2.0);
    if (std::abs(u - v) > 0.1) return {u, v};
  }
}

const std::array<std::string, 7> SymmetryReport::kConditionNames = {
    "r_{21,21}=0", "r_{21,11}=0", "r_{11,21}=0", "r_{12,12}=0", "r_{12,22}=0", "r_{22,12}=0", "r_{22,22}=r_{11,11}"};

double SymmetryReport::max() const { return *std::max_element(max_violation.begin(), max_violation.end()); }

SymmetryReport check_symmetry_conditions(const RMatrix& r, int samples, Rng& rng) {
  SymmetryReport rep;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const auto [u, v] = sample_spectral_pair(rng);
    const Eigen::Matrix4cd m = r(u, v);
    auto c = [&](int i, int j, int k, int l) { return m(2 * (i - 1) + (k - 1), 2 * (j - 1) + (l - 1)); };
    const std::array<cplx, 7> viol = {c(2, 1, 2, 1), c(2, 1, 1, 1), c(1, 1, 2, 1), c(1, 2, 1, 2),
                                      c(1, 2, 2, 2), c(2, 2, 1, 2), c(2, 2, 2, 2) - c(1, 1, 1, 1)};
    for (int k = 0; k < 7; ++k) rep.max_violation[k] = std::max(rep.max_violation[k], std::abs(viol[k]));
  }
  return rep;
}

double skew_symmetry_violation(const RMatrix& r, int samples, Rng& rng) {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto [u, v] = sample_spectral_pair(rng);
    const Eigen::Matrix4cd a = r(u, v);
    const Eigen::Matrix4cd b = r(v, u);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l)
            worst = std::max(worst, std::abs(a(2 * i + k, 2 * j + l) + b(2 * k + i, 2 * l + j)));
  }
  return worst;
}

TwistReport check_twist_compatibility(const RMatrix& r, const TwistMatrix& c, int samples, Rng& rng) {
  TwistReport rep;
  Eigen::Matrix4cd cc;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) cc(2 * i + k, 2 * j + l) = c(i, j) * c(k, l);
  for (int s = 0; s < samples; ++s) {
    const auto [u, v] = sample_spectral_pair(rng);
    const Eigen::Matrix4cd m = r(u, v);
    rep.max_norm = std::max(rep.max_norm, (m * cc - cc * m).norm());
    rep.scale = std::max(rep.scale, 2.0 * m.norm() * cc.norm());
  }
  rep.pass = rep.max_norm < 1e-10 * std::max(rep.scale, 1e-300);
  return rep;
}

// ---------------------------------------------------------------- Lax matrices

template <class T>
Mat2<T> LaxMatrix<T>::eval(cplx u) const {
  const cplx d = den(u);
  if (std::abs(d) <= RationalFn::kPoleTolerance * den.scale())
    throw Error(ErrorKind::PoleEvaluation, "Lax matrix evaluated at a pole");
  Mat2<T> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = num[i][j](u) * T(1.0 / d);
  return out;
}

namespace {

template <class T>
Mat2<BasicPoly<T>> mat_mul(const Mat2<BasicPoly<T>>& a, const Mat2<BasicPoly<T>>& b) {
  Mat2<BasicPoly<T>> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

}  // namespace

template <class T>
LaxMatrix<T> site_lax(const ChainSpec& spec, int k, const std::vector<T>& coords) {
  const int w = site_width(spec.model);
  const T* s = coords.data() + static_cast<std::ptrdiff_t>(k) * w;
  const cplx nu = spec.nu[k];
  LaxMatrix<T> m;
  using P = BasicPoly<T>;
  if (spec.model == Model::Rational) {
    // L = Id + S^T / (nu - u), numerator (nu - u) Id + S^T.
    m.den = Poly::linear(nu, -1.0);
    m.num[0][0] = P::linear(T(nu) + s[rat::S11], T(-1.0));
    m.num[0][1] = P::constant(s[rat::S21]);
    m.num[1][0] = P::constant(s[rat::S12]);
    m.num[1][1] = P::linear(T(nu) + s[rat::S22], T(-1.0));
  } else {
    // Numerator of 2 (u - nu) L(u).
    m.den = Poly::linear(-2.0 * nu, 2.0);
    const T two(2.0);
    m.num[0][0] = P::linear(T(-nu) * (two * s[trig::S01] + s[trig::S11]), two * s[trig::S01] - s[trig::S11]);
    m.num[1][1] = P::linear(T(-nu) * (two * s[trig::S02] + s[trig::S22]), two * s[trig::S02] - s[trig::S22]);
    m.num[0][1] = P::linear(T(0.0), T(-2.0) * s[trig::S21]);
    m.num[1][0] = P::constant(T(-2.0 * nu) * s[trig::S12]);
  }
  return m;
}

template <class T>
LaxMatrix<T> chain_lax(const ChainSpec& spec, const std::vector<T>& coords, bool twisted) {
  LaxMatrix<T> acc = site_lax(spec, 0, coords);
  for (int k = 1; k < spec.N; ++k) {
    const LaxMatrix<T> next = site_lax(spec, k, coords);
    acc.num = mat_mul(acc.num, next.num);
    acc.den = acc.den * next.den;
  }
  if (twisted) {
    Mat2<BasicPoly<T>> c;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) c[i][j] = BasicPoly<T>::constant(T(spec.twist(i, j)));
    acc.num = mat_mul(acc.num, c);
  }
  return acc;
}

LaxMatrix<cplx> site_lax(const ChainSpec& spec, int k, const PhasePoint& xi) {
  return site_lax<cplx>(spec, k, xi.coords());
}

LaxMatrix<cplx> chain_lax(const ChainSpec& spec, const PhasePoint& xi) { return chain_lax<cplx>(spec, xi.coords()); }

template <class T>
std::vector<T> integral_coeffs(const ChainSpec& spec, const std::vector<T>& coords) {
  const LaxMatrix<T> l = chain_lax(spec, coords);
  const BasicPoly<T> tr = l.num[0][0] + l.num[1][1];
  std::vector<T> out(static_cast<std::size_t>(spec.N) + 1);
  for (int k = 0; k <= spec.N; ++k) out[k] = tr.coeff(spec.N - k);
  return out;
}

Integrals integrals(const ChainSpec& spec, const PhasePoint& xi) {
  const LaxMatrix<cplx> l = chain_lax(spec, xi);
  return {RationalFn(l.num[0][0] + l.num[1][1], l.den), integral_coeffs(spec, xi.coords())};
}

Observable integral_observable(const ChainSpec& spec, int k) {
  return Observable([spec, k](const std::vector<Dual>& c) { return integral_coeffs(spec, c)[k]; });
}

Eigen::MatrixXcd integral_gradients(const ChainSpec& spec, const PhasePoint& xi) {
  const auto coeffs = integral_coeffs(spec, seed_all(xi.coords()));
  Eigen::MatrixXcd g(spec.N + 1, xi.size());
  for (int k = 0; k <= spec.N; ++k) g.row(k) = gradient_of(coeffs[k], xi.size()).transpose();
  return g;
}

// ---------------------------------------------------------------- Casimirs

template <class T>
std::vector<std::pair<std::string, T>> site_casimirs(Model model, const T* s) {
  std::vector<std::pair<std::string, T>> out;
  if (model == Model::Rational) {
    out.emplace_back("c", s[rat::S11] + s[rat::S22]);
    out.emplace_back("C", s[rat::S11] * s[rat::S22] - s[rat::S12] * s[rat::S21]);
  } else {
    using namespace trig;
    const T two(2.0), four(4.0);
    out.emplace_back("c1", four * s[S01] * s[S01] - s[S11] * s[S11]);
    out.emplace_back("c2", four * s[S02] * s[S02] - s[S22] * s[S22]);
    out.emplace_back("C0", (two * s[S01] - s[S11]) * (two * s[S02] - s[S22]));
    out.emplace_back("C1", two * (s[S11] * s[S22] - two * s[S12] * s[S21] - four * s[S01] * s[S02]));
    out.emplace_back("C2", (two * s[S01] + s[S11]) * (two * s[S02] + s[S22]));
    const T d = s[S01] - s[S02];
    const T t = s[S11] + s[S22];
    out.emplace_back("C2'", four * d * d - t * t);
  }
  return out;
}

CasimirValues casimir_generating(const ChainSpec& spec, const PhasePoint& xi) {
  const LaxMatrix<cplx> l = chain_lax(spec, xi);
  const Poly det = l.num[0][0] * l.num[1][1] - l.num[0][1] * l.num[1][0];
  CasimirValues out{RationalFn(det, l.den * l.den), {}};
  const int w = site_width(spec.model);
  for (int k = 0; k < spec.N; ++k)
    for (auto& [name, value] : site_casimirs(spec.model, xi.coords().data() + k * w))
      out.named.push_back({name + "[" + std::to_string(k + 1) + "]", value});
  return out;
}

std::vector<std::pair<std::string, Observable>> casimir_observables(const ChainSpec& spec) {
  std::vector<std::pair<std::string, Observable>> out;
  const int w = site_width(spec.model);
  const std::vector<cplx> zeros(static_cast<std::size_t>(w));
  const auto names = site_casimirs(spec.model, zeros.data());
  for (int k = 0; k < spec.N; ++k)
    for (std::size_t n = 0; n < names.size(); ++n) {
      const Model m = spec.model;
      out.emplace_back(names[n].first + "[" + std::to_string(k + 1) + "]",
                       Observable([m, k, w, n](const std::vector<Dual>& c) {
                         return site_casimirs(m, c.data() + k * w)[n].second;
                       }));
    }
  return out;
}

cplx spectral_curve(const ChainSpec& spec, const PhasePoint& xi, cplx u, cplx w) {
  const Mat2<cplx> l = chain_lax(spec, xi).eval(u);
  return (l[0][0] - w) * (l[1][1] - w) - l[0][1] * l[1][0];
}

// ---------------------------------------------------------------- Sklyanin

LaxJet lax_jet(const ChainSpec& spec, const PhasePoint& xi, cplx u) {
  const Mat2<Dual> l = chain_lax(spec, seed_all(xi.coords())).eval(u);
  LaxJet jet;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      jet.value[i][j] = l[i][j].value();
      jet.grad[i][j] = gradient_of(l[i][j], xi.size());
    }
  return jet;
}

SklyaninResidual check_sklyanin_bracket(const ChainSpec& spec, const PhasePoint& xi, cplx u, cplx v) {
  const RMatrix r = rmatrix(spec);
  const Eigen::Matrix4cd rm = r(u, v);
  const LaxJet ju = lax_jet(spec, xi, u);
  const LaxJet jv = lax_jet(spec, xi, v);
  const Eigen::MatrixXcd pi = build_bivector(spec).evaluate(xi);

  Eigen::Matrix4cd lhs, ll;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          lhs(2 * a + c, 2 * b + d) = bracket(ju.grad[a][b], jv.grad[c][d], pi);
          ll(2 * a + c, 2 * b + d) = ju.value[a][b] * jv.value[c][d];
        }
  const Eigen::Matrix4cd rhs = rm * ll - ll * rm;
  SklyaninResidual res;
  res.max_abs = (lhs - rhs).cwiseAbs().maxCoeff();
  res.scale = std::max(rm.cwiseAbs().maxCoeff() * ll.cwiseAbs().maxCoeff(), 1e-300);
  return res;
}

// ---------------------------------------------------------------- sampling

PhasePoint random_point(const ChainSpec& spec, Rng& rng) {
  PhasePoint xi(spec.model, spec.N);
  for (auto& c : xi.coords()) c = rng.complex_square();
  return xi;
}

TwistMatrix random_degenerate_twist(Rng& rng) {
  for (;;) {
    const cplx a1 = rng.complex_square(), a2 = rng.complex_square();
    const cplx b1 = rng.complex_square(), b2 = rng.complex_square();
    const TwistMatrix c = TwistMatrix::from_entries(a1 * b1, a1 * b2, a2 * b1, a2 * b2);
    if (std::abs(c.c11()) > 0.1) return c;
  }
}

TwistMatrix random_twist(Rng& rng) {
  for (;;) {
    const TwistMatrix c = TwistMatrix::from_entries(rng.complex_square(), rng.complex_square(), rng.complex_square(),
                                                    rng.complex_square());
    if (std::abs(c.det()) > 0.1 && std::abs(c.c11()) > 0.1) return c;
  }
}

bool away_from_poles(const ChainSpec& spec, cplx u, double margin) {
  for (const auto& nu : spec.nu)
    if (std::abs(u - nu) <= margin) return false;
  return true;
}

// ---------------------------------------------------------------- instantiations

template struct LaxMatrix<cplx>;
template struct LaxMatrix<Dual>;
template LaxMatrix<cplx> site_lax(const ChainSpec&, int, const std::vector<cplx>&);
template LaxMatrix<Dual> site_lax(const ChainSpec&, int, const std::vector<Dual>&);
template LaxMatrix<cplx> chain_lax(const ChainSpec&, const std::vector<cplx>&, bool);
template LaxMatrix<Dual> chain_lax(const ChainSpec&, const std::vector<Dual>&, bool);
template std::vector<cplx> integral_coeffs(const ChainSpec&, const std::vector<cplx>&);
template std::vector<Dual> integral_coeffs(const ChainSpec&, const std::vector<Dual>&);
template std::vector<std::pair<std::string, cplx>> site_casimirs(Model, const cplx*);
template std::vector<std::pair<std::string, Dual>> site_casimirs(Model, const Dual*);

}  // namespace sovchain
