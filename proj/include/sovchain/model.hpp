#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "sovchain/poisson.hpp"
#include "sovchain/poly.hpp"
#include "sovchain/random.hpp"

namespace sovchain {

class TwistMatrix {
 public:
  TwistMatrix() : TwistMatrix(Eigen::Matrix2cd::Identity()) {}
  explicit TwistMatrix(const Eigen::Matrix2cd& c);

  static TwistMatrix diag(cplx a, cplx b);
  static TwistMatrix from_entries(cplx c11, cplx c12, cplx c21, cplx c22);

  const Eigen::Matrix2cd& matrix() const { return c_; }
  cplx operator()(int i, int j) const { return c_(i, j); }  // 0-based
  cplx c11() const { return c_(0, 0); }
  cplx c12() const { return c_(0, 1); }
  cplx c21() const { return c_(1, 0); }
  cplx c22() const { return c_(1, 1); }
  cplx det() const { return det_; }
  double scale() const { return scale_; }
  bool degenerate() const { return degenerate_; }
  bool diagonal() const;

 private:
  Eigen::Matrix2cd c_;
  cplx det_;
  double scale_;
  bool degenerate_;
};

struct ChainSpec {
  Model model = Model::Rational;
  int N = 0;
  std::vector<cplx> nu;
  TwistMatrix twist;

  // Validates pole positions and the twist; throws InvalidSpec naming the field.
  static ChainSpec make(Model model, std::vector<cplx> nu, TwistMatrix twist);

  int dim() const { return N * site_width(model); }
};

PoissonBivector build_bivector(const ChainSpec& spec);

// r(u, v) as a 4x4 matrix; entry (2i+k, 2j+l) is the coefficient of X_ij (x) X_kl.
class RMatrix {
 public:
  using Fn = std::function<Eigen::Matrix4cd(cplx, cplx)>;
  static constexpr double kCoincidenceTolerance = 1e-12;

  static RMatrix rational();
  static RMatrix trigonometric();
  static RMatrix custom(std::string name, Fn fn);

  const std::string& name() const { return name_; }
  Eigen::Matrix4cd operator()(cplx u, cplx v) const;
  // 1-based indices: component(1, 2, 2, 1, u, v) is r_{12,21}(u, v).
  cplx component(int i, int j, int k, int l, cplx u, cplx v) const;

 private:
  RMatrix(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name_;
  Fn fn_;
};

RMatrix rmatrix(const ChainSpec& spec);

// Random (u, v) pair used by all r-matrix sweeps, away from each other.
std::pair<cplx, cplx> sample_spectral_pair(Rng& rng);

struct SymmetryReport {
  static const std::array<std::string, 7> kConditionNames;
  std::array<double, 7> max_violation{};
  int samples = 0;
  double max() const;
  bool pass(double tol) const { return max() < tol; }
};

SymmetryReport check_symmetry_conditions(const RMatrix& r, int samples, Rng& rng);

// max |r_{ij,kl}(u,v) + r_{kl,ij}(v,u)|
double skew_symmetry_violation(const RMatrix& r, int samples, Rng& rng);

struct TwistReport {
  double max_norm = 0.0;  // max Frobenius norm of [r(u,v), C (x) C]
  double scale = 0.0;
  bool pass = false;
};

TwistReport check_twist_compatibility(const RMatrix& r, const TwistMatrix& c, int samples, Rng& rng);

template <class T>
using Mat2 = std::array<std::array<T, 2>, 2>;

// Lax matrix as polynomial numerators over a common scalar denominator.
template <class T>
struct LaxMatrix {
  Mat2<BasicPoly<T>> num;
  Poly den;

  Mat2<T> eval(cplx u) const;
  RationalFn entry(int i, int j) const { return RationalFn(num[i][j].values(), den); }
};

// One-site matrix of site k (0-based) built from that site's block of `coords`.
template <class T>
LaxMatrix<T> site_lax(const ChainSpec& spec, int k, const std::vector<T>& coords);

// Ordered product of the site matrices, times the twist when `twisted`.
template <class T>
LaxMatrix<T> chain_lax(const ChainSpec& spec, const std::vector<T>& coords, bool twisted = true);

LaxMatrix<cplx> site_lax(const ChainSpec& spec, int k, const PhasePoint& xi);
LaxMatrix<cplx> chain_lax(const ChainSpec& spec, const PhasePoint& xi);

// Coefficients of the numerator of I(u) = tr L(u) in descending powers:
// entry k multiplies u^(N-k). Entry 0 is the leading coefficient.
template <class T>
std::vector<T> integral_coeffs(const ChainSpec& spec, const std::vector<T>& coords);

struct Integrals {
  RationalFn generating;
  std::vector<cplx> coeffs;
};

Integrals integrals(const ChainSpec& spec, const PhasePoint& xi);
Observable integral_observable(const ChainSpec& spec, int k);
// Row k holds the gradient of coefficient k.
Eigen::MatrixXcd integral_gradients(const ChainSpec& spec, const PhasePoint& xi);

struct NamedValue {
  std::string name;
  cplx value;
};

// Per-site Casimir functions of the one-site algebra; `site` is 0-based.
template <class T>
std::vector<std::pair<std::string, T>> site_casimirs(Model model, const T* s);

struct CasimirValues {
  RationalFn generating;  // det L(u)
  std::vector<NamedValue> named;
};

CasimirValues casimir_generating(const ChainSpec& spec, const PhasePoint& xi);
std::vector<std::pair<std::string, Observable>> casimir_observables(const ChainSpec& spec);

cplx spectral_curve(const ChainSpec& spec, const PhasePoint& xi, cplx u, cplx w);

struct SklyaninResidual {
  double max_abs = 0.0;
  double scale = 0.0;
  double relative() const { return scale > 0.0 ? max_abs / scale : max_abs; }
};

// Compares {L(u) (x) L(v)} computed through the bivector with [r(u,v), L(u) (x) L(v)].
SklyaninResidual check_sklyanin_bracket(const ChainSpec& spec, const PhasePoint& xi, cplx u, cplx v);

// Values and coordinate gradients of the Lax entries at u.
struct LaxJet {
  Mat2<cplx> value;
  Mat2<Eigen::VectorXcd> grad;
};
LaxJet lax_jet(const ChainSpec& spec, const PhasePoint& xi, cplx u);

// Uniform random point in the complex unit square, one block per site.
PhasePoint random_point(const ChainSpec& spec, Rng& rng);

// Random twist with det C = 0 and c11 != 0 (rank one, outer product).
TwistMatrix random_degenerate_twist(Rng& rng);
TwistMatrix random_twist(Rng& rng);

// True when u is farther than `margin` from every pole.
bool away_from_poles(const ChainSpec& spec, cplx u, double margin = 1e-3);

}  // namespace sovchain
