#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sovchain/dual.hpp"
#include "sovchain/errors.hpp"

namespace sovchain {

inline constexpr double kTrimTolerance = 1e-12;

namespace detail {
// Complex coefficients are trimmed relative to the polynomial's scale. Dual
// coefficients are only dropped when structurally zero, so that a coefficient
// whose value vanishes but whose gradient does not keeps contributing.
inline bool negligible(cplx c, double scale) { return std::abs(c) <= kTrimTolerance * scale; }
inline bool negligible(const Dual& c, double) { return c.is_exact_zero(); }
}  // namespace detail

// Dense univariate polynomial in ascending coefficient order.
template <class T>
class BasicPoly {
 public:
  static constexpr int kZeroDegree = std::numeric_limits<int>::min();

  BasicPoly() = default;
  explicit BasicPoly(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }

  static BasicPoly constant(T c) { return BasicPoly(std::vector<T>{std::move(c)}); }
  static BasicPoly linear(T c0, T c1) { return BasicPoly(std::vector<T>{std::move(c0), std::move(c1)}); }

  int degree() const { return c_.empty() ? kZeroDegree : static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<T>& coeffs() const { return c_; }
  T coeff(int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : T{}; }
  T leading() const { return c_.empty() ? T{} : c_.back(); }

  double scale() const {
    double s = 0.0;
    for (const auto& c : c_) s = std::max(s, std::abs(value_of(c)));
    return s;
  }

  T operator()(cplx u) const {
    T acc{};
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * T(u) + *it;
    return acc;
  }

  BasicPoly derivative() const {
    std::vector<T> d;
    for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(c_[k] * T(static_cast<double>(k)));
    return BasicPoly(std::move(d));
  }

  // Coefficient values only; drops derivative information for Dual.
  BasicPoly<cplx> values() const {
    std::vector<cplx> v;
    v.reserve(c_.size());
    for (const auto& c : c_) v.push_back(value_of(c));
    return BasicPoly<cplx>(std::move(v));
  }

  friend BasicPoly operator+(const BasicPoly& a, const BasicPoly& b) {
    std::vector<T> r(std::max(a.c_.size(), b.c_.size()));
    for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] += b.c_[k];
    return BasicPoly(std::move(r));
  }
  friend BasicPoly operator-(const BasicPoly& a, const BasicPoly& b) { return a + b * T(-1.0); }
  friend BasicPoly operator*(const BasicPoly& a, const BasicPoly& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<T> r(a.c_.size() + b.c_.size() - 1);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return BasicPoly(std::move(r));
  }
  friend BasicPoly operator*(const BasicPoly& a, const T& s) {
    std::vector<T> r(a.c_);
    for (auto& c : r) c *= s;
    return BasicPoly(std::move(r));
  }
  friend BasicPoly operator*(const T& s, const BasicPoly& a) { return a * s; }

 private:
  void trim() {
    const double s = scale();
    while (!c_.empty() && detail::negligible(c_.back(), s)) c_.pop_back();
  }

  std::vector<T> c_;
};

using Poly = BasicPoly<cplx>;

inline Poly poly_derivative(const Poly& p) { return p.derivative(); }

// Quotient of two complex polynomials.
class RationalFn {
 public:
  static constexpr double kPoleTolerance = 1e-12;

  RationalFn(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "rational function with zero denominator");
  }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  cplx operator()(cplx u) const {
    const cplx d = den_(u);
    if (std::abs(d) <= kPoleTolerance * den_.scale())
      throw Error(ErrorKind::PoleEvaluation, "denominator vanishes at evaluation point");
    return num_(u) / d;
  }

 private:
  Poly num_;
  Poly den_;
};

inline cplx ratfn_eval(const RationalFn& f, cplx u) { return f(u); }

// |p(r)| / (scale(p) * max(1, |r|)^deg): the residual measure used for roots.
// For |r| <= 1 it is |p(r)| / scale(p).
double root_residual(const Poly& p, cplx r);

// Roots of a complex polynomial with multiplicity, sorted by (Re, Im).
struct RootList {
  std::vector<cplx> values;
  bool clustered = false;          // some pair closer than kClusterTolerance * scale
  double min_separation = 0.0;     // smallest pairwise distance (infinity for a single root)
};

inline constexpr double kClusterTolerance = 1e-6;

RootList poly_roots(const Poly& p);

// True if two entries lie within kClusterTolerance * max(1, max|r|) of each other.
bool roots_clustered(const std::vector<cplx>& roots);

void sort_lexicographic(std::vector<cplx>& values);

}  // namespace sovchain
