#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace sovchain {

using cplx = std::complex<double>;

// Forward-mode dual number over C. The gradient is taken with respect to a
// seed basis chosen by the caller; an empty gradient means "all partials zero",
// which keeps constants free of allocations.
class Dual {
 public:
  Dual() = default;
  Dual(cplx value) : value_(value) {}  // NOLINT: constants promote implicitly
  Dual(double value) : value_(value) {}  // NOLINT
  Dual(cplx value, std::vector<cplx> grad) : value_(value), grad_(std::move(grad)) {}

  static Dual variable(cplx value, std::size_t index, std::size_t dim) {
    std::vector<cplx> g(dim);
    g[index] = 1.0;
    return {value, std::move(g)};
  }

  cplx value() const { return value_; }
  const std::vector<cplx>& gradient() const { return grad_; }
  cplx partial(std::size_t i) const { return i < grad_.size() ? grad_[i] : cplx{}; }

  bool is_exact_zero() const {
    if (value_ != cplx{}) return false;
    for (const auto& g : grad_)
      if (g != cplx{}) return false;
    return true;
  }

  Dual operator-() const {
    Dual r(*this);
    r.value_ = -r.value_;
    for (auto& g : r.grad_) g = -g;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    value_ += o.value_;
    axpy(1.0, o.grad_);
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value_ -= o.value_;
    axpy(-1.0, o.grad_);
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    const cplx a = value_;
    for (auto& g : grad_) g *= o.value_;
    axpy(a, o.grad_);
    value_ *= o.value_;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const cplx inv = 1.0 / o.value_;
    value_ *= inv;
    // d(a/b) = (da - (a/b) db) / b
    axpy(-value_, o.grad_);
    for (auto& g : grad_) g *= inv;
    return *this;
  }

  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend Dual operator/(Dual a, const Dual& b) { return a /= b; }

 private:
  void axpy(cplx a, const std::vector<cplx>& x) {
    if (x.empty()) return;
    if (grad_.size() < x.size()) grad_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) grad_[i] += a * x[i];
  }

  cplx value_{};
  std::vector<cplx> grad_;
};

// Applies a scalar function with known derivative to a dual number.
inline Dual lift(const Dual& x, cplx f, cplx df) {
  std::vector<cplx> g(x.gradient());
  for (auto& v : g) v *= df;
  return {f, std::move(g)};
}

inline Dual powi(const Dual& x, int n) {
  if (n == 0) return Dual(1.0);
  const cplx v = x.value();
  return lift(x, std::pow(v, n), static_cast<double>(n) * std::pow(v, n - 1));
}

inline Dual sqrt(const Dual& x) {
  const cplx s = std::sqrt(x.value());
  return lift(x, s, 0.5 / s);
}

inline Dual log(const Dual& x) { return lift(x, std::log(x.value()), 1.0 / x.value()); }
inline Dual exp(const Dual& x) {
  const cplx e = std::exp(x.value());
  return lift(x, e, e);
}

inline cplx powi(cplx x, int n) { return std::pow(x, n); }

inline cplx value_of(cplx z) { return z; }
inline cplx value_of(const Dual& d) { return d.value(); }

// Seeds every entry of `values` as an independent variable.
inline std::vector<Dual> seed_all(const std::vector<cplx>& values) {
  std::vector<Dual> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out.push_back(Dual::variable(values[i], i, values.size()));
  return out;
}

}  // namespace sovchain
