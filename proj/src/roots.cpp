#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sovchain/poly.hpp"

namespace sovchain {
namespace {

// Parlett-Reinsch balancing with radix-2 scaling, using |re|+|im| row/column
// norms as in the complex LAPACK balancer. Similarity transform, so eigenvalues
// are unchanged while their conditioning improves.
void balance(Eigen::MatrixXcd& a) {
  const Eigen::Index n = a.rows();
  const double radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i).real()) + std::abs(a(j, i).imag());
        r += std::abs(a(i, j).real()) + std::abs(a(i, j).imag());
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

void newton_polish(const Poly& p, const Poly& dp, cplx& r) {
  for (int it = 0; it < 2; ++it) {
    const cplx d = dp(r);
    if (std::abs(d) == 0.0) return;
    const cplx step = p(r) / d;
    const cplx cand = r - step;
    // Only accept steps that do not increase the residual; near multiple roots
    // Newton can wander.
    if (std::abs(p(cand)) <= std::abs(p(r))) r = cand;
  }
}

}  // namespace

double root_residual(const Poly& p, cplx r) {
  return std::abs(p(r)) / (p.scale() * std::pow(std::max(1.0, std::abs(r)), p.degree()));
}

void sort_lexicographic(std::vector<cplx>& values) {
  std::sort(values.begin(), values.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

bool roots_clustered(const std::vector<cplx>& roots) {
  double scale = 1.0;
  for (const auto& r : roots) scale = std::max(scale, std::abs(r));
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (std::abs(roots[i] - roots[j]) < kClusterTolerance * scale) return true;
  return false;
}

RootList poly_roots(const Poly& p) {
  if (p.is_zero()) throw Error(ErrorKind::ZeroPolynomial, "cannot find roots of the zero polynomial");
  const int n = p.degree();
  if (n == 0) throw Error(ErrorKind::ConstantPolynomial, "cannot find roots of a nonzero constant");

  RootList out;
  const auto& c = p.coeffs();
  if (n == 1) {
    out.values.push_back(-c[0] / c[1]);
  } else {
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
    balance(comp);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
    const Poly dp = p.derivative();
    for (int i = 0; i < n; ++i) {
      cplx r = solver.eigenvalues()(i);
      newton_polish(p, dp, r);
      out.values.push_back(r);
    }
  }
  sort_lexicographic(out.values);
  out.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    for (std::size_t j = i + 1; j < out.values.size(); ++j)
      out.min_separation = std::min(out.min_separation, std::abs(out.values[i] - out.values[j]));
  out.clustered = roots_clustered(out.values);
  return out;
}

}  // namespace sovchain
