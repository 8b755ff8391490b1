#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

#include "sovchain/model.hpp"

namespace sovchain {

enum class Convention { Standard, Nonstandard };

std::string_view to_string(Convention c);
Convention parse_convention(std::string_view name);  // throws InvalidSpec

// Which Lax entries act as A and B. With c11 != 0: A = L11, B = L21; when
// c11 = 0 and c22 != 0 the rows swap: A = L22, B = L12.
struct SeparatingRoles {
  int a_row, a_col;
  int b_row, b_col;
  bool swapped;
};

SeparatingRoles separating_roles(const ChainSpec& spec);  // throws DegenerateTwistRow

struct SeparatingFunctions {
  RationalFn A;
  RationalFn B;
  bool swapped;
};

SeparatingFunctions separating_functions(const ChainSpec& spec, const PhasePoint& xi);

struct SeparatedPoint {
  std::vector<cplx> x;
  std::vector<cplx> p;
  Convention convention = Convention::Nonstandard;
  // |d/du of the defining function| at each root; small values mean an
  // ill-conditioned root.
  std::vector<double> root_condition;
  double min_separation = 0.0;
};

// Nonstandard: x_i are the roots of A, p_i = B(x_i). Standard: roots of B, p_i = A(x_i).
SeparatedPoint separate(const ChainSpec& spec, const PhasePoint& xi, Convention convention);

// Separated point together with coordinate gradients of every x_i and p_i
// (row i of dx / dp), from the implicit-function formulas.
struct SeparatedJet {
  SeparatedPoint point;
  Eigen::MatrixXcd dx;
  Eigen::MatrixXcd dp;
};

SeparatedJet separate_with_gradients(const ChainSpec& spec, const PhasePoint& xi, Convention convention);

enum class DerivedKind { Coordinate, Momentum };
Eigen::VectorXcd derived_observable_gradient(const ChainSpec& spec, const PhasePoint& xi, Convention convention,
                                             DerivedKind kind, int index);

// Expected {x_i, p_i}: p_i (rational) or x_i p_i (trigonometric).
cplx quasi_canonical_value(Model model, cplx x, cplx p);

struct BracketMatrix {
  SeparatedPoint point;
  Eigen::MatrixXcd brackets;  // order x_1..x_N, p_1..p_N
  double max_deviation = 0.0;
  double scale = 1.0;
  double relative() const { return max_deviation / scale; }
};

BracketMatrix bracket_matrix(const ChainSpec& spec, const PhasePoint& xi, Convention convention);

struct SeparatingAlgebraResiduals {
  double bb = 0.0;  // |{B(u), B(v)}|
  double aa = 0.0;  // |{A(u), A(v)}|
  double ab = 0.0;  // |{A(u), B(v)} - closed form|
  double scale = 1.0;
  double max_relative() const;
};

SeparatingAlgebraResiduals check_separating_algebra(const ChainSpec& spec, const PhasePoint& xi, cplx u, cplx v);

// Closed form of {A(u), B(v)} from the r-matrix components.
cplx separating_ab_closed_form(const ChainSpec& spec, cplx u, cplx v, cplx au, cplx av, cplx bu, cplx bv);

struct SeparationResidual {
  std::vector<cplx> residual;
  std::vector<double> scale;
  double max_relative() const;
};

// Nonstandard rational: c12 p_i - c11 I(x_i) (rows swapped when c11 = 0).
// Nonstandard trigonometric: I(x_i). Standard: det(L(x_i) - p_i Id).
SeparationResidual separation_residual(const ChainSpec& spec, const PhasePoint& xi, Convention convention);

// Rational model: I(u) - (c12/c11) B(u) - A(u) - (det C / c11) L~22(u) as a
// numerator polynomial, relative to the size of its terms.
double identity_iu_residual(const ChainSpec& spec, const PhasePoint& xi);

// Brackets {I_k, x_i}, rows k = 0..N, columns i.
Eigen::MatrixXcd integral_root_brackets(const ChainSpec& spec, const PhasePoint& xi, Convention convention);

struct GenericSample {
  PhasePoint xi;
  SeparatedPoint point;
};

struct GenericityOptions {
  double min_root_gap = 1e-2;
  double min_pole_distance = 1e-2;
  double min_end_coefficient = 1e-8;  // |A_0|, |A_N|
  double min_abs_root = 0.0;          // trigonometric weights need x != 0
  int max_tries = 10000;
};

// Rejection-samples a point whose separation is well conditioned.
GenericSample sample_generic_point(const ChainSpec& spec, Rng& rng, Convention convention,
                                   const GenericityOptions& opts = {});

// Same, but `draw` produces candidate points (e.g. on a reduced subspace).
template <class Draw>
GenericSample sample_generic_point_with(const ChainSpec& spec, Draw&& draw, Convention convention,
                                        const GenericityOptions& opts = {});

bool is_generic(const ChainSpec& spec, const PhasePoint& xi, Convention convention, const GenericityOptions& opts,
                SeparatedPoint* out);

template <class Draw>
GenericSample sample_generic_point_with(const ChainSpec& spec, Draw&& draw, Convention convention,
                                        const GenericityOptions& opts) {
  separating_roles(spec);  // surfaces DegenerateTwistRow instead of exhausting the budget
  for (int t = 0; t < opts.max_tries; ++t) {
    PhasePoint xi = draw();
    SeparatedPoint sp;
    if (is_generic(spec, xi, convention, opts, &sp)) return {std::move(xi), std::move(sp)};
  }
  throw Error(ErrorKind::DegenerateDegree, "no generic point found within the sampling budget");
}

}  // namespace sovchain
