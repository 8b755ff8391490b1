#pragma once

#include <Eigen/Dense>
#include <functional>
#include <ostream>
#include <vector>

#include "sovchain/sov.hpp"

namespace sovchain {

// Vector field of the t_k flow: d xi/dt_k = Pi grad I_k, i.e. df/dt_k = {f, I_k}.
Eigen::VectorXcd flow_field(const ChainSpec& spec, const PhasePoint& xi, int k);

struct FlowOptions {
  double tol = 1e-10;    // absolute and relative local tolerance
  double h_init = 1e-2;
  int max_steps = 1000000;
};

struct IntegratorStats {
  int steps = 0;
  int rejected = 0;
  double max_error_estimate = 0.0;  // largest accepted normalized local error
};

struct Trajectory {
  int flow_index = 0;
  Convention convention = Convention::Nonstandard;
  std::vector<double> times;
  std::vector<PhasePoint> states;
  std::vector<SeparatedPoint> separated;  // continuity-matched root order
  std::vector<std::vector<cplx>> phi;     // unwrapped log p_i
  bool phi_ambiguous = false;             // some p_i came too close to zero
  IntegratorStats stats;
};

// Adaptive Dormand-Prince 5(4) integration from xi0 to t.
PhasePoint flow_map(const ChainSpec& spec, const PhasePoint& xi0, int k, double t, const FlowOptions& opts = {},
                    IntegratorStats* stats = nullptr);

// Integrates flow k on [0, t_end], sampling at `samples` evenly spaced times
// (one sample when t_end = 0). Separated variables are recomputed at every
// sample and matched to the previous sample by nearest assignment.
Trajectory integrate_flow(const ChainSpec& spec, const PhasePoint& xi0, int k, double t_end, int samples,
                          Convention convention = Convention::Nonstandard, const FlowOptions& opts = {});

// Max relative drift of every integral and named Casimir along the trajectory.
struct ConservationReport {
  double integrals = 0.0;
  double casimirs = 0.0;
  double actions = 0.0;  // max |x_i(t) - x_i(0)|
};
ConservationReport conservation(const ChainSpec& spec, const Trajectory& traj);

// Reorders `next` so that next[i] is the entry closest to prev[i] overall.
std::vector<int> match_roots(const std::vector<cplx>& prev, const std::vector<cplx>& next);

// ---------------------------------------------------------------- Abel equations
//
// All residual matrices are N x N with entry (j-1, k-1) for j, k = 1..N.

// Rational, det C = 0, c12 != 0:
//   sum_i x_i^(N-j) / P(x_i) * dx_i/dt_k - delta_jk,
// P the numerator of I(u). Time derivatives taken as {x_i, I_k}.
Eigen::MatrixXcd abel_coordinate_matrix(const ChainSpec& spec, const PhasePoint& xi);

// Special case (rational c12 = c22 = 0, trigonometric c22 = 0):
//   rational: sum_i x_i^(N-j) / P'(x_i) * (1/p_i) dp_i/dt_k - delta_jk
//   trigonometric: sum_i (x_i^(N-j) - delta_jN kappa x_i^N) / P'(x_i) * 1/(x_i p_i) dp_i/dt_k - delta_jk
// with kappa = (-1)^N c11^2 prod_l nu_l c1^(l) / I_N^2.
Eigen::MatrixXcd abel_momentum_matrix(const ChainSpec& spec, const PhasePoint& xi);

// Momentum form with the denominator sum_{l=1}^{N-1} (N-l) x^(N-l-1) I_l, which
// drops the leading-power term of P'. Reported as a diagnostic only.
Eigen::MatrixXcd abel_momentum_matrix_truncated(const ChainSpec& spec, const PhasePoint& xi);

// Weight matrix W of the momentum-form Abel system: sum_i W(j,i) dphi_i/dt_k = delta_jk.
// Throws DegenerateTwistRow outside the special case.
Eigen::MatrixXcd abel_weight_matrix(const ChainSpec& spec, const PhasePoint& xi, const std::vector<cplx>& x);

// True for rational c12 = c22 = 0 and trigonometric c22 = 0 (with c11 != 0).
bool momentum_form_applies(const ChainSpec& spec);

// Along a trajectory of flow k: residual histories |R_jk(t)| where time
// derivatives come from five-point finite differences of the sampled x_i(t)
// or p_i(t). Endpoints use the nearest interior stencil.
std::vector<double> abel_residual_coordinates(const ChainSpec& spec, const Trajectory& traj, int j, int k);
std::vector<double> abel_residual_momenta(const ChainSpec& spec, const Trajectory& traj, int j, int k);

// Five-point derivative of a sampled series on a uniform grid.
std::vector<cplx> sampled_derivative(const std::vector<double>& t, const std::vector<cplx>& f);

// ---------------------------------------------------------------- action-angle

struct AngleSolution {
  std::vector<cplx> actions;  // x_i
  std::vector<cplx> phi0;     // log p_i at xi0
  Eigen::MatrixXcd slopes;    // (i, k-1): d phi_i / d t_k
};

// Special degenerate case only; slopes are the inverse of the Abel weight matrix.
AngleSolution angle_solution(const ChainSpec& spec, const PhasePoint& xi0);

struct AngleFit {
  cplx slope;
  cplx intercept;
  double r_squared;
};

// Linear regression of the unwrapped phi_i(t); throws LogBranchAmbiguity when
// the unwrapping was not reliable.
AngleFit fit_angle(const Trajectory& traj, int i);

// ---------------------------------------------------------------- trigonometric N = 2

struct TrigRelations {
  cplx c2;          // chosen sign of sqrt(C2^2) of site 1
  cplx k2;          // chosen sign of sqrt(K2^2) of site 2
  cplx sqrt_x1x2;   // chosen branch
  double residual;  // max relative residual of the three relations, best branch
  double runner_up; // same for the next-best distinct value of k2 c2 / sqrt(x1 x2)
  double product_identity;  // |I0 I2 + c11^2 K2^2 C2^2| / |I0 I2|
  double ratio_identity;    // |I2/I0 - x1 x2| / |x1 x2|
  std::vector<cplx> x;
};

// Relations among I0, I1, I2, K2, C2, x1, x2 at a Sklyanin-reduced point.
TrigRelations trig_integral_relations(const ChainSpec& spec, const PhasePoint& xi);

// Predicted slopes (i, k-1) of phi_i under t_k from the closed forms in x, K2, C2.
Eigen::Matrix2cd trig_n2_slopes(cplx c11, const TrigRelations& rel);

// ---------------------------------------------------------------- export

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace sovchain
