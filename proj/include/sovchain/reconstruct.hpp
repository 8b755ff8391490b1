#pragma once

#include <array>
#include <vector>

#include "sovchain/dual.hpp"
#include "sovchain/sov.hpp"

namespace sovchain {

// Casimir values fixing the symplectic leaf of the N = 2 reduced chain.
// Rational: C1, C2 are the determinants of the two traceless site matrices.
// Trigonometric: C1 and C2^2 of the first site, K1 and K2^2 of the second,
// where C1 = 2(S11 S22 - 2 S12 S21 - 4 S01 S02) and C2^2 = (2 S01 + S11)(2 S02 + S22).
struct CasimirSet {
  Model model = Model::Rational;
  cplx C1, C2;      // rational
  cplx C2sq;        // trigonometric, together with C1
  cplx K1, K2sq;    // trigonometric

  static CasimirSet rational(cplx c1, cplx c2);
  static CasimirSet trigonometric(cplx c1, cplx c2sq, cplx k1, cplx k2sq);
};

// N = 2 chain with poles (1, -1) and twist [[c11, c12], [0, 0]] (rational) or diag(c11, 0).
ChainSpec reconstruction_spec(Model model, cplx c11, cplx c12 = 0.0);

CasimirSet casimirs_of(const PhasePoint& xi);

// Largest violation of the reduction (traceless sites, or S01 = S02, S22 = -S11 per site).
double reduction_defect(const PhasePoint& xi);

// Random point on the reduction, entries uniform in the unit complex square.
PhasePoint sample_reduced_point(const ChainSpec& spec, Rng& rng);

// Reduced generic point whose separation is well conditioned.
GenericSample sample_reduced_generic(const ChainSpec& spec, Rng& rng, const GenericityOptions& opts = {});

// ---------------------------------------------------------------- closed forms

// Rational: (S11, S12, S21, S22, T11, T12, T21, T22) from x, p = L21(x) and the site determinants.
template <class T>
std::array<T, 8> rational_inverse(const T& x1, const T& x2, const T& p1, const T& p2, cplx C1, cplx C2, cplx c11);

// Signs of the four square roots in the trigonometric inverse.
struct TrigBranch {
  int sqrt_x1x2 = 1;
  int sqrt_d1d2 = 1;
  int c2 = 1;
  int k2 = 1;
};

// Trigonometric: (S01, S02, S11, S22, S12, S21, T01, ..., T21) in the site layout.
template <class T>
std::array<T, 12> trig_inverse(const T& x1, const T& x2, const T& p1, const T& p2, const CasimirSet& cas, cplx c11,
                               const TrigBranch& branch);

// D1, D2 of the trigonometric inverse.
std::pair<cplx, cplx> trig_inverse_denominators(cplx x1, cplx x2, cplx p1, cplx p2, const CasimirSet& cas);

// ---------------------------------------------------------------- reconstruction

struct ReconstructionResult {
  PhasePoint point;
  // Distinct preimages with forward residual within tolerance (the trigonometric
  // inverse is determined only up to a four-point sign orbit).
  std::vector<PhasePoint> candidates;
  TrigBranch branch;
  // Relative forward-map residuals: x1, x2, p1, p2, then the Casimirs.
  std::vector<double> residuals;
  double forward_residual = 0.0;
};

ReconstructionResult reconstruct_rational_n2(const std::vector<cplx>& x, const std::vector<cplx>& p,
                                             const CasimirSet& cas, cplx c11);
ReconstructionResult reconstruct_trig_n2(const std::vector<cplx>& x, const std::vector<cplx>& p, const CasimirSet& cas,
                                         cplx c11);

// Forward-map residuals of a candidate point against the inputs.
std::vector<double> forward_residuals(const ChainSpec& spec, const PhasePoint& xi, const std::vector<cplx>& x,
                                      const std::vector<cplx>& p, const CasimirSet& cas);

// Max relative distance from xi to the nearest candidate.
double distance_to_fibre(const ReconstructionResult& r, const PhasePoint& xi);

// Rational N = 2, general degenerate case: (I1, I2) in separated variables.
std::pair<cplx, cplx> hamiltonians_from_separated(const std::vector<cplx>& x, const std::vector<cplx>& p, cplx c11,
                                                  cplx c12);

struct BracketPreservationReport {
  int samples = 0;
  double max_deviation = 0.0;  // relative to the bracket scale
  double cross_block = 0.0;    // max |{S-coordinate, T-coordinate}| relative
};

// Brackets of the reconstructed coordinates, computed from the quasi-canonical
// structure on (x, p), against the model's structure relations.
BracketPreservationReport bracket_preservation_check(Model model, int samples, Rng& rng);

}  // namespace sovchain
