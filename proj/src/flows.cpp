#include "sovchain/flows.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include "sovchain/errors.hpp"

namespace sovchain {

Eigen::VectorXcd flow_field(const ChainSpec& spec, const PhasePoint& xi, int k) {
  if (k < 0 || k > spec.N) throw Error(ErrorKind::InvalidSpec, "flow index out of range");
  const Eigen::VectorXcd grad = integral_gradients(spec, xi).row(k).transpose();
  return build_bivector(spec).evaluate(xi) * grad;
}

namespace {

bool finite(const Eigen::VectorXcd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
  return true;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Integrator {
 public:
  Integrator(const ChainSpec& spec, int k, const FlowOptions& opts)
      : spec_(spec), k_(k), opts_(opts), pi_(build_bivector(spec)) {}

  Eigen::VectorXcd field(const Eigen::VectorXcd& y) const {
    const PhasePoint xi(spec_.model, spec_.N, std::vector<cplx>(y.data(), y.data() + y.size()));
    const Eigen::VectorXcd grad = integral_gradients(spec_, xi).row(k_).transpose();
    return pi_.evaluate(xi) * grad;
  }

  // Advances y from t0 to t1 (t1 may be below t0); step sizes are clamped so
  // the integration lands exactly on t1.
  void advance(Eigen::VectorXcd& y, double t0, double t1, IntegratorStats& stats) {
    const double span = t1 - t0;
    if (span == 0.0) return;
    const double dir = span > 0 ? 1.0 : -1.0;
    double t = t0;
    double h = std::min(std::abs(h_ > 0 ? h_ : opts_.h_init), std::abs(span));
    Eigen::VectorXcd k1 = field(y);
    while (dir * (t1 - t) > 0.0) {
      if (stats.steps + stats.rejected >= opts_.max_steps)
        throw Error(ErrorKind::StepFailure, "integrator exceeded its step budget");
      const double remaining = std::abs(t1 - t);
      bool last = false;
      if (h >= remaining) {
        h = remaining;
        last = true;
      }
      const double hs = dir * h;
      const Eigen::VectorXcd k2 = field(y + hs * (a21 * k1));
      const Eigen::VectorXcd k3 = field(y + hs * (a31 * k1 + a32 * k2));
      const Eigen::VectorXcd k4 = field(y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
      const Eigen::VectorXcd k5 = field(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Eigen::VectorXcd k6 = field(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Eigen::VectorXcd y5 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Eigen::VectorXcd k7 = field(y5);
      const Eigen::VectorXcd err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double norm = 0.0;
      bool ok = finite(y5) && finite(err);
      if (ok)
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          const double sc = opts_.tol * (1.0 + std::max(std::abs(y(i)), std::abs(y5(i))));
          norm = std::max(norm, std::abs(err(i)) / sc);
        }
      if (ok && norm <= 1.0) {
        y = y5;
        k1 = k7;
        t = last ? t1 : t + hs;
        ++stats.steps;
        stats.max_error_estimate = std::max(stats.max_error_estimate, norm * opts_.tol);
        const double fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
        if (!last) h_ = h *= fac;
        else if (h_ == 0.0) h_ = h * fac;
      } else {
        ++stats.rejected;
        h *= ok ? std::clamp(0.9 * std::pow(norm, -0.2), 0.1, 0.5) : 0.1;
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
          throw Error(ok ? ErrorKind::StepFailure : ErrorKind::SingularityEncountered,
                      ok ? "local error cannot meet the tolerance" : "vector field blew up along the flow");
      }
    }
  }

 private:
  const ChainSpec& spec_;
  int k_;
  FlowOptions opts_;
  PoissonBivector pi_;
  double h_ = 0.0;  // suggested next step, carried across sample intervals
};

Eigen::VectorXcd to_vector(const PhasePoint& xi) {
  return Eigen::Map<const Eigen::VectorXcd>(xi.coords().data(), xi.size());
}

PhasePoint to_point(const ChainSpec& spec, const Eigen::VectorXcd& y) {
  return PhasePoint(spec.model, spec.N, std::vector<cplx>(y.data(), y.data() + y.size()));
}

}  // namespace

PhasePoint flow_map(const ChainSpec& spec, const PhasePoint& xi0, int k, double t, const FlowOptions& opts,
                    IntegratorStats* stats) {
  if (k < 0 || k > spec.N) throw Error(ErrorKind::InvalidSpec, "flow index out of range");
  Integrator integ(spec, k, opts);
  IntegratorStats local;
  Eigen::VectorXcd y = to_vector(xi0);
  integ.advance(y, 0.0, t, stats ? *stats : local);
  return to_point(spec, y);
}

std::vector<int> match_roots(const std::vector<cplx>& prev, const std::vector<cplx>& next) {
  const int n = static_cast<int>(prev.size());
  std::vector<int> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  if (n <= 7) {
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (int i = 0; i < n; ++i) cost += std::norm(prev[i] - next[perm[i]]);
      if (cost < best_cost) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // Greedy nearest assignment for long chains.
  std::vector<bool> used(n, false);
  best.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    int arg = -1;
    double d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (!used[j] && std::abs(prev[i] - next[j]) < d) d = std::abs(prev[i] - next[(arg = j)]);
    used[arg] = true;
    best[i] = arg;
  }
  return best;
}

Trajectory integrate_flow(const ChainSpec& spec, const PhasePoint& xi0, int k, double t_end, int samples,
                          Convention convention, const FlowOptions& opts) {
  if (k < 0 || k > spec.N) throw Error(ErrorKind::InvalidSpec, "flow index out of range");
  if (samples < 1) throw Error(ErrorKind::InvalidSpec, "samples must be positive");
  if (t_end == 0.0) samples = 1;
  if (samples == 1 && t_end != 0.0) samples = 2;

  Trajectory traj;
  traj.flow_index = k;
  traj.convention = convention;
  Integrator integ(spec, k, opts);
  Eigen::VectorXcd y = to_vector(xi0);
  const double two_pi = 2.0 * std::acos(-1.0);

  for (int s = 0; s < samples; ++s) {
    const double t = samples == 1 ? 0.0 : t_end * s / (samples - 1);
    if (s > 0) {
      try {
        integ.advance(y, traj.times.back(), t, traj.stats);
      } catch (const Error& e) {
        // Keep the kind, add the sample interval where the step failed.
        std::string detail = e.what();
        detail = detail.substr(detail.find(": ") + 2);
        throw Error(e.kind(), detail + " (between t = " + std::to_string(traj.times.back()) + " and t = " +
                                  std::to_string(t) + ")");
      }
    }
    PhasePoint xi = to_point(spec, y);
    SeparatedPoint sp;
    try {
      sp = separate(spec, xi, convention);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ClusteredRoots || e.kind() == ErrorKind::DegenerateDegree) {
        if (s == 0) throw;
        throw Error(ErrorKind::SingularityEncountered, "separation broke down along the flow: " + std::string(e.what()));
      }
      throw;
    }
    std::vector<cplx> phi(spec.N);
    if (s > 0) {
      const SeparatedPoint& prev = traj.separated.back();
      const std::vector<int> perm = match_roots(prev.x, sp.x);
      SeparatedPoint m = sp;
      for (int i = 0; i < spec.N; ++i) {
        m.x[i] = sp.x[perm[i]];
        m.p[i] = sp.p[perm[i]];
        m.root_condition[i] = sp.root_condition[perm[i]];
      }
      sp = std::move(m);
    }
    for (int i = 0; i < spec.N; ++i) {
      const cplx p = sp.p[i];
      if (std::abs(p) < 1e-12) {
        traj.phi_ambiguous = true;
        phi[i] = cplx(-std::numeric_limits<double>::infinity(), 0.0);
        continue;
      }
      cplx l = std::log(p);
      if (s > 0) {
        const cplx prev = traj.phi.back()[i];
        if (std::isfinite(prev.real())) {
          l += cplx(0.0, two_pi * std::round((prev.imag() - l.imag()) / two_pi));
          // A jump of more than a quarter turn between samples means the
          // sampling cannot resolve the winding.
          if (std::abs(l.imag() - prev.imag()) > 0.5 * std::acos(-1.0)) traj.phi_ambiguous = true;
        }
      }
      phi[i] = l;
    }
    traj.times.push_back(t);
    traj.states.push_back(std::move(xi));
    traj.separated.push_back(std::move(sp));
    traj.phi.push_back(std::move(phi));
  }
  return traj;
}

ConservationReport conservation(const ChainSpec& spec, const Trajectory& traj) {
  ConservationReport r;
  if (traj.states.empty()) return r;
  const auto i0 = integrals(spec, traj.states.front()).coeffs;
  const auto c0 = casimir_generating(spec, traj.states.front()).named;
  double iscale = 0.0, cscale = 0.0;
  for (const auto& v : i0) iscale = std::max(iscale, std::abs(v));
  for (const auto& v : c0) cscale = std::max(cscale, std::abs(v.value));
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const auto is = integrals(spec, traj.states[s]).coeffs;
    for (std::size_t j = 0; j < is.size(); ++j)
      r.integrals = std::max(r.integrals, std::abs(is[j] - i0[j]) / std::max({std::abs(i0[j]), 1e-3 * iscale, 1e-300}));
    const auto cs = casimir_generating(spec, traj.states[s]).named;
    for (std::size_t j = 0; j < cs.size(); ++j)
      r.casimirs = std::max(r.casimirs,
                            std::abs(cs[j].value - c0[j].value) / std::max({std::abs(c0[j].value), 1e-3 * cscale, 1e-300}));
    for (int i = 0; i < spec.N; ++i)
      r.actions = std::max(r.actions, std::abs(traj.separated[s].x[i] - traj.separated.front().x[i]));
  }
  return r;
}

// ---------------------------------------------------------------- Abel equations

namespace {

Poly integral_poly(const std::vector<cplx>& desc) {
  std::vector<cplx> asc(desc.rbegin(), desc.rend());
  return Poly(asc);
}

cplx powc(cplx x, int n) {
  cplx r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

bool small(cplx v, double scale) { return std::abs(v) <= 1e-12 * std::max(scale, 1e-300); }

// kappa = (-1)^N c11^2 prod_l nu_l c1^(l) / I_N^2
cplx trig_kappa(const ChainSpec& spec, const PhasePoint& xi, cplx i_n) {
  cplx prod = spec.twist.c11() * spec.twist.c11();
  if (spec.N % 2) prod = -prod;
  const int w = site_width(spec.model);
  for (int l = 0; l < spec.N; ++l) {
    const cplx* s = xi.coords().data() + l * w;
    prod *= spec.nu[l] * (4.0 * s[trig::S01] * s[trig::S01] - s[trig::S11] * s[trig::S11]);
  }
  return prod / (i_n * i_n);
}

// d phi_i / d t_k = {p_i, I_k} / p_i, or {x_i, I_k} for coordinates.
Eigen::MatrixXcd derived_rates(const ChainSpec& spec, const PhasePoint& xi, DerivedKind kind, SeparatedPoint* sp) {
  const SeparatedJet jet = separate_with_gradients(spec, xi, Convention::Nonstandard);
  const Eigen::MatrixXcd pi = build_bivector(spec).evaluate(xi);
  const Eigen::MatrixXcd ig = integral_gradients(spec, xi);
  Eigen::MatrixXcd d(spec.N, spec.N);
  for (int i = 0; i < spec.N; ++i)
    for (int k = 1; k <= spec.N; ++k) {
      const Eigen::VectorXcd g = (kind == DerivedKind::Coordinate ? jet.dx : jet.dp).row(i).transpose();
      cplx v = bracket(g, ig.row(k).transpose(), pi);
      if (kind == DerivedKind::Momentum) v /= jet.point.p[i];
      d(i, k - 1) = v;
    }
  if (sp) *sp = jet.point;
  return d;
}

Eigen::MatrixXcd coordinate_weights(const ChainSpec& spec, const std::vector<cplx>& x, const std::vector<cplx>& desc) {
  const Poly p = integral_poly(desc);
  Eigen::MatrixXcd w(spec.N, spec.N);
  for (int j = 1; j <= spec.N; ++j)
    for (int i = 0; i < spec.N; ++i) w(j - 1, i) = powc(x[i], spec.N - j) / p(x[i]);
  return w;
}

Eigen::MatrixXcd truncated_weights(const ChainSpec& spec, const std::vector<cplx>& x, const std::vector<cplx>& desc) {
  Eigen::MatrixXcd w(spec.N, spec.N);
  for (int i = 0; i < spec.N; ++i) {
    cplx den = 0.0;
    for (int l = 1; l <= spec.N - 1; ++l) den += double(spec.N - l) * powc(x[i], spec.N - l - 1) * desc[l];
    for (int j = 1; j <= spec.N; ++j) w(j - 1, i) = powc(x[i], spec.N - j) / den;
  }
  return w;
}

}  // namespace

bool momentum_form_applies(const ChainSpec& spec) {
  const double sc = spec.twist.scale();
  if (small(spec.twist.c11(), sc)) return false;
  if (spec.model == Model::Rational) return small(spec.twist.c12(), sc) && small(spec.twist.c22(), sc);
  return small(spec.twist.c22(), sc);
}

Eigen::MatrixXcd abel_weight_matrix(const ChainSpec& spec, const PhasePoint& xi, const std::vector<cplx>& x) {
  if (!momentum_form_applies(spec))
    throw Error(ErrorKind::DegenerateTwistRow, "momentum Abel equations need the special degenerate twist");
  const std::vector<cplx> desc = integrals(spec, xi).coeffs;
  const Poly dp = integral_poly(desc).derivative();
  Eigen::MatrixXcd w(spec.N, spec.N);
  const bool trig = spec.model == Model::Trigonometric;
  const cplx kappa = trig ? trig_kappa(spec, xi, desc[spec.N]) : 0.0;
  for (int j = 1; j <= spec.N; ++j)
    for (int i = 0; i < spec.N; ++i) {
      cplx num = powc(x[i], spec.N - j);
      if (trig && j == spec.N) num -= kappa * powc(x[i], spec.N);
      w(j - 1, i) = num / (dp(x[i]) * (trig ? x[i] : cplx(1.0)));
    }
  return w;
}

Eigen::MatrixXcd abel_coordinate_matrix(const ChainSpec& spec, const PhasePoint& xi) {
  if (spec.model != Model::Rational || !spec.twist.degenerate() || small(spec.twist.c12(), spec.twist.scale()))
    throw Error(ErrorKind::DegenerateTwistRow, "coordinate Abel equations need a rational rank-one twist with c12 != 0");
  SeparatedPoint sp;
  const Eigen::MatrixXcd d = derived_rates(spec, xi, DerivedKind::Coordinate, &sp);
  const Eigen::MatrixXcd w = coordinate_weights(spec, sp.x, integrals(spec, xi).coeffs);
  return w * d - Eigen::MatrixXcd::Identity(spec.N, spec.N);
}

Eigen::MatrixXcd abel_momentum_matrix(const ChainSpec& spec, const PhasePoint& xi) {
  SeparatedPoint sp;
  const Eigen::MatrixXcd d = derived_rates(spec, xi, DerivedKind::Momentum, &sp);
  return abel_weight_matrix(spec, xi, sp.x) * d - Eigen::MatrixXcd::Identity(spec.N, spec.N);
}

Eigen::MatrixXcd abel_momentum_matrix_truncated(const ChainSpec& spec, const PhasePoint& xi) {
  if (!momentum_form_applies(spec))
    throw Error(ErrorKind::DegenerateTwistRow, "momentum Abel equations need the special degenerate twist");
  SeparatedPoint sp;
  const Eigen::MatrixXcd d = derived_rates(spec, xi, DerivedKind::Momentum, &sp);
  return truncated_weights(spec, sp.x, integrals(spec, xi).coeffs) * d - Eigen::MatrixXcd::Identity(spec.N, spec.N);
}

std::vector<cplx> sampled_derivative(const std::vector<double>& t, const std::vector<cplx>& f) {
  const int n = static_cast<int>(t.size());
  if (n < 5) throw Error(ErrorKind::InvalidSpec, "five-point derivative needs at least five samples");
  const double h = (t.back() - t.front()) / (n - 1);
  // Stencils for offsets 0..4 relative to the window start, derivative at offset m.
  static const double w[5][5] = {{-25, 48, -36, 16, -3},
                                 {-3, -10, 18, -6, 1},
                                 {1, -8, 0, 8, -1},
                                 {-1, 6, -18, 10, 3},
                                 {3, -16, 36, -48, 25}};
  std::vector<cplx> d(n);
  for (int s = 0; s < n; ++s) {
    const int start = std::clamp(s - 2, 0, n - 5);
    const int m = s - start;
    cplx acc = 0.0;
    for (int q = 0; q < 5; ++q) acc += w[m][q] * f[start + q];
    d[s] = acc / (12.0 * h);
  }
  return d;
}

namespace {

std::vector<double> history(const ChainSpec& spec, const Trajectory& traj, int j, int k, bool momenta) {
  if (j < 1 || j > spec.N || k < 1 || k > spec.N) throw Error(ErrorKind::InvalidSpec, "Abel indices out of range");
  const int n = static_cast<int>(traj.times.size());
  std::vector<std::vector<cplx>> rate(spec.N);
  for (int i = 0; i < spec.N; ++i) {
    std::vector<cplx> series(n);
    for (int s = 0; s < n; ++s) series[s] = momenta ? traj.phi[s][i] : traj.separated[s].x[i];
    rate[i] = sampled_derivative(traj.times, series);
  }
  // A trajectory of flow k_traj only probes column k_traj of the system.
  const cplx delta = (j == k) ? 1.0 : 0.0;
  const bool probes = traj.flow_index == k;
  std::vector<double> out(n);
  for (int s = 0; s < n; ++s) {
    const auto& sp = traj.separated[s];
    const auto desc = integrals(spec, traj.states[s]).coeffs;
    const Eigen::MatrixXcd w =
        momenta ? abel_weight_matrix(spec, traj.states[s], sp.x) : coordinate_weights(spec, sp.x, desc);
    cplx acc = 0.0;
    for (int i = 0; i < spec.N; ++i) acc += w(j - 1, i) * (probes ? rate[i][s] : cplx(0.0));
    out[s] = std::abs(acc - (probes ? delta : cplx(0.0)));
  }
  return out;
}

}  // namespace

std::vector<double> abel_residual_coordinates(const ChainSpec& spec, const Trajectory& traj, int j, int k) {
  if (spec.model != Model::Rational || !spec.twist.degenerate() || small(spec.twist.c12(), spec.twist.scale()))
    throw Error(ErrorKind::DegenerateTwistRow, "coordinate Abel equations need a rational rank-one twist with c12 != 0");
  if (traj.flow_index != k) throw Error(ErrorKind::InvalidSpec, "trajectory was generated by a different flow");
  return history(spec, traj, j, k, false);
}

std::vector<double> abel_residual_momenta(const ChainSpec& spec, const Trajectory& traj, int j, int k) {
  if (traj.flow_index != k) throw Error(ErrorKind::InvalidSpec, "trajectory was generated by a different flow");
  if (traj.phi_ambiguous) throw Error(ErrorKind::LogBranchAmbiguity, "momentum logarithm could not be tracked");
  return history(spec, traj, j, k, true);
}

// ---------------------------------------------------------------- action-angle

AngleSolution angle_solution(const ChainSpec& spec, const PhasePoint& xi0) {
  const SeparatedPoint sp = separate(spec, xi0, Convention::Nonstandard);
  AngleSolution sol;
  sol.actions = sp.x;
  for (const auto& p : sp.p) {
    if (std::abs(p) < 1e-12) throw Error(ErrorKind::LogBranchAmbiguity, "momentum vanishes at the initial point");
    sol.phi0.push_back(std::log(p));
  }
  const Eigen::MatrixXcd w = abel_weight_matrix(spec, xi0, sp.x);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(w);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularityEncountered, "Abel weight matrix is singular");
  sol.slopes = lu.inverse();
  return sol;
}

AngleFit fit_angle(const Trajectory& traj, int i) {
  if (traj.phi_ambiguous) throw Error(ErrorKind::LogBranchAmbiguity, "momentum logarithm could not be tracked");
  const int n = static_cast<int>(traj.times.size());
  AngleFit fit{0.0, traj.phi.front()[i], 1.0};
  if (n < 2) return fit;
  double tm = 0.0;
  cplx fm = 0.0;
  for (int s = 0; s < n; ++s) {
    tm += traj.times[s];
    fm += traj.phi[s][i];
  }
  tm /= n;
  fm /= n;
  double stt = 0.0;
  cplx stf = 0.0;
  for (int s = 0; s < n; ++s) {
    stt += (traj.times[s] - tm) * (traj.times[s] - tm);
    stf += (traj.times[s] - tm) * (traj.phi[s][i] - fm);
  }
  fit.slope = stf / stt;
  fit.intercept = fm - fit.slope * tm;
  double ss_res = 0.0, ss_tot = 0.0;
  for (int s = 0; s < n; ++s) {
    ss_res += std::norm(traj.phi[s][i] - fit.intercept - fit.slope * traj.times[s]);
    ss_tot += std::norm(traj.phi[s][i] - fm);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// ---------------------------------------------------------------- trigonometric N = 2

TrigRelations trig_integral_relations(const ChainSpec& spec, const PhasePoint& xi) {
  if (spec.model != Model::Trigonometric || spec.N != 2 || !momentum_form_applies(spec))
    throw Error(ErrorKind::InvalidSpec, "relations need the trigonometric N = 2 chain with c22 = 0");
  const auto in = integrals(spec, xi).coeffs;
  const SeparatedPoint sp = separate(spec, xi, Convention::Nonstandard);
  const cplx x1 = sp.x[0], x2 = sp.x[1];
  const cplx c11 = spec.twist.c11();
  const int w = site_width(spec.model);
  auto big_c2 = [&](int site) {
    const cplx* s = xi.coords().data() + site * w;
    return (2.0 * s[trig::S01] + s[trig::S11]) * (2.0 * s[trig::S02] + s[trig::S22]);
  };
  const cplx c2sq = big_c2(0), k2sq = big_c2(1);
  const cplx I = cplx(0.0, 1.0);

  TrigRelations rel;
  rel.x = sp.x;
  rel.residual = rel.runner_up = std::numeric_limits<double>::infinity();
  cplx best_ratio = std::numeric_limits<double>::quiet_NaN();
  const double iscale = std::max({std::abs(in[0]), std::abs(in[1]), std::abs(in[2])});
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        const cplx c2 = (a ? -1.0 : 1.0) * std::sqrt(c2sq);
        const cplx k2 = (b ? -1.0 : 1.0) * std::sqrt(k2sq);
        const cplx sq = (c ? -1.0 : 1.0) * std::sqrt(x1 * x2);
        const cplx kc = k2 * c2;
        const double r = std::max({std::abs(in[1] - I * c11 * (x1 + x2) * kc / sq),
                                   std::abs(in[0] + I * c11 * kc / sq),
                                   std::abs(in[2] + I * c11 * kc * sq)}) /
                         iscale;
        const cplx ratio = kc / sq;
        if (r < rel.residual) {
          // The previous best moves to runner-up only if it is a different branch value.
          if (!(std::abs(ratio - best_ratio) <= 1e-9 * std::abs(ratio))) rel.runner_up = rel.residual;
          rel.residual = r;
          rel.c2 = c2;
          rel.k2 = k2;
          rel.sqrt_x1x2 = sq;
          best_ratio = ratio;
        } else if (r < rel.runner_up && !(std::abs(ratio - best_ratio) <= 1e-9 * std::abs(ratio))) {
          rel.runner_up = r;
        }
      }
  rel.product_identity = std::abs(in[0] * in[2] + c11 * c11 * k2sq * c2sq) / std::abs(in[0] * in[2]);
  rel.ratio_identity = std::abs(in[2] / in[0] - x1 * x2) / std::abs(x1 * x2);
  return rel;
}

Eigen::Matrix2cd trig_n2_slopes(cplx c11, const TrigRelations& rel) {
  const cplx I = cplx(0.0, 1.0);
  const cplx kc = rel.k2 * rel.c2, sq = rel.sqrt_x1x2;
  Eigen::Matrix2cd m;
  for (int i = 0; i < 2; ++i) {
    const cplx other = rel.x[1 - i];
    m(i, 0) = -I * c11 * kc * (rel.x[i] - other) / (2.0 * sq);
    m(i, 1) = 0.5 * I * c11 * kc * sq;
  }
  return m;
}

// ---------------------------------------------------------------- export

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  if (traj.states.empty()) return;
  const int dim = traj.states.front().size();
  const int n = static_cast<int>(traj.separated.front().x.size());
  os << "t";
  for (int a = 0; a < dim; ++a) os << ",re_xi" << a << ",im_xi" << a;
  for (const char* name : {"x", "p", "phi"})
    for (int i = 1; i <= n; ++i) os << ",re_" << name << i << ",im_" << name << i;
  os << "\n" << std::setprecision(17);
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    os << traj.times[s];
    for (const auto& v : traj.states[s].coords()) os << "," << v.real() << "," << v.imag();
    for (const auto* series : {&traj.separated[s].x, &traj.separated[s].p, &traj.phi[s]})
      for (const auto& v : *series) os << "," << v.real() << "," << v.imag();
    os << "\n";
  }
}

}  // namespace sovchain
