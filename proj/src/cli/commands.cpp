#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "sovchain/cli.hpp"
#include "sovchain/errors.hpp"
#include "sovchain/flows.hpp"

namespace sovchain::cli {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json complex_list(const std::vector<cplx>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back(complex_to_json(z));
  return a;
}

json error_json(const Error& e) {
  std::string msg = e.what();
  return json{{"kind", std::string(to_string(e.kind()))}, {"message", msg.substr(msg.find(": ") + 2)}};
}

// Runs `body` once per sample, folding the returned residuals into a record.
// An Error stops the check and marks it failed with the error kind.
CheckRecord run_check(const std::string& name, const std::string& anchor, double threshold, int samples,
                      const std::function<double(int)>& body) {
  CheckRecord r{name, anchor, 0.0, threshold, false, 0, {}};
  try {
    for (int s = 0; s < samples; ++s) {
      r.max_residual = std::max(r.max_residual, body(s));
      ++r.samples_used;
    }
    r.pass = r.max_residual < threshold;
  } catch (const Error& e) {
    r.error = std::string(to_string(e.kind()));
    r.max_residual = kInf;
  }
  return r;
}

CheckRecord single(const std::string& name, const std::string& anchor, double threshold, double value, int samples) {
  return {name, anchor, value, threshold, value < threshold, samples, {}};
}

// Sum of |df_a| |Pi_ab| |dg_b|: the size of the terms in {f, g}.
double bracket_scale(const Eigen::VectorXcd& df, const Eigen::VectorXcd& dg, const Eigen::MatrixXcd& pi) {
  return (df.cwiseAbs().transpose() * pi.cwiseAbs() * dg.cwiseAbs()).value();
}

GenericityOptions genericity_for(const ChainSpec& spec) {
  GenericityOptions o;
  if (spec.model == Model::Trigonometric) o.min_abs_root = 1e-2;
  return o;
}

bool small(cplx v, const ChainSpec& spec) { return std::abs(v) <= 1e-12 * spec.twist.scale(); }

bool coordinate_abel_applies(const ChainSpec& spec) {
  return spec.model == Model::Rational && spec.twist.degenerate() && !small(spec.twist.c12(), spec) &&
         !small(spec.twist.c11(), spec);
}

bool momentum_abel_applies(const ChainSpec& spec) { return spec.twist.degenerate() && momentum_form_applies(spec); }

// N = 2, poles (1, -1), and the twist shape the closed-form inverse assumes.
std::string reconstruction_obstacle(const ChainSpec& spec) {
  if (spec.N != 2) return "N: reconstruction needs N = 2";
  if (std::abs(spec.nu[0] - 1.0) > 1e-12 || std::abs(spec.nu[1] + 1.0) > 1e-12)
    return "nu: reconstruction needs poles [1, -1]";
  if (small(spec.twist.c11(), spec)) return "twist: reconstruction needs c11 != 0";
  if (!small(spec.twist.c21(), spec) || !small(spec.twist.c22(), spec))
    return "twist: reconstruction needs c21 = c22 = 0";
  return {};
}

std::pair<cplx, cplx> spectral_pair_away(const ChainSpec& spec, Rng& rng) {
  for (;;) {
    auto [u, v] = sample_spectral_pair(rng);
    if (away_from_poles(spec, u, 0.05) && away_from_poles(spec, v, 0.05)) return {u, v};
  }
}

json casimir_json(const ChainSpec& spec, const PhasePoint& xi) {
  json j = json::object();
  for (const auto& nv : casimir_generating(spec, xi).named) j[nv.name] = complex_to_json(nv.value);
  return j;
}

json casimir_set_json(const CasimirSet& c) {
  if (c.model == Model::Rational) return json{{"C1", complex_to_json(c.C1)}, {"C2", complex_to_json(c.C2)}};
  return json{{"C1", complex_to_json(c.C1)},
              {"C2sq", complex_to_json(c.C2sq)},
              {"K1", complex_to_json(c.K1)},
              {"K2sq", complex_to_json(c.K2sq)}};
}

CasimirSet casimir_set_from(Model model, const json& j) {
  auto get = [&](const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::ConfigInvalid, std::string("casimirs: missing ") + key);
    return complex_from_json(j[key], "casimirs");
  };
  if (model == Model::Rational) return CasimirSet::rational(get("C1"), get("C2"));
  return CasimirSet::trigonometric(get("C1"), get("C2sq"), get("K1"), get("K2sq"));
}

std::vector<cplx> complex_vector(const json& j, const char* field) {
  if (!j.is_array()) throw Error(ErrorKind::ConfigInvalid, std::string(field) + ": expected a list of [re, im] pairs");
  std::vector<cplx> v;
  for (const auto& e : j) v.push_back(complex_from_json(e, field));
  return v;
}

PhasePoint initial_point(const RunConfig& cfg, const ChainSpec& spec, Rng& rng, bool generic) {
  if (cfg.point) return PhasePoint(spec.model, spec.N, *cfg.point);
  if (cfg.reduced) {
    const std::string why = reconstruction_obstacle(spec);
    if (!why.empty()) throw Error(ErrorKind::ConfigInvalid, "reduced: " + why);
    return generic ? sample_reduced_generic(spec, rng, genericity_for(spec)).xi : sample_reduced_point(spec, rng);
  }
  return generic ? sample_generic_point(spec, rng, cfg.convention, genericity_for(spec)).xi : random_point(spec, rng);
}

Report start(const char* command, const RunConfig& cfg) {
  Report r;
  r.command = command;
  r.config = config_to_json(cfg);
  return r;
}

}  // namespace

// ---------------------------------------------------------------- verify

Report cmd_verify(const RunConfig& cfg) {
  Report rep = start("verify", cfg);
  const ChainSpec spec = cfg.spec();
  const int n = cfg.samples_or(20);
  Rng rng(cfg.seed);
  const PoissonBivector pib = build_bivector(spec);
  const RMatrix r = rmatrix(spec);

  {
    const SymmetryReport sym = check_symmetry_conditions(r, std::max(n, 10), rng);
    rep.checks.push_back(single("rmatrix_symmetry_conditions",
                                "r_{21,21}(u,v) = 0 and the six companion component conditions on r_{ij,kl}(u,v)",
                                1e-12, sym.max(), sym.samples));
  }
  {
    const TwistReport tw = check_twist_compatibility(r, spec.twist, std::max(n, 10), rng);
    CheckRecord c = single("twist_compatibility", "[r(u,v), C (x) C] = 0", 1e-10, tw.max_norm / std::max(tw.scale, 1e-300),
                           std::max(n, 10));
    c.pass = tw.pass;
    rep.checks.push_back(c);
  }
  rep.checks.push_back(run_check("sklyanin_bracket", "{L(u) (x) L(v)} = [r(u,v), L(u) (x) L(v)]", 1e-9, n, [&](int) {
    const PhasePoint xi = random_point(spec, rng);
    const auto [u, v] = spectral_pair_away(spec, rng);
    return check_sklyanin_bracket(spec, xi, u, v).relative();
  }));
  rep.checks.push_back(run_check("integral_commutation", "{I_j, I_k} = 0 with I(u) = tr L(u)", 1e-9, n, [&](int) {
    const PhasePoint xi = random_point(spec, rng);
    const Eigen::MatrixXcd g = integral_gradients(spec, xi);
    const Eigen::MatrixXcd pi = pib.evaluate(xi);
    double worst = 0.0;
    for (int j = 0; j <= spec.N; ++j)
      for (int k = j + 1; k <= spec.N; ++k) {
        const Eigen::VectorXcd a = g.row(j).transpose(), b = g.row(k).transpose();
        const double sc = bracket_scale(a, b, pi);
        if (sc > 0.0) worst = std::max(worst, std::abs(bracket(a, b, pi)) / sc);
      }
    return worst;
  }));
  {
    const auto cas = casimir_observables(spec);
    rep.checks.push_back(run_check("casimir_annihilation", "{C, f} = 0 for every site Casimir C and coordinate f", 1e-9, n,
                                   [&](int) {
                                     const PhasePoint xi = random_point(spec, rng);
                                     const Eigen::MatrixXcd pi = pib.evaluate(xi);
                                     double worst = 0.0;
                                     for (const auto& [name, obs] : cas) {
                                       const Eigen::VectorXcd g = obs.gradient(xi);
                                       const Eigen::VectorXcd v = pi * g;
                                       const Eigen::VectorXd sc = pi.cwiseAbs() * g.cwiseAbs();
                                       for (int a = 0; a < v.size(); ++a)
                                         if (sc(a) > 0.0) worst = std::max(worst, std::abs(v(a)) / sc(a));
                                     }
                                     return worst;
                                   }));
  }
  rep.checks.push_back(run_check("separating_algebra",
                                 "{A(u),A(v)} = {B(u),B(v)} = 0, {A(u),B(v)} from the r-matrix components", 1e-8, n,
                                 [&](int) {
                                   const PhasePoint xi = random_point(spec, rng);
                                   const auto [u, v] = spectral_pair_away(spec, rng);
                                   return check_separating_algebra(spec, xi, u, v).max_relative();
                                 }));
  const GenericityOptions gopts = genericity_for(spec);
  const char* qc_anchor = spec.model == Model::Rational ? "{x_i, p_j} = delta_ij p_i, {x_i, x_j} = {p_i, p_j} = 0"
                                                         : "{x_i, p_j} = delta_ij x_i p_i, {x_i, x_j} = {p_i, p_j} = 0";
  rep.checks.push_back(run_check("quasi_canonical_brackets", qc_anchor, 1e-8, n, [&](int) {
    const GenericSample g = sample_generic_point(spec, rng, cfg.convention, gopts);
    return bracket_matrix(spec, g.xi, cfg.convention).relative();
  }));
  std::string sep_anchor;
  if (cfg.convention == Convention::Standard) sep_anchor = "det(L(x_i) - p_i Id) = 0";
  else if (spec.model == Model::Rational) sep_anchor = "c12 p_i - c11 I(x_i) = 0";
  else sep_anchor = "I(x_i) = 0";
  rep.checks.push_back(run_check("separation_residual", sep_anchor, 1e-9, n, [&](int) {
    const GenericSample g = sample_generic_point(spec, rng, cfg.convention, gopts);
    return separation_residual(spec, g.xi, cfg.convention).max_relative();
  }));
  if (cfg.convention == Convention::Nonstandard && coordinate_abel_applies(spec)) {
    rep.checks.push_back(run_check("abel_coordinates", "sum_i x_i^(N-j) / P(x_i) dx_i/dt_k = delta_jk", 1e-8, n, [&](int) {
      const GenericSample g = sample_generic_point(spec, rng, cfg.convention, gopts);
      return abel_coordinate_matrix(spec, g.xi).cwiseAbs().maxCoeff();
    }));
  }
  if (cfg.convention == Convention::Nonstandard && momentum_abel_applies(spec)) {
    const char* anchor = spec.model == Model::Rational
                             ? "sum_i x_i^(N-j) / P'(x_i) (1/p_i) dp_i/dt_k = delta_jk"
                             : "sum_i (x_i^(N-j) - delta_jN kappa x_i^N) / P'(x_i) 1/(x_i p_i) dp_i/dt_k = delta_jk";
    rep.checks.push_back(run_check("abel_momenta", anchor, 1e-8, n, [&](int) {
      const GenericSample g = sample_generic_point(spec, rng, cfg.convention, gopts);
      return abel_momentum_matrix(spec, g.xi).cwiseAbs().maxCoeff();
    }));
  }
  if (spec.N == 2 && reconstruction_obstacle(spec).empty() && cfg.convention == Convention::Nonstandard) {
    const cplx c11 = spec.twist.c11();
    rep.checks.push_back(run_check("reconstruction_round_trip", "xi = inverse(x, p, Casimirs) on the reduced leaf", 1e-7, n,
                                   [&](int) {
                                     const GenericSample g = sample_reduced_generic(spec, rng, gopts);
                                     const CasimirSet cas = casimirs_of(g.xi);
                                     const ReconstructionResult res =
                                         spec.model == Model::Rational
                                             ? reconstruct_rational_n2(g.point.x, g.point.p, cas, c11)
                                             : reconstruct_trig_n2(g.point.x, g.point.p, cas, c11);
                                     return distance_to_fibre(res, g.xi);
                                   }));
    const BracketPreservationReport bp = bracket_preservation_check(spec.model, std::min(n, 10), rng);
    rep.checks.push_back(single("reconstruction_brackets", "reconstructed coordinates satisfy the model brackets", 1e-7,
                                std::max(bp.max_deviation, bp.cross_block), bp.samples));
  }
  return rep;
}

// ---------------------------------------------------------------- separate

Report cmd_separate(const RunConfig& cfg) {
  Report rep = start("separate", cfg);
  const ChainSpec spec = cfg.spec();
  Rng rng(cfg.seed);
  const PhasePoint xi = initial_point(cfg, spec, rng, false);
  rep.result["point"] = complex_list(xi.coords());
  try {
    const SeparatedPoint sp = separate(spec, xi, cfg.convention);
    rep.result["convention"] = std::string(to_string(cfg.convention));
    rep.result["x"] = complex_list(sp.x);
    rep.result["p"] = complex_list(sp.p);
    rep.result["root_condition"] = sp.root_condition;
    rep.result["min_separation"] = sp.min_separation;
    rep.result["integrals"] = complex_list(integrals(spec, xi).coeffs);
    rep.result["casimir_values"] = casimir_json(spec, xi);
    if (spec.N == 2) rep.result["casimirs"] = casimir_set_json(casimirs_of(xi));
    const SeparationResidual res = separation_residual(spec, xi, cfg.convention);
    rep.checks.push_back(single("separation_residual", "separation relation at every (x_i, p_i)", 1e-9, res.max_relative(), 1));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    rep.error = error_json(e);
  }
  return rep;
}

// ---------------------------------------------------------------- reconstruct

namespace {

json reconstruction_json(const ReconstructionResult& r) {
  json j;
  j["coordinates"] = complex_list(r.point.coords());
  j["candidates"] = json::array();
  for (const auto& c : r.candidates) j["candidates"].push_back(complex_list(c.coords()));
  j["branch"] = json{{"sqrt_x1x2", r.branch.sqrt_x1x2},
                     {"sqrt_d1d2", r.branch.sqrt_d1d2},
                     {"c2_sign", r.branch.c2},
                     {"k2_sign", r.branch.k2}};
  j["forward_residuals"] = r.residuals;
  j["forward_residual"] = r.forward_residual;
  return j;
}

}  // namespace

Report cmd_reconstruct(const RunConfig& cfg, const json& separated) {
  Report rep = start("reconstruct", cfg);
  const ChainSpec spec = cfg.spec();
  const std::string why = reconstruction_obstacle(spec);
  if (!why.empty()) throw Error(ErrorKind::ConfigInvalid, why);
  if (cfg.convention != Convention::Nonstandard)
    throw Error(ErrorKind::ConfigInvalid, "convention: reconstruction inverts the nonstandard variables");
  const cplx c11 = spec.twist.c11();
  auto invert = [&](const std::vector<cplx>& x, const std::vector<cplx>& p, const CasimirSet& cas) {
    return spec.model == Model::Rational ? reconstruct_rational_n2(x, p, cas, c11) : reconstruct_trig_n2(x, p, cas, c11);
  };

  try {
    if (!separated.is_null()) {
      if (!separated.is_object() || !separated.contains("x") || !separated.contains("p") || !separated.contains("casimirs"))
        throw Error(ErrorKind::ConfigInvalid, "result: expected x, p and casimirs from a separate report");
      const std::vector<cplx> x = complex_vector(separated["x"], "x"), p = complex_vector(separated["p"], "p");
      const CasimirSet cas = casimir_set_from(spec.model, separated["casimirs"]);
      const ReconstructionResult r = invert(x, p, cas);
      rep.result = reconstruction_json(r);
      rep.checks.push_back(single("forward_map", "separate(inverse(x, p, Casimirs)) = (x, p, Casimirs)", 1e-8,
                                  r.forward_residual, 1));
      if (separated.contains("point")) {
        const PhasePoint orig(spec.model, 2, complex_vector(separated["point"], "point"));
        const double d = distance_to_fibre(r, orig);
        rep.result["round_trip_error"] = d;
        rep.checks.push_back(single("round_trip", "inverse(separate(xi)) = xi", 1e-7, d, 1));
      }
      return rep;
    }

    Rng rng(cfg.seed);
    const int n = cfg.samples_or(20);
    double worst_fwd = 0.0, worst_rt = 0.0;
    for (int s = 0; s < n; ++s) {
      const GenericSample g = sample_reduced_generic(spec, rng, genericity_for(spec));
      const CasimirSet cas = casimirs_of(g.xi);
      const ReconstructionResult r = invert(g.point.x, g.point.p, cas);
      worst_fwd = std::max(worst_fwd, r.forward_residual);
      worst_rt = std::max(worst_rt, distance_to_fibre(r, g.xi));
      if (s == 0) {
        rep.result = reconstruction_json(r);
        rep.result["point"] = complex_list(g.xi.coords());
        rep.result["x"] = complex_list(g.point.x);
        rep.result["p"] = complex_list(g.point.p);
        rep.result["casimirs"] = casimir_set_json(cas);
      }
    }
    rep.checks.push_back(single("forward_map", "separate(inverse(x, p, Casimirs)) = (x, p, Casimirs)", 1e-8, worst_fwd, n));
    rep.checks.push_back(single("round_trip", "inverse(separate(xi)) = xi", 1e-7, worst_rt, n));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    rep.error = error_json(e);
  }
  return rep;
}

// ---------------------------------------------------------------- evolve

Report cmd_evolve(const RunConfig& cfg, std::ostream& csv) {
  Report rep = start("evolve", cfg);
  const ChainSpec spec = cfg.spec();
  Rng rng(cfg.seed);
  const PhasePoint xi0 = initial_point(cfg, spec, rng, true);
  FlowOptions opts;
  opts.tol = cfg.tol;
  const int samples = cfg.samples_or(101);
  rep.result["initial_point"] = complex_list(xi0.coords());

  Trajectory traj;
  try {
    traj = integrate_flow(spec, xi0, cfg.flow, cfg.t_end, samples, cfg.convention, opts);
  } catch (const Error& e) {
    rep.error = error_json(e);
    CheckRecord c{"integration", "d xi/dt_k = {xi, I_k}", kInf, 0.0, false, 0, std::string(to_string(e.kind()))};
    rep.checks.push_back(c);
    return rep;
  }
  write_trajectory_csv(csv, traj);
  rep.result["samples"] = static_cast<int>(traj.times.size());
  rep.result["final_point"] = complex_list(traj.states.back().coords());
  rep.result["stats"] = json{{"steps", traj.stats.steps},
                             {"rejected", traj.stats.rejected},
                             {"max_error_estimate", traj.stats.max_error_estimate}};

  const ConservationReport cons = conservation(spec, traj);
  const int ns = static_cast<int>(traj.times.size());
  rep.checks.push_back(single("conservation_integrals", "I_j(t) = I_j(0)", 1e-8, cons.integrals, ns));
  rep.checks.push_back(single("conservation_casimirs", "C(t) = C(0) for every site Casimir", 1e-8, cons.casimirs, ns));

  const bool nonstandard = cfg.convention == Convention::Nonstandard;
  const bool special = nonstandard && momentum_abel_applies(spec);
  if (special) rep.checks.push_back(single("actions_constant", "x_i(t) = x_i(0)", 1e-8, cons.actions, ns));

  const int k = cfg.flow;
  if (k >= 1 && ns >= 5 && nonstandard && (special || coordinate_abel_applies(spec))) {
    const bool coords = !special;
    rep.checks.push_back(run_check(coords ? "abel_coordinates_along_flow" : "abel_momenta_along_flow",
                                   coords ? "sum_i x_i^(N-j) / P(x_i) dx_i/dt_k = delta_jk"
                                          : "sum_i w_j(x_i) / P'(x_i) dphi_i/dt_k = delta_jk",
                                   1e-6, spec.N, [&](int s) {
                                     const auto h = coords ? abel_residual_coordinates(spec, traj, s + 1, k)
                                                           : abel_residual_momenta(spec, traj, s + 1, k);
                                     return *std::max_element(h.begin(), h.end());
                                   }));
  }

  if (special && k >= 1 && ns >= 3) {
    json angles = json::array();
    try {
      const AngleSolution sol = angle_solution(spec, xi0);
      std::optional<Eigen::Matrix2cd> display;
      if (spec.model == Model::Trigonometric && spec.N == 2 && reduction_defect(xi0) == 0.0)
        display = trig_n2_slopes(spec.twist.c11(), trig_integral_relations(spec, xi0));
      double worst = 0.0, worst_display = 0.0, worst_r2 = 0.0;
      for (int i = 0; i < spec.N; ++i) {
        const AngleFit fit = fit_angle(traj, i);
        const cplx pred = sol.slopes(i, k - 1);
        worst = std::max(worst, std::abs(fit.slope - pred) / std::max(1.0, std::abs(pred)));
        worst_r2 = std::max(worst_r2, 1.0 - fit.r_squared);
        json a{{"i", i + 1},
               {"fitted_slope", complex_to_json(fit.slope)},
               {"predicted_slope", complex_to_json(pred)},
               {"r_squared", fit.r_squared}};
        if (display) {
          const cplx d = (*display)(i, k - 1);
          a["closed_form_slope"] = complex_to_json(d);
          worst_display = std::max(worst_display, std::abs(fit.slope - d) / std::max(1.0, std::abs(d)));
        }
        angles.push_back(std::move(a));
      }
      rep.checks.push_back(single("angle_slopes", "phi_i = phi_i0 + sum_k (W^-1)_ik t_k", 1e-6, worst, spec.N));
      rep.checks.push_back(single("angle_linearity", "1 - R^2 of the linear fit of log p_i(t)", 1e-8, worst_r2, spec.N));
      if (display)
        rep.checks.push_back(single("angle_slopes_closed_form",
                                    "dphi_1/dt_1 = -i c11 K2 C2 (x1 - x2) / (2 sqrt(x1 x2)), "
                                    "dphi_1/dt_2 = i c11 K2 C2 sqrt(x1 x2) / 2",
                                    1e-6, worst_display, spec.N));
    } catch (const Error& e) {
      rep.checks.push_back({"angle_slopes", "phi_i = phi_i0 + sum_k (W^-1)_ik t_k", kInf, 1e-6, false, 0,
                            std::string(to_string(e.kind()))});
    }
    rep.result["angles"] = std::move(angles);
  }
  return rep;
}

}  // namespace sovchain::cli
