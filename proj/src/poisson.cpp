#include "sovchain/poisson.hpp"

#include "sovchain/errors.hpp"

namespace sovchain {

std::string_view to_string(Model m) { return m == Model::Rational ? "rational" : "trigonometric"; }

Model parse_model(std::string_view name) {
  if (name == "rational") return Model::Rational;
  if (name == "trigonometric") return Model::Trigonometric;
  throw Error(ErrorKind::InvalidSpec, "unknown model '" + std::string(name) + "'");
}

int site_width(Model m) { return m == Model::Rational ? 4 : 6; }

PhasePoint::PhasePoint(Model model, int sites)
    : model_(model), sites_(sites), coords_(static_cast<std::size_t>(sites * site_width(model))) {}

PhasePoint::PhasePoint(Model model, int sites, std::vector<cplx> coords)
    : model_(model), sites_(sites), coords_(std::move(coords)) {
  if (static_cast<int>(coords_.size()) != sites * site_width(model))
    throw Error(ErrorKind::InvalidSpec, "phase point length does not match site count");
}

namespace {

using Table = std::vector<std::vector<PoissonBivector::Term>>;

void set_pair(Table& t, int w, int a, int b, std::vector<PoissonBivector::Term> terms) {
  t[a * w + b] = terms;
  for (auto& term : terms) term.coef = -term.coef;
  t[b * w + a] = std::move(terms);
}

// {S_ij, S_kl} = delta_kj S_il - delta_il S_kj
Table rational_table() {
  const int w = 4;
  Table t(w * w);
  auto idx = [](int i, int j) { return 2 * i + j; };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          std::vector<PoissonBivector::Term> terms;
          if (k == j) terms.push_back({1.0, idx(i, l), -1});
          if (i == l) terms.push_back({-1.0, idx(k, j), -1});
          t[idx(i, j) * w + idx(k, l)] = terms;
        }
  return t;
}

Table trig_table() {
  using namespace trig;
  const int w = 6;
  Table t(w * w);
  set_pair(t, w, S01, S12, {{0.25, S11, S12}});
  set_pair(t, w, S02, S21, {{0.25, S22, S21}});
  set_pair(t, w, S01, S21, {{-0.25, S11, S21}});
  set_pair(t, w, S02, S12, {{-0.25, S22, S12}});
  set_pair(t, w, S11, S12, {{1.0, S01, S12}});
  set_pair(t, w, S22, S21, {{1.0, S02, S21}});
  set_pair(t, w, S11, S21, {{-1.0, S01, S21}});
  set_pair(t, w, S22, S12, {{-1.0, S02, S12}});
  set_pair(t, w, S12, S21, {{1.0, S02, S11}, {-1.0, S01, S22}});
  return t;
}

}  // namespace

PoissonBivector::PoissonBivector(Model model, int sites)
    : model_(model),
      sites_(sites),
      width_(site_width(model)),
      table_(model == Model::Rational ? rational_table() : trig_table()) {}

const std::vector<PoissonBivector::Term>& PoissonBivector::local_terms(int a, int b) const {
  return table_[a * width_ + b];
}

cplx PoissonBivector::entry(int a, int b, const std::vector<cplx>& coords) const {
  if (a / width_ != b / width_) return 0.0;
  const int base = (a / width_) * width_;
  cplx sum = 0.0;
  for (const auto& term : local_terms(a % width_, b % width_)) {
    cplx v = term.coef;
    if (term.i >= 0) v *= coords[base + term.i];
    if (term.j >= 0) v *= coords[base + term.j];
    sum += v;
  }
  return sum;
}

Eigen::MatrixXcd PoissonBivector::evaluate(const PhasePoint& xi) const {
  const int n = dim();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (int s = 0; s < sites_; ++s)
    for (int a = 0; a < width_; ++a)
      for (int b = 0; b < width_; ++b) m(s * width_ + a, s * width_ + b) = entry(s * width_ + a, s * width_ + b, xi.coords());
  return m;
}

PoissonBivector build_bivector(Model model, int sites) { return PoissonBivector(model, sites); }

Observable Observable::coordinate(int index) {
  return Observable([index](const std::vector<Dual>& c) { return c[index]; });
}

Observable Observable::constant(cplx value) {
  return Observable([value](const std::vector<Dual>&) { return Dual(value); });
}

cplx Observable::value(const PhasePoint& xi) const {
  std::vector<Dual> c(xi.coords().begin(), xi.coords().end());
  return fn_(c).value();
}

Eigen::VectorXcd gradient_of(const Dual& d, int dim) {
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(dim);
  for (int i = 0; i < dim; ++i) g(i) = d.partial(i);
  return g;
}

Eigen::VectorXcd Observable::gradient(const PhasePoint& xi) const {
  return gradient_of(fn_(seed_all(xi.coords())), xi.size());
}

Observable operator*(const Observable& f, const Observable& g) {
  return Observable([f, g](const std::vector<Dual>& c) { return f.evaluate(c) * g.evaluate(c); });
}

Observable operator+(const Observable& f, const Observable& g) {
  return Observable([f, g](const std::vector<Dual>& c) { return f.evaluate(c) + g.evaluate(c); });
}

cplx bracket(const Eigen::VectorXcd& df, const Eigen::VectorXcd& dg, const Eigen::MatrixXcd& pi) {
  // Antisymmetrized so that {f, f} vanishes exactly.
  const cplx a = df.transpose() * pi * dg;
  const cplx b = dg.transpose() * pi * df;
  return 0.5 * (a - b);
}

cplx bracket(const Observable& f, const Observable& g, const PoissonBivector& pi, const PhasePoint& xi) {
  return bracket(f.gradient(xi), g.gradient(xi), pi.evaluate(xi));
}

Eigen::VectorXcd hamiltonian_vector_field(const Observable& h, const PoissonBivector& pi, const PhasePoint& xi) {
  return pi.evaluate(xi) * h.gradient(xi);
}

}  // namespace sovchain
