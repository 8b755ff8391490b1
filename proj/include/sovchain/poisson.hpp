#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sovchain/dual.hpp"

namespace sovchain {

enum class Model { Rational, Trigonometric };

std::string_view to_string(Model m);
Model parse_model(std::string_view name);  // throws InvalidSpec

// Coordinates per site: 4 for the rational model, 6 for the trigonometric one.
int site_width(Model m);

// Local coordinate offsets inside one site block.
namespace rat {
enum Coord : int { S11 = 0, S12 = 1, S21 = 2, S22 = 3 };
}
namespace trig {
enum Coord : int { S01 = 0, S02 = 1, S11 = 2, S22 = 3, S12 = 4, S21 = 5 };
}

class PhasePoint {
 public:
  PhasePoint(Model model, int sites);
  PhasePoint(Model model, int sites, std::vector<cplx> coords);

  Model model() const { return model_; }
  int sites() const { return sites_; }
  int size() const { return static_cast<int>(coords_.size()); }
  const std::vector<cplx>& coords() const { return coords_; }
  std::vector<cplx>& coords() { return coords_; }

  static int index(Model m, int site, int local) { return site * site_width(m) + local; }
  cplx at(int site, int local) const { return coords_[index(model_, site, local)]; }
  cplx& at(int site, int local) { return coords_[index(model_, site, local)]; }

 private:
  Model model_;
  int sites_;
  std::vector<cplx> coords_;
};

// Quadratic (trigonometric) or linear (rational) Poisson structure, block
// diagonal over sites. Entries are evaluated from a small per-site table.
class PoissonBivector {
 public:
  struct Term {
    double coef;
    int i;  // local coordinate factor, -1 for none
    int j;
  };

  PoissonBivector(Model model, int sites);

  Model model() const { return model_; }
  int sites() const { return sites_; }
  int dim() const { return sites_ * site_width(model_); }

  cplx entry(int a, int b, const std::vector<cplx>& coords) const;
  Eigen::MatrixXcd evaluate(const PhasePoint& xi) const;
  const std::vector<Term>& local_terms(int a, int b) const;

 private:
  Model model_;
  int sites_;
  int width_;
  std::vector<std::vector<Term>> table_;  // width_ * width_ local entries
};

PoissonBivector build_bivector(Model model, int sites);

// Scalar function of the coordinates that can be evaluated on dual numbers.
class Observable {
 public:
  using Fn = std::function<Dual(const std::vector<Dual>&)>;

  explicit Observable(Fn fn) : fn_(std::move(fn)) {}

  static Observable coordinate(int index);
  static Observable constant(cplx c);

  Dual evaluate(const std::vector<Dual>& coords) const { return fn_(coords); }
  cplx value(const PhasePoint& xi) const;
  Eigen::VectorXcd gradient(const PhasePoint& xi) const;

  friend Observable operator*(const Observable& f, const Observable& g);
  friend Observable operator+(const Observable& f, const Observable& g);

 private:
  Fn fn_;
};

Eigen::VectorXcd gradient_of(const Dual& d, int dim);

// {f, g} = grad f . Pi . grad g
cplx bracket(const Eigen::VectorXcd& df, const Eigen::VectorXcd& dg, const Eigen::MatrixXcd& pi);
cplx bracket(const Observable& f, const Observable& g, const PoissonBivector& pi, const PhasePoint& xi);

// Component a is sum_b Pi_ab dH/dxi_b, so df/dt = grad f . X_H = {f, H}.
Eigen::VectorXcd hamiltonian_vector_field(const Observable& h, const PoissonBivector& pi, const PhasePoint& xi);

}  // namespace sovchain
