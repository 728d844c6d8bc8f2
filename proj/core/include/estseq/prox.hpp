#pragma once

#include <string>
#include <string_view>

#include "estseq/dataset.hpp"

namespace estseq {

// The nonsmooth part psi of the composite objective.
class Regularizer {
 public:
  enum class Kind { zero, l1, l2_ball };

  Regularizer() = default;

  static Regularizer zero() { return {}; }
  static Regularizer l1(double theta);
  static Regularizer l2_ball(double radius);

  // "none", "l1:<theta>" or "ball:<r>".
  static Regularizer parse(std::string_view text);

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  bool is_indicator() const { return kind_ == Kind::l2_ball; }

  std::string describe() const;

 private:
  Regularizer(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_ = Kind::zero;
  double param_ = 0.0;
};

// argmin_x { eta psi(x) + 1/2 ||x - u||^2 }.
Vec prox(const Regularizer& reg, double eta, const Vec& u);
void prox_inplace(const Regularizer& reg, double eta, Vec& u);

// psi(x); +infinity outside the ball for the indicator.
double reg_value(const Regularizer& reg, const Vec& x);

// (1/eta)(u - x_out) - g, a subgradient of psi at x_out when
// x_out = prox(reg, eta, u - eta g).
Vec psi_subgradient_from_prox(const Vec& u, const Vec& x_out, double eta, const Vec& g);

}  // namespace estseq
