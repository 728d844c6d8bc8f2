#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace estseq {

enum class Loss { logistic, squared_hinge };

struct LossEval {
  double value;
  double deriv;
};

// Upper bound on phi''. For max(0, 1 - u)^2 this is 2, not 1.
constexpr double curvature_constant(Loss loss) {
  return loss == Loss::logistic ? 0.25 : 2.0;
}

// phi(u) and phi'(u) for the margin u = b a^T x.
inline LossEval loss_value_deriv(Loss loss, double u) {
  if (loss == Loss::logistic) {
    // log(1 + e^{-u}) without overflow on either side.
    if (u >= 0.0) {
      const double e = std::exp(-u);
      return {std::log1p(e), -e / (1.0 + e)};
    }
    const double e = std::exp(u);
    return {-u + std::log1p(e), -1.0 / (1.0 + e)};
  }
  const double slack = 1.0 - u;
  if (slack <= 0.0) return {0.0, 0.0};
  return {slack * slack, -2.0 * slack};
}

inline double loss_value(Loss loss, double u) { return loss_value_deriv(loss, u).value; }
inline double loss_deriv(Loss loss, double u) { return loss_value_deriv(loss, u).deriv; }

inline std::string_view to_string(Loss loss) {
  return loss == Loss::logistic ? "logistic" : "sqhinge";
}

inline Loss parse_loss(std::string_view name) {
  if (name == "logistic") return Loss::logistic;
  if (name == "sqhinge" || name == "squared_hinge") return Loss::squared_hinge;
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (expected logistic or sqhinge)");
}

}  // namespace estseq
