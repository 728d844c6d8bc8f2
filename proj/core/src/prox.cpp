#include "estseq/prox.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace estseq {

Regularizer Regularizer::l1(double theta) {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("l1 weight must be finite and non-negative");
  return {Kind::l1, theta};
}

Regularizer Regularizer::l2_ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("ball radius must be finite and positive");
  return {Kind::l2_ball, radius};
}

Regularizer Regularizer::parse(std::string_view text) {
  if (text == "none" || text == "zero") return zero();
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("bad regularizer '" + std::string(text) +
                                "' (expected none, l1:<theta> or ball:<r>)");
  const auto name = text.substr(0, colon);
  const auto num = text.substr(colon + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc() || ptr != num.data() + num.size())
    throw std::invalid_argument("bad regularizer parameter '" + std::string(num) + "'");
  if (name == "l1") return l1(value);
  if (name == "ball") return l2_ball(value);
  throw std::invalid_argument("unknown regularizer '" + std::string(name) + "'");
}

std::string Regularizer::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::zero: return "none";
    case Kind::l1: os << "l1:" << param_; break;
    case Kind::l2_ball: os << "ball:" << param_; break;
  }
  return os.str();
}

void prox_inplace(const Regularizer& reg, double eta, Vec& u) {
  switch (reg.kind()) {
    case Regularizer::Kind::zero:
      return;
    case Regularizer::Kind::l1: {
      const double t = eta * reg.param();
      for (Eigen::Index j = 0; j < u.size(); ++j) {
        const double mag = std::abs(u[j]) - t;
        u[j] = mag > 0.0 ? std::copysign(mag, u[j]) : 0.0;
      }
      return;
    }
    case Regularizer::Kind::l2_ball: {
      const double norm = u.norm();
      if (norm > reg.param() * (1.0 + 1e-15)) u *= reg.param() / norm;
      return;
    }
  }
}

Vec prox(const Regularizer& reg, double eta, const Vec& u) {
  Vec out = u;
  prox_inplace(reg, eta, out);
  return out;
}

double reg_value(const Regularizer& reg, const Vec& x) {
  switch (reg.kind()) {
    case Regularizer::Kind::zero:
      return 0.0;
    case Regularizer::Kind::l1:
      return reg.param() * x.lpNorm<1>();
    case Regularizer::Kind::l2_ball:
      // Points produced by the projection may exceed r by an ulp.
      return x.norm() <= reg.param() * (1.0 + 1e-12) ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

Vec psi_subgradient_from_prox(const Vec& u, const Vec& x_out, double eta, const Vec& g) {
  return (u - x_out) / eta - g;
}

}  // namespace estseq
