#include "properties.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "estseq/loss.hpp"
#include "estseq/objective.hpp"
#include "estseq/prox.hpp"
#include "fixtures.hpp"

namespace estseq::testing {

namespace {

void expect(PropertyResult& r, bool cond, const std::string& what) {
  ++r.checks;
  if (!cond && r.ok) {
    r.ok = false;
    r.failure = what;
  }
}

std::string fmt(const char* label, double value) {
  std::ostringstream os;
  os << label << " " << value;
  return os.str();
}

std::vector<Regularizer> regularizers(RandomStream& rng) {
  return {Regularizer::zero(), Regularizer::l1(0.05 + rng.uniform()),
          Regularizer::l2_ball(0.2 + 2.0 * rng.uniform())};
}

double prox_objective(const Regularizer& reg, double eta, const Vec& u, const Vec& x) {
  return eta * reg_value(reg, x) + 0.5 * (x - u).squaredNorm();
}

}  // namespace

PropertyResult loss_derivative_property(std::uint64_t seed) {
  PropertyResult r;
  RandomStream rng(seed);
  const double h = 1e-5;
  for (Loss loss : {Loss::logistic, Loss::squared_hinge}) {
    for (int t = 0; t < 100; ++t) {
      double u = -10.0 + 20.0 * rng.uniform();
      // Keep the squared hinge kink out of the difference stencil.
      if (loss == Loss::squared_hinge && std::abs(u - 1.0) < 2.0 * h) u += 4.0 * h;
      const double fd = (loss_value(loss, u + h) - loss_value(loss, u - h)) / (2.0 * h);
      const double err = std::abs(loss_deriv(loss, u) - fd);
      expect(r, err <= 1e-6, fmt("phi' finite-difference error", err));
    }
  }
  return r;
}

PropertyResult gradient_fd_property(std::uint64_t seed) {
  PropertyResult r;
  RandomStream rng(seed);
  for (Loss loss : {Loss::logistic, Loss::squared_hinge}) {
    for (NoiseModel noise : {NoiseModel::none(), NoiseModel::dropout(0.3)}) {
      const Problem problem = synthetic_problem(30, 8, 0.01, loss, seed + 1, 0.1, noise);
      for (int t = 0; t < 20; ++t) {
        const Vec x = random_vector(problem.p(), rng, 0.7);
        const std::size_t i = rng.uniform_index(problem.n());
        const std::optional<std::uint64_t> s =
            noise.active() ? std::optional<std::uint64_t>(rng.next_seed()) : std::nullopt;
        const auto fi = [&](const Vec& z) {
          return component_eval(problem, i, z, s).value + 0.5 * problem.lambda * z.squaredNorm();
        };
        const Vec g = component_grad(problem, i, x, s).gradient;
        const double err = relative_error(g, numeric_gradient(fi, x));
        expect(r, err <= 1e-6, fmt("component gradient finite-difference error", err));
      }
      if (noise.active()) continue;
      for (int t = 0; t < 5; ++t) {
        const Vec x = random_vector(problem.p(), rng, 0.7);
        const Vec g = full_grad(problem, x, {}).gradient;
        const auto f = [&](const Vec& z) { return smooth_objective(problem, z); };
        const double err = relative_error(g, numeric_gradient(f, x));
        expect(r, err <= 1e-6, fmt("full gradient finite-difference error", err));
      }
    }
  }
  return r;
}

PropertyResult smoothness_property(std::uint64_t seed) {
  PropertyResult r;
  RandomStream rng(seed);
  for (Loss loss : {Loss::logistic, Loss::squared_hinge}) {
    // flip = 0.45 keeps many squared hinge terms active on both sides.
    const Problem problem = synthetic_problem(40, 3, 0.02, loss, seed + 2, 0.45);
    const auto s = smoothness(problem);
    for (int t = 0; t < 200; ++t) {
      const Vec x = random_vector(problem.p(), rng, 2.0);
      const Vec y = x + random_vector(problem.p(), rng, 0.5 * rng.uniform());
      const double fx = smooth_objective(problem, x);
      const double fy = smooth_objective(problem, y);
      const Vec g = full_grad(problem, x, {}).gradient;
      const double lin = fx + g.dot(y - x);
      const double d2 = (y - x).squaredNorm();
      const double slack = 1e-12 * (1.0 + std::abs(fx));
      expect(r, fy <= lin + 0.5 * s.L_max * d2 + slack,
             fmt("quadratic upper bound violated by", fy - lin - 0.5 * s.L_max * d2));
      expect(r, fy >= lin + 0.5 * s.mu * d2 - slack,
             fmt("strong convexity lower bound violated by", lin + 0.5 * s.mu * d2 - fy));
    }
  }
  return r;
}

PropertyResult prox_nonexpansive_property(std::uint64_t seed) {
  PropertyResult r;
  RandomStream rng(seed);
  for (int t = 0; t < 1000; ++t) {
    const double eta = 0.01 + 3.0 * rng.uniform();
    const Vec u = random_vector(6, rng, 2.0);
    const Vec v = random_vector(6, rng, 2.0);
    for (const auto& reg : regularizers(rng)) {
      const double lhs = (prox(reg, eta, u) - prox(reg, eta, v)).norm();
      const double rhs = (u - v).norm();
      expect(r, lhs <= rhs * (1.0 + 1e-14), reg.describe() + " prox expands a pair");
    }
  }
  return r;
}

PropertyResult prox_optimality_property(std::uint64_t seed) {
  PropertyResult r;
  RandomStream rng(seed);
  for (int t = 0; t < 50; ++t) {
    const double eta = 0.01 + 3.0 * rng.uniform();
    const Vec u = random_vector(5, rng, 2.0);
    for (const auto& reg : regularizers(rng)) {
      const Vec x = prox(reg, eta, u);
      const double best = prox_objective(reg, eta, u, x);
      for (int c = 0; c < 100; ++c) {
        Vec cand = x + random_vector(5, rng, 0.3 * rng.uniform());
        if (reg.is_indicator()) cand = prox(reg, 1.0, cand);  // stay feasible
        const double val = prox_objective(reg, eta, u, cand);
        expect(r, best <= val + 1e-12 * (1.0 + std::abs(val)),
               reg.describe() + " prox output is not optimal");
      }
    }
  }
  return r;
}

PropertyResult prox_structure_property(std::uint64_t seed) {
  PropertyResult r;
  RandomStream rng(seed);
  for (int t = 0; t < 200; ++t) {
    const Regularizer ball = Regularizer::l2_ball(0.2 + 2.0 * rng.uniform());
    const Vec u = random_vector(7, rng, 2.0);
    const Vec once = prox(ball, 1.0, u);
    const Vec twice = prox(ball, 3.0, once);
    expect(r, (once - twice).norm() <= 1e-14 * (1.0 + once.norm()),
           "ball projection is not idempotent");

    const double theta = 0.05 + rng.uniform();
    const Regularizer l1 = Regularizer::l1(theta);
    const double eta = 0.01 + 2.0 * rng.uniform();
    const Vec x_prev = random_vector(7, rng, 1.0);
    const Vec g = random_vector(7, rng, 1.0);
    const Vec x_out = prox(l1, eta, x_prev - eta * g);
    const Vec s = psi_subgradient_from_prox(x_prev, x_out, eta, g);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      const double tol = 1e-9 * (1.0 + std::abs(x_prev[j]) / eta + std::abs(g[j]));
      if (x_out[j] == 0.0) {
        expect(r, std::abs(s[j]) <= theta + tol, fmt("l1 subgradient outside [-theta, theta]:", s[j]));
      } else {
        const double want = x_out[j] > 0.0 ? theta : -theta;
        expect(r, std::abs(s[j] - want) <= tol, fmt("l1 subgradient differs from theta sign:", s[j]));
      }
    }
  }
  return r;
}

}  // namespace estseq::testing
