#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace estseq::testing {

Problem synthetic_problem(std::size_t n, std::int64_t p, double lambda, Loss loss,
                          std::uint64_t seed, double flip, NoiseModel noise, Regularizer psi) {
  auto data = std::make_shared<const Dataset>(synthesize(n, p, seed, flip));
  return Problem(data, loss, lambda, psi, noise);
}

std::shared_ptr<const Dataset> dense_dataset(std::int64_t p, const std::vector<double>& rows,
                                             const std::vector<double>& labels) {
  std::vector<std::int64_t> row_ptr{0};
  std::vector<std::int32_t> indices;
  std::vector<double> values;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::int64_t j = 0; j < p; ++j) {
      const double v = rows[i * static_cast<std::size_t>(p) + static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      indices.push_back(static_cast<std::int32_t>(j));
      values.push_back(v);
    }
    row_ptr.push_back(static_cast<std::int64_t>(values.size()));
  }
  return std::make_shared<const Dataset>(p, std::move(row_ptr), std::move(indices),
                                         std::move(values), labels);
}

Problem two_point_quadratic(double lambda) {
  return Problem(dense_dataset(2, {1.0, 0.0, -1.0, 0.0}, {1.0, 1.0}), Loss::squared_hinge,
                 lambda);
}

Vec random_vector(std::int64_t p, RandomStream& rng, double scale) {
  Vec v(p);
  for (std::int64_t j = 0; j < p; ++j) v[j] = scale * rng.normal();
  return v;
}

Vec numeric_gradient(const std::function<double(const Vec&)>& fn, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    const double fp = fn(xp);
    xp[j] = x[j] - h;
    const double fm = fn(xp);
    xp[j] = x[j];
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_error(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace estseq::testing
