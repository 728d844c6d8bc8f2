#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "estseq/dataset.hpp"
#include "estseq/objective.hpp"
#include "estseq/rng.hpp"

namespace estseq::testing {

// Synthetic ridge problem on unit-norm rows.
Problem synthetic_problem(std::size_t n, std::int64_t p, double lambda,
                          Loss loss = Loss::logistic, std::uint64_t seed = 7, double flip = 0.05,
                          NoiseModel noise = NoiseModel::none(),
                          Regularizer psi = Regularizer::zero());

// Dataset from dense rows given row-major.
std::shared_ptr<const Dataset> dense_dataset(std::int64_t p, const std::vector<double>& rows,
                                             const std::vector<double>& labels);

// Squared hinge on rows (1, 0) and (-1, 0), both labelled +1. Near the origin
// f(x) = 1 + x_1^2 + (lambda/2)||x||^2, a quadratic with Hessian
// diag(2 + lambda, lambda) and minimizer 0.
Problem two_point_quadratic(double lambda);

Vec random_vector(std::int64_t p, RandomStream& rng, double scale = 1.0);

// Central differences of fn at x with step h.
Vec numeric_gradient(const std::function<double(const Vec&)>& fn, const Vec& x, double h = 1e-5);

// |a - b| / max(1, |b|) style relative error for vectors.
double relative_error(const Vec& a, const Vec& b);

}  // namespace estseq::testing
