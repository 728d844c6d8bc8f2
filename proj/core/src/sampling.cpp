#include "estseq/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace estseq {

SamplingDist::SamplingDist(std::vector<double> q, std::span<const double> lipschitz)
    : q_(std::move(q)) {
  const std::size_t n = q_.size();
  if (n == 0) throw std::invalid_argument("sampling distribution needs at least one index");
  if (lipschitz.size() != n)
    throw std::invalid_argument("sampling distribution and Lipschitz list differ in size");
  double total = 0.0;
  for (double qi : q_) {
    if (!(qi > 0.0)) throw std::invalid_argument("sampling probabilities must be positive");
    total += qi;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("sampling probabilities must sum to one");

  uniform_ = std::all_of(q_.begin(), q_.end(), [&](double qi) { return qi == q_.front(); });
  weights_.resize(n);
  cdf_.resize(n);
  double acc = 0.0;
  double q_min = q_.front();
  L_Q_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights_[i] = uniform_ ? 1.0 : 1.0 / (q_[i] * static_cast<double>(n));
    acc += q_[i];
    cdf_[i] = acc;
    q_min = std::min(q_min, q_[i]);
    L_Q_ = std::max(L_Q_, lipschitz[i] * weights_[i]);
  }
  cdf_.back() = 1.0;
  rho_Q_ = uniform_ ? 1.0 : 1.0 / (static_cast<double>(n) * q_min);
}

std::size_t SamplingDist::sample(RandomStream& rng) const {
  if (uniform_) return rng.uniform_index(q_.size());
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), q_.size() - 1);
}

SamplingDist make_distribution(SamplingMode mode, std::span<const double> lipschitz) {
  const std::size_t n = lipschitz.size();
  if (n == 0) throw std::invalid_argument("empty Lipschitz list");
  for (double L : lipschitz)
    if (!(L > 0.0)) throw std::invalid_argument("Lipschitz constants must be positive");
  std::vector<double> q(n);
  if (mode == SamplingMode::uniform) {
    std::fill(q.begin(), q.end(), 1.0 / static_cast<double>(n));
    // n * (1/n) may miss 1 by a few ulps; the constructor tolerates 1e-12.
  } else {
    const double total = std::accumulate(lipschitz.begin(), lipschitz.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) q[i] = lipschitz[i] / total;
  }
  return SamplingDist(std::move(q), lipschitz);
}

NoiseModel NoiseModel::dropout(double delta) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  return {Kind::dropout, delta};
}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("gaussian noise level must be finite and non-negative");
  return {Kind::gaussian, sigma};
}

std::string NoiseModel::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::none: return "none";
    case Kind::dropout: os << "dropout:" << param; break;
    case Kind::gaussian: os << "gaussian:" << param; break;
  }
  return os.str();
}

void add_gaussian_noise(double sigma, std::uint64_t seed, double scale, Vec& out) {
  RandomStream rng(seed);
  const double sd = sigma / std::sqrt(static_cast<double>(out.size()));
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] += scale * sd * rng.normal();
}

Vec gaussian_noise(std::int64_t p, double sigma, std::uint64_t seed) {
  Vec out = Vec::Zero(p);
  add_gaussian_noise(sigma, seed, 1.0, out);
  return out;
}

Perturbation perturb(const NoiseModel& noise, SparseRowView row, std::int64_t dim,
                     std::uint64_t seed) {
  if (noise.kind == NoiseModel::Kind::gaussian) return gaussian_noise(dim, noise.param, seed);
  SparseRow out;
  out.indices.assign(row.indices.begin(), row.indices.end());
  out.values.assign(row.values.begin(), row.values.end());
  if (noise.kind == NoiseModel::Kind::dropout) {
    DropoutMask mask(noise.param, seed);
    for (double& v : out.values)
      if (!mask.keep()) v = 0.0;
  }
  return out;
}

void SeedRegistry::record(std::size_t i, std::uint64_t seed) {
  seeds_.at(i) = seed;
  recorded_.at(i) = true;
}

std::uint64_t SeedRegistry::replay(std::size_t i) const {
  if (i >= seeds_.size() || !recorded_[i])
    throw std::out_of_range("seed registry: index " + std::to_string(i) + " was never recorded");
  return seeds_[i];
}

}  // namespace estseq
