#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "estseq/dataset.hpp"
#include "estseq/rng.hpp"

namespace estseq {

enum class SamplingMode { uniform, lipschitz };

// Index distribution Q with its constants L_Q = max_i L_i / (q_i n) and
// rho_Q = 1 / (n min_i q_i).
class SamplingDist {
 public:
  // Validates q_i > 0 and |sum q - 1| <= 1e-12.
  SamplingDist(std::vector<double> q, std::span<const double> lipschitz);

  std::size_t size() const { return q_.size(); }
  double q(std::size_t i) const { return q_[i]; }
  const std::vector<double>& probabilities() const { return q_; }
  // 1 / (q_i n), the importance weight of index i.
  double weight(std::size_t i) const { return weights_[i]; }
  double L_Q() const { return L_Q_; }
  double rho_Q() const { return rho_Q_; }
  bool is_uniform() const { return uniform_; }

  std::size_t sample(RandomStream& rng) const;

 private:
  std::vector<double> q_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
  double L_Q_ = 0.0;
  double rho_Q_ = 1.0;
  bool uniform_ = false;
};

SamplingDist make_distribution(SamplingMode mode, std::span<const double> lipschitz);

inline std::size_t sample_index(const SamplingDist& dist, RandomStream& rng) {
  return dist.sample(rng);
}

// Perturbation applied to each observed component gradient.
struct NoiseModel {
  enum class Kind { none, dropout, gaussian };

  Kind kind = Kind::none;
  double param = 0.0;  // dropout rate delta, or gaussian sigma_tilde

  static NoiseModel none() { return {}; }
  static NoiseModel dropout(double delta);
  static NoiseModel gaussian(double sigma);

  bool active() const {
    return kind != Kind::none && param > 0.0;
  }
  std::string describe() const;
};

// The per-entry DropOut mask stream for one seed. Entries are visited in
// storage order and each is kept with probability 1 - delta.
class DropoutMask {
 public:
  DropoutMask(double delta, std::uint64_t seed) : delta_(delta), rng_(seed) {}
  bool keep() { return !rng_.bernoulli(delta_); }

 private:
  double delta_;
  RandomStream rng_;
};

// Seeded noise vector with i.i.d. N(0, sigma^2 / p) entries, so that its
// expected squared norm is sigma^2.
Vec gaussian_noise(std::int64_t p, double sigma, std::uint64_t seed);
// out += scale * gaussian_noise(p, sigma, seed) without allocating.
void add_gaussian_noise(double sigma, std::uint64_t seed, double scale, Vec& out);

// DropOut row (stored entries zeroed, sparsity pattern kept) or the gradient
// noise vector for the gaussian model. For Kind::none the row is returned
// unchanged.
using Perturbation = std::variant<SparseRow, Vec>;
Perturbation perturb(const NoiseModel& noise, SparseRowView row, std::int64_t dim,
                     std::uint64_t seed);

// Per-index seeds of the perturbations used at the last anchor refresh, so
// that the anchor gradients can be regenerated instead of stored.
class SeedRegistry {
 public:
  explicit SeedRegistry(std::size_t n = 0) : seeds_(n, 0), recorded_(n, false) {}

  void resize(std::size_t n) {
    seeds_.assign(n, 0);
    recorded_.assign(n, false);
  }
  void record(std::size_t i, std::uint64_t seed);
  std::uint64_t replay(std::size_t i) const;
  bool recorded(std::size_t i) const { return recorded_.at(i); }
  std::size_t size() const { return seeds_.size(); }
  std::span<const std::uint64_t> seeds() const { return seeds_; }

  // Number of completed anchor refreshes.
  std::uint64_t epoch() const { return epoch_; }
  void bump_epoch() { ++epoch_; }

 private:
  std::vector<std::uint64_t> seeds_;
  std::vector<bool> recorded_;
  std::uint64_t epoch_ = 0;
};

}  // namespace estseq
