#pragma once

#include <string>

namespace estseq::testing {

struct PropertyResult {
  bool ok = true;
  std::size_t checks = 0;
  std::string failure;  // first failing check
};

// phi' against central differences at 100 margins in [-10, 10], h = 1e-5, tol 1e-6.
PropertyResult loss_derivative_property(std::uint64_t seed);
// component and full gradients against finite differences, 1e-6 relative.
PropertyResult gradient_fd_property(std::uint64_t seed);
// Quadratic upper bound with L_max and lower bound with mu on random pairs.
PropertyResult smoothness_property(std::uint64_t seed);
// Nonexpansiveness over 1000 random pairs per regularizer.
PropertyResult prox_nonexpansive_property(std::uint64_t seed);
// Prox output beats 100 perturbed candidates of the prox objective.
PropertyResult prox_optimality_property(std::uint64_t seed);
// Indicator prox is idempotent; l1 subgradients recovered from the prox lie in
// the subdifferential.
PropertyResult prox_structure_property(std::uint64_t seed);

}  // namespace estseq::testing
