#pragma once

#include <vector>

#include "qio/linalg.hpp"

namespace qio {

// Dense pure state over a list of finite-dimensional subsystems. The leftmost
// subsystem owns the most significant index digit. All mutating operations
// return a new value or mutate explicitly; no shared internal state.
struct StateVector {
  Vector amplitudes;
  std::vector<int> subsystem_dims;

  StateVector() = default;
  StateVector(Vector amps, std::vector<int> dims);

  // All subsystems in |0>.
  static StateVector zero(const std::vector<int>& dims);
  static StateVector product(const std::vector<Vector>& factors);

  long dim() const { return amplitudes.size(); }
  int subsystem_count() const { return (int)subsystem_dims.size(); }
  double norm() const { return amplitudes.norm(); }

  // Applies u to the listed subsystems; targets[0] is the most significant
  // index digit of u's own index space.
  void apply(const Matrix& u, const std::vector<int>& targets);
  void swap_subsystems(int a, int b);

  Matrix reduced_density(const std::vector<int>& keep) const;

  Complex overlap(const StateVector& other) const;
  double fidelity(const StateVector& other) const;

  // Norm of the component with subsystem `sub` in basis state `value`.
  double component_norm(int sub, int value) const;
  // Sub-normalized state obtained by projecting subsystem `sub` onto `value`
  // and dropping that subsystem.
  StateVector project(int sub, int value) const;
};

}  // namespace qio
