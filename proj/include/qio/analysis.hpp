#pragma once

#include <optional>

#include "qio/linalg.hpp"

namespace qio {

// Product basis of the system and interface qubits; columns are |0> and |1>.
struct LocalBasis {
  Matrix2 basis_s = Matrix2::Identity();
  Matrix2 basis_i = Matrix2::Identity();

  static LocalBasis computational() { return {}; }
  // |0>_S from Bloch angles (theta, phi); |1> is the canonical orthocomplement.
  static LocalBasis from_bloch(double theta_s, double phi_s, double theta_i,
                               double phi_i);
  Matrix product_unitary() const;  // basis_s ⊗ basis_i
  bool valid(double tol = kStructuralTol) const;
};

// Derived quantities of an interface unitary in a given local basis.
struct InterfaceAnalysis {
  LocalBasis basis;
  Matrix4 u;  // matrix elements u_{ij,kl} in the local basis

  double alpha = 0.0;
  double beta = 0.0;
  Complex gamma = 0.0;
  double omega = 0.0;

  Vector2 psi0, psi1, phi, phi_prime;
  bool psi1_defined = false, phi_defined = false, phi_prime_defined = false;
  Complex overlap_psi0_phi = 0.0;

  double form_residual = 0.0;  // |u_{10,00}|^2 + |u_{11,00}|^2
  bool in_u_star = false;

  bool exploitable() const;
};

InterfaceAnalysis analyze_in_basis(const Matrix& u, const LocalBasis& basis);

// Searches for a local basis with u_{10,00} = u_{11,00} = 0. Multi-start
// Bloch-sphere optimization; among feasible bases the beta-minimizing one is
// returned (ties broken by lexicographic Bloch angles).
std::optional<LocalBasis> find_feasible_basis(const Matrix& u);

enum class FailureReason {
  none,
  no_feasible_basis,
  controlled_unitary_degenerate,
  beta_one_and_overlap_one,
  beta_one_and_omega_one,
};

struct ExploitabilityVerdict {
  bool in_u_star = false;
  bool exploitable = false;
  std::optional<LocalBasis> feasible_basis;
  std::optional<InterfaceAnalysis> analysis;
  FailureReason failure_reason = FailureReason::none;
};

ExploitabilityVerdict classify(const Matrix& u);

const char* to_string(FailureReason r);

// Feasibility residual minimized over the interface factor in closed form:
// 1 - sigma_max((<a|_S ⊗ I) u (|a>_S ⊗ I))^2 for |a> at the given Bloch angles.
double feasibility_residual(const Matrix& u, double theta_s, double phi_s);

// Acceptance threshold on the summed squared corner magnitudes.
inline constexpr double kFeasibilityResidualTol = 1e-16;
// Equality thresholds for the degenerate-condition tests (beta = 1 etc).
inline constexpr double kDegenerateTol = 1e-9;

}  // namespace qio
