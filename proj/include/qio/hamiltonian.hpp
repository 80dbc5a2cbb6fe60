#pragma once

#include "qio/analysis.hpp"

namespace qio {

// System Hamiltonian plus fixed interaction; h_on = h_s ⊗ I + h_int.
struct HamiltonianPair {
  Matrix2 h_s;
  Matrix4 h_int;
  Matrix4 h_on;

  HamiltonianPair(const Matrix2& hs, const Matrix4& hint);

  // diag(g, -g) on S with r Z⊗Z coupling
  static HamiltonianPair zz(double r, double g);
  // diag(g, -g) on S with r X⊗X coupling
  static HamiltonianPair xx(double r, double g);
};

Matrix interface_from_hamiltonian(const HamiltonianPair& pair, double tau);

// e^{-i h_on tau} (e^{-i h_s T} ⊗ e^{+i Z s}) e^{-i h_on tau}
Matrix build_u_eff(const HamiltonianPair& pair, double tau, double T, double s);

struct EffectiveInterfaceSolution {
  double r = 0.0, g = 0.0;
  double omega_bar = 0.0;
  double theta_star = 0.0;
  double tau_star = 0.0;
  double T_star = 0.0;
  double s_star = 0.0;
  double predicted_beta = 0.0;
  int n_star_for(double xi_eps) const;
};

// Exploitable switched-evolution parameters for the X⊗X family.
EffectiveInterfaceSolution solve_effective_interface(double r, double g);

// (2 tau* + T* + delta_T) * N*
double end_to_end_time_cost(const EffectiveInterfaceSolution& sol, double xi_eps,
                            double delta_t);

struct ZzFamilyVerdict {
  bool always_block_diagonal = true;
  bool never_exploitable = true;
  int max_schmidt_number = 0;
};

// Samples e^{-i h_on t} for the Z⊗Z family and checks that every sample is a
// controlled (block-diagonal) unitary that fails the exploitability test.
ZzFamilyVerdict classify_zz_family(double r, double g,
                                   const std::vector<double>& times);

}  // namespace qio
