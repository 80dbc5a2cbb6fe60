#include "qio/hamiltonian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qio {

namespace {

Matrix2 pauli_z() {
  Matrix2 z;
  z << 1, 0, 0, -1;
  return z;
}

Matrix2 pauli_x() {
  Matrix2 x;
  x << 0, 1, 1, 0;
  return x;
}

}  // namespace

HamiltonianPair::HamiltonianPair(const Matrix2& hs, const Matrix4& hint)
    : h_s(hs), h_int(hint) {
  if (!is_hermitian(Matrix(hs)) || !is_hermitian(Matrix(hint)))
    throw std::invalid_argument("HamiltonianPair: inputs must be Hermitian");
  h_on = tensor(Matrix(hs), Matrix::Identity(2, 2)) + hint;
}

HamiltonianPair HamiltonianPair::zz(double r, double g) {
  return HamiltonianPair(g * pauli_z(), r * tensor(Matrix(pauli_z()), Matrix(pauli_z())));
}

HamiltonianPair HamiltonianPair::xx(double r, double g) {
  return HamiltonianPair(g * pauli_z(), r * tensor(Matrix(pauli_x()), Matrix(pauli_x())));
}

Matrix interface_from_hamiltonian(const HamiltonianPair& pair, double tau) {
  return expm_hermitian(pair.h_on, tau);
}

Matrix build_u_eff(const HamiltonianPair& pair, double tau, double T, double s) {
  Matrix half = expm_hermitian(pair.h_on, tau);
  Matrix v = tensor(expm_hermitian(Matrix(pair.h_s), T),
                    expm_hermitian(Matrix(pauli_z()), -s));  // e^{+iZs}
  Matrix u = half * v * half;
  if (!is_unitary(u)) throw std::runtime_error("build_u_eff: product not unitary");
  return u;
}

int EffectiveInterfaceSolution::n_star_for(double xi_eps) const {
  if (xi_eps <= 0.0 || xi_eps >= 1.0)
    throw std::invalid_argument("n_star_for: xi_eps must be in (0,1)");
  return (int)std::ceil(std::log(xi_eps) / std::log(predicted_beta));
}

EffectiveInterfaceSolution solve_effective_interface(double r, double g) {
  if (r == 0.0 || g == 0.0)
    throw std::invalid_argument(
        "solve_effective_interface: no exploitable solution for r = 0 or g = 0");
  EffectiveInterfaceSolution sol;
  sol.r = r;
  sol.g = g;
  sol.omega_bar = std::hypot(r, g);
  // tan(theta*) = -omega_bar / g, principal branch; the switched-off duration
  // is then T* = -theta*/(2g) > 0, the smallest positive choice compatible
  // with the off-corner zero at s - g T = theta* (mod pi).
  sol.theta_star = std::atan(-sol.omega_bar / g);
  sol.tau_star = std::numbers::pi / (4.0 * sol.omega_bar);
  sol.T_star = -sol.theta_star / (2.0 * g);
  sol.s_star = sol.theta_star / 2.0;
  // At this point the residual amplitude on S after one use is g/omega_bar
  // (the coupling r drives the transfer; the detuning g obstructs it).
  sol.predicted_beta = std::abs(g) / sol.omega_bar;
  return sol;
}

double end_to_end_time_cost(const EffectiveInterfaceSolution& sol, double xi_eps,
                            double delta_t) {
  return (2.0 * sol.tau_star + sol.T_star + delta_t) * sol.n_star_for(xi_eps);
}

ZzFamilyVerdict classify_zz_family(double r, double g,
                                   const std::vector<double>& times) {
  ZzFamilyVerdict v;
  HamiltonianPair pair = HamiltonianPair::zz(r, g);
  for (double t : times) {
    Matrix u = interface_from_hamiltonian(pair, t);
    for (int row = 0; row < 2; ++row)
      for (int col = 2; col < 4; ++col)
        if (std::abs(u(row, col)) > kStructuralTol || std::abs(u(col, row)) > kStructuralTol)
          v.always_block_diagonal = false;
    v.max_schmidt_number = std::max(v.max_schmidt_number, operator_schmidt_number(u));
    if (classify(u).exploitable) v.never_exploitable = false;
  }
  return v;
}

}  // namespace qio
