#include "qio/ls.hpp"

#include <cmath>
#include <stdexcept>

namespace qio {

GateSequence build_s_n(const InterfaceAnalysis& u, int n_registers) {
  if (!u.in_u_star) throw std::invalid_argument("build_s_n: unitary is not in U*");
  if (n_registers < 0 || n_registers > 12)
    throw std::invalid_argument("build_s_n: register count out of range");
  GateSequence seq;
  seq.register_count = n_registers;
  seq.steps.push_back(ApplyInterface{});
  for (int k = 1; k <= n_registers; ++k) {
    seq.steps.push_back(SwapStep{1, 1 + k});
    seq.steps.push_back(ApplyInterface{});
  }
  return seq;
}

namespace {

// Product vector over (I, R_1..R_N) with the given per-factor states.
Vector product_over_ir(const Vector2& i_state, const std::vector<Vector2>& r_states) {
  Vector v(i_state);
  // I is the most significant factor of the retrieval operator's index space.
  for (const auto& r : r_states) v = tensor(v, Vector(r));
  return v;
}

}  // namespace

Matrix build_w_n_with_history(const InterfaceAnalysis& u, int n_registers,
                              const std::vector<Vector2>& slot_phi) {
  if (!u.in_u_star) throw std::invalid_argument("build_w_n: unitary is not in U*");
  if (u.beta >= 1.0 - kDegenerateTol)
    throw std::invalid_argument("build_w_n: beta = 1, retrieval map undefined");
  if (n_registers < 0 || n_registers > 9)
    throw std::invalid_argument("build_w_n: register count out of range");
  if ((int)slot_phi.size() != n_registers)
    throw std::invalid_argument("build_w_n: history size mismatch");
  const int n = n_registers;
  const long dim = 1L << (n + 1);

  std::vector<Vector2> all_psi0(n, u.psi0);
  Vector s1 = product_over_ir(u.psi0, all_psi0);

  Vector s2 = Vector::Zero(dim);
  double w = 1.0;
  for (int k = 1; k <= n + 1; ++k) {
    std::vector<Vector2> r(n);
    for (int j = 1; j <= n; ++j) {
      if (j < k)
        r[j - 1] = slot_phi[j - 1];
      else if (j == k)
        r[j - 1] = u.psi1;
      else
        r[j - 1] = u.psi0;
    }
    Vector2 i_state = (k == n + 1) ? u.psi1 : u.psi0;
    s2 += w * product_over_ir(i_state, r);
    w *= u.beta;
  }
  s2 /= s2.norm();

  Vector t1 = Vector::Zero(dim);
  t1(0) = 1.0;
  Vector t2 = Vector::Zero(dim);
  t2(1L << n) = 1.0;  // |1>_I |0>^N

  return complete_to_unitary({s1, s2}, {t1, t2});
}

Matrix build_w_n(const InterfaceAnalysis& u, int n_registers) {
  if (!u.phi_defined && n_registers > 0 && u.beta > 1e-10)
    throw std::invalid_argument("build_w_n: phi undefined");
  std::vector<Vector2> history(n_registers,
                               u.phi_defined ? u.phi : Vector2(1.0, 0.0));
  return build_w_n_with_history(u, n_registers, history);
}

TransferReport extract_report(const StateVector& psi, Complex a_s, Complex b_s,
                              double xi_predicted) {
  TransferReport rep;
  rep.xi_predicted = xi_predicted;
  rep.final_state = psi;

  rep.residual_norm = psi.component_norm(0, 1);
  if (std::abs(b_s) > 1e-12) {
    rep.xi_measured = rep.residual_norm / std::abs(b_s);
    rep.xi_observable = true;
  } else {
    rep.xi_measured = xi_predicted;
    rep.xi_observable = false;
  }
  StateVector g = psi.project(0, 1);
  if (rep.residual_norm > 1e-12) {
    g.amplitudes /= rep.residual_norm;
    rep.residual_state_g = g;
  }

  // payload amplitudes: |0>_S |0>_I |0...> and |0>_S |1>_I |0...>
  long i_stride = psi.dim() / 4;
  rep.a_out = psi.amplitudes(0);
  rep.b_out = psi.amplitudes(i_stride);
  rep.fidelity_to_ideal =
      std::norm(std::conj(a_s) * rep.a_out + std::conj(b_s) * rep.b_out);
  return rep;
}

TransferReport run_ls(const InterfaceAnalysis& u, int n_registers, Complex a_s,
                      Complex b_s) {
  if (std::abs(std::norm(a_s) + std::norm(b_s) - 1.0) > 1e-9)
    throw std::invalid_argument("run_ls: input amplitudes not normalized");
  if (!u.exploitable())
    throw std::invalid_argument("run_ls: unitary is not exploitable");

  GateSequence seq = build_s_n(u, n_registers);
  Matrix w = build_w_n(u, n_registers);

  StateVector psi = StateVector::zero(seq.dims());
  psi.amplitudes(0) = a_s;
  psi.amplitudes(psi.dim() / 2) = b_s;  // |1>_S |0...>

  ExecutionContext ctx{u.u, std::nullopt};
  run_sequence(seq, ctx, psi);

  std::vector<int> w_targets(n_registers + 1);
  for (int i = 0; i <= n_registers; ++i) w_targets[i] = 1 + i;
  psi.apply(w, w_targets);

  return extract_report(psi, a_s, b_s, std::pow(u.beta, n_registers + 1));
}

GateSequence build_w_n_via_adjoint(const InterfaceAnalysis& u, int n_registers) {
  if (!u.in_u_star)
    throw std::invalid_argument("build_w_n_via_adjoint: unitary is not in U*");
  if (u.beta >= 1.0 - kDegenerateTol)
    throw std::invalid_argument("build_w_n_via_adjoint: beta = 1");
  GateSequence seq;
  seq.register_count = n_registers;
  seq.has_rs = true;
  const int rs = seq.rs_index();
  // (S_N)^dagger with R_S in the system slot: reversed swaps, adjoint U_int.
  seq.steps.push_back(ApplyInterface{true, rs});
  for (int k = n_registers; k >= 1; --k) {
    seq.steps.push_back(SwapStep{1, 1 + k});
    seq.steps.push_back(ApplyInterface{true, rs});
  }
  seq.steps.push_back(SwapStep{1, rs});
  return seq;
}

}  // namespace qio
