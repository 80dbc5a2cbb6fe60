#pragma once

#include "qio/analysis.hpp"
#include "qio/sequence.hpp"
#include "qio/transfer.hpp"

namespace qio {

// Spreading circuit: U_int, swap(I,R_1), U_int, ..., swap(I,R_N), U_int.
// N + 1 interface applications, N swaps. Requires u.in_u_star.
GateSequence build_s_n(const InterfaceAnalysis& u, int n_registers);

// Retrieval unitary on I ⊗ R^N (I = most significant factor): maps the
// all-psi0 product to |0...0> and the normalized spread superposition to
// |1>_I |0>^N. Requires beta < 1. Explicit matrix; n_registers <= 9.
Matrix build_w_n(const InterfaceAnalysis& u, int n_registers);

// Variant with per-slot replacements of the spread-history states, used by
// the free-evolution phase corrections: slot_phi[j] is the interface state
// deposited in R_{j+1} (defaults to phi everywhere).
Matrix build_w_n_with_history(const InterfaceAnalysis& u, int n_registers,
                              const std::vector<Vector2>& slot_phi);

// Full run of T_N = (I ⊗ W_N) S_N on (a|0> + b|1>)_S |0>_I |0>^N.
TransferReport run_ls(const InterfaceAnalysis& u, int n_registers, Complex a_s,
                      Complex b_s);

// Retrieval by the adjoint-interface circuit with the extra register R_S:
// returns the steps implementing w_N = (S_N)^dagger on (R_S, I, R^N) followed
// by swap(R_S, I). Run after build_s_n on a state that includes R_S.
GateSequence build_w_n_via_adjoint(const InterfaceAnalysis& u, int n_registers);

}  // namespace qio
