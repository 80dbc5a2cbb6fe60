#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "qio/state.hpp"

namespace qio {

// Subsystem layout shared by every sequence: S = 0, I = 1, R_k = 1 + k for
// k = 1..N, and the optional extra register R_S at index N + 2.

// Interface unitary on (s_slot, I). s_slot = 0 is the physical system; the
// adjoint-based retrieval circuit plays the same pattern with R_S in the
// system slot.
struct ApplyInterface {
  bool adjoint = false;
  int s_slot = 0;
};

struct SwapStep {
  int a = 1;
  int b = 2;
};

// Arbitrary unitary on subsystems of I ∪ R (never S).
struct RegisterUnitary {
  Matrix u;
  std::vector<int> targets;
};

// Free evolution of S for `duration`; a no-op unless the execution context
// carries a system Hamiltonian.
struct WaitStep {
  double duration = 0.0;
};

using Step = std::variant<ApplyInterface, SwapStep, RegisterUnitary, WaitStep>;

struct GateSequence {
  std::vector<Step> steps;
  int register_count = 0;
  bool has_rs = false;

  int subsystem_count() const { return 2 + register_count + (has_rs ? 1 : 0); }
  int rs_index() const { return 2 + register_count; }
  std::vector<int> dims() const { return std::vector<int>(subsystem_count(), 2); }
  // Checks register unitaries for unitarity and all indices for range.
  void validate() const;
  GateSequence adjoint() const;
};

struct ExecutionContext {
  Matrix u_int;                       // 4x4 on (system slot, I)
  std::optional<Matrix2> h_system;    // drives WaitStep phases on S
};

void run_sequence(const GateSequence& seq, const ExecutionContext& ctx,
                  StateVector& psi);

// Composes the whole sequence into one matrix on the full space.
Matrix sequence_unitary(const GateSequence& seq, const ExecutionContext& ctx);

}  // namespace qio
