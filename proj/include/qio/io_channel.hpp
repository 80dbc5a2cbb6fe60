#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qio/cs.hpp"
#include "qio/ls.hpp"
#include "qio/sequence.hpp"

namespace qio {

// Output transfer, a target map on the transferred qubit and an external
// system E, and an input transfer back. Both sequences share one interface
// unitary and one local basis.
struct IoChannel {
  GateSequence output_seq;
  GateSequence input_seq;
  Matrix target;  // unitary on (transferred qubit) ⊗ E
  Matrix u_int;   // interface unitary in the shared basis
  double xi_out = 0.0;
  double xi_in = 0.0;
  int dim_e = 2;
};

// Runs output, target on (I, E), input, and traces out I and R.
Matrix compose_phi(const IoChannel& ch, const Vector& input_se);

// Same composition with explicit unitaries on S ⊗ I ⊗ R^m instead of
// sequences.
Matrix compose_phi_unitaries(const Matrix& t_out, const Matrix& t_in,
                             const Matrix& target, int m_registers, int dim_e,
                             const Vector& input_se);

struct BoundReport {
  double xi_out = 0.0;
  double xi_in = 0.0;
  double cap_xi = 0.0;    // -1 + sqrt(1-xi_out^2) + sqrt(1-xi_in^2) - xi_out xi_in
  double bound = 0.0;     // 2 sqrt(1 - cap_xi^2), or 2 when cap_xi < 0
  double measured_distance = 0.0;
  int samples = 0;
  bool converged = false;
};

double lemma1_cap_xi(double xi_out, double xi_in);
double lemma1_bound(double xi_out, double xi_in);

// Worst-case distance of the composed channel from the target: minimizes the
// overlap of the two orderings (target-then-input vs output-then-target) over
// pure states of S ⊗ E, then reports 2 sqrt(1 - min|F|^2).
BoundReport verify_lemma1_unitaries(const Matrix& t_out, const Matrix& t_in,
                                    const Matrix& u_m, int m_registers,
                                    int dim_e, double xi_out, double xi_in,
                                    int sample_budget, std::uint64_t seed);

BoundReport verify_lemma1(const IoChannel& ch, const Matrix& u_m,
                          int sample_budget, std::uint64_t seed);

// Unitary on S ⊗ I ⊗ R^m acting as an exact transfer up to a leak of
// amplitude xi onto a random |1>_S branch.
Matrix make_transfer_unitary(double xi, int m_registers, std::mt19937_64& rng);

// Embeds op (acting on `targets`, most significant first) into the full space.
Matrix embed_operator(const Matrix& op, const std::vector<int>& dims,
                      const std::vector<int>& targets);

enum class InputSynthesisFailure {
  none,
  not_exploitable,
  adjoint_controlled,
  no_shared_basis,
};

struct InputSynthesis {
  GateSequence sequence;  // T_in: only U_int, register unitaries and swaps
  LocalBasis basis;
  InterfaceAnalysis analysis_u;
  InterfaceAnalysis analysis_u_dagger;
  double xi_in = 0.0;
};

struct InputSynthesisResult {
  std::optional<InputSynthesis> synthesis;
  InputSynthesisFailure failure = InputSynthesisFailure::none;
  std::string diagnostic;
};

// Input operation as the adjoint of the spread-and-retrieve circuit built for
// U_int^dagger, valid when U_int and its adjoint are exploitable in one local
// basis. Absence is an answer, with a diagnostic on the block structure.
InputSynthesisResult synthesize_input(const Matrix& u, int m_registers);

// Free-evolution phase corrections. Entry k lives on register slot k
// (subsystem 1 + k) for k = 1..N; the final entry acts on I. Phases
// accumulate: theta_k = eigengap * off_durations[k-1].
struct PhaseCorrection {
  int subsystem;
  Matrix2 v;
};
std::vector<PhaseCorrection> hs_phase_adjustment(
    const InterfaceAnalysis& u, double hs_eigengap,
    const std::vector<double>& off_durations);

// Eigenvalues (e0, e1) of a lab-frame system Hamiltonian expressed in the
// feasible system basis; throws if that basis does not diagonalize it.
std::pair<double, double> hs_eigenvalues_in_basis(const InterfaceAnalysis& u,
                                                  const Matrix2& h_s_lab);

// Full spread-and-retrieve run with the system Hamiltonian switched on during
// the off windows (energies e0, e1 in the feasible S basis), optionally with
// the register-side corrections and the matching retrieval map.
TransferReport run_ls_with_hs(const InterfaceAnalysis& u, int n_registers,
                              Complex a_s, Complex b_s, double e0, double e1,
                              const std::vector<double>& off_durations,
                              bool corrected);

TransferReport run_cs_with_hs(const InterfaceAnalysis& u, int n_uses,
                              Complex a_s, Complex b_s, double e0, double e1,
                              const std::vector<double>& off_durations);

}  // namespace qio
