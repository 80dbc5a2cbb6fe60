#pragma once

#include "qio/analysis.hpp"
#include "qio/transfer.hpp"

namespace qio {

// Recursion state of the constant-register transfer after k interface uses.
// The register directions carry any accumulated free-evolution phases, so the
// scalars (eta, mu0, mu1) follow the phase-free recursion exactly.
struct CsStepState {
  int k = 2;
  double eta = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  Vector2 mu0_register_state = Vector2(1.0, 0.0);
  Vector2 mu1_register_state = Vector2(0.0, 1.0);
  Vector4 eta_vector = Vector4::Zero();  // on I ⊗ R, I most significant
  // sqrt(1 - eta^2) through the normalization identity; the direct form
  // cancels catastrophically once eta approaches one
  double xi() const { return std::hypot(mu0, mu1); }
};

struct CsBounds {
  enum class Regime { A, B0, B1, B2, not_exploitable };
  Regime regime = Regime::not_exploitable;
  double lower = 0.0;
  double upper = 0.0;
};

CsBounds::Regime cs_regime(const InterfaceAnalysis& u);
CsBounds cs_bounds(const InterfaceAnalysis& u, int n_uses);
const char* to_string(CsBounds::Regime r);

// First two interface uses: S_1 followed by the first retrieval map. theta1,
// theta2 are free-evolution phases on |1>_S picked up after each use.
std::pair<CsStepState, StateVector> cs_initialize(const InterfaceAnalysis& u,
                                                  Complex a_s, Complex b_s,
                                                  double theta1 = 0.0,
                                                  double theta2 = 0.0);

// One more interface use: U_int, the phase window, then the retrieval map
// built from the current recursion state. Mutates both in place.
void cs_step(const InterfaceAnalysis& u, CsStepState& s, StateVector& psi,
             double theta = 0.0);

// Full run with n_uses >= 2; thetas (optional) holds one phase per use.
// The payload ends in I (a final I-R swap is appended).
TransferReport run_cs(const InterfaceAnalysis& u, int n_uses, Complex a_s,
                      Complex b_s, const std::vector<double>& thetas = {});

}  // namespace qio
