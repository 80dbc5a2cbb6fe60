#pragma once

#include <vector>

#include "qio/state.hpp"

namespace qio {

// Outcome of running an output-transfer algorithm on (a_S, b_S).
struct TransferReport {
  double xi_measured = 0.0;
  double xi_predicted = 0.0;
  bool xi_observable = true;  // false when b_S = 0
  double fidelity_to_ideal = 0.0;
  Complex a_out = 0.0;  // amplitude on |0>_S |0>_I |0...>
  Complex b_out = 0.0;  // amplitude on |0>_S |1>_I |0...>
  StateVector residual_state_g;  // normalized IR state of the |1>_S branch
  double residual_norm = 0.0;
  StateVector final_state;
  std::vector<double> xi_trace;  // per-step xi, first entry at k = 2 (CS only)
};

// Reads the transfer quantities off a final state whose payload sits in I,
// with S = subsystem 0 and every other subsystem expected in |0>.
TransferReport extract_report(const StateVector& psi, Complex a_s, Complex b_s,
                              double xi_predicted);

}  // namespace qio
