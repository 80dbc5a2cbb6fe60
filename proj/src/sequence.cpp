#include "qio/sequence.hpp"

#include <stdexcept>

namespace qio {

void GateSequence::validate() const {
  const int n = subsystem_count();
  for (const auto& step : steps) {
    if (const auto* a = std::get_if<ApplyInterface>(&step)) {
      if (a->s_slot < 0 || a->s_slot >= n || a->s_slot == 1)
        throw std::invalid_argument("sequence: bad interface system slot");
    } else if (const auto* s = std::get_if<SwapStep>(&step)) {
      if (s->a < 0 || s->a >= n || s->b < 0 || s->b >= n)
        throw std::invalid_argument("sequence: swap index out of range");
      if (s->a == 0 || s->b == 0)
        throw std::invalid_argument("sequence: swap may not touch S");
    } else if (const auto* r = std::get_if<RegisterUnitary>(&step)) {
      if (!is_unitary(r->u))
        throw std::invalid_argument("sequence: register unitary is not unitary");
      long d = 1;
      for (int t : r->targets) {
        if (t < 1 || t >= n)
          throw std::invalid_argument("sequence: register target out of range");
        d *= 2;
      }
      if (r->u.rows() != d)
        throw std::invalid_argument("sequence: register unitary dimension mismatch");
    }
  }
}

GateSequence GateSequence::adjoint() const {
  GateSequence out;
  out.register_count = register_count;
  out.has_rs = has_rs;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    Step s = *it;
    if (auto* a = std::get_if<ApplyInterface>(&s)) a->adjoint = !a->adjoint;
    if (auto* r = std::get_if<RegisterUnitary>(&s)) r->u = dagger(r->u);
    out.steps.push_back(std::move(s));
  }
  return out;
}

void run_sequence(const GateSequence& seq, const ExecutionContext& ctx,
                  StateVector& psi) {
  if (psi.subsystem_count() < seq.subsystem_count())
    throw std::invalid_argument("run_sequence: state too small for sequence");
  for (const auto& step : seq.steps) {
    if (const auto* a = std::get_if<ApplyInterface>(&step)) {
      psi.apply(a->adjoint ? Matrix(ctx.u_int.adjoint()) : ctx.u_int, {a->s_slot, 1});
    } else if (const auto* s = std::get_if<SwapStep>(&step)) {
      psi.swap_subsystems(s->a, s->b);
    } else if (const auto* r = std::get_if<RegisterUnitary>(&step)) {
      psi.apply(r->u, r->targets);
    } else if (const auto* w = std::get_if<WaitStep>(&step)) {
      if (ctx.h_system) psi.apply(expm_hermitian(*ctx.h_system, w->duration), {0});
    }
  }
}

Matrix sequence_unitary(const GateSequence& seq, const ExecutionContext& ctx) {
  const long dim = 1L << seq.subsystem_count();
  Matrix total = Matrix::Identity(dim, dim);
  for (long col = 0; col < dim; ++col) {
    Vector v = Vector::Zero(dim);
    v(col) = 1.0;
    StateVector psi(v, seq.dims());
    run_sequence(seq, ctx, psi);
    total.col(col) = psi.amplitudes;
  }
  return total;
}

}  // namespace qio
