#include "qio/io_channel.hpp"

#include <cmath>
#include <stdexcept>

#include "qio/optimize.hpp"

namespace qio {

namespace {

std::vector<int> channel_dims(int m_registers, int dim_e) {
  std::vector<int> dims(2 + m_registers, 2);
  dims.push_back(dim_e);
  return dims;
}

Matrix2 s_window(double e0, double e1, double t) {
  Matrix2 w = Matrix2::Zero();
  w(0, 0) = std::exp(Complex(0.0, -e0 * t));
  w(1, 1) = std::exp(Complex(0.0, -e1 * t));
  return w;
}

Matrix2 psi_phase(const InterfaceAnalysis& u, double theta) {
  Vector2 psi1 = u.psi1_defined ? u.psi1 : Vector2(orthocomplement(u.psi0));
  Matrix2 v = u.psi0 * u.psi0.adjoint() +
              std::exp(Complex(0.0, theta)) * psi1 * psi1.adjoint();
  return v;
}

}  // namespace

Matrix embed_operator(const Matrix& op, const std::vector<int>& dims,
                      const std::vector<int>& targets) {
  long dim = 1;
  for (int d : dims) dim *= d;
  Matrix out(dim, dim);
  for (long col = 0; col < dim; ++col) {
    Vector v = Vector::Zero(dim);
    v(col) = 1.0;
    StateVector psi(v, dims);
    psi.apply(op, targets);
    out.col(col) = psi.amplitudes;
  }
  return out;
}

namespace {

StateVector lift_input(const Vector& input_se, int m_registers, int dim_e) {
  if (dim_e < 2 || dim_e > 4)
    throw std::invalid_argument("channel: dim E must be between 2 and 4");
  auto dims = channel_dims(m_registers, dim_e);
  long dim = 1;
  for (int d : dims) dim *= d;
  if (input_se.size() != 2 * dim_e)
    throw std::invalid_argument("compose_phi: input dimension mismatch");
  if (std::abs(input_se.norm() - 1.0) > kStructuralTol)
    throw std::invalid_argument("compose_phi: input not normalized");
  Vector amps = Vector::Zero(dim);
  long s_stride = dim / 2;
  for (int s = 0; s < 2; ++s)
    for (int e = 0; e < dim_e; ++e)
      amps(s * s_stride + e) = input_se(s * dim_e + e);
  return StateVector(std::move(amps), dims);
}

Matrix finish_channel(StateVector& psi, int e_idx) {
  Matrix rho = psi.reduced_density({0, e_idx});
  if (std::abs(rho.trace().real() - 1.0) > 1e-10)
    throw std::runtime_error("compose_phi: output trace drifted");
  return rho;
}

}  // namespace

Matrix compose_phi(const IoChannel& ch, const Vector& input_se) {
  const int m = ch.output_seq.register_count;
  const int e_idx = 2 + m;
  if (!is_unitary(ch.target))
    throw std::invalid_argument("compose_phi: target map must be unitary");
  StateVector psi = lift_input(input_se, m, ch.dim_e);
  ExecutionContext ctx{ch.u_int, std::nullopt};
  run_sequence(ch.output_seq, ctx, psi);
  psi.apply(ch.target, {1, e_idx});
  run_sequence(ch.input_seq, ctx, psi);
  return finish_channel(psi, e_idx);
}

Matrix compose_phi_unitaries(const Matrix& t_out, const Matrix& t_in,
                             const Matrix& target, int m_registers, int dim_e,
                             const Vector& input_se) {
  const int e_idx = 2 + m_registers;
  StateVector psi = lift_input(input_se, m_registers, dim_e);
  std::vector<int> sir(2 + m_registers);
  for (int i = 0; i < 2 + m_registers; ++i) sir[i] = i;
  psi.apply(t_out, sir);
  psi.apply(target, {1, e_idx});
  psi.apply(t_in, sir);
  return finish_channel(psi, e_idx);
}

double lemma1_cap_xi(double xi_out, double xi_in) {
  return -1.0 + std::sqrt(1.0 - xi_out * xi_out) + std::sqrt(1.0 - xi_in * xi_in) -
         xi_out * xi_in;
}

double lemma1_bound(double xi_out, double xi_in) {
  double cap = lemma1_cap_xi(xi_out, xi_in);
  if (cap < 0.0) return 2.0;
  return 2.0 * std::sqrt(std::max(0.0, 1.0 - cap * cap));
}

BoundReport verify_lemma1_unitaries(const Matrix& t_out, const Matrix& t_in,
                                    const Matrix& u_m, int m_registers,
                                    int dim_e, double xi_out, double xi_in,
                                    int sample_budget, std::uint64_t seed) {
  auto dims = channel_dims(m_registers, dim_e);
  const int e_idx = 2 + m_registers;
  long dim = 1;
  for (int d : dims) dim *= d;

  Matrix id_e = Matrix::Identity(dim_e, dim_e);
  Matrix t_out_full = tensor(t_out, id_e);
  Matrix t_in_full = tensor(t_in, id_e);
  Matrix u_m_on_se = embed_operator(u_m, dims, {0, e_idx});
  Matrix u_m_on_ie = embed_operator(u_m, dims, {1, e_idx});

  // target applied on S then transferred in, vs transferred out then applied on I
  Matrix map_then_in = t_in_full.adjoint() * u_m_on_se;
  Matrix out_then_map = u_m_on_ie * t_out_full;
  Matrix g = out_then_map.adjoint() * map_then_in;

  // block at I = R = 0: a quadratic form on S ⊗ E
  const int dse = 2 * dim_e;
  long s_stride = dim / 2;
  Matrix g_se(dse, dse);
  for (int s = 0; s < 2; ++s)
    for (int e = 0; e < dim_e; ++e)
      for (int s2 = 0; s2 < 2; ++s2)
        for (int e2 = 0; e2 < dim_e; ++e2)
          g_se(s * dim_e + e, s2 * dim_e + e2) =
              g(s * s_stride + e, s2 * s_stride + e2);

  auto f_of = [&](const Vector& psi) { return psi.dot(g_se * psi); };
  auto objective = [&](const std::vector<double>& x) {
    Vector psi(dse);
    for (int i = 0; i < dse; ++i) psi(i) = Complex(x[2 * i], x[2 * i + 1]);
    double n = psi.norm();
    if (n < 1e-9) return 1.0;
    return std::norm(f_of(psi / n));
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = 1.0;
  bool converged = false;
  int samples = 0;

  std::vector<Vector> seeds;
  for (int i = 0; i < dse; ++i) seeds.push_back(Vector::Unit(dse, i));
  // states with full weight on |1>_S, where the bound is approached
  for (int e = 0; e < dim_e; ++e) {
    Vector v = Vector::Zero(dse);
    v(dim_e + e) = 1.0;
    seeds.push_back(v);
    Vector w = Vector::Constant(dse, 0.0);
    w(dim_e + e) = Complex(1.0, 0.0);
    w(e) = Complex(0.3, 0.1);
    seeds.push_back(w / w.norm());
  }
  for (int k = 0; k < sample_budget; ++k) {
    Vector v(dse);
    for (int i = 0; i < dse; ++i) v(i) = Complex(gauss(rng), gauss(rng));
    seeds.push_back(v / v.norm());
  }

  for (const auto& s : seeds) {
    std::vector<double> x0(2 * dse);
    for (int i = 0; i < dse; ++i) {
      x0[2 * i] = s(i).real();
      x0[2 * i + 1] = s(i).imag();
    }
    auto r = nelder_mead(objective, x0, 0.2, 1e-14, 2500);
    ++samples;
    if (r.value < best) {
      best = r.value;
      converged = r.converged;
    }
  }

  BoundReport rep;
  rep.xi_out = xi_out;
  rep.xi_in = xi_in;
  rep.cap_xi = lemma1_cap_xi(xi_out, xi_in);
  rep.bound = lemma1_bound(xi_out, xi_in);
  rep.measured_distance = 2.0 * std::sqrt(std::max(0.0, 1.0 - best));
  rep.samples = samples;
  rep.converged = converged;
  return rep;
}

BoundReport verify_lemma1(const IoChannel& ch, const Matrix& u_m,
                          int sample_budget, std::uint64_t seed) {
  ExecutionContext ctx{ch.u_int, std::nullopt};
  Matrix t_out = sequence_unitary(ch.output_seq, ctx);
  Matrix t_in = sequence_unitary(ch.input_seq, ctx);
  return verify_lemma1_unitaries(t_out, t_in, u_m, ch.output_seq.register_count,
                                 ch.dim_e, ch.xi_out, ch.xi_in, sample_budget,
                                 seed);
}

Matrix make_transfer_unitary(double xi, int m_registers, std::mt19937_64& rng) {
  if (xi < 0.0 || xi > 1.0)
    throw std::invalid_argument("make_transfer_unitary: xi out of range");
  long dim = 1L << (m_registers + 2);
  long half = dim / 2;
  Vector s0 = Vector::Unit(dim, 0);
  Vector s1 = Vector::Unit(dim, half);  // |1>_S |0...>
  Vector t0 = Vector::Unit(dim, 0);
  Vector g = haar_state(half, rng);
  Vector t1 = Vector::Zero(dim);
  t1(half / 2) = std::sqrt(1.0 - xi * xi);  // |0>_S |1>_I |0...>
  t1.tail(half) += xi * g;
  return complete_to_unitary({s0, s1}, {t0, t1});
}

namespace {

// Product vectors inside the span of two (possibly degenerate) eigenvectors.
void add_product_candidates(const Vector4& v0, const Vector4& v1,
                            std::vector<std::pair<Vector2, Vector2>>& out) {
  auto reshape = [](const Vector4& v) {
    Matrix2 m;
    m << v(0), v(1), v(2), v(3);
    return m;
  };
  auto push_if_product = [&](const Vector4& v) {
    if (v.norm() < 1e-12) return;
    Matrix2 m = reshape(v / v.norm());
    Eigen::JacobiSVD<Matrix2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(1) > 1e-9) return;
    Vector2 a = svd.matrixU().col(0);
    Vector2 b = svd.matrixV().col(0).conjugate() * svd.singularValues()(0);
    out.push_back({a, b / b.norm()});
  };
  // det(reshape(v0 + c v1)) is quadratic in c; its roots give the product
  // states of the pencil.
  Matrix2 m0 = reshape(v0), m1 = reshape(v1);
  Complex a2 = m1(0, 0) * m1(1, 1) - m1(0, 1) * m1(1, 0);
  Complex a1 = m0(0, 0) * m1(1, 1) + m1(0, 0) * m0(1, 1) - m0(0, 1) * m1(1, 0) -
               m1(0, 1) * m0(1, 0);
  Complex a0 = m0(0, 0) * m0(1, 1) - m0(0, 1) * m0(1, 0);
  push_if_product(v0);
  push_if_product(v1);
  if (std::abs(a2) > 1e-12) {
    Complex disc = std::sqrt(a1 * a1 - 4.0 * a2 * a0);
    for (Complex c : {(-a1 + disc) / (2.0 * a2), (-a1 - disc) / (2.0 * a2)})
      push_if_product(Vector4(v0 + c * v1));
  } else if (std::abs(a1) > 1e-12) {
    push_if_product(Vector4(v0 + (-a0 / a1) * v1));
  }
}

}  // namespace

InputSynthesisResult synthesize_input(const Matrix& u, int m_registers) {
  InputSynthesisResult result;
  if (u.rows() != 4 || !is_unitary(u))
    throw std::invalid_argument("synthesize_input: input is not a 4x4 unitary");

  // Shared-basis feasibility of u and u^dagger requires a product eigenvector.
  Eigen::ComplexEigenSolver<Matrix> es(u);
  std::vector<std::pair<Vector2, Vector2>> candidates;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      if (i != j && std::abs(es.eigenvalues()(i) - es.eigenvalues()(j)) > 1e-8)
        continue;
      add_product_candidates(Vector4(es.eigenvectors().col(i)),
                             Vector4(es.eigenvectors().col(j)), candidates);
    }
  }

  bool saw_shared_basis = false;
  bool saw_controlled = false;
  for (const auto& [a, b] : candidates) {
    LocalBasis basis;
    basis.basis_s.col(0) = a;
    basis.basis_s.col(1) = orthocomplement(a);
    basis.basis_i.col(0) = b;
    basis.basis_i.col(1) = orthocomplement(b);
    InterfaceAnalysis au = analyze_in_basis(u, basis);
    InterfaceAnalysis ad = analyze_in_basis(Matrix(u.adjoint()), basis);
    if (!au.in_u_star || !ad.in_u_star) continue;
    saw_shared_basis = true;
    // second block family: no coupling out of the |1>_S sector
    if (std::abs(au.u(1, 2)) < 1e-9 && std::abs(au.u(1, 3)) < 1e-9) {
      saw_controlled = true;
      continue;
    }
    if (!au.exploitable() || !ad.exploitable()) continue;

    // T_in := (T_M(u^dagger))^dagger, expressed with u itself
    GateSequence fwd = build_s_n(ad, m_registers);
    for (auto& step : fwd.steps)
      if (auto* ai = std::get_if<ApplyInterface>(&step)) ai->adjoint = true;
    std::vector<int> w_targets(m_registers + 1);
    for (int i = 0; i <= m_registers; ++i) w_targets[i] = 1 + i;
    fwd.steps.push_back(RegisterUnitary{build_w_n(ad, m_registers), w_targets});

    InputSynthesis synth;
    synth.sequence = fwd.adjoint();
    synth.basis = basis;
    synth.analysis_u = au;
    synth.analysis_u_dagger = ad;
    synth.xi_in = std::pow(ad.beta, m_registers + 1);
    result.synthesis = std::move(synth);
    return result;
  }

  if (saw_controlled) {
    result.failure = InputSynthesisFailure::adjoint_controlled;
    result.diagnostic =
        "shared-basis form is controlled (u_{01,10} = u_{01,11} = 0): the "
        "adjoint route cannot produce an exploitable pair";
  } else if (saw_shared_basis) {
    result.failure = InputSynthesisFailure::not_exploitable;
    result.diagnostic = "shared basis found but a factor is not exploitable";
  } else {
    result.failure = InputSynthesisFailure::no_shared_basis;
    result.diagnostic = "no local basis puts both u and its adjoint in form";
  }
  return result;
}

std::pair<double, double> hs_eigenvalues_in_basis(const InterfaceAnalysis& u,
                                                  const Matrix2& h_s_lab) {
  if (!is_hermitian(Matrix(h_s_lab)))
    throw std::invalid_argument("hs_eigenvalues_in_basis: not Hermitian");
  Matrix2 in_basis = u.basis.basis_s.adjoint() * h_s_lab * u.basis.basis_s;
  if (std::abs(in_basis(0, 1)) > kStructuralTol ||
      std::abs(in_basis(1, 0)) > kStructuralTol)
    throw std::invalid_argument(
        "hs_eigenvalues_in_basis: system Hamiltonian is not diagonal in the "
        "feasible basis");
  return {in_basis(0, 0).real(), in_basis(1, 1).real()};
}

std::vector<PhaseCorrection> hs_phase_adjustment(
    const InterfaceAnalysis& u, double hs_eigengap,
    const std::vector<double>& off_durations) {
  std::vector<PhaseCorrection> out;
  double accumulated = 0.0;
  const int n = (int)off_durations.size() - 1;  // final window drives W itself
  for (int k = 1; k <= n; ++k) {
    out.push_back({1 + k, psi_phase(u, accumulated)});
    accumulated += hs_eigengap * off_durations[k - 1];
  }
  out.push_back({1, psi_phase(u, accumulated)});
  return out;
}

TransferReport run_ls_with_hs(const InterfaceAnalysis& u, int n_registers,
                              Complex a_s, Complex b_s, double e0, double e1,
                              const std::vector<double>& off_durations,
                              bool corrected) {
  if ((int)off_durations.size() != n_registers + 1)
    throw std::invalid_argument("run_ls_with_hs: need one off window per use");
  if (!u.exploitable())
    throw std::invalid_argument("run_ls_with_hs: unitary is not exploitable");
  const double gap = e1 - e0;

  std::vector<PhaseCorrection> corrections =
      hs_phase_adjustment(u, gap, off_durations);

  StateVector psi = StateVector::zero(std::vector<int>(n_registers + 2, 2));
  psi.amplitudes(0) = a_s;
  psi.amplitudes(psi.dim() / 2) = b_s;

  psi.apply(u.u, {0, 1});
  for (int k = 1; k <= n_registers; ++k) {
    psi.apply(s_window(e0, e1, off_durations[k - 1]), {0});
    psi.swap_subsystems(1, 1 + k);
    if (corrected) psi.apply(corrections[k - 1].v, {corrections[k - 1].subsystem});
    psi.apply(u.u, {0, 1});
  }
  psi.apply(s_window(e0, e1, off_durations[n_registers]), {0});
  if (corrected) psi.apply(corrections.back().v, {corrections.back().subsystem});

  Matrix w;
  if (corrected) {
    Vector2 phi = u.phi_defined ? u.phi : Vector2(1.0, 0.0);
    std::vector<Vector2> history;
    double accumulated = 0.0;
    for (int j = 1; j <= n_registers; ++j) {
      history.push_back(psi_phase(u, accumulated) * phi);
      accumulated += gap * off_durations[j - 1];
    }
    w = build_w_n_with_history(u, n_registers, history);
  } else {
    w = build_w_n(u, n_registers);
  }
  std::vector<int> w_targets(n_registers + 1);
  for (int i = 0; i <= n_registers; ++i) w_targets[i] = 1 + i;
  psi.apply(w, w_targets);

  return extract_report(psi, a_s, b_s, std::pow(u.beta, n_registers + 1));
}

TransferReport run_cs_with_hs(const InterfaceAnalysis& u, int n_uses,
                              Complex a_s, Complex b_s, double e0, double e1,
                              const std::vector<double>& off_durations) {
  if ((int)off_durations.size() != n_uses)
    throw std::invalid_argument("run_cs_with_hs: need one off window per use");
  std::vector<double> thetas(n_uses);
  for (int k = 0; k < n_uses; ++k) thetas[k] = (e1 - e0) * off_durations[k];
  return run_cs(u, n_uses, a_s, b_s, thetas);
}

}  // namespace qio
