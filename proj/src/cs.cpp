#include "qio/cs.hpp"

#include <cmath>
#include <stdexcept>

namespace qio {

namespace {

Vector4 kron2(const Vector2& i_state, const Vector2& r_state) {
  Vector4 v;
  v << i_state(0) * r_state(0), i_state(0) * r_state(1), i_state(1) * r_state(0),
      i_state(1) * r_state(1);
  return v;
}

Matrix2 s_phase(double theta) {
  Matrix2 p = Matrix2::Identity();
  p(1, 1) = std::exp(Complex(0.0, -theta));
  return p;
}

struct Split {
  double mu0 = 0.0, mu1 = 0.0;
  Vector2 mu0_dir = Vector2(1.0, 0.0);
  Vector2 mu1_dir = Vector2(0.0, 1.0);
  Vector4 nu1_hat = Vector4::Zero();
};

// Splits the spread vector nu_tilde by the projector onto
// span{psi0 ⊗ |0>, eta_vec} and extracts the register directions.
Split split_by_projector(const Vector4& nu_tilde, const Vector4& p1,
                         const Vector4& eta_vec, double eta) {
  Split out;
  Complex c1 = p1.dot(nu_tilde);
  Complex c2 = eta > 1e-12 ? Complex(eta_vec.dot(nu_tilde)) : Complex(0.0);
  Vector4 nu0 = c1 * p1 + c2 * eta_vec;
  Vector4 nu1 = nu_tilde - nu0;
  // second orthogonalization pass: when mu1 is tiny its direction would
  // otherwise keep an O(eps/mu1) overlap with the projector range
  nu1 -= p1.dot(nu1) * p1;
  if (eta > 1e-12) nu1 -= eta_vec.dot(nu1) * eta_vec;
  out.mu0 = nu0.norm();
  out.mu1 = nu1.norm();
  if (out.mu0 > 1e-12) out.mu0_dir = Vector2(c1 / out.mu0, c2 / out.mu0);
  out.mu1_dir = orthocomplement(out.mu0_dir);
  if (out.mu1 > 1e-10) out.nu1_hat = nu1 / out.mu1;
  return out;
}

// Retrieval map with images p1 -> |00>, eta_vec -> |01>, nu1_hat -> |1>|mu1>.
Matrix build_step_unitary(const Vector4& p1, const Vector4& eta_vec, double eta,
                          const Split& sp) {
  std::vector<Vector> sources{p1};
  std::vector<Vector> targets{Vector4::Unit(0)};
  if (eta > 1e-12) {
    sources.push_back(eta_vec);
    targets.push_back(Vector4::Unit(1));
  }
  if (sp.mu1 > 1e-10) {
    sources.push_back(sp.nu1_hat);
    targets.push_back(kron2(Vector2(0.0, 1.0), sp.mu1_dir));
  }
  Matrix w = complete_to_unitary(sources, targets);
  if (unitarity_defect(w) > 1e-10)
    throw std::runtime_error("cs: retrieval map lost unitarity");
  return w;
}

void check_consistency(const CsStepState& s) {
  double total = s.eta * s.eta + s.mu0 * s.mu0 + s.mu1 * s.mu1;
  if (std::abs(total - 1.0) > 1e-8)
    throw std::runtime_error("cs: recursion normalization drifted");
}

}  // namespace

CsBounds::Regime cs_regime(const InterfaceAnalysis& u) {
  if (!u.exploitable()) return CsBounds::Regime::not_exploitable;
  double q = std::abs(u.overlap_psi0_phi);
  bool beta_one = u.beta >= 1.0 - kDegenerateTol;
  bool omega_one = u.omega >= 1.0 - kDegenerateTol;
  if (q >= 1.0 - kDegenerateTol) return CsBounds::Regime::A;
  if (!beta_one && !omega_one) return CsBounds::Regime::B0;
  if (!beta_one && omega_one) return CsBounds::Regime::B1;
  return CsBounds::Regime::B2;
}

CsBounds cs_bounds(const InterfaceAnalysis& u, int n_uses) {
  CsBounds b;
  b.regime = cs_regime(u);
  const int n = n_uses;
  const double beta = u.beta, omega = u.omega;
  const double q2 = std::norm(u.overlap_psi0_phi);
  switch (b.regime) {
    case CsBounds::Regime::A:
      b.lower = b.upper = std::pow(beta, n);
      break;
    case CsBounds::Regime::B0: {
      double x = std::pow(beta, n);
      double y = beta * beta * std::pow(omega, n - 2);
      b.lower = std::min(x, y);
      b.upper = std::max(x, y);
      break;
    }
    case CsBounds::Regime::B1:
      b.lower = std::pow(beta, n);
      b.upper = beta * beta *
                std::pow(beta * beta + (1.0 - beta * beta) * q2, (n - 2) / 4.0);
      break;
    case CsBounds::Regime::B2:
      b.lower = std::pow(omega, n - 2);
      b.upper = std::pow(omega * omega + (1.0 - omega * omega) * q2, (n - 2) / 4.0);
      break;
    case CsBounds::Regime::not_exploitable:
      b.lower = 0.0;
      b.upper = 1.0;
      break;
  }
  return b;
}

const char* to_string(CsBounds::Regime r) {
  switch (r) {
    case CsBounds::Regime::A: return "A";
    case CsBounds::Regime::B0: return "B-0";
    case CsBounds::Regime::B1: return "B-1";
    case CsBounds::Regime::B2: return "B-2";
    case CsBounds::Regime::not_exploitable: return "not_exploitable";
  }
  return "unknown";
}

std::pair<CsStepState, StateVector> cs_initialize(const InterfaceAnalysis& u,
                                                  Complex a_s, Complex b_s,
                                                  double theta1, double theta2) {
  if (!u.exploitable()) throw std::invalid_argument("cs_initialize: not exploitable");
  if (std::abs(std::norm(a_s) + std::norm(b_s) - 1.0) > 1e-9)
    throw std::invalid_argument("cs_initialize: input amplitudes not normalized");

  StateVector psi = StateVector::zero({2, 2, 2});
  psi.amplitudes(0) = a_s;
  psi.amplitudes(4) = b_s;

  psi.apply(u.u, {0, 1});
  if (theta1 != 0.0) psi.apply(s_phase(theta1), {0});
  psi.swap_subsystems(1, 2);
  psi.apply(u.u, {0, 1});
  if (theta2 != 0.0) psi.apply(s_phase(theta2), {0});

  const Complex ph1 = std::exp(Complex(0.0, -theta1));
  const Complex ph2 = std::exp(Complex(0.0, -theta2));

  Vector4 p1 = kron2(u.psi0, u.psi0);
  CsStepState s;
  s.k = 2;

  Vector2 psi1 = u.psi1_defined ? u.psi1 : Vector2(0.0, 1.0);
  Vector2 phi = u.phi_defined ? u.phi : Vector2(1.0, 0.0);
  Vector4 eta_unnorm =
      u.alpha * (kron2(u.psi0, psi1) + u.beta * ph1 * kron2(psi1, phi));
  s.eta = eta_unnorm.norm();
  if (s.eta > 1e-12) s.eta_vector = eta_unnorm / s.eta;

  Vector4 nu_tilde = u.beta * u.beta * ph1 * ph2 * kron2(phi, phi);
  Split sp = split_by_projector(nu_tilde, p1, s.eta_vector, s.eta);
  s.mu0 = sp.mu0;
  s.mu1 = sp.mu1;
  s.mu0_register_state = sp.mu0_dir;
  s.mu1_register_state = sp.mu1_dir;
  check_consistency(s);

  psi.apply(build_step_unitary(p1, s.eta_vector, s.eta, sp), {1, 2});
  return {s, psi};
}

void cs_step(const InterfaceAnalysis& u, CsStepState& s, StateVector& psi,
             double theta) {
  psi.apply(u.u, {0, 1});
  if (theta != 0.0) psi.apply(s_phase(theta), {0});

  Vector2 psi1 = u.psi1_defined ? u.psi1 : Vector2(0.0, 1.0);
  Vector2 phi = u.phi_defined ? u.phi : Vector2(1.0, 0.0);
  Vector2 phi_prime = u.phi_prime_defined ? u.phi_prime : Vector2(1.0, 0.0);

  Vector4 p1 = kron2(u.psi0, Vector2(1.0, 0.0));
  Vector4 eta_unnorm =
      s.eta * kron2(u.psi0, Vector2(0.0, 1.0)) +
      kron2(psi1, Vector2(u.alpha * s.mu0 * s.mu0_register_state +
                          u.gamma * s.mu1 * s.mu1_register_state));
  double eta_new = eta_unnorm.norm();
  Vector4 eta_vec = eta_new > 1e-12 ? Vector4(eta_unnorm / eta_new) : Vector4::Zero();

  const Complex ph = std::exp(Complex(0.0, -theta));
  Vector4 nu_tilde = ph * (u.beta * s.mu0 * kron2(phi, s.mu0_register_state) +
                           u.omega * s.mu1 * kron2(phi_prime, s.mu1_register_state));
  Split sp = split_by_projector(nu_tilde, p1, eta_vec, eta_new);

  psi.apply(build_step_unitary(p1, eta_vec, eta_new, sp), {1, 2});

  if (eta_new < s.eta - 1e-10)
    throw std::runtime_error("cs_step: eta decreased");
  s.k += 1;
  s.eta = eta_new;
  s.eta_vector = eta_vec;
  s.mu0 = sp.mu0;
  s.mu1 = sp.mu1;
  s.mu0_register_state = sp.mu0_dir;
  s.mu1_register_state = sp.mu1_dir;
  check_consistency(s);
}

TransferReport run_cs(const InterfaceAnalysis& u, int n_uses, Complex a_s,
                      Complex b_s, const std::vector<double>& thetas) {
  if (n_uses < 2) throw std::invalid_argument("run_cs: need at least two uses");
  auto theta_at = [&](int k) {
    return (int)thetas.size() >= k ? thetas[k - 1] : 0.0;
  };
  auto [s, psi] = cs_initialize(u, a_s, b_s, theta_at(1), theta_at(2));
  std::vector<double> trace{s.xi()};
  for (int k = 3; k <= n_uses; ++k) {
    cs_step(u, s, psi, theta_at(k));
    trace.push_back(s.xi());
  }
  psi.swap_subsystems(1, 2);
  TransferReport rep = extract_report(psi, a_s, b_s, s.xi());
  rep.xi_trace = std::move(trace);
  return rep;
}

}  // namespace qio
