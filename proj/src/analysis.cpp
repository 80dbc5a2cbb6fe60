#include "qio/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qio/optimize.hpp"

namespace qio {

namespace {

constexpr double kPi = std::numbers::pi;

Vector2 bloch_vector(double theta, double phi) {
  return Vector2(std::cos(theta / 2.0),
                 std::exp(Complex(0.0, phi)) * std::sin(theta / 2.0));
}

// sigma_max^2 of a 2x2 matrix
double sigma_max_sq(const Matrix2& k) {
  Matrix2 g = k.adjoint() * k;
  double tr = g(0, 0).real() + g(1, 1).real();
  double det = std::max(0.0, (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real());
  double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return 0.5 * (tr + disc);
}

Matrix2 compress_on_system(const Matrix& u, const Vector2& a) {
  Matrix2 k;
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l) {
      Complex acc = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int m = 0; m < 2; ++m)
          acc += std::conj(a(i)) * a(m) * u(2 * i + j, 2 * m + l);
      k(j, l) = acc;
    }
  return k;
}

// Interface state maximizing ||K b||, phase-fixed so the first component with
// magnitude above 0.5 is real nonnegative.
Vector2 top_right_singular_vector(const Matrix2& k) {
  Eigen::SelfAdjointEigenSolver<Matrix2> es(k.adjoint() * k);
  Vector2 b = es.eigenvectors().col(1);  // eigenvalues ascending
  Complex pivot = std::abs(b(0)) > 0.5 ? b(0) : b(1);
  if (std::abs(pivot) > 0) b *= std::conj(pivot) / std::abs(pivot);
  return b;
}

std::pair<double, double> angles_of(const Vector2& v) {
  // inverse of bloch_vector after removing the global phase of component 0
  Vector2 w = v;
  if (std::abs(w(0)) > 1e-14) w *= std::conj(w(0)) / std::abs(w(0));
  double theta = 2.0 * std::atan2(std::abs(w(1)), w(0).real());
  double phi = std::abs(w(1)) > 1e-14 ? std::arg(w(1)) : 0.0;
  if (phi < 0) phi += 2.0 * kPi;
  return {theta, phi};
}

struct Candidate {
  double theta_s, phi_s, theta_i, phi_i;
  double beta;
  double residual;
};

}  // namespace

LocalBasis LocalBasis::from_bloch(double theta_s, double phi_s, double theta_i,
                                  double phi_i) {
  LocalBasis b;
  Vector2 s0 = bloch_vector(theta_s, phi_s);
  Vector2 i0 = bloch_vector(theta_i, phi_i);
  b.basis_s.col(0) = s0;
  b.basis_s.col(1) = orthocomplement(s0);
  b.basis_i.col(0) = i0;
  b.basis_i.col(1) = orthocomplement(i0);
  return b;
}

Matrix LocalBasis::product_unitary() const {
  return tensor(Matrix(basis_s), Matrix(basis_i));
}

bool LocalBasis::valid(double tol) const {
  return is_unitary(basis_s, tol) && is_unitary(basis_i, tol);
}

bool InterfaceAnalysis::exploitable() const {
  if (!in_u_star) return false;
  if (alpha < 1e-10 && std::abs(gamma) < 1e-10) return false;  // psi1 undefined
  bool beta_one = beta >= 1.0 - kDegenerateTol;
  bool overlap_one = std::abs(overlap_psi0_phi) >= 1.0 - kDegenerateTol;
  bool omega_one = omega >= 1.0 - kDegenerateTol;
  return !(beta_one && (overlap_one || omega_one));
}

InterfaceAnalysis analyze_in_basis(const Matrix& u, const LocalBasis& basis) {
  if (u.rows() != 4 || u.cols() != 4 || !is_unitary(u))
    throw std::invalid_argument("analyze_in_basis: input is not a 4x4 unitary");
  if (!basis.valid())
    throw std::invalid_argument("analyze_in_basis: basis factors are not unitary");

  InterfaceAnalysis a;
  a.basis = basis;
  Matrix p = basis.product_unitary();
  a.u = p.adjoint() * u * p;

  a.form_residual = std::norm(a.u(2, 0)) + std::norm(a.u(3, 0));
  a.in_u_star = a.form_residual <= kFeasibilityResidualTol;

  a.psi0 = Vector2(a.u(0, 0), a.u(1, 0));
  if (double n = a.psi0.norm(); n > 1e-12) a.psi0 /= n;

  Vector2 psi1_tilde(a.u(0, 2), a.u(1, 2));
  Vector2 phi_tilde(a.u(2, 2), a.u(3, 2));
  Vector2 phi_prime_tilde(a.u(2, 3), a.u(3, 3));
  Vector2 gamma_branch(a.u(0, 3), a.u(1, 3));

  a.alpha = psi1_tilde.norm();
  a.beta = phi_tilde.norm();
  a.omega = phi_prime_tilde.norm();

  if (a.beta > 1e-10) {
    a.phi = phi_tilde / a.beta;
    a.phi_defined = true;
  }
  if (a.omega > 1e-10) {
    a.phi_prime = phi_prime_tilde / a.omega;
    a.phi_prime_defined = true;
  }
  if (a.alpha > 1e-10) {
    a.psi1 = psi1_tilde / a.alpha;
    a.psi1_defined = true;
    a.gamma = a.psi1.dot(gamma_branch);
  } else if (gamma_branch.norm() > 1e-10) {
    a.psi1 = gamma_branch / gamma_branch.norm();
    a.psi1_defined = true;
    a.gamma = a.psi1.dot(gamma_branch);
  } else {
    a.gamma = 0.0;
  }
  if (a.phi_defined) a.overlap_psi0_phi = a.psi0.dot(a.phi);
  return a;
}

double feasibility_residual(const Matrix& u, double theta_s, double phi_s) {
  Matrix2 k = compress_on_system(u, bloch_vector(theta_s, phi_s));
  return std::max(0.0, 1.0 - sigma_max_sq(k));
}

std::optional<LocalBasis> find_feasible_basis(const Matrix& u) {
  if (u.rows() != 4 || u.cols() != 4 || !is_unitary(u))
    throw std::invalid_argument("find_feasible_basis: input is not a 4x4 unitary");

  // Stage 1: Fibonacci sphere over the system factor; the interface factor is
  // resolved in closed form through the top singular vector.
  const int kStarts = 128;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<std::pair<double, std::pair<double, double>>> ranked;
  for (int k = 0; k < kStarts; ++k) {
    double z = 1.0 - 2.0 * (k + 0.5) / kStarts;
    double theta = std::acos(std::clamp(z, -1.0, 1.0));
    double phi = std::fmod(golden * k, 2.0 * kPi);
    ranked.push_back({feasibility_residual(u, theta, phi), {theta, phi}});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // The sigma-route residual cancels catastrophically near zero, so it only
  // locates rough minima; the corner residual (a plain sum of squared
  // amplitudes) is the precise acceptance criterion below.
  std::vector<std::pair<double, double>> minima;
  for (int i = 0; i < 16 && i < (int)ranked.size(); ++i) {
    auto r = nelder_mead(
        [&](const std::vector<double>& x) {
          return feasibility_residual(u, x[0], x[1]);
        },
        {ranked[i].second.first, ranked[i].second.second}, 0.15, 1e-18, 400);
    if (r.value > 1e-8) continue;
    bool duplicate = false;
    for (auto [ts, ps] : minima)
      duplicate = duplicate || (std::abs(ts - r.x[0]) < 1e-4 &&
                                std::abs(ps - r.x[1]) < 1e-4);
    if (!duplicate && (int)minima.size() < 8) minima.push_back({r.x[0], r.x[1]});
  }
  if (minima.empty()) return std::nullopt;

  // Stage 2: minimize beta over the feasible set (4 Bloch angles, infeasible
  // points pushed away), starting from each stage-1 minimum with the
  // SVD-resolved interface factor and its orthocomplement.
  auto corner_residual = [&](const std::vector<double>& x) {
    Vector2 a = bloch_vector(x[0], x[1]);
    Vector2 a1 = orthocomplement(a);
    Vector2 b = bloch_vector(x[2], x[3]);
    Vector v = u * tensor(Vector(a), Vector(b));
    // components on |1>_S ⊗ {|0>,|1>}_I of U |0~ 0~>
    Vector2 lower(std::conj(a1(0)) * v(0) + std::conj(a1(1)) * v(2),
                  std::conj(a1(0)) * v(1) + std::conj(a1(1)) * v(3));
    return std::norm(lower(0)) + std::norm(lower(1));
  };
  auto beta_of = [&](const std::vector<double>& x) {
    LocalBasis basis = LocalBasis::from_bloch(x[0], x[1], x[2], x[3]);
    Matrix p = basis.product_unitary();
    Matrix ub = p.adjoint() * u * p;
    return std::hypot(std::abs(ub(2, 2)), std::abs(ub(3, 2)));
  };
  auto objective = [&](const std::vector<double>& x) {
    double r = corner_residual(x);
    if (r > kFeasibilityResidualTol) return 2.0 + r;
    return beta_of(x);
  };

  std::vector<Candidate> candidates;
  for (auto [ts, ps] : minima) {
    Matrix2 k = compress_on_system(u, bloch_vector(ts, ps));
    Vector2 b0 = top_right_singular_vector(k);
    for (const Vector2& b : {b0, Vector2(orthocomplement(b0))}) {
      auto [ti, pi_] = angles_of(b);
      std::vector<double> x0 = {ts, ps, ti, pi_};
      if (corner_residual(x0) > kFeasibilityResidualTol) {
        // precise polish of the rough minimum
        auto polish = nelder_mead(corner_residual, x0, 0.02, 1e-22, 600);
        if (polish.value > kFeasibilityResidualTol) continue;
        x0 = polish.x;
      }
      auto r = nelder_mead(objective, x0, 0.05, 1e-12, 400);
      std::vector<double> best = r.value <= 2.0 ? r.x : x0;
      double res = corner_residual(best);
      if (res > kFeasibilityResidualTol) {
        best = x0;
        res = corner_residual(x0);
      }
      Candidate c;
      c.theta_s = best[0];
      c.phi_s = best[1];
      c.theta_i = best[2];
      c.phi_i = best[3];
      c.beta = beta_of(best);
      c.residual = res;
      candidates.push_back(c);
    }
  }
  if (candidates.empty()) return std::nullopt;

  auto canonical = [](double& theta, double& phi) {
    theta = std::fmod(theta, 2.0 * kPi);
    if (theta < 0) theta += 2.0 * kPi;
    if (theta > kPi) {
      theta = 2.0 * kPi - theta;
      phi += kPi;
    }
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi < 0) phi += 2.0 * kPi;
  };
  for (auto& c : candidates) {
    canonical(c.theta_s, c.phi_s);
    canonical(c.theta_i, c.phi_i);
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a,
                                                     const Candidate& b) {
    auto key = [](const Candidate& c) {
      return std::array<double, 5>{std::round(c.beta * 1e9),
                                   std::round(c.theta_s * 1e7),
                                   std::round(c.phi_s * 1e7),
                                   std::round(c.theta_i * 1e7),
                                   std::round(c.phi_i * 1e7)};
    };
    return key(a) < key(b);
  });
  const Candidate& w = candidates.front();
  return LocalBasis::from_bloch(w.theta_s, w.phi_s, w.theta_i, w.phi_i);
}

ExploitabilityVerdict classify(const Matrix& u) {
  ExploitabilityVerdict v;
  auto basis = find_feasible_basis(u);
  if (!basis) {
    v.failure_reason = FailureReason::no_feasible_basis;
    return v;
  }
  v.feasible_basis = *basis;
  v.analysis = analyze_in_basis(u, *basis);
  const InterfaceAnalysis& a = *v.analysis;
  v.in_u_star = a.in_u_star;
  v.exploitable = a.exploitable();
  if (v.exploitable) return v;
  if (a.alpha < 1e-10 && std::abs(a.gamma) < 1e-10)
    v.failure_reason = FailureReason::controlled_unitary_degenerate;
  else if (std::abs(a.overlap_psi0_phi) >= 1.0 - kDegenerateTol)
    v.failure_reason = FailureReason::beta_one_and_overlap_one;
  else
    v.failure_reason = FailureReason::beta_one_and_omega_one;
  return v;
}

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::no_feasible_basis: return "no_feasible_basis";
    case FailureReason::controlled_unitary_degenerate:
      return "controlled_unitary_degenerate";
    case FailureReason::beta_one_and_overlap_one: return "beta_one_and_overlap_one";
    case FailureReason::beta_one_and_omega_one: return "beta_one_and_omega_one";
  }
  return "unknown";
}

}  // namespace qio
