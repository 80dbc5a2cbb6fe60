#include <doctest.h>

#include <random>

#include "qio/experiment.hpp"
#include "qio/io_channel.hpp"
#include "qio/ls.hpp"

using namespace qio;

namespace {

InterfaceAnalysis analyzed(const Matrix& u) {
  return analyze_in_basis(u, LocalBasis::computational());
}

// Spread-state oracle: builds the expected post-spread state symbolically from
// (alpha, beta, psi0, psi1, phi), with slot k of the spread history holding
// phi^(k-1) psi1 psi0^(rest) and the fully-leaked branch phi^(N+1).
StateVector spread_oracle(const InterfaceAnalysis& u, int n, Complex a, Complex b) {
  const int subsystems = n + 2;
  StateVector acc = StateVector::zero(std::vector<int>(subsystems, 2));
  acc.amplitudes.setZero();

  auto product_term = [&](int s_value, const std::vector<Vector2>& ir) {
    std::vector<Vector> factors;
    factors.push_back(s_value == 0 ? Vector(Vector::Unit(2, 0)) : Vector(Vector::Unit(2, 1)));
    // subsystem order S, I, R_1..R_N; ir holds (I, R_1..R_N)
    for (const auto& f : ir) factors.push_back(Vector(f));
    return StateVector::product(factors).amplitudes;
  };

  // a-branch: psi0 everywhere
  std::vector<Vector2> all0(n + 1, u.psi0);
  acc.amplitudes += a * product_term(0, all0);

  // b-branch: sum over the use at which the excitation left S, plus the leak
  double weight = u.alpha;
  for (int k = 1; k <= n + 1; ++k) {
    std::vector<Vector2> ir(n + 1);
    // position convention: index 0 is I, index j is R_j; the k-th use writes
    // into R_k (or stays in I when k = n + 1)
    for (int j = 1; j <= n; ++j) {
      if (j < k)
        ir[j] = u.phi;
      else if (j == k)
        ir[j] = u.psi1;
      else
        ir[j] = u.psi0;
    }
    ir[0] = (k == n + 1) ? u.psi1 : u.psi0;
    acc.amplitudes += b * weight * std::pow(u.beta, k - 1) * product_term(0, ir);
  }
  std::vector<Vector2> leak(n + 1, u.phi);
  acc.amplitudes += b * std::pow(u.beta, n + 1) * product_term(1, leak);
  return acc;
}

}  // namespace

TEST_CASE("spread circuit has the expected step structure") {
  std::mt19937_64 rng(201);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  GateSequence seq = build_s_n(u, 3);
  int interfaces = 0, swaps = 0;
  for (const auto& s : seq.steps) {
    if (std::holds_alternative<ApplyInterface>(s)) ++interfaces;
    if (std::holds_alternative<SwapStep>(s)) ++swaps;
  }
  CHECK(interfaces == 4);
  CHECK(swaps == 3);
  CHECK(build_s_n(u, 0).steps.size() == 1);
}

TEST_CASE("spread on the zero branch produces the all-psi0 product") {
  std::mt19937_64 rng(202);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  GateSequence seq = build_s_n(u, 2);
  StateVector psi = StateVector::zero(seq.dims());
  ExecutionContext ctx{u.u, std::nullopt};
  run_sequence(seq, ctx, psi);
  StateVector expected = spread_oracle(u, 2, 1.0, 0.0);
  CHECK((psi.amplitudes - expected.amplitudes).norm() < 1e-12);
}

TEST_CASE("spread matches the termwise expansion oracle") {
  std::mt19937_64 rng(203);
  for (auto regime : {CsBounds::Regime::B0, CsBounds::Regime::B1}) {
    InterfaceAnalysis u = analyzed(sample_exploitable(regime, rng));
    GateSequence seq = build_s_n(u, 2);
    StateVector psi = StateVector::zero(seq.dims());
    psi.amplitudes(0) = 0.0;
    psi.amplitudes(psi.dim() / 2) = 1.0;  // |1>_S |0...>
    ExecutionContext ctx{u.u, std::nullopt};
    run_sequence(seq, ctx, psi);
    StateVector expected = spread_oracle(u, 2, 0.0, 1.0);
    CHECK((psi.amplitudes - expected.amplitudes).norm() < 1e-12);
  }
}

TEST_CASE("retrieval map reproduces its prescribed images") {
  std::mt19937_64 rng(204);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  for (int n : {0, 1, 3}) {
    Matrix w = build_w_n(u, n);
    CHECK(unitarity_defect(w) <= 1e-10);
    long dim = 1L << (n + 1);
    // all-psi0 -> |0...0>
    Vector acc = Vector::Ones(1);
    for (int j = 0; j <= n; ++j) acc = tensor(acc, Vector(u.psi0));
    CHECK((w * acc - Vector::Unit(dim, 0)).norm() < 1e-12);

    // the spread superposition (built by the independent oracle) maps onto
    // |1>_I |0>^n with the closed-form weight
    StateVector psi = spread_oracle(u, n, 0.0, 1.0);
    std::vector<int> w_targets;
    for (int i = 0; i <= n; ++i) w_targets.push_back(1 + i);
    psi.apply(w, w_targets);
    double expect = std::sqrt(1.0 - std::pow(u.beta, 2 * (n + 1)));
    CHECK(std::abs(psi.amplitudes(dim / 2) - expect) < 1e-11);
    CHECK(std::abs(psi.component_norm(0, 1) - std::pow(u.beta, n + 1)) < 1e-11);
  }
}

TEST_CASE("two-level retrieval map for the canonical family is the identity") {
  InterfaceAnalysis u = analyzed(u_star_with_beta(0.6));
  // psi0 = |0>, spread branch = psi1 = |1>: the prescription fixes both
  Matrix w = build_w_n(u, 0);
  CHECK((w - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("retrieval refuses beta = 1") {
  InterfaceAnalysis id = analyzed(Matrix::Identity(4, 4));
  CHECK_THROWS_AS(build_w_n(id, 1), std::invalid_argument);
}

TEST_CASE("a pure zero input never leaks") {
  std::mt19937_64 rng(205);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  TransferReport rep = run_ls(u, 2, 1.0, 0.0);
  CHECK(rep.fidelity_to_ideal == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.residual_norm < 1e-12);
  CHECK_FALSE(rep.xi_observable);
}

TEST_CASE("error amplitude follows the power law") {
  InterfaceAnalysis u = analyzed(u_star_with_beta(1.0 / std::sqrt(2.0)));
  TransferReport rep = run_ls(u, 5, std::sqrt(0.3), std::sqrt(0.7));
  CHECK(std::abs(rep.xi_measured - 0.125) < 1e-9);

  std::mt19937_64 rng(206);
  for (int trial = 0; trial < 3; ++trial) {
    InterfaceAnalysis v = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
    for (int n = 0; n <= 6; ++n) {
      auto amps = haar_state(2, rng);
      if (std::abs(amps(1)) < 0.15) continue;
      TransferReport r = run_ls(v, n, amps(0), amps(1));
      CHECK(std::abs(r.xi_measured - std::pow(v.beta, n + 1)) < 1e-9);
      CHECK(std::abs(std::norm(r.a_out) + std::norm(r.b_out) +
                     std::norm(amps(1)) * r.xi_measured * r.xi_measured - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("residual system state forgets the input") {
  std::mt19937_64 rng(207);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  const int n = 4;
  const double cap = 2.0 * std::pow(u.beta, n + 1);
  std::vector<Matrix> reduced;
  double min_purity = 1.0;
  for (int trial = 0; trial < 12; ++trial) {
    auto amps = haar_state(2, rng);
    GateSequence seq = build_s_n(u, n);
    StateVector psi = StateVector::zero(seq.dims());
    psi.amplitudes(0) = amps(0);
    psi.amplitudes(psi.dim() / 2) = amps(1);
    ExecutionContext ctx{u.u, std::nullopt};
    run_sequence(seq, ctx, psi);
    Matrix rho = psi.reduced_density({0});
    reduced.push_back(rho);
    min_purity = std::min(min_purity, (rho * rho).trace().real());
  }
  for (size_t i = 0; i < reduced.size(); ++i)
    for (size_t j = i + 1; j < reduced.size(); ++j)
      CHECK(trace_distance(reduced[i], reduced[j]) <= cap);
  CHECK(min_purity >= 1.0 - 2.0 * std::pow(u.beta, 2 * (n + 1)));
}

TEST_CASE("full transfer circuit composes to a unitary") {
  std::mt19937_64 rng(208);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  const int n = 4;
  GateSequence seq = build_s_n(u, n);
  std::vector<int> w_targets;
  for (int i = 0; i <= n; ++i) w_targets.push_back(1 + i);
  seq.steps.push_back(RegisterUnitary{build_w_n(u, n), w_targets});
  seq.validate();
  ExecutionContext ctx{u.u, std::nullopt};
  CHECK(unitarity_defect(sequence_unitary(seq, ctx)) < 1e-9);
}

TEST_CASE("adjoint-interface retrieval uses only the three allowed step kinds") {
  std::mt19937_64 rng(209);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  GateSequence w = build_w_n_via_adjoint(u, 2);
  CHECK(w.has_rs);
  for (const auto& s : w.steps)
    CHECK((std::holds_alternative<ApplyInterface>(s) ||
           std::holds_alternative<SwapStep>(s)));
}

TEST_CASE("adjoint-interface retrieval lands the payload in I at the same error") {
  std::mt19937_64 rng(210);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  const int n = 1;
  Complex a = std::sqrt(0.35), b = std::sqrt(0.65);

  GateSequence spread = build_s_n(u, n);
  GateSequence retrieve = build_w_n_via_adjoint(u, n);
  StateVector psi = StateVector::zero(retrieve.dims());
  psi.amplitudes(0) = a;
  psi.amplitudes(psi.dim() / 2) = b;
  ExecutionContext ctx{u.u, std::nullopt};
  run_sequence(spread, ctx, psi);
  run_sequence(retrieve, ctx, psi);

  // leak is exactly b beta^{n+1}
  CHECK(std::abs(psi.component_norm(0, 1) / std::abs(b) - std::pow(u.beta, n + 1)) <
        1e-9);
}

TEST_CASE("adjoint-interface route approaches the direct retrieval output") {
  // payload deficit is O(beta^{2(n+1)}); with beta = 0.3, n = 8 the two
  // routes agree to better than 1e-9
  InterfaceAnalysis u = analyzed(u_star_with_beta(0.3));
  Complex a = std::sqrt(0.4), b = std::sqrt(0.6);

  SUBCASE("tight regime") {
    const int n = 8;
    TransferReport direct = run_ls(u, n, a, b);
    GateSequence spread = build_s_n(u, n);
    GateSequence retrieve = build_w_n_via_adjoint(u, n);
    StateVector psi = StateVector::zero(retrieve.dims());
    psi.amplitudes(0) = a;
    psi.amplitudes(psi.dim() / 2) = b;
    ExecutionContext ctx{u.u, std::nullopt};
    run_sequence(spread, ctx, psi);
    run_sequence(retrieve, ctx, psi);
    StateVector reference(tensor(direct.final_state.amplitudes, Vector::Unit(2, 0)),
                          psi.subsystem_dims);
    CHECK(psi.fidelity(reference) >= 1.0 - 1e-9);
  }

  SUBCASE("generic envelope") {
    InterfaceAnalysis v = analyzed(u_star_with_beta(1.0 / std::sqrt(2.0)));
    const int n = 2;
    TransferReport direct = run_ls(v, n, a, b);
    GateSequence spread = build_s_n(v, n);
    GateSequence retrieve = build_w_n_via_adjoint(v, n);
    StateVector psi = StateVector::zero(retrieve.dims());
    psi.amplitudes(0) = a;
    psi.amplitudes(psi.dim() / 2) = b;
    ExecutionContext ctx{v.u, std::nullopt};
    run_sequence(spread, ctx, psi);
    run_sequence(retrieve, ctx, psi);
    StateVector reference(tensor(direct.final_state.amplitudes, Vector::Unit(2, 0)),
                          psi.subsystem_dims);
    double deficit = std::pow(v.beta, 2 * (n + 1));
    CHECK(psi.fidelity(reference) >= 1.0 - 2.0 * deficit);
  }
}

TEST_CASE("run_ls input validation") {
  std::mt19937_64 rng(211);
  InterfaceAnalysis u = analyzed(sample_exploitable(CsBounds::Regime::B0, rng));
  CHECK_THROWS_AS(run_ls(u, 1, 1.0, 1.0), std::invalid_argument);
  InterfaceAnalysis id = analyzed(Matrix::Identity(4, 4));
  CHECK_THROWS_AS(run_ls(id, 1, 1.0, 0.0), std::invalid_argument);
}
