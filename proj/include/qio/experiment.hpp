#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qio/cs.hpp"

namespace qio {

enum class ExperimentKind {
  ls_convergence,
  cs_convergence,
  cs_bounds,
  lemma1,
  zz_negative,
  xx_effective,
  io_roundtrip,
  phase_adjust,
};

ExperimentKind experiment_kind_from_string(const std::string& s);
const char* to_string(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ls_convergence;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::map<std::string, double> params;

  static ExperimentConfig from_json_file(const std::string& path);
  static ExperimentConfig from_json_text(const std::string& text);
  std::string canonical_text() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical text
  double param(const std::string& key) const;
};

struct ResultRecord {
  std::uint64_t config_hash = 0;
  long point = 0;
  std::map<std::string, double> values;  // inputs, measured, predicted
  bool pass = true;
  double wall_seconds = 0.0;  // not serialized to CSV (determinism)
};

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<ResultRecord> records;
  bool all_pass = true;
  std::string note;
};

// Deterministic given (kind, params, seed); points run on QIO_WORKERS threads
// and are merged in point order.
ExperimentSummary run_experiment(const ExperimentConfig& config);

// One CSV with the union of record columns plus a JSON summary with the
// invariant verdicts. Returns the CSV path.
std::string emit_tables(const ExperimentSummary& summary,
                        const std::string& out_dir);

std::string render_csv(const ExperimentSummary& summary);

int worker_count();

// Random members of the in-form family with a prescribed convergence regime,
// feasible in the computational basis. Draws are rejected until exploitable
// with the requested regime.
Matrix sample_exploitable(CsBounds::Regime regime, std::mt19937_64& rng);

// Direct in-form member with given beta: psi0 = |0>, psi1 = |1>, phi = |1>.
Matrix u_star_with_beta(double beta);

// 4x4 matrix file: 4 rows of 4 whitespace-separated complex entries a+bi.
Matrix read_matrix_file(const std::string& path);
std::string format_matrix(const Matrix& m);

}  // namespace qio
