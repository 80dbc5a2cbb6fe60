#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qio/experiment.hpp"
#include "qio/hamiltonian.hpp"
#include "qio/io_channel.hpp"

namespace {

using namespace qio;

void print_analysis(const Matrix& u) {
  auto verdict = classify(u);
  std::printf("in_u_star:    %s\n", verdict.in_u_star ? "yes" : "no");
  std::printf("exploitable:  %s\n", verdict.exploitable ? "yes" : "no");
  if (!verdict.exploitable)
    std::printf("reason:       %s\n", to_string(verdict.failure_reason));
  auto sv = operator_schmidt(u);
  std::printf("schmidt:      %d  (singular values %.6f %.6f %.6f %.6f)\n",
              operator_schmidt_number(u), sv[0], sv[1], sv[2], sv[3]);
  if (verdict.analysis) {
    const InterfaceAnalysis& a = *verdict.analysis;
    std::printf("alpha:        %.12f\n", a.alpha);
    std::printf("beta:         %.12f\n", a.beta);
    std::printf("omega:        %.12f\n", a.omega);
    std::printf("gamma:        %.12f%+.12fi\n", a.gamma.real(), a.gamma.imag());
    std::printf("|<psi0|phi>|: %.12f\n", std::abs(a.overlap_psi0_phi));
    if (verdict.exploitable)
      std::printf("regime:       %s\n", to_string(cs_regime(a)));
    std::printf("basis |0>_S:  (%.6f%+.6fi, %.6f%+.6fi)\n",
                a.basis.basis_s(0, 0).real(), a.basis.basis_s(0, 0).imag(),
                a.basis.basis_s(1, 0).real(), a.basis.basis_s(1, 0).imag());
    std::printf("basis |0>_I:  (%.6f%+.6fi, %.6f%+.6fi)\n",
                a.basis.basis_i(0, 0).real(), a.basis.basis_i(0, 0).imag(),
                a.basis.basis_i(1, 0).real(), a.basis.basis_i(1, 0).imag());
  }
}

int run_config(const std::string& path, bool sweep) {
  namespace fs = std::filesystem;
  std::vector<ExperimentConfig> configs;
  if (sweep) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.is_object() || !j.contains("points") || !j["points"].is_array())
      throw std::invalid_argument("sweep file needs a 'points' array of configs");
    for (const auto& p : j["points"])
      configs.push_back(ExperimentConfig::from_json_text(p.dump()));
  } else {
    configs.push_back(ExperimentConfig::from_json_file(path));
  }

  bool all_pass = true;
  for (const auto& cfg : configs) {
    ExperimentSummary summary = run_experiment(cfg);
    std::string dir = cfg.output_dir.empty() ? "results" : cfg.output_dir;
    std::string csv = emit_tables(summary, dir);
    long passed = 0;
    for (const auto& r : summary.records) passed += r.pass ? 1 : 0;
    std::printf("%-16s %4ld/%4zu points pass  ->  %s\n", to_string(cfg.kind),
                passed, summary.records.size(), csv.c_str());
    all_pass = all_pass && summary.all_pass;
  }
  return all_pass ? 0 : 1;
}

int report(const std::string& dir) {
  namespace fs = std::filesystem;
  bool all_pass = true;
  bool any = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    nlohmann::json j = nlohmann::json::parse(in);
    if (!j.contains("all_pass")) continue;
    any = true;
    bool pass = j["all_pass"].get<bool>();
    all_pass = all_pass && pass;
    std::printf("%-20s hash=%s records=%ld passed=%ld  %s\n",
                j.value("kind", std::string("?")).c_str(),
                j.value("config_hash", std::string("?")).c_str(),
                (long)j.value("records", 0), (long)j.value("passed", 0),
                pass ? "PASS" : "FAIL");
  }
  if (!any) {
    std::fprintf(stderr, "no summaries found in %s\n", dir.c_str());
    return 2;
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interface-unitary transfer workbench"};
  app.require_subcommand(1);

  std::string matrix_path;
  auto* analyze = app.add_subcommand("analyze", "classify a 4x4 interface unitary");
  analyze->add_option("matrix-file", matrix_path, "text file, 4 rows of a+bi entries")
      ->required();

  std::string config_path;
  auto* runcmd = app.add_subcommand("run", "run one experiment config");
  runcmd->add_option("config-file", config_path)->required();

  std::string sweep_path;
  auto* sweepcmd = app.add_subcommand("sweep", "run a sweep file (JSON with 'points')");
  sweepcmd->add_option("config-file", sweep_path)->required();

  auto* lemmacmd = app.add_subcommand("verify-lemma1", "random accuracy-bound check");
  int samples = 100;
  std::uint64_t seed = 1;
  lemmacmd->add_option("--samples", samples);
  lemmacmd->add_option("--seed", seed);

  auto* solvecmd = app.add_subcommand("solve-effective",
                                      "exploitable parameters for the X-X family");
  double r = 0.0, g = 0.0, xi_eps = 1e-3;
  solvecmd->add_option("--r", r)->required();
  solvecmd->add_option("--g", g)->required();
  solvecmd->add_option("--xi-eps", xi_eps);

  std::string report_dir;
  auto* reportcmd = app.add_subcommand("report", "summarize a results directory");
  reportcmd->add_option("results-dir", report_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      Matrix u = read_matrix_file(matrix_path);
      if (!is_unitary(u, 1e-8)) {
        std::fprintf(stderr, "input matrix is not unitary (defect %.3e)\n",
                     unitarity_defect(u));
        return 2;
      }
      print_analysis(u);
      return 0;
    }
    if (*runcmd) return run_config(config_path, false);
    if (*sweepcmd) return run_config(sweep_path, true);
    if (*lemmacmd) {
      ExperimentConfig cfg;
      cfg.kind = ExperimentKind::lemma1;
      cfg.seed = seed;
      cfg.params = {{"samples", (double)samples}, {"budget", 12}};
      auto summary = run_experiment(cfg);
      long passed = 0;
      double worst = 0.0;
      for (const auto& rec : summary.records) {
        passed += rec.pass ? 1 : 0;
        worst = std::max(worst, rec.values.at("measured") - rec.values.at("bound"));
      }
      std::printf("%ld/%zu bound checks pass, worst excess %.3e\n", passed,
                  summary.records.size(), worst);
      return summary.all_pass ? 0 : 1;
    }
    if (*solvecmd) {
      auto sol = solve_effective_interface(r, g);
      Matrix u_eff = build_u_eff(HamiltonianPair::xx(r, g), sol.tau_star,
                                 sol.T_star, sol.s_star);
      std::printf("omega_bar:  %.12f\n", sol.omega_bar);
      std::printf("theta*:     %.12f\n", sol.theta_star);
      std::printf("tau*:       %.12f\n", sol.tau_star);
      std::printf("T*:         %.12f\n", sol.T_star);
      std::printf("s*:         %.12f\n", sol.s_star);
      std::printf("N*(%g):     %d\n", xi_eps, sol.n_star_for(xi_eps));
      std::printf("time cost:  %.12f\n", end_to_end_time_cost(sol, xi_eps, 0.0));
      std::printf("\n");
      print_analysis(u_eff);
      return 0;
    }
    if (*reportcmd) return report(report_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
