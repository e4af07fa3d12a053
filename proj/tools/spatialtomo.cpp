// Copyright 2026 The spatialtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// spatialtomo: simulate, reconstruct and check two-photon spatial-qubit
// tomography runs. See README.md for the file formats.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spatialtomo/cli.hpp"

namespace cli = spatialtomo::cli;

int main(int argc, char** argv) {
  CLI::App app{"Two-photon spatial-qubit tomography"};
  app.require_subcommand(1);

  cli::SimulateArgs sim;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Simulate the 16 coincidence counts");
  simulate->add_option("--config", sim.config, "Run config (JSON)")->required();
  simulate->add_option("--out", sim.out, "CountRecord output (.json, or .csv mirror)")->required();
  simulate->add_flag("--noiseless", sim.noiseless, "Round expected counts, keep exact rates");
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "Override noise.seed");

  cli::ReconstructArgs rec;
  std::string rec_reference;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct rho from a count record");
  reconstruct->add_option("--counts", rec.counts, "CountRecord (JSON)")->required();
  reconstruct->add_option("--method", rec.method, "exact | paper | mle")
      ->required()
      ->check(CLI::IsMember({"exact", "paper", "mle"}));
  reconstruct->add_option("--config", rec.config, "Run config (JSON)")->required();
  reconstruct->add_option("--out", rec.out, "ReconstructionResult output (JSON)")->required();
  auto* ref_opt = reconstruct->add_option("--reference", rec_reference, "Reference density matrix (JSON)");

  std::string cmp_a, cmp_b;
  auto* compare = app.add_subcommand("compare", "Fidelity and friends between two density matrices");
  compare->add_option("A", cmp_a, "First state (JSON with \"rho\")")->required();
  compare->add_option("B", cmp_b, "Second state (JSON with \"rho\")")->required();

  cli::OracleArgs orc;
  std::string orc_grid;
  auto* oracle = app.add_subcommand("oracle", "Closed-form propagation integrals vs quadrature");
  oracle->add_option("--config", orc.config, "Run config (JSON)")->required();
  auto* grid_opt = oracle->add_option("--grid", orc_grid, "Grid file {x_mm:[...], q_per_mm:[...]}");
  oracle->add_option("--out", orc.out, "CSV report")->required();

  cli::SweepArgs swp;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo fidelity sweep");
  sweep->add_option("--config", swp.config, "Run config (JSON)")->required();
  sweep->add_option("--var", swp.var, "counts_per_setting | trials")
      ->required()
      ->check(CLI::IsMember({"counts_per_setting", "trials"}));
  sweep->add_option("--range", swp.range, "lo:hi:n (log-spaced) or a,b,c")->required();
  sweep->add_option("--trials", swp.trials, "Trials per point")->default_val(1);
  sweep->add_option("--out", swp.out, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cli::kValidation);
  }

  if (*simulate) {
    if (*seed_opt) sim.seed = sim_seed;
    return cli::cmd_simulate(sim, std::cout, std::cerr);
  }
  if (*reconstruct) {
    if (*ref_opt) rec.reference = rec_reference;
    return cli::cmd_reconstruct(rec, std::cout, std::cerr);
  }
  if (*compare) return cli::cmd_compare(cmp_a, cmp_b, std::cout, std::cerr);
  if (*oracle) {
    if (*grid_opt) orc.grid = orc_grid;
    return cli::cmd_oracle(orc, std::cout, std::cerr);
  }
  return cli::cmd_sweep(swp, std::cout, std::cerr);
}
