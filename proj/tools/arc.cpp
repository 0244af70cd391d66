#include <CLI11.hpp>
#include <iostream>

#include "arc/cli/cli.hpp"

int main(int argc, char** argv) {
  using namespace arc::cli;
  CLI::App app{"Auditable receipts for private training, inference and audits"};
  app.require_subcommand(1);

  RunOptions run;
  std::string tamper;
  std::uint64_t seed = 0;
  bool run_no_timing = false;
  auto* r = app.add_subcommand("run", "Train, serve one query and audit it as configured by a scenario file");
  r->add_option("--config", run.config, "Scenario TOML file")->required();
  auto* tamper_opt = r->add_option("--tamper", tamper, "Inject a fault, written role:index:what (e.g. dh:0:dataset)");
  auto* seed_opt = r->add_option("--seed", seed, "Override the scenario seed");
  r->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
  r->add_flag("--no-timing", run_no_timing, "Omit wall-clock fields so outputs are deterministic");

  BenchOptions bench;
  bool bench_no_timing = false;
  std::string bench_out;
  auto* b = app.add_subcommand("bench", "Consistency-check cost and receipt size per backend and size, as CSV");
  b->add_option("--backends", bench.backends, "Comma-separated list of poly, hash, pedersen")
      ->delimiter(',')
      ->capture_default_str();
  b->add_option("--d", bench.d, "Comma-separated vector lengths")->delimiter(',')->capture_default_str();
  b->add_option("--seeds", bench.seeds, "Seeds per cell (1..N)")->capture_default_str();
  b->add_option("--out", bench_out, "CSV output file (default: stdout)");
  b->add_flag("--no-timing", bench_no_timing, "Write zero in the time columns so the CSV is byte-deterministic");

  std::string receipt, registry;
  auto* v = app.add_subcommand("verify", "Parse a receipt file and check its signature chain");
  v->add_option("receipt", receipt, "Receipt hex file")->required();
  auto* reg_opt = v->add_option("--registry", registry, "Public key registry (default: registry.json beside the receipt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*r) {
    if (*tamper_opt) run.tamper = tamper;
    if (*seed_opt) run.seed = seed;
    run.timing = !run_no_timing;
    return cmd_run(run, std::cout, std::cerr);
  }
  if (*b) {
    if (!bench_out.empty()) bench.out = bench_out;
    bench.timing = !bench_no_timing;
    return cmd_bench(bench, std::cout, std::cerr);
  }
  std::optional<std::filesystem::path> reg;
  if (*reg_opt) reg = registry;
  return cmd_verify(receipt, reg, std::cout, std::cerr);
}
