#pragma once

#include <nlohmann/json.hpp>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "arc/arcproto/arcproto.hpp"

namespace arc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRejected = 1;  // receipt failed to parse or verify
inline constexpr int kExitAbort = 2;
inline constexpr int kExitUsage = 64;

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Field and group backend from ARC_FIELD_BACKEND: "curve" (default,
// BLS12-381) or "mock" (exponent arithmetic over the same scalar field).
std::string field_backend_name();
const PairingGroup& group_for(std::string_view name);

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  poc::Backend backend = poc::Backend::Poly;
  std::size_t d = 0;  // 0: sized to the largest committed vector
  std::size_t data_holders = 2;
  std::size_t training = 3, inference = 3, audit = 3;
  arcproto::Strategy strategy = arcproto::Strategy::Optimistic;
  std::string dataset = "adult-toy";
  std::filesystem::path csv;  // overrides `dataset` when set
  std::size_t rows = 0;       // 0: every row
  ml::TrainConfig train;
  std::vector<double> query;  // empty: the first dataset row
  std::string function = "certify_rs";
  nlohmann::json aux = nlohmann::json::object();
};

const std::vector<std::string>& dataset_registry();
Scenario parse_scenario(std::string_view toml_text, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);
ml::Dataset load_dataset(const Scenario& s);
// Contiguous, near-equal row blocks, one per data holder.
std::vector<ml::Dataset> split_rows(const ml::Dataset& d, std::size_t parts);

nlohmann::json registry_to_json(const arcproto::Registry& r, std::string_view field_backend);
arcproto::Registry registry_from_json(const nlohmann::json& j);

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::string> tamper;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "arc-out";
  bool timing = true;
};

// train -> infer -> audit. Writes receipts, the registry, the audit outcome
// and a per-phase transcript into out_dir.
int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err);

struct BenchRecord {
  std::string backend;
  std::string phase;  // commit (prover-local) or check (MPC)
  std::size_t d = 0;
  double ms_total = 0;
  double ms_mpc = 0;
  std::uint64_t rounds = 0;
  std::uint64_t bytes_per_party = 0;
  std::size_t receipt_bytes = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kBenchHeader = "backend,phase,d,ms_total,ms_mpc,rounds,bytes_per_party,receipt_bytes,seed";

// Commit and check of one random length-d vector, plus the size of a receipt
// whose model and datasets have d entries.
std::vector<BenchRecord> bench_cell(poc::Backend b, const PairingGroup& g, std::size_t d, std::uint64_t seed);
std::string to_csv_row(const BenchRecord& r, bool timing);

struct BenchOptions {
  std::vector<std::string> backends = {"poly", "hash", "pedersen"};
  std::vector<std::size_t> d = {64, 1024, 16384};
  std::size_t seeds = 3;
  std::optional<std::filesystem::path> out;
  bool timing = true;
};

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err);

// Parses and checks a receipt file against a registry file (default:
// registry.json beside the receipt).
int cmd_verify(const std::filesystem::path& receipt, const std::optional<std::filesystem::path>& registry,
               std::ostream& out, std::ostream& err);

}  // namespace arc::cli
