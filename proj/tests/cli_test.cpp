#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "arc/cli/cli.hpp"

using namespace arc;
using namespace arc::cli;

namespace {

const std::filesystem::path kScenario = std::filesystem::path(ARC_SOURCE_DIR) / "scenarios" / "adult-toy.toml";

struct Env : ::testing::Environment {
  void SetUp() override { setenv("ARC_FIELD_BACKEND", "mock", 1); }
};
const auto* const kEnv = ::testing::AddGlobalTestEnvironment(new Env);

std::filesystem::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto p = std::filesystem::temp_directory_path() / "arc-cli-test" / (std::string(info->test_suite_name()) + "." + info->name());
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::filesystem::path& config, const std::filesystem::path& out_dir,
            std::optional<std::string> tamper = std::nullopt) {
  std::ostringstream out, err;
  RunOptions o;
  o.config = config;
  o.out_dir = out_dir;
  o.tamper = std::move(tamper);
  o.timing = false;
  const int code = cmd_run(o, out, err);
  return {code, out.str(), err.str()};
}

Outcome verify(const std::filesystem::path& receipt, std::optional<std::filesystem::path> reg = std::nullopt) {
  std::ostringstream out, err;
  const int code = cmd_verify(receipt, reg, out, err);
  return {code, out.str(), err.str()};
}

// Scenario text with one key replaced.
std::string edited(const std::string& from, const std::string& to) {
  std::string s = slurp(kScenario);
  const auto at = s.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return s.replace(at, from.size(), to);
}

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return num / den;
}

std::vector<BenchRecord> parse_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kBenchHeader);
  std::vector<BenchRecord> out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    EXPECT_EQ(f.size(), 9u) << line;
    out.push_back({f[0], f[1], std::stoul(f[2]), std::stod(f[3]), std::stod(f[4]), std::stoull(f[5]),
                   std::stoull(f[6]), std::stoul(f[7]), std::stoull(f[8])});
  }
  return out;
}

std::string bench_csv(std::vector<std::string> backends, std::vector<std::size_t> d, std::size_t seeds) {
  BenchOptions o;
  o.backends = std::move(backends);
  o.d = std::move(d);
  o.seeds = seeds;
  o.timing = false;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_bench(o, out, err), kExitOk) << err.str();
  return out.str();
}

}  // namespace

TEST(Scenario, BundledFileParses) {
  const auto s = load_scenario(kScenario);
  EXPECT_EQ(s.name, "adult-toy");
  EXPECT_EQ(s.backend, poc::Backend::Poly);
  EXPECT_EQ(s.data_holders, 2u);
  EXPECT_EQ(s.audit, 3u);
  EXPECT_EQ(s.function, "certify_rs");
  EXPECT_EQ(s.aux.at("n"), 10);
  EXPECT_DOUBLE_EQ(s.aux.at("alpha").get<double>(), 0.05);
}

TEST(Scenario, NestedAuxBecomesJson) {
  const auto s = parse_scenario(R"(
[audit]
function = "certify_fair"
[audit.aux]
L = 1.0
theta = [[16.0, 0.0], [0.0, 16.0]]
)");
  EXPECT_EQ(s.aux.at("theta").size(), 2u);
  EXPECT_DOUBLE_EQ(s.aux.at("theta")[1][1].get<double>(), 16.0);
}

TEST(Scenario, UnknownIdsRejected) {
  EXPECT_THROW(parse_scenario("[scenario]\nbackend = \"lattice\"\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("[audit]\nfunction = \"influence\"\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("[data]\ndataset = \"mnist\"\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("[parties]\naudit = 1\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("[scenario]\nseed = \"one\"\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("[scenario\n"), ScenarioError);
}

TEST(Scenario, RowsSplitContiguouslyAcrossHolders) {
  const auto d = ml::adult_like(10, 3);
  const auto parts = split_rows(d, 3);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].rows + parts[1].rows + parts[2].rows, 10u);
  EXPECT_EQ(ml::Dataset::concat(parts).x, d.x);
}

TEST(Scenario, CsvPathResolvesAgainstScenarioFile) {
  const auto dir = scratch();
  std::filesystem::copy_file(std::filesystem::path(ARC_SOURCE_DIR) / "data" / "adult_toy.csv", dir / "t.csv");
  spit(dir / "s.toml", "[data]\ncsv = \"t.csv\"\nrows = 16\n");
  const auto s = load_scenario(dir / "s.toml");
  const auto d = load_dataset(s);
  EXPECT_EQ(d.rows, 16u);
  EXPECT_EQ(d.x, ml::adult_like(ml::kAdultToyRows, ml::kAdultToySeed).slice(0, 16).x);
}

TEST(Run, BundledScenarioSucceedsAndWritesArtifacts) {
  const auto dir = scratch();
  const auto r = run(kScenario, dir);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"training.receipt.hex", "inference.receipt.hex", "registry.json", "audit.json",
                        "transcript.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const auto audit = nlohmann::json::parse(slurp(dir / "audit.json"));
  EXPECT_TRUE(audit.at("ok").get<bool>());
  EXPECT_EQ(audit.at("function"), "certify_rs");
  const auto t = nlohmann::json::parse(slurp(dir / "transcript.json"));
  EXPECT_GT(t.at("phases").at("audit").at("rounds").get<std::uint64_t>(), 0u);
  EXPECT_FALSE(t.at("phases").at("training").contains("ms_total"));
  EXPECT_EQ(verify(dir / "training.receipt.hex").code, kExitOk);
  EXPECT_EQ(verify(dir / "inference.receipt.hex").code, kExitOk);
}

TEST(Run, SameSeedGivesIdenticalArtifacts) {
  const auto dir = scratch();
  ASSERT_EQ(run(kScenario, dir / "a").code, kExitOk);
  ASSERT_EQ(run(kScenario, dir / "b").code, kExitOk);
  for (const char* f : {"training.receipt.hex", "inference.receipt.hex", "audit.json", "transcript.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
}

TEST(Run, TamperedDatasetAbortsNamingTheHolder) {
  const auto r = run(kScenario, scratch(), "dh:0:dataset");
  EXPECT_EQ(r.code, kExitAbort);
  EXPECT_NE(r.err.find("DH_0"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("training"), std::string::npos) << r.err;
}

TEST(Run, EveryFaultNamesItsCulprit) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"dh:1:dataset", "DH_1"},       {"m:0:model", "M_0"}, {"dh:1:audit-dataset", "DH_1"},
      {"m:0:audit-model", "M_0"},     {"c:0:input", "C_0"}, {"ac:2:share", "CP_2"}};
  const auto dir = scratch();
  for (const auto& [token, who] : cases) {
    const auto r = run(kScenario, dir, token);
    EXPECT_EQ(r.code, kExitAbort) << token;
    EXPECT_NE(r.err.find("blamed " + who), std::string::npos) << token << ": " << r.err;
  }
}

TEST(Run, UsageErrors) {
  const auto dir = scratch();
  spit(dir / "bad.toml", edited("backend = \"poly\"", "backend = \"lattice\""));
  EXPECT_EQ(run(dir / "bad.toml", dir / "o").code, kExitUsage);
  EXPECT_EQ(run(dir / "missing.toml", dir / "o").code, kExitUsage);
  EXPECT_EQ(run(kScenario, dir / "o", "dh:9:dataset").code, kExitUsage);
  EXPECT_EQ(run(kScenario, dir / "o", "cp:0:nothing").code, kExitUsage);
  spit(dir / "q.toml", slurp(kScenario) + "\n[inference]\nquery = [0.5, 0.5]\n");
  EXPECT_EQ(run(dir / "q.toml", dir / "o").code, kExitUsage);

  setenv("ARC_FIELD_BACKEND", "lattice", 1);
  const auto r = run(kScenario, dir / "o");
  setenv("ARC_FIELD_BACKEND", "mock", 1);
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("field backend"), std::string::npos);
}

TEST(Run, EveryBackendAndCommitteeShapeSucceeds) {
  const auto dir = scratch();
  for (const char* b : {"hash", "pedersen"}) {
    spit(dir / "s.toml", edited("backend = \"poly\"", std::string("backend = \"") + b + "\""));
    const auto r = run(dir / "s.toml", dir / b);
    EXPECT_EQ(r.code, kExitOk) << b << ": " << r.err;
  }
  spit(dir / "p.toml", edited("training = 3\ninference = 3\naudit = 3", "training = 2\ninference = 4\naudit = 5"));
  const auto r = run(dir / "p.toml", dir / "p");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto reg = nlohmann::json::parse(slurp(dir / "p" / "registry.json"));
  EXPECT_EQ(reg.at("training").size(), 2u);
  EXPECT_EQ(reg.at("inference").size(), 4u);
  EXPECT_EQ(verify(dir / "p" / "inference.receipt.hex").code, kExitOk);
}

TEST(Verify, TruncatedFileIsParseError) {
  const auto dir = scratch();
  ASSERT_EQ(run(kScenario, dir).code, kExitOk);
  const auto hex = slurp(dir / "inference.receipt.hex");
  spit(dir / "cut.hex", hex.substr(0, hex.size() / 2));
  const auto v = verify(dir / "cut.hex");
  EXPECT_EQ(v.code, kExitRejected);
  EXPECT_NE(v.err.find("parse error"), std::string::npos) << v.err;
}

TEST(Verify, FlippedSignatureByteReportsLocation) {
  const auto dir = scratch();
  ASSERT_EQ(run(kScenario, dir).code, kExitOk);
  auto hex = slurp(dir / "inference.receipt.hex");
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.pop_back();
  // The owner signature is the last field of an inference receipt.
  Bytes b = from_hex(hex);
  b.back() ^= 0x01;
  spit(dir / "flip.hex", to_hex(b));
  const auto v = verify(dir / "flip.hex");
  EXPECT_EQ(v.code, kExitRejected);
  EXPECT_NE(v.err.find("verification failed at sigma_I"), std::string::npos) << v.err;
}

TEST(Verify, RandomByteFlipsAreAllRejected) {
  const auto dir = scratch();
  ASSERT_EQ(run(kScenario, dir).code, kExitOk);
  auto hex = slurp(dir / "training.receipt.hex");
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.pop_back();
  const Bytes orig = from_hex(hex);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Bytes b = orig;
    b[rng() % b.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    spit(dir / "m.hex", to_hex(b));
    const auto v = verify(dir / "m.hex", dir / "registry.json");
    EXPECT_EQ(v.code, kExitRejected) << trial;
  }
}

TEST(Verify, WrongRegistryRejectsSignatures) {
  const auto dir = scratch();
  ASSERT_EQ(run(kScenario, dir / "a").code, kExitOk);
  spit(dir / "s.toml", edited("seed = 1", "seed = 2"));
  ASSERT_EQ(run(dir / "s.toml", dir / "b").code, kExitOk);
  const auto v = verify(dir / "a" / "training.receipt.hex", dir / "b" / "registry.json");
  EXPECT_EQ(v.code, kExitRejected);
  EXPECT_NE(v.err.find("sigma_TC[0]"), std::string::npos) << v.err;
  EXPECT_EQ(verify(dir / "none.hex").code, kExitUsage);
}

TEST(Bench, SameSeedGivesIdenticalCsv) {
  const auto a = bench_csv({"poly", "hash", "pedersen"}, {16, 64}, 2);
  EXPECT_EQ(a, bench_csv({"poly", "hash", "pedersen"}, {16, 64}, 2));
  EXPECT_EQ(parse_csv(a).size(), 3u * 2 * 2 * 2);
}

TEST(Bench, CommaSeparatedBackendsAndFileOutput) {
  const auto dir = scratch();
  BenchOptions o;
  o.backends = {"poly,pedersen"};
  o.d = {8};
  o.seeds = 1;
  o.out = dir / "b.csv";
  o.timing = false;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_bench(o, out, err), kExitOk);
  const auto rows = parse_csv(slurp(dir / "b.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[2].backend, "pedersen");
  o.backends = {"poly", "lattice"};
  EXPECT_EQ(cmd_bench(o, out, err), kExitUsage);
}

TEST(Bench, StorageAndRoundScaling) {
  const std::vector<std::size_t> grid = {64, 256, 1024, 4096, 16384};
  const auto rows = parse_csv(bench_csv({"poly", "pedersen"}, grid, 1));
  std::vector<double> xs(grid.begin(), grid.end()), poly, ped, poly_rounds;
  for (const auto& r : rows) {
    if (r.phase == "commit") {
      EXPECT_EQ(r.rounds, 0u);
      continue;
    }
    (r.backend == "poly" ? poly : ped).push_back(static_cast<double>(r.receipt_bytes));
    if (r.backend == "poly") poly_rounds.push_back(static_cast<double>(r.rounds));
  }
  const double s_poly = loglog_slope(xs, poly), s_ped = loglog_slope(xs, ped);
  EXPECT_GE(s_poly, -0.05);
  EXPECT_LE(s_poly, 0.05);
  EXPECT_GE(s_ped, 0.9);
  EXPECT_LE(s_ped, 1.1);
  for (double r : poly_rounds) EXPECT_EQ(r, poly_rounds.front());
}

TEST(Bench, HashRoundsGrowLinearly) {
  const std::vector<std::size_t> grid = {16, 64, 256};
  const auto rows = parse_csv(bench_csv({"hash"}, grid, 1));
  std::vector<double> rounds;
  for (const auto& r : rows) {
    if (r.phase == "check") rounds.push_back(static_cast<double>(r.rounds));
  }
  const double s = loglog_slope({grid.begin(), grid.end()}, rounds);
  EXPECT_GE(s, 0.9);
  EXPECT_LE(s, 1.1);
}
