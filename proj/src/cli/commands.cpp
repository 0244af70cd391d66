#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "arc/cli/cli.hpp"

namespace arc::cli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

constexpr std::uint64_t kBenchDataTag = 0x62656e6368;  // "bench"

nlohmann::json phase_json(const arcproto::PhaseStats& st, bool timing) {
  nlohmann::json j{{"rounds", st.mpc.rounds},
                   {"opened_values", st.mpc.opened_values},
                   {"multiplications", st.mpc.multiplications},
                   {"and_gates", st.mpc.and_gates},
                   {"bytes_per_party", st.mpc.max_bytes_per_party()},
                   {"external_bytes", st.mpc.external_bytes},
                   {"identifiable_rerun", st.identifiable_rerun}};
  if (timing) {
    j["ms_total"] = st.ms_total;
    j["ms_mpc"] = st.ms_mpc;
  }
  return j;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ScenarioError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string describe(const std::optional<arcproto::Party>& p) {
  return p ? "blamed " + p->name() : std::string("no party identified");
}

// Every fault names a party that exists in the scenario.
void check_fault(const arcproto::Fault& f, const Scenario& s) {
  using K = arcproto::Fault::Kind;
  std::size_t limit = 1;
  if (f.kind == K::TrainDataset || f.kind == K::AuditDataset) limit = s.data_holders;
  if (f.kind == K::ComputerShare) limit = s.audit;
  if (f.index >= limit) throw ScenarioError("tamper target out of range: " + f.token());
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t lo = 0;
  while (lo <= s.size()) {
    const auto hi = std::min(s.find(',', lo), s.size());
    if (hi > lo) out.emplace_back(s.substr(lo, hi - lo));
    lo = hi + 1;
  }
  return out;
}

}  // namespace

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  Scenario s;
  std::optional<arcproto::Fault> fault;
  const PairingGroup* g = nullptr;
  const std::string field_name = field_backend_name();
  try {
    s = load_scenario(o.config);
    if (o.seed) s.seed = *o.seed;
    g = &group_for(field_name);
    if (o.tamper) {
      try {
        fault = arcproto::Fault::parse(*o.tamper);
      } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
      }
      check_fault(*fault, s);
    }
  } catch (const ScenarioError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  ml::Dataset data;
  try {
    data = load_dataset(s);
    if (!s.query.empty() && s.query.size() != data.width)
      throw ScenarioError("inference.query has " + std::to_string(s.query.size()) + " features, dataset has " +
                          std::to_string(data.width));
  } catch (const ScenarioError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  const auto parts = split_rows(data, s.data_holders);
  std::size_t longest = data.width + 1;
  for (const auto& p : parts) longest = std::max(longest, p.rows * (p.width + 1));
  const std::size_t d = s.d ? s.d : longest;

  arcproto::Config cfg;
  cfg.pp = poc::poc_setup(s.backend, *g, s.seed, d);
  cfg.training_computers = s.training;
  cfg.inference_computers = s.inference;
  cfg.audit_computers = s.audit;
  cfg.seed = s.seed;
  cfg.strategy = s.strategy;
  const auto keys = arcproto::Keys::derive(s.seed, s.data_holders, s.training, s.inference);
  const auto reg = keys.registry();

  std::filesystem::create_directories(o.out_dir);
  write_text(o.out_dir / "registry.json", registry_to_json(reg, field_name).dump(2) + "\n");
  nlohmann::json transcript{{"scenario", s.name},
                            {"seed", s.seed},
                            {"backend", poc::to_string(s.backend)},
                            {"field_backend", field_name},
                            {"d", d},
                            {"data_holders", s.data_holders},
                            {"computers", {{"training", s.training}, {"inference", s.inference}, {"audit", s.audit}}},
                            {"tamper", fault ? nlohmann::json(fault->token()) : nlohmann::json()},
                            {"phases", nlohmann::json::object()}};
  auto flush = [&] { write_text(o.out_dir / "transcript.json", transcript.dump(2) + "\n"); };

  try {
    arcproto::TrainingJob job{parts, s.train};
    const auto tr = arcproto::run_training(job, cfg, keys, fault);
    const auto train_hex = arcproto::armor(tr.receipt);
    write_text(o.out_dir / "training.receipt.hex", train_hex + "\n");
    transcript["phases"]["training"] = phase_json(tr.stats, o.timing);
    transcript["phases"]["training"]["receipt_bytes"] = arcproto::receipt_size(tr.receipt);
    out << "training: " << data.rows << " rows from " << s.data_holders << " data holders, receipt "
        << arcproto::receipt_size(tr.receipt) << " bytes\n";

    const std::vector<double> query = s.query.empty() ? std::vector<double>(data.row(0).begin(), data.row(0).end())
                                                       : s.query;
    const auto inf = arcproto::run_inference(cfg, keys, tr.owner, tr.receipt.c_model, query, 0, fault);
    write_text(o.out_dir / "inference.receipt.hex", arcproto::armor(inf.receipt) + "\n");
    transcript["phases"]["inference"] = phase_json(inf.stats, o.timing);
    transcript["phases"]["inference"]["receipt_bytes"] = arcproto::receipt_size(inf.receipt);
    out << "inference: score " << std::fixed << std::setprecision(6) << inf.score << ", label " << inf.label
        << ", receipt " << arcproto::receipt_size(inf.receipt) << " bytes\n";

    arcproto::AuditRequest req{inf.receipt, s.function, s.aux};
    const auto audit = arcproto::run_audit(cfg, reg, req, inf.opening, tr.owner, tr.holders, 0, fault);
    auto aj = audit.to_json();
    aj["function"] = s.function;
    write_text(o.out_dir / "audit.json", aj.dump(2) + "\n");
    transcript["phases"]["audit"] = phase_json(audit.stats, o.timing);
    flush();
    if (!audit.ok()) {
      const auto& v = audit.verdict();
      err << "abort: phase audit, step " << v.step << ", blamed " << v.culprit.name() << ": " << v.reason << "\n";
      return kExitAbort;
    }
    out << "audit " << s.function << ":";
    for (double v : audit.result().values()) out << " " << v;
    out << "\n";
    return kExitOk;
  } catch (const arcproto::PhaseAbort& e) {
    flush();
    err << "abort: phase " << arcproto::to_string(e.phase) << ", step " << e.step << ", " << describe(e.culprit)
        << ": " << e.what() << "\n";
    return kExitAbort;
  } catch (const arcproto::UnsupportedMode& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
}

std::vector<BenchRecord> bench_cell(poc::Backend b, const PairingGroup& g, std::size_t d, std::uint64_t seed) {
  const auto pp = poc::poc_setup(b, g, seed, d);
  const auto& f = pp.field();
  Rng rng(derive_seed(seed, kBenchDataTag));
  std::vector<Fe> x;
  x.reserve(d);
  for (std::size_t i = 0; i < d; ++i) x.push_back(Fe::random(f, rng));
  const auto r = poc::sample_randomness(pp, d, rng);

  const auto keys = arcproto::Keys::derive(seed, 2);
  const std::size_t storage = arcproto::receipt_size(arcproto::synthetic_receipt(pp, keys, d, d, 4, seed));

  BenchRecord commit{poc::to_string(b), "commit", d, 0, 0, 0, 0, storage, seed};
  auto t0 = Clock::now();
  const auto c = poc::poc_commit(pp, x, r);
  commit.ms_total = ms_since(t0);

  BenchRecord check{poc::to_string(b), "check", d, 0, 0, 0, 0, storage, seed};
  t0 = Clock::now();
  mpc::Engine e(f, {.parties = 3, .seed = derive_seed(seed, kBenchDataTag + 1), .mode = mpc::Mode::WithAbort});
  const auto xs = e.input(std::nullopt, x);
  Rng prover(derive_seed(seed, kBenchDataTag + 2));
  const auto t1 = Clock::now();
  const auto t = poc::poc_check(e, pp, c, xs, {x, r}, prover);
  check.ms_mpc = ms_since(t1);
  check.ms_total = ms_since(t0);
  if (!t.accept) throw std::logic_error("honest consistency check rejected");
  check.rounds = t.cost.rounds;
  check.bytes_per_party = t.cost.max_bytes_per_party();
  return {commit, check};
}

std::string to_csv_row(const BenchRecord& r, bool timing) {
  std::ostringstream os;
  os << r.backend << ',' << r.phase << ',' << r.d << ',' << std::fixed << std::setprecision(3)
     << (timing ? r.ms_total : 0.0) << ',' << (timing ? r.ms_mpc : 0.0) << ',' << r.rounds << ','
     << r.bytes_per_party << ',' << r.receipt_bytes << ',' << r.seed;
  return os.str();
}

int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<poc::Backend> backends;
  const PairingGroup* g = nullptr;
  try {
    for (const auto& name : o.backends) {
      for (const auto& part : split_list(name)) {
        try {
          backends.push_back(poc::backend_from_string(part));
        } catch (const std::invalid_argument& e) {
          throw ScenarioError(e.what());
        }
      }
    }
    if (backends.empty()) throw ScenarioError("no backends given");
    if (o.d.empty()) throw ScenarioError("no sizes given");
    for (auto d : o.d)
      if (d == 0) throw ScenarioError("d must be at least 1");
    if (o.seeds == 0) throw ScenarioError("seeds must be at least 1");
    g = &group_for(field_backend_name());
  } catch (const ScenarioError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::ofstream file;
  if (o.out) {
    file.open(*o.out, std::ios::binary);
    if (!file) {
      err << "usage error: cannot write " << o.out->string() << "\n";
      return kExitUsage;
    }
  }
  std::ostream& csv = o.out ? static_cast<std::ostream&>(file) : out;
  csv << kBenchHeader << "\n";
  for (auto b : backends)
    for (auto d : o.d)
      for (std::uint64_t seed = 1; seed <= o.seeds; ++seed)
        for (const auto& rec : bench_cell(b, *g, d, seed)) csv << to_csv_row(rec, o.timing) << "\n";
  if (o.out) out << "wrote " << o.out->string() << "\n";
  return kExitOk;
}

int cmd_verify(const std::filesystem::path& receipt, const std::optional<std::filesystem::path>& registry,
               std::ostream& out, std::ostream& err) {
  std::string text;
  nlohmann::json reg_json;
  const auto reg_path = registry ? *registry : receipt.parent_path() / "registry.json";
  try {
    text = read_text(receipt);
    reg_json = nlohmann::json::parse(read_text(reg_path));
  } catch (const std::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  arcproto::Registry reg;
  const PairingGroup* g = nullptr;
  try {
    reg = registry_from_json(reg_json);
    g = &group_for(reg_json.value("field_backend", field_backend_name()));
  } catch (const std::exception& e) {
    err << "usage error: bad registry " << reg_path.string() << ": " << e.what() << "\n";
    return kExitUsage;
  }
  arcproto::Receipt r;
  try {
    r = arcproto::dearmor(*g, text);
  } catch (const std::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitRejected;
  }
  const auto v = arcproto::verify_receipt(r, reg);
  if (!v) {
    err << "verification failed at " << v.failure << "\n";
    return kExitRejected;
  }
  out << "ok: " << (std::holds_alternative<arcproto::TrainingReceipt>(r) ? "training" : "inference") << " receipt, "
      << arcproto::receipt_size(r) << " bytes\n";
  return kExitOk;
}

}  // namespace arc::cli
