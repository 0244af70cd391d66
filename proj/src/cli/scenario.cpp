#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "arc/cli/cli.hpp"

namespace arc::cli {

namespace {

template <class T>
T get_or(const toml::node_view<const toml::node>& n, T dflt, const char* key) {
  if (!n) return dflt;
  auto v = n.value<T>();
  if (!v) throw ScenarioError(std::string("wrong type for ") + key);
  return *v;
}

std::size_t get_count(const toml::node_view<const toml::node>& n, std::size_t dflt, const char* key) {
  const auto v = get_or<std::int64_t>(n, static_cast<std::int64_t>(dflt), key);
  if (v < 0) throw ScenarioError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

arcproto::Strategy strategy_from_string(std::string_view s) {
  if (s == "optimistic") return arcproto::Strategy::Optimistic;
  if (s == "abort") return arcproto::Strategy::WithAbort;
  if (s == "identifiable") return arcproto::Strategy::Identifiable;
  throw ScenarioError("unknown strategy: " + std::string(s));
}

nlohmann::json to_json(const toml::table& t) {
  std::ostringstream os;
  os << toml::json_formatter{t};
  return nlohmann::json::parse(os.str());
}

}  // namespace

std::string field_backend_name() {
  const char* v = std::getenv("ARC_FIELD_BACKEND");
  return v && *v ? std::string(v) : std::string("curve");
}

const PairingGroup& group_for(std::string_view name) {
  if (name == "curve") return PairingGroup::bls12_381();
  if (name == "mock") return PairingGroup::mock(PrimeField::bls12_381_scalar());
  throw ScenarioError("unknown field backend: " + std::string(name) + " (expected mock or curve)");
}

const std::vector<std::string>& dataset_registry() {
  static const std::vector<std::string> ids = {"adult-toy"};
  return ids;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table parsed;
  try {
    parsed = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "scenario: " << e.description() << " at line " << e.source().begin.line;
    throw ScenarioError(os.str());
  }
  const toml::table& t = parsed;
  Scenario s;
  const auto sc = t["scenario"];
  s.name = get_or<std::string>(sc["name"], s.name, "scenario.name");
  s.seed = static_cast<std::uint64_t>(get_or<std::int64_t>(sc["seed"], 1, "scenario.seed"));
  try {
    s.backend = poc::backend_from_string(get_or<std::string>(sc["backend"], "poly", "scenario.backend"));
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  s.d = get_count(sc["d"], 0, "scenario.d");
  s.strategy = strategy_from_string(get_or<std::string>(sc["strategy"], "optimistic", "scenario.strategy"));

  const auto pa = t["parties"];
  s.data_holders = get_count(pa["data_holders"], s.data_holders, "parties.data_holders");
  s.training = get_count(pa["training"], s.training, "parties.training");
  s.inference = get_count(pa["inference"], s.inference, "parties.inference");
  s.audit = get_count(pa["audit"], s.audit, "parties.audit");
  if (s.data_holders == 0) throw ScenarioError("parties.data_holders must be at least 1");
  for (auto [n, key] : {std::pair{s.training, "training"}, {s.inference, "inference"}, {s.audit, "audit"}})
    if (n < 2) throw ScenarioError(std::string("parties.") + key + " must be at least 2");

  const auto da = t["data"];
  s.dataset = get_or<std::string>(da["dataset"], s.dataset, "data.dataset");
  if (auto csv = da["csv"].value<std::string>()) s.csv = base_dir / *csv;
  if (s.csv.empty() && std::find(dataset_registry().begin(), dataset_registry().end(), s.dataset) ==
                           dataset_registry().end())
    throw ScenarioError("unknown dataset: " + s.dataset);
  s.rows = get_count(da["rows"], 0, "data.rows");

  const auto tr = t["train"];
  s.train.epochs = get_count(tr["epochs"], s.train.epochs, "train.epochs");
  s.train.batch = get_count(tr["batch"], s.train.batch, "train.batch");
  s.train.lr = get_or<double>(tr["lr"], s.train.lr, "train.lr");
  if (s.train.batch == 0) throw ScenarioError("train.batch must be at least 1");

  if (const auto* q = t["inference"]["query"].as_array()) {
    for (const auto& v : *q) {
      auto d = v.value<double>();
      if (!d) throw ScenarioError("inference.query must be an array of numbers");
      s.query.push_back(*d);
    }
  }

  const auto au = t["audit"];
  s.function = get_or<std::string>(au["function"], s.function, "audit.function");
  const auto& reg = arcproto::audit_registry();
  if (std::find(reg.begin(), reg.end(), s.function) == reg.end())
    throw ScenarioError("unknown audit function: " + s.function);
  if (const auto* aux = au["aux"].as_table()) s.aux = to_json(*aux);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str(), path.parent_path());
}

ml::Dataset load_dataset(const Scenario& s) {
  ml::Dataset d;
  if (!s.csv.empty()) {
    try {
      d = ml::load_csv(s.csv);
    } catch (const std::exception& e) {
      throw ScenarioError(e.what());
    }
  } else {
    d = ml::adult_like(ml::kAdultToyRows, ml::kAdultToySeed);
  }
  if (s.rows != 0) {
    if (s.rows > d.rows) throw ScenarioError("data.rows exceeds the dataset size");
    d = d.slice(0, s.rows);
  }
  if (d.rows < s.data_holders) throw ScenarioError("fewer rows than data holders");
  return d;
}

std::vector<ml::Dataset> split_rows(const ml::Dataset& d, std::size_t parts) {
  std::vector<ml::Dataset> out;
  for (std::size_t i = 0; i < parts; ++i) {
    const std::size_t lo = i * d.rows / parts, hi = (i + 1) * d.rows / parts;
    out.push_back(d.slice(lo, hi - lo));
  }
  return out;
}

nlohmann::json registry_to_json(const arcproto::Registry& r, std::string_view field_backend) {
  auto keys = [](const std::vector<PublicKey>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& k : v) a.push_back(to_hex(k));
    return a;
  };
  return {{"field_backend", field_backend},
          {"data_holders", keys(r.data_holders)},
          {"owners", keys(r.owners)},
          {"training", keys(r.training)},
          {"inference", keys(r.inference)}};
}

arcproto::Registry registry_from_json(const nlohmann::json& j) {
  auto keys = [&](const char* name) {
    std::vector<PublicKey> v;
    for (const auto& h : j.at(name)) {
      const Bytes b = from_hex(h.get<std::string>());
      if (b.size() != PublicKey{}.size()) throw std::invalid_argument(std::string("bad public key in ") + name);
      PublicKey k;
      std::copy(b.begin(), b.end(), k.begin());
      v.push_back(k);
    }
    return v;
  };
  arcproto::Registry r;
  r.data_holders = keys("data_holders");
  r.owners = keys("owners");
  r.training = keys("training");
  r.inference = keys("inference");
  return r;
}

}  // namespace arc::cli
