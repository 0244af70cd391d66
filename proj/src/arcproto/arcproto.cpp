#include "arc/arcproto/arcproto.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "arc/audit/audit.hpp"
#include "arc/ml/backend.hpp"
#include "arc/mpc/protocols.hpp"

namespace arc::arcproto {
namespace {

using mpc::Engine;
using mpc::FShared;
using mpc::RShared;
using poc::PocCommitment;

constexpr std::uint8_t kTrainingKind = 1;
constexpr std::uint8_t kInferenceKind = 2;
constexpr std::uint64_t kTrainTag = 0x5452, kInferTag = 0x4946, kAuditTag = 0x4155;
constexpr std::uint64_t kHolderRandTag = 0x1000, kProverTag = 0x2000;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<mpc::Mode> modes_for(Strategy s) {
  switch (s) {
    case Strategy::Optimistic: return {mpc::Mode::WithAbort, mpc::Mode::Identifiable};
    case Strategy::WithAbort: return {mpc::Mode::WithAbort};
    case Strategy::Identifiable: return {mpc::Mode::Identifiable};
  }
  return {};
}

// Runs `pass` under the configured strategy. An identified abort names a
// computing party; an unidentified one triggers the identifiable rerun.
template <class F>
auto with_strategy(const Config& cfg, Phase ph, PhaseStats& st, F&& pass) {
  const auto modes = modes_for(cfg.strategy);
  for (std::size_t k = 0;; ++k) {
    try {
      return pass(modes[k]);
    } catch (const mpc::IdentifiedAbort& a) {
      throw PhaseAbort(ph, "opening", Party{Role::Computer, a.party}, a.what());
    } catch (const mpc::Abort& a) {
      if (k + 1 == modes.size()) throw PhaseAbort(ph, "opening", std::nullopt, a.what());
      st.identifiable_rerun = true;
    }
  }
}

Engine make_engine(const Config& cfg, std::size_t parties, std::uint64_t tag, std::uint64_t nonce, mpc::Mode mode) {
  return Engine(cfg.field(), {.parties = parties, .seed = derive_seed(derive_seed(cfg.seed, tag), nonce),
                              .mode = mode});
}

// One consistency check; a failure blames the prover unless the check
// identified a computing party.
void require_consistent(Engine& e, const Config& cfg, const PocCommitment& c, const FShared& x,
                        const poc::Witness& w, Rng& rng, Phase ph, const char* step, Party prover,
                        PhaseStats& st) {
  const auto t0 = Clock::now();
  poc::CheckTranscript t;
  try {
    t = poc::poc_check(e, cfg.pp, c, x, w, rng);
  } catch (const std::invalid_argument& err) {
    // Malformed witness or commitment shape: the prover's input is unusable.
    st.ms_mpc += ms_since(t0);
    throw PhaseAbort(ph, step, prover, err.what());
  }
  st.ms_mpc += ms_since(t0);
  if (t.accept) return;
  if (t.blame && t.blame->kind == poc::Blame::Kind::ComputingParty) {
    throw PhaseAbort(ph, step, Party{Role::Computer, t.blame->party}, "inconsistent share in consistency check");
  }
  throw PhaseAbort(ph, step, prover, "input does not match its commitment");
}

// A different dataset: the first label is flipped.
ml::Dataset altered(ml::Dataset d) {
  if (d.rows == 0) throw std::invalid_argument("fault needs a nonempty dataset");
  d.y[0] ^= 1;
  return d;
}

// A different model: the first weight moves by one fixed-point unit.
std::vector<std::int64_t> altered(std::vector<std::int64_t> m) {
  if (m.empty()) throw std::invalid_argument("fault needs a nonempty model");
  m[0] += 1;
  return m;
}

bool has(const std::optional<Fault>& f, Fault::Kind k, std::size_t i = 0) {
  return f && f->kind == k && f->index == i;
}

void write_sigs(ByteWriter& w, const std::vector<Signature>& s) {
  w.u32(static_cast<std::uint32_t>(s.size()));
  for (const auto& x : s) w.raw(x);
}

std::vector<Signature> read_sigs(ByteReader& r) {
  const std::uint32_t n = r.u32();
  if (static_cast<std::size_t>(n) * 64 > r.remaining()) throw ParseError("signature count exceeds input");
  std::vector<Signature> out(n);
  for (auto& s : out) {
    auto b = r.raw(64);
    std::copy(b.begin(), b.end(), s.begin());
  }
  return out;
}

void append(Bytes& out, const Bytes& b) { out.insert(out.end(), b.begin(), b.end()); }

void append_sigs(Bytes& out, const std::vector<Signature>& s) {
  for (const auto& x : s) out.insert(out.end(), x.begin(), x.end());
}

Verification check_signers(std::span<const PublicKey> pks, ByteSpan msg, std::span<const Signature> sigs,
                           const std::string& name) {
  if (auto bad = dist_verify(pks, msg, sigs)) return Verification::fail(name + "[" + std::to_string(*bad) + "]");
  if (sigs.size() != pks.size()) return Verification::fail(name + "[" + std::to_string(pks.size()) + "]");
  return {};
}

// Splits a converted dataset into features (real) and labels (int).
audit::PartyData<ml::MpcBackend> split_dataset(const RShared& v, std::size_t rows, std::size_t width) {
  return {v.slice(0, rows * width), v.slice(rows * width, rows), rows};
}

}  // namespace

// ---------------------------------------------------------------- parties

std::string Party::name() const {
  const char* p = role == Role::DataHolder ? "DH_" : role == Role::ModelOwner ? "M_" : role == Role::Client ? "C_" : "CP_";
  return p + std::to_string(index);
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Training: return "training";
    case Phase::Inference: return "inference";
    case Phase::Audit: return "audit";
  }
  return "?";
}

PhaseAbort::PhaseAbort(Phase ph, std::string s, std::optional<Party> who, const std::string& why)
    : std::runtime_error(std::string(to_string(ph)) + " aborted at " + s +
                         (who ? " blaming " + who->name() : std::string()) + ": " + why),
      phase(ph),
      step(std::move(s)),
      culprit(who) {}

bool Registry::is_owner(const PublicKey& pk) const {
  return std::find(owners.begin(), owners.end(), pk) != owners.end();
}

Keys Keys::derive(std::uint64_t seed, std::size_t data_holders, std::size_t training, std::size_t inference) {
  Keys k;
  for (std::size_t i = 0; i < data_holders; ++i) k.data_holders.push_back(KeyPair::derive(seed, "dh/" + std::to_string(i)));
  k.owner = KeyPair::derive(seed, "owner/0");
  for (std::size_t j = 0; j < training; ++j) k.training.push_back(KeyPair::derive(seed, "tc/" + std::to_string(j)));
  for (std::size_t j = 0; j < inference; ++j) k.inference.push_back(KeyPair::derive(seed, "ic/" + std::to_string(j)));
  return k;
}

Registry Keys::registry() const {
  Registry r;
  for (const auto& k : data_holders) r.data_holders.push_back(k.pk);
  r.owners.push_back(owner.pk);
  for (const auto& k : training) r.training.push_back(k.pk);
  for (const auto& k : inference) r.inference.push_back(k.pk);
  return r;
}

// ---------------------------------------------------------------- faults

Fault Fault::parse(std::string_view token) {
  const auto a = token.find(':');
  const auto b = a == std::string_view::npos ? a : token.find(':', a + 1);
  if (b == std::string_view::npos) throw std::invalid_argument("fault must be role:index:what");
  const std::string_view role = token.substr(0, a), idx = token.substr(a + 1, b - a - 1), what = token.substr(b + 1);
  Fault f;
  try {
    std::size_t used = 0;
    f.index = std::stoul(std::string(idx), &used);
    if (used != idx.size()) throw std::invalid_argument("index");
  } catch (const std::exception&) {
    throw std::invalid_argument("fault index must be a number: " + std::string(token));
  }
  if (role == "dh" && what == "dataset") {
    f.kind = Kind::TrainDataset;
  } else if (role == "dh" && what == "audit-dataset") {
    f.kind = Kind::AuditDataset;
  } else if (role == "m" && what == "model") {
    f.kind = Kind::InferenceModel;
  } else if (role == "m" && what == "audit-model") {
    f.kind = Kind::AuditModel;
  } else if (role == "c" && what == "input") {
    f.kind = Kind::ClientInput;
  } else if (role == "ac" && what == "share") {
    f.kind = Kind::ComputerShare;
  } else {
    throw std::invalid_argument("unknown fault: " + std::string(token));
  }
  return f;
}

std::string Fault::token() const {
  const std::string i = std::to_string(index);
  switch (kind) {
    case Kind::TrainDataset: return "dh:" + i + ":dataset";
    case Kind::InferenceModel: return "m:" + i + ":model";
    case Kind::AuditDataset: return "dh:" + i + ":audit-dataset";
    case Kind::AuditModel: return "m:" + i + ":audit-model";
    case Kind::ClientInput: return "c:" + i + ":input";
    case Kind::ComputerShare: return "ac:" + i + ":share";
  }
  return "?";
}

Party Fault::culprit() const {
  switch (kind) {
    case Kind::TrainDataset:
    case Kind::AuditDataset: return {Role::DataHolder, index};
    case Kind::InferenceModel:
    case Kind::AuditModel: return {Role::ModelOwner, index};
    case Kind::ClientInput: return {Role::Client, index};
    case Kind::ComputerShare: return {Role::Computer, index};
  }
  return {};
}

// ---------------------------------------------------------------- encodings

std::vector<Fe> encode_fixed(const PrimeField& f, std::span<const double> x) {
  std::vector<Fe> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(Fe::from_i64(f, fx_encode(v)));
  return out;
}

std::vector<Fe> encode_raw(const PrimeField& f, std::span<const std::int64_t> v) {
  std::vector<Fe> out;
  out.reserve(v.size());
  for (auto x : v) out.push_back(Fe::from_i64(f, x));
  return out;
}

std::vector<std::int64_t> decode_raw(std::span<const Fe> v) {
  std::vector<std::int64_t> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.to_i64_centered());
  return out;
}

std::vector<Fe> encode_dataset(const PrimeField& f, const ml::Dataset& d) {
  auto out = encode_fixed(f, d.x);
  auto y = encode_raw(f, d.y);
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

// ---------------------------------------------------------------- receipts

Bytes TrainingReceipt::message() const {
  Bytes m;
  for (const auto& c : c_data) append(m, c.to_bytes());
  append(m, c_model.to_bytes());
  append(m, c_rand.to_bytes());
  return m;
}

void TrainingReceipt::write(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(c_data.size()));
  for (const auto& c : c_data) c.write(w);
  c_model.write(w);
  c_rand.write(w);
  write_sigs(w, sigma_t);
  write_sigs(w, sigma_tc);
}

TrainingReceipt TrainingReceipt::read(const PairingGroup& g, ByteReader& r) {
  TrainingReceipt t;
  const std::uint32_t n = r.u32();
  if (n > r.remaining()) throw ParseError("dataset commitment count exceeds input");
  for (std::uint32_t i = 0; i < n; ++i) t.c_data.push_back(PocCommitment::read(g, r));
  t.c_model = PocCommitment::read(g, r);
  t.c_rand = PocCommitment::read(g, r);
  t.sigma_t = read_sigs(r);
  t.sigma_tc = read_sigs(r);
  return t;
}

Bytes InferenceReceipt::computer_message() const {
  Bytes m = c.message();
  append(m, c_x.to_bytes());
  append(m, c_y.to_bytes());
  return m;
}

Bytes InferenceReceipt::owner_message() const {
  Bytes m = computer_message();
  append_sigs(m, c.sigma_t);
  append_sigs(m, c.sigma_tc);
  append_sigs(m, sigma_ic);
  return m;
}

void InferenceReceipt::write(ByteWriter& w) const {
  c.write(w);
  c_x.write(w);
  c_y.write(w);
  write_sigs(w, sigma_ic);
  w.raw(owner);
  w.raw(sigma_i);
}

InferenceReceipt InferenceReceipt::read(const PairingGroup& g, ByteReader& r) {
  InferenceReceipt t;
  t.c = TrainingReceipt::read(g, r);
  t.c_x = PocCommitment::read(g, r);
  t.c_y = PocCommitment::read(g, r);
  t.sigma_ic = read_sigs(r);
  auto pk = r.raw(32);
  std::copy(pk.begin(), pk.end(), t.owner.begin());
  auto s = r.raw(64);
  std::copy(s.begin(), s.end(), t.sigma_i.begin());
  return t;
}

Bytes serialize(const Receipt& r) {
  ByteWriter w;
  std::visit([&](const auto& x) { x.write(w); }, r);
  return std::move(w).take();
}

std::size_t receipt_size(const Receipt& r) { return serialize(r).size(); }

std::string armor(const Receipt& r) {
  ByteWriter w;
  w.u32(kReceiptVersion);
  w.u8(std::holds_alternative<TrainingReceipt>(r) ? kTrainingKind : kInferenceKind);
  w.raw(serialize(r));
  return to_hex(w.bytes());
}

Receipt dearmor(const PairingGroup& g, std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) text.remove_suffix(1);
  Bytes b = from_hex(text);
  ByteReader r(b);
  if (r.u32() != kReceiptVersion) throw ParseError("unsupported receipt version");
  const std::uint8_t kind = r.u8();
  Receipt out;
  if (kind == kTrainingKind) {
    out = TrainingReceipt::read(g, r);
  } else if (kind == kInferenceKind) {
    out = InferenceReceipt::read(g, r);
  } else {
    throw ParseError("unknown receipt kind");
  }
  r.expect_done();
  // Only the canonical encoding is accepted, so every accepted file has
  // exactly one byte representation.
  if (armor(out) != to_hex(b)) throw ParseError("non-canonical receipt encoding");
  return out;
}

// ---------------------------------------------------------------- verification

Verification verify_receipt(const TrainingReceipt& r, const Registry& reg) {
  const Bytes msg = r.message();
  if (auto v = check_signers(reg.training, msg, r.sigma_tc, "sigma_TC"); !v) return v;
  if (r.c_data.size() != reg.data_holders.size()) return Verification::fail("c_D count");
  return check_signers(reg.data_holders, msg, r.sigma_t, "sigma_T");
}

Verification verify_receipt(const InferenceReceipt& r, const Registry& reg) {
  if (!reg.is_owner(r.owner)) return Verification::fail("owner key");
  if (!verify(r.owner, r.owner_message(), r.sigma_i)) return Verification::fail("sigma_I");
  if (auto v = verify_receipt(r.c, reg); !v) return v;
  return check_signers(reg.inference, r.computer_message(), r.sigma_ic, "sigma_IC");
}

Verification verify_receipt(const InferenceReceipt& r, const Registry& reg, const poc::PocParams& pp,
                            const ClientOpening& o) {
  if (auto v = verify_receipt(r, reg); !v) return v;
  auto recomputes = [&](const PocCommitment& c, const std::vector<Fe>& x, const std::vector<Fe>& rr) {
    try {
      return poc::poc_commit(pp, x, rr) == c;
    } catch (const std::invalid_argument&) {
      return false;
    }
  };
  if (!recomputes(r.c_x, o.x, o.r_x)) return Verification::fail("c_x");
  if (!recomputes(r.c_y, o.y, o.r_y)) return Verification::fail("c_y");
  return {};
}

Verification verify_receipt(const Receipt& r, const Registry& reg) {
  return std::visit([&](const auto& x) { return verify_receipt(x, reg); }, r);
}

// ---------------------------------------------------------------- training

TrainingResult run_training(const TrainingJob& job, const Config& cfg, const Keys& keys,
                            const std::optional<Fault>& fault) {
  if (cfg.training_branch == Branch::Proof) throw UnsupportedMode();
  if (job.datasets.empty()) throw std::invalid_argument("training needs at least one data holder");
  if (keys.data_holders.size() != job.datasets.size() || keys.training.size() != cfg.training_computers) {
    throw std::invalid_argument("key registry does not match the party counts");
  }
  const std::size_t width = job.datasets.front().width;
  for (const auto& d : job.datasets) {
    if (d.width != width) throw ml::WidthMismatch("data holders disagree on the feature width");
  }
  const auto& f = cfg.field();
  const auto t0 = Clock::now();
  TrainingResult out;

  // T.1, local part: each data holder samples its decommitment value.
  std::vector<std::vector<Fe>> inputs, committed;
  for (std::size_t i = 0; i < job.datasets.size(); ++i) {
    Rng rng(derive_seed(cfg.seed, kHolderRandTag + i));
    inputs.push_back(encode_dataset(f, job.datasets[i]));
    committed.push_back(has(fault, Fault::Kind::TrainDataset, i) ? encode_dataset(f, altered(job.datasets[i]))
                                                                 : inputs.back());
    out.holders.push_back({job.datasets[i], poc::sample_randomness(cfg.pp, inputs.back().size(), rng)});
    out.receipt.c_data.push_back(poc::poc_commit(cfg.pp, committed.back(), out.holders.back().r));
  }

  auto pass = [&](mpc::Mode mode) {
    Engine e = make_engine(cfg, cfg.training_computers, kTrainTag, 0, mode);
    ml::MpcBackend be(e);
    // T.1: inputs and consistency checks.
    RShared X = RShared::zeros(e.parties(), 0), Y = RShared::zeros(e.parties(), 0);
    std::size_t rows = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      FShared d = e.input(std::nullopt, inputs[i]);
      Rng prover(derive_seed(e.seed(), kProverTag + i));
      require_consistent(e, cfg, out.receipt.c_data[i], d, {inputs[i], out.holders[i].r}, prover, Phase::Training,
                         "T.1", {Role::DataHolder, i}, out.stats);
      auto part = split_dataset(mpc::field_to_ring(e, d, kValueBits), job.datasets[i].rows, width);
      X.append(part.X);
      Y.append(part.y);
      rows += part.rows;
    }
    // T.2: randomness, training and commitments.
    FShared J = e.rand_shared(1);
    FShared r_J = e.rand_shared(poc::randomness_size(cfg.pp, 1));
    FShared r_M = e.rand_shared(poc::randomness_size(cfg.pp, width + 1));
    const std::uint64_t j = e.open(J)[0].low_u64();
    RShared w = ml::train(be, X, be.to_real(Y), rows, width, j, job.train);
    FShared M = mpc::ring_to_field(e, w, kValueBits);
    TrainingReceipt rc = out.receipt;
    rc.c_model = poc::poc_commit_shared(e, cfg.pp, M, r_M);
    rc.c_rand = poc::poc_commit_shared(e, cfg.pp, J, r_J);
    rc.sigma_tc = dist_sign_emulated(keys.training, rc.message());
    ModelOwnerState owner;
    owner.width = width;
    for (auto v : e.open_ring_to(w, 1)) owner.model.push_back(static_cast<std::int64_t>(v));
    owner.r = e.open_to(r_M, 1);
    out.stats.mpc = e.stats();
    return std::make_tuple(rc, owner, j);
  };
  auto [rc, owner, j] = with_strategy(cfg, Phase::Training, out.stats, pass);

  // T.3: every data holder checks that its commitment is listed and the
  // committee signature verifies, then countersigns.
  const Registry reg = keys.registry();
  const Bytes msg = rc.message();
  for (std::size_t i = 0; i < job.datasets.size(); ++i) {
    if (!(rc.c_data[i] == out.receipt.c_data[i])) {
      throw PhaseAbort(Phase::Training, "T.3", std::nullopt, "dataset commitment missing from the broadcast");
    }
    if (auto bad = dist_verify(reg.training, msg, rc.sigma_tc)) {
      throw PhaseAbort(Phase::Training, "T.3", Party{Role::Computer, *bad}, "committee signature invalid");
    }
    rc.sigma_t.push_back(sign(keys.data_holders[i], msg));
  }
  // T.4: the model owner's checklist.
  if (auto v = verify_receipt(rc, reg); !v) {
    throw PhaseAbort(Phase::Training, "T.4", std::nullopt, "receipt check failed at " + v.failure);
  }
  owner.receipt = rc;
  out.receipt = rc;
  out.owner = std::move(owner);
  out.J = j;
  out.stats.ms_total = ms_since(t0);
  return out;
}

// ---------------------------------------------------------------- inference

InferenceResult run_inference(const Config& cfg, const Keys& keys, const ModelOwnerState& owner,
                              const PocCommitment& requested, std::span<const double> x, std::uint64_t nonce,
                              const std::optional<Fault>& fault) {
  if (cfg.inference_branch == Branch::Proof) throw UnsupportedMode();
  if (x.size() != owner.width) throw ml::WidthMismatch("query width differs from the model");
  const auto& f = cfg.field();
  const auto t0 = Clock::now();
  const Registry reg = keys.registry();
  InferenceResult out;
  const std::vector<Fe> xq = encode_fixed(f, x);
  const std::vector<Fe> m_in =
      encode_raw(f, has(fault, Fault::Kind::InferenceModel) ? altered(owner.model) : owner.model);

  auto pass = [&](mpc::Mode mode) {
    Engine e = make_engine(cfg, cfg.inference_computers, kInferTag, nonce, mode);
    ml::MpcBackend be(e);
    // I.1: client input, model identification, owner input and check.
    FShared sx = e.input(std::nullopt, xq);
    if (!(owner.receipt.c_model == requested)) {
      throw PhaseAbort(Phase::Inference, "I.1", std::nullopt, "requested model commitment is not the owner's");
    }
    FShared sm = e.input(std::nullopt, m_in);
    Rng prover(derive_seed(e.seed(), kProverTag));
    require_consistent(e, cfg, owner.receipt.c_model, sm, {m_in, owner.r}, prover, Phase::Inference, "I.1",
                       {Role::ModelOwner, 0}, out.stats);
    // I.2: prediction and output commitments.
    RShared w = mpc::field_to_ring(e, sm, kValueBits);
    RShared xr = mpc::field_to_ring(e, sx, kValueBits);
    auto p = ml::predict(be, w, xr, 1, owner.width);
    FShared sy = mpc::ring_to_field(e, be.concat(p.score, p.label), kValueBits);
    FShared r_x = e.rand_shared(poc::randomness_size(cfg.pp, sx.size()));
    FShared r_y = e.rand_shared(poc::randomness_size(cfg.pp, sy.size()));
    InferenceReceipt rc;
    rc.c = owner.receipt;
    rc.c_x = poc::poc_commit_shared(e, cfg.pp, sx, r_x);
    rc.c_y = poc::poc_commit_shared(e, cfg.pp, sy, r_y);
    rc.sigma_ic = dist_sign_emulated(keys.inference, rc.computer_message());
    // (y, r_x, r_y) go to the client only.
    ClientOpening o{xq, e.open_to(sy, 1), e.open_to(r_x, 1), e.open_to(r_y, 1)};
    out.stats.mpc = e.stats();
    return std::make_pair(rc, o);
  };
  auto [rc, o] = with_strategy(cfg, Phase::Inference, out.stats, pass);

  // I.3: the owner checks the committee signature and signs the receipt.
  if (auto bad = dist_verify(reg.inference, rc.computer_message(), rc.sigma_ic)) {
    throw PhaseAbort(Phase::Inference, "I.3", Party{Role::Computer, *bad}, "committee signature invalid");
  }
  rc.owner = keys.owner.pk;
  rc.sigma_i = sign(keys.owner, rc.owner_message());
  // I.4: the client's checklist.
  if (auto v = verify_receipt(rc, reg, cfg.pp, o); !v) {
    throw PhaseAbort(Phase::Inference, "I.4", std::nullopt, "receipt check failed at " + v.failure);
  }
  out.receipt = std::move(rc);
  out.opening = std::move(o);
  out.score = fx_decode(out.opening.y[0].to_i64_centered());
  out.label = out.opening.y[1].to_i64_centered();
  out.stats.ms_total = ms_since(t0);
  return out;
}

// ---------------------------------------------------------------- audit

const std::vector<std::string>& audit_registry() {
  static const std::vector<std::string> ids = {
      audit::to_string(audit::Function::CertifyRS), audit::to_string(audit::Function::CertifyFair),
      audit::to_string(audit::Function::KnnShapley), audit::to_string(audit::Function::Camel),
      audit::to_string(audit::Function::KernelShap)};
  return ids;
}

std::vector<double> AuditResult::values() const {
  std::vector<double> out;
  for (auto v : raw) out.push_back(is_int ? static_cast<double>(v) : fx_decode(v));
  return out;
}

nlohmann::json AuditOutcome::to_json() const {
  nlohmann::json j;
  if (ok()) {
    j["ok"] = true;
    j["is_int"] = result().is_int;
    j["raw"] = result().raw;
    j["values"] = result().values();
    j["coin"] = result().coin;
  } else {
    j["ok"] = false;
    j["culprit"] = verdict().culprit.name();
    j["step"] = verdict().step;
    j["reason"] = verdict().reason;
  }
  j["identifiable_rerun"] = stats.identifiable_rerun;
  j["rounds"] = stats.mpc.rounds;
  j["bytes_per_party"] = stats.mpc.max_bytes_per_party();
  return j;
}

AuditOutcome run_audit(const Config& cfg, const Registry& reg, const AuditRequest& req, const ClientOpening& client,
                       const ModelOwnerState& owner, std::span<const DataHolderState> holders, std::uint64_t nonce,
                       const std::optional<Fault>& fault) {
  const auto& f = cfg.field();
  const auto t0 = Clock::now();
  AuditOutcome out;
  const InferenceReceipt& rc = req.receipt;
  const std::size_t width = owner.width;

  // Inputs as each party would supply them, faults included.
  std::vector<Fe> xq = client.x;
  if (has(fault, Fault::Kind::ClientInput) && !xq.empty()) xq[0] += Fe::one(f);
  const std::vector<Fe> m_in =
      encode_raw(f, has(fault, Fault::Kind::AuditModel) ? altered(owner.model) : owner.model);
  std::vector<std::vector<Fe>> d_in;
  for (std::size_t i = 0; i < holders.size(); ++i) {
    d_in.push_back(encode_dataset(
        f, has(fault, Fault::Kind::AuditDataset, i) ? altered(holders[i].data) : holders[i].data));
  }

  auto pass = [&](mpc::Mode mode) {
    Engine e = make_engine(cfg, cfg.audit_computers, kAuditTag, nonce, mode);
    if (fault && fault->kind == Fault::Kind::ComputerShare) {
      e.set_open_tamper(mpc::OpenTamper{fault->index, 0, std::numeric_limits<std::uint64_t>::max()});
    }
    ml::MpcBackend be(e);
    const Party C{Role::Client, 0}, M{Role::ModelOwner, 0};
    // A.1: the client inputs (x, y) and broadcasts the request.
    FShared sx = e.input(std::nullopt, xq);
    FShared sy = e.input(std::nullopt, client.y);
    // A.2: owner identity, owner signature and the allow-list.
    if (!reg.is_owner(rc.owner)) throw PhaseAbort(Phase::Audit, "A.2", C, "unknown model owner key");
    if (!verify(rc.owner, rc.owner_message(), rc.sigma_i)) throw PhaseAbort(Phase::Audit, "A.2", C, "sigma_I invalid");
    const auto& ids = audit_registry();
    if (std::find(ids.begin(), ids.end(), req.function) == ids.end()) {
      throw PhaseAbort(Phase::Audit, "A.2", C, "audit function not in the registry: " + req.function);
    }
    audit::AuditSpec spec;
    try {
      nlohmann::json aux = req.aux.is_object() ? req.aux : nlohmann::json::object();
      aux["function"] = req.function;
      spec = audit::AuditSpec::from_json(aux);
    } catch (const std::exception& err) {
      throw PhaseAbort(Phase::Audit, "A.2", C, std::string("malformed aux parameters: ") + err.what());
    }
    if (rc.c.c_data.size() != holders.size() || xq.size() != width || client.y.size() != 2) {
      throw PhaseAbort(Phase::Audit, "A.2", C, "request does not match the deployment");
    }
    // A.3: the client's inputs against c_x and c_y.
    Rng cp(derive_seed(e.seed(), kProverTag));
    require_consistent(e, cfg, rc.c_x, sx, {xq, client.r_x}, cp, Phase::Audit, "A.3", C, out.stats);
    require_consistent(e, cfg, rc.c_y, sy, {client.y, client.r_y}, cp, Phase::Audit, "A.3", C, out.stats);
    // A.4: the owner's model against c_M, then the inference signatures.
    FShared sm = e.input(std::nullopt, m_in);
    Rng mp(derive_seed(e.seed(), kProverTag + 1));
    require_consistent(e, cfg, rc.c.c_model, sm, {m_in, owner.r}, mp, Phase::Audit, "A.4", M, out.stats);
    if (!check_signers(reg.inference, rc.computer_message(), rc.sigma_ic, "sigma_IC")) {
      throw PhaseAbort(Phase::Audit, "A.4", M, "sigma_IC invalid");
    }
    // A.5: every dataset against its c_Di, then the training signatures.
    const Bytes tmsg = rc.c.message();
    std::vector<audit::PartyData<ml::MpcBackend>> parts;
    for (std::size_t i = 0; i < holders.size(); ++i) {
      FShared d = e.input(std::nullopt, d_in[i]);
      Rng dp(derive_seed(e.seed(), kProverTag + 2 + i));
      require_consistent(e, cfg, rc.c.c_data[i], d, {d_in[i], holders[i].r}, dp, Phase::Audit, "A.5",
                         {Role::DataHolder, i}, out.stats);
      if (i >= rc.c.sigma_t.size() || i >= reg.data_holders.size() ||
          !verify(reg.data_holders[i], tmsg, rc.c.sigma_t[i])) {
        throw PhaseAbort(Phase::Audit, "A.5", M, "sigma_T of DH_" + std::to_string(i) + " invalid");
      }
      parts.push_back(split_dataset(mpc::field_to_ring(e, d, kValueBits), holders[i].data.rows, width));
    }
    if (!check_signers(reg.training, tmsg, rc.c.sigma_tc, "sigma_TC")) {
      throw PhaseAbort(Phase::Audit, "A.5", M, "sigma_TC invalid");
    }
    // A.6: the audit function, opened to the client.
    RShared w = mpc::field_to_ring(e, sm, kValueBits);
    RShared xr = mpc::field_to_ring(e, sx, kValueBits);
    RShared label = mpc::field_to_ring(e, sy, kValueBits).element(1);
    const std::uint64_t coin = e.coin_u64();
    audit::AuditValue<ml::MpcBackend> v;
    try {
      v = audit::run_function(be, spec, w, xr, label, parts, width, coin);
    } catch (const audit::InvalidParams& err) {
      throw PhaseAbort(Phase::Audit, "A.6", C, std::string("audit parameters rejected: ") + err.what());
    }
    AuditResult res{v.is_int, be.open_int(v.value), coin};
    out.stats.mpc = e.stats();
    return res;
  };

  try {
    out.v = with_strategy(cfg, Phase::Audit, out.stats, pass);
  } catch (const PhaseAbort& a) {
    if (!a.culprit) throw;
    out.v = Verdict{*a.culprit, a.step, a.what()};
  }
  out.stats.ms_total = ms_since(t0);
  return out;
}

// ---------------------------------------------------------------- storage

InferenceReceipt synthetic_receipt(const poc::PocParams& pp, const Keys& keys, std::size_t model_size,
                                   std::size_t dataset_size, std::size_t query_size, std::uint64_t seed) {
  Rng rng(seed);
  const auto& f = pp.field();
  auto commit_random = [&](std::size_t n) {
    std::vector<Fe> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(Fe::random(f, rng));
    return poc::poc_commit(pp, x, poc::sample_randomness(pp, n, rng));
  };
  InferenceReceipt r;
  for (std::size_t i = 0; i < keys.data_holders.size(); ++i) r.c.c_data.push_back(commit_random(dataset_size));
  r.c.c_model = commit_random(model_size);
  r.c.c_rand = commit_random(1);
  r.c.sigma_tc = dist_sign_emulated(keys.training, r.c.message());
  for (const auto& k : keys.data_holders) r.c.sigma_t.push_back(sign(k, r.c.message()));
  r.c_x = commit_random(query_size);
  r.c_y = commit_random(2);
  r.sigma_ic = dist_sign_emulated(keys.inference, r.computer_message());
  r.owner = keys.owner.pk;
  r.sigma_i = sign(keys.owner, r.owner_message());
  return r;
}

}  // namespace arc::arcproto
