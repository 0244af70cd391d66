#pragma once

#include <nlohmann/json.hpp>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arc/commit/signature.hpp"
#include "arc/ml/dataset.hpp"
#include "arc/ml/logreg.hpp"
#include "arc/mpc/engine.hpp"
#include "arc/poc/poc.hpp"

namespace arc::arcproto {

// Receipt pipeline: training (T.1-T.4), inference (I.1-I.4) and auditing
// (A.1-A.6). Every phase runs on a fresh engine; computing parties keep no
// state between phases.

inline constexpr std::uint32_t kReceiptVersion = 1;
// Signed width of values moved between the field and the ring.
inline constexpr unsigned kValueBits = 64;

// ---------------------------------------------------------------- parties

enum class Role { DataHolder, ModelOwner, Client, Computer };

struct Party {
  Role role = Role::Client;
  std::size_t index = 0;

  std::string name() const;  // DH_0, M_0, C_0, CP_2
  bool operator==(const Party&) const = default;
};

enum class Phase { Training, Inference, Audit };
const char* to_string(Phase p);

// Raised when a phase stops before producing its output. `culprit` is set
// when the failing check identifies a party.
struct PhaseAbort : std::runtime_error {
  PhaseAbort(Phase ph, std::string step, std::optional<Party> who, const std::string& why);
  Phase phase;
  std::string step;
  std::optional<Party> culprit;
};

// Proof-based training or inference (the plaintext branches). Not provided:
// selecting it raises UnsupportedMode.
enum class Branch { Mpc, Proof };

struct UnsupportedMode : std::logic_error {
  UnsupportedMode() : std::logic_error("proof-based branch is not implemented; only the MPC branch is available") {}
};

// Abort strategy. Optimistic runs with abort first and reruns the phase with
// identifiable abort only when the first pass aborts.
enum class Strategy { Optimistic, WithAbort, Identifiable };

struct Config {
  poc::PocParams pp;
  std::size_t training_computers = 3;   // TC
  std::size_t inference_computers = 3;  // IC
  std::size_t audit_computers = 3;      // AC
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::Optimistic;
  Branch training_branch = Branch::Mpc;
  Branch inference_branch = Branch::Mpc;

  const PrimeField& field() const { return pp.field(); }
};

// In-simulation PKI.
struct Registry {
  std::vector<PublicKey> data_holders;
  std::vector<PublicKey> owners;
  std::vector<PublicKey> training;   // TC
  std::vector<PublicKey> inference;  // IC

  bool is_owner(const PublicKey& pk) const;
};

struct Keys {
  std::vector<KeyPair> data_holders;
  KeyPair owner;
  std::vector<KeyPair> training;
  std::vector<KeyPair> inference;

  static Keys derive(std::uint64_t seed, std::size_t data_holders, std::size_t training = 3, std::size_t inference = 3);
  Registry registry() const;
};

// ---------------------------------------------------------------- faults

// Injected misbehaviour, written role:index:what.
//   dh:i:dataset        DH_i commits to a dataset other than the one it inputs (T.1)
//   m:0:model           the owner inputs a different model at inference (I.1)
//   dh:i:audit-dataset  DH_i inputs a different dataset at audit time (A.5)
//   m:0:audit-model     the owner inputs a different model at audit time (A.4)
//   c:0:input           the client inputs an x it was never served (A.3)
//   ac:j:share          auditing party j corrupts its shares on every opening
struct Fault {
  enum class Kind { TrainDataset, InferenceModel, AuditDataset, AuditModel, ClientInput, ComputerShare };
  Kind kind = Kind::TrainDataset;
  std::size_t index = 0;

  static Fault parse(std::string_view token);
  std::string token() const;
  Party culprit() const;
  bool operator==(const Fault&) const = default;
};

// ---------------------------------------------------------------- encodings

// Features row-major as fixed-point, then the labels as integers.
std::vector<Fe> encode_dataset(const PrimeField& f, const ml::Dataset& d);
std::vector<Fe> encode_fixed(const PrimeField& f, std::span<const double> x);
std::vector<Fe> encode_raw(const PrimeField& f, std::span<const std::int64_t> v);
std::vector<std::int64_t> decode_raw(std::span<const Fe> v);

// ---------------------------------------------------------------- receipts

struct TrainingReceipt {
  std::vector<poc::PocCommitment> c_data;  // c_D1..c_DN
  poc::PocCommitment c_model;
  poc::PocCommitment c_rand;  // commitment to the training randomness J
  std::vector<Signature> sigma_t;   // one per data holder
  std::vector<Signature> sigma_tc;  // one per training computer

  // c_D1 || ... || c_DN || c_M || c_J
  Bytes message() const;
  void write(ByteWriter& w) const;
  static TrainingReceipt read(const PairingGroup& g, ByteReader& r);
  bool operator==(const TrainingReceipt&) const = default;
};

struct InferenceReceipt {
  TrainingReceipt c;
  poc::PocCommitment c_x, c_y;
  std::vector<Signature> sigma_ic;  // one per inference computer
  PublicKey owner{};
  Signature sigma_i{};

  // c || c_x || c_y
  Bytes computer_message() const;
  // c || c_x || c_y || sigma_T || sigma_TC || sigma_IC
  Bytes owner_message() const;
  void write(ByteWriter& w) const;
  static InferenceReceipt read(const PairingGroup& g, ByteReader& r);
  bool operator==(const InferenceReceipt&) const = default;
};

using Receipt = std::variant<TrainingReceipt, InferenceReceipt>;

Bytes serialize(const Receipt& r);
std::size_t receipt_size(const Receipt& r);
// Hex text of a 4-byte version, a kind byte and the serialized receipt.
std::string armor(const Receipt& r);
Receipt dearmor(const PairingGroup& g, std::string_view text);

// What the client holds next to its receipt: its query, the served output
// and the decommitments.
struct ClientOpening {
  std::vector<Fe> x, y, r_x, r_y;
};

struct Verification {
  bool ok = true;
  std::string failure;  // first failing item

  explicit operator bool() const { return ok; }
  static Verification fail(std::string where) { return {false, std::move(where)}; }
};

// Model-owner checklist: sigma_TC, then every sigma_T^i.
Verification verify_receipt(const TrainingReceipt& r, const Registry& reg);
// Anyone: owner identity and sigma_I, then the training signatures, then sigma_IC.
Verification verify_receipt(const InferenceReceipt& r, const Registry& reg);
// Client checklist: the above plus recomputation of c_x and c_y.
Verification verify_receipt(const InferenceReceipt& r, const Registry& reg, const poc::PocParams& pp,
                            const ClientOpening& o);
Verification verify_receipt(const Receipt& r, const Registry& reg);

// ---------------------------------------------------------------- phases

struct PhaseStats {
  mpc::Stats mpc;
  bool identifiable_rerun = false;
  double ms_total = 0;
  double ms_mpc = 0;  // inside consistency checks
};

struct DataHolderState {
  ml::Dataset data;
  std::vector<Fe> r;  // decommitment of c_Di
};

struct ModelOwnerState {
  std::vector<std::int64_t> model;  // fixed-point weights, bias last
  std::vector<Fe> r;                // decommitment of c_M
  std::size_t width = 0;
  TrainingReceipt receipt;
};

struct TrainingJob {
  std::vector<ml::Dataset> datasets;
  ml::TrainConfig train;
};

struct TrainingResult {
  ModelOwnerState owner;
  std::vector<DataHolderState> holders;
  TrainingReceipt receipt;
  std::uint64_t J = 0;  // opened to the training committee to fix the batch order
  PhaseStats stats;
};

TrainingResult run_training(const TrainingJob& job, const Config& cfg, const Keys& keys,
                            const std::optional<Fault>& fault = std::nullopt);

struct InferenceResult {
  InferenceReceipt receipt;
  ClientOpening opening;
  double score = 0;
  std::int64_t label = 0;
  PhaseStats stats;
};

// `requested` identifies the model (its c_M). `nonce` separates the
// randomness of repeated requests.
InferenceResult run_inference(const Config& cfg, const Keys& keys, const ModelOwnerState& owner,
                              const poc::PocCommitment& requested, std::span<const double> x, std::uint64_t nonce = 0,
                              const std::optional<Fault>& fault = std::nullopt);

// The allow-list F_audit, keyed by function id.
const std::vector<std::string>& audit_registry();

struct AuditRequest {
  InferenceReceipt receipt;
  std::string function;
  nlohmann::json aux = nlohmann::json::object();
};

struct AuditResult {
  bool is_int = false;
  std::vector<std::int64_t> raw;  // fixed-point unless is_int
  std::uint64_t coin = 0;         // public randomness the function consumed
  std::vector<double> values() const;
};

struct Verdict {
  Party culprit;
  std::string step;
  std::string reason;
};

struct AuditOutcome {
  std::variant<AuditResult, Verdict> v;
  PhaseStats stats;

  bool ok() const { return std::holds_alternative<AuditResult>(v); }
  const AuditResult& result() const { return std::get<AuditResult>(v); }
  const Verdict& verdict() const { return std::get<Verdict>(v); }
  nlohmann::json to_json() const;
};

AuditOutcome run_audit(const Config& cfg, const Registry& reg, const AuditRequest& req, const ClientOpening& client,
                       const ModelOwnerState& owner, std::span<const DataHolderState> holders,
                       std::uint64_t nonce = 0, const std::optional<Fault>& fault = std::nullopt);

// A fully signed receipt over random committed values: one dataset of
// `dataset_size` elements per data holder, a model of `model_size`
// parameters and a query of `query_size` features. Used for storage
// measurements.
InferenceReceipt synthetic_receipt(const poc::PocParams& pp, const Keys& keys, std::size_t model_size,
                                   std::size_t dataset_size, std::size_t query_size, std::uint64_t seed);

}  // namespace arc::arcproto
