#include <gtest/gtest.h>

#include "arc/arcproto/arcproto.hpp"
#include "arc/audit/audit.hpp"
#include "arc/ml/backend.hpp"

using namespace arc;
using namespace arc::arcproto;

namespace {

const PairingGroup& mock_group() { return PairingGroup::mock(PrimeField::bls12_381_scalar()); }

Config make_config(poc::Backend b, const PairingGroup& g = mock_group(), std::size_t d = 64, std::uint64_t seed = 7) {
  Config c;
  c.pp = poc::poc_setup(b, g, 11, d);
  c.seed = seed;
  return c;
}

// Features in [0, 1); label 1 when the first two features sum above 1.
ml::Dataset toy(std::size_t rows, std::size_t width, std::uint64_t seed) {
  ml::Dataset d;
  d.width = width;
  d.rows = rows;
  for (std::size_t j = 0; j < width; ++j) d.columns.push_back("f" + std::to_string(j));
  Rng rng(seed);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < width; ++j) d.x.push_back(static_cast<double>(uniform_below(rng, 64)) / 64.0);
    d.y.push_back(d.x[i * width] + d.x[i * width + 1] > 1.0 ? 1 : 0);
  }
  return d;
}

struct World {
  Config cfg;
  Keys keys;
  TrainingJob job;
  TrainingResult tr;

  World(poc::Backend b, std::uint64_t seed = 7, const PairingGroup& g = mock_group())
      : cfg(make_config(b, g, 64, seed)), keys(Keys::derive(seed, 2, 3)) {
    job.datasets = {toy(4, 4, seed), toy(4, 4, seed + 1)};
    job.train = {.epochs = 1, .batch = 4, .lr = 0.5};
    tr = run_training(job, cfg, keys);
  }

  InferenceResult infer(std::vector<double> x = {0.75, 0.5, 0.25, 0.125}, std::uint64_t nonce = 0,
                        const std::optional<Fault>& f = std::nullopt) const {
    return run_inference(cfg, keys, tr.owner, tr.receipt.c_model, x, nonce, f);
  }

  AuditOutcome audit(const InferenceResult& inf, const std::string& fn, nlohmann::json aux = nlohmann::json::object(),
                     const std::optional<Fault>& f = std::nullopt, const Config* c = nullptr) const {
    AuditRequest req{inf.receipt, fn, std::move(aux)};
    return run_audit(c ? *c : cfg, keys.registry(), req, inf.opening, tr.owner, tr.holders, 0, f);
  }
};

nlohmann::json aux_for(const std::string& fn) {
  if (fn == "certify_rs") return {{"R", 0.1}, {"sigma", 0.25}, {"n", 8}, {"alpha", 0.2}};
  if (fn == "certify_fair") {
    nlohmann::json theta = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) {
      std::vector<double> row(4, 0.0);
      row[static_cast<std::size_t>(i)] = 16.0;
      theta.push_back(row);
    }
    return {{"L", 1.0}, {"theta", theta}, {"n", 8}, {"alpha", 0.2}};
  }
  if (fn == "knn_shapley") return {{"K", 3}};
  if (fn == "camel") return {{"epochs", 2}, {"tau", 3.5}, {"lr", 0.5}};
  return {{"samples", 0}};
}

// Plaintext evaluation of the same audit on the parties' clear inputs.
std::vector<std::int64_t> plaintext_audit(const World& w, const InferenceResult& inf, const std::string& fn,
                                          std::uint64_t coin) {
  ml::PlainBackend pb;
  auto x = decode_raw(inf.opening.x);
  std::vector<std::int64_t> y{inf.opening.y[1].to_i64_centered()};
  std::vector<audit::PartyData<ml::PlainBackend>> parts;
  for (const auto& h : w.tr.holders) parts.push_back({pb.constant(h.data.x), h.data.y, h.data.rows});
  auto spec = aux_for(fn);
  spec["function"] = fn;
  auto v = audit::run_function(pb, audit::AuditSpec::from_json(spec), w.tr.owner.model, x, y, parts, 4, coin);
  return v.value;
}

void flip_byte(std::string& hex, std::size_t byte, std::uint8_t mask) {
  Bytes b = from_hex(hex);
  b[byte] ^= mask;
  hex = to_hex(b);
}

}  // namespace

TEST(Training, HonestRunProducesVerifiableReceipt) {
  World w(poc::Backend::Poly);
  const auto& r = w.tr.receipt;
  EXPECT_EQ(r.c_data.size(), 2u);
  EXPECT_EQ(r.sigma_t.size(), 2u);
  EXPECT_EQ(r.sigma_tc.size(), 3u);
  EXPECT_TRUE(verify_receipt(r, w.keys.registry()));
  EXPECT_EQ(w.tr.owner.model.size(), 5u);
  EXPECT_FALSE(w.tr.stats.identifiable_rerun);
}

TEST(Training, ModelEqualsPlaintextTrainer) {
  for (auto b : {poc::Backend::Poly, poc::Backend::Hash, poc::Backend::Pedersen}) {
    World w(b);
    ml::PlainBackend pb;
    auto all = ml::Dataset::concat(w.job.datasets);
    auto expect = ml::train(pb, pb.constant(all.x), pb.constant(all.labels_real()), all.rows, all.width, w.tr.J,
                            w.job.train);
    EXPECT_EQ(w.tr.owner.model, expect) << poc::to_string(b);
  }
}

TEST(Training, CommitteeCommitmentsEqualCentralCommitments) {
  for (auto b : {poc::Backend::Poly, poc::Backend::Hash, poc::Backend::Pedersen}) {
    World w(b);
    const auto& f = w.cfg.field();
    EXPECT_EQ(poc::poc_commit(w.cfg.pp, encode_raw(f, w.tr.owner.model), w.tr.owner.r), w.tr.receipt.c_model)
        << poc::to_string(b);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(poc::poc_commit(w.cfg.pp, encode_dataset(f, w.job.datasets[i]), w.tr.holders[i].r),
                w.tr.receipt.c_data[i]);
    }
  }
}

TEST(Training, DatasetCommitmentMismatchRejectedAtT1) {
  Config cfg = make_config(poc::Backend::Poly);
  Keys keys = Keys::derive(7, 2, 3);
  TrainingJob job{{toy(4, 4, 1), toy(4, 4, 2)}, {.epochs = 1, .batch = 4, .lr = 0.5}};
  try {
    run_training(job, cfg, keys, Fault::parse("dh:1:dataset"));
    FAIL() << "training should abort";
  } catch (const PhaseAbort& a) {
    EXPECT_EQ(a.phase, Phase::Training);
    EXPECT_EQ(a.step, "T.1");
    ASSERT_TRUE(a.culprit);
    EXPECT_EQ(*a.culprit, (Party{Role::DataHolder, 1}));
  }
}

TEST(Training, WidthDisagreementRejected) {
  Config cfg = make_config(poc::Backend::Poly);
  TrainingJob job{{toy(4, 4, 1), toy(4, 3, 2)}, {}};
  EXPECT_THROW(run_training(job, cfg, Keys::derive(7, 2, 3)), ml::WidthMismatch);
}

TEST(Training, ProofBranchUnsupported) {
  Config cfg = make_config(poc::Backend::Poly);
  cfg.training_branch = Branch::Proof;
  TrainingJob job{{toy(4, 4, 1)}, {}};
  EXPECT_THROW(run_training(job, cfg, Keys::derive(7, 1, 3)), UnsupportedMode);
}

TEST(Inference, OutputMatchesPlaintextPrediction) {
  World w(poc::Backend::Poly);
  std::vector<double> x = {0.75, 0.5, 0.25, 0.125};
  auto inf = w.infer(x);
  ml::PlainBackend pb;
  auto p = ml::predict(pb, w.tr.owner.model, pb.constant(x), 1, 4);
  EXPECT_EQ(inf.opening.y[0].to_i64_centered(), p.score[0]);
  EXPECT_EQ(inf.label, p.label[0]);
  EXPECT_DOUBLE_EQ(inf.score, ml::PlainBackend::decode(p.score)[0]);
  EXPECT_TRUE(verify_receipt(inf.receipt, w.keys.registry(), w.cfg.pp, inf.opening));
}

TEST(Inference, SubstitutedModelRejectedAtI1) {
  World w(poc::Backend::Hash);
  try {
    w.infer({0.1, 0.2, 0.3, 0.4}, 0, Fault::parse("m:0:model"));
    FAIL() << "inference should abort";
  } catch (const PhaseAbort& a) {
    EXPECT_EQ(a.step, "I.1");
    ASSERT_TRUE(a.culprit);
    EXPECT_EQ(a.culprit->role, Role::ModelOwner);
  }
}

TEST(Inference, UnknownModelRequestAbortsWithoutBlame) {
  World w(poc::Backend::Poly);
  auto other = w.tr.receipt.c_data[0];
  std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
  try {
    run_inference(w.cfg, w.keys, w.tr.owner, other, x);
    FAIL() << "inference should abort";
  } catch (const PhaseAbort& a) {
    EXPECT_EQ(a.step, "I.1");
    EXPECT_FALSE(a.culprit);
  }
}

TEST(Inference, ProofBranchUnsupportedAndWidthChecked) {
  World w(poc::Backend::Poly);
  Config c = w.cfg;
  c.inference_branch = Branch::Proof;
  std::vector<double> x = {0.1, 0.2, 0.3, 0.4};
  EXPECT_THROW(run_inference(c, w.keys, w.tr.owner, w.tr.receipt.c_model, x), UnsupportedMode);
  std::vector<double> short_x = {0.1};
  EXPECT_THROW(run_inference(w.cfg, w.keys, w.tr.owner, w.tr.receipt.c_model, short_x), ml::WidthMismatch);
}

TEST(Inference, ModelOwnerNeverReceivesQueryRandomness) {
  // The client's opening is the only place r_x appears; the owner-facing
  // receipt carries commitments and signatures only.
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  Bytes body = serialize(inf.receipt);
  for (const auto& r : inf.opening.r_x) {
    Bytes rb = r.to_bytes();
    EXPECT_EQ(std::search(body.begin(), body.end(), rb.begin(), rb.end()), body.end());
  }
}

TEST(Audit, HonestRunMatchesPlaintextForEveryFunction) {
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  for (const auto& fn : audit_registry()) {
    auto out = w.audit(inf, fn, aux_for(fn));
    ASSERT_TRUE(out.ok()) << fn << ": " << out.verdict().reason;
    EXPECT_EQ(out.result().raw, plaintext_audit(w, inf, fn, out.result().coin)) << fn;
  }
}

TEST(Audit, TamperMatrixBlamesInjectedCulprit) {
  const std::vector<std::string> tokens = {"dh:0:dataset", "m:0:model", "dh:1:audit-dataset",
                                           "m:0:audit-model", "c:0:input", "ac:1:share"};
  for (auto b : {poc::Backend::Poly, poc::Backend::Hash, poc::Backend::Pedersen}) {
    World w(b);
    auto inf = w.infer();
    for (const auto& t : tokens) {
      Fault f = Fault::parse(t);
      std::optional<Party> blamed;
      try {
        if (f.kind == Fault::Kind::TrainDataset) {
          run_training(w.job, w.cfg, w.keys, f);
        } else if (f.kind == Fault::Kind::InferenceModel) {
          w.infer({0.75, 0.5, 0.25, 0.125}, 0, f);
        } else {
          auto out = w.audit(inf, "certify_rs", aux_for("certify_rs"), f);
          ASSERT_FALSE(out.ok()) << t;
          blamed = out.verdict().culprit;
        }
      } catch (const PhaseAbort& a) {
        blamed = a.culprit;
      }
      ASSERT_TRUE(blamed) << t << " " << poc::to_string(b);
      EXPECT_EQ(*blamed, f.culprit()) << t << " " << poc::to_string(b) << " blamed " << blamed->name();
    }
  }
}

TEST(Audit, OptimisticStrategyRerunsWithIdentification) {
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  auto out = w.audit(inf, "certify_rs", aux_for("certify_rs"), Fault::parse("ac:2:share"));
  ASSERT_FALSE(out.ok());
  EXPECT_TRUE(out.stats.identifiable_rerun);
  EXPECT_EQ(out.verdict().culprit, (Party{Role::Computer, 2}));
  // Abort-only security stops without a culprit.
  Config c = w.cfg;
  c.strategy = Strategy::WithAbort;
  EXPECT_THROW(w.audit(inf, "certify_rs", aux_for("certify_rs"), Fault::parse("ac:2:share"), &c), PhaseAbort);
  // An honest run never pays for the rerun.
  auto honest = w.audit(inf, "certify_rs", aux_for("certify_rs"));
  EXPECT_TRUE(honest.ok());
  EXPECT_FALSE(honest.stats.identifiable_rerun);
}

TEST(Audit, UnregisteredFunctionBlamesClient) {
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  auto out = w.audit(inf, "influence_functions");
  ASSERT_FALSE(out.ok());
  EXPECT_EQ(out.verdict().culprit, (Party{Role::Client, 0}));
  EXPECT_EQ(out.verdict().step, "A.2");
  auto bad_aux = w.audit(inf, "certify_rs", {{"alpha", 2.0}});
  ASSERT_FALSE(bad_aux.ok());
  EXPECT_EQ(bad_aux.verdict().step, "A.2");
}

TEST(Audit, ForgedOwnerSignatureBlamesClient) {
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  inf.receipt.sigma_i[5] ^= 1;
  auto out = w.audit(inf, "certify_rs", aux_for("certify_rs"));
  ASSERT_FALSE(out.ok());
  EXPECT_EQ(out.verdict().culprit, (Party{Role::Client, 0}));
  EXPECT_EQ(out.verdict().step, "A.2");
}

TEST(Audit, BrokenTrainingSignatureBlamesOwner) {
  // The owner countersigned a receipt whose sigma_T does not verify.
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  inf.receipt.c.sigma_t[1][0] ^= 1;
  inf.receipt.sigma_i = sign(w.keys.owner, inf.receipt.owner_message());
  auto out = w.audit(inf, "certify_rs", aux_for("certify_rs"));
  ASSERT_FALSE(out.ok());
  EXPECT_EQ(out.verdict().culprit, (Party{Role::ModelOwner, 0}));
  EXPECT_EQ(out.verdict().step, "A.5");
}

TEST(Audit, ManyInferencesNeedNoComputerState) {
  World w(poc::Backend::Poly);
  std::vector<InferenceResult> wallet;
  for (std::uint64_t k = 0; k < 3; ++k) wallet.push_back(w.infer({0.25 * static_cast<double>(k), 0.5, 0.5, 0.5}, k));
  EXPECT_EQ(wallet.size(), 3u);
  // Each receipt is audited from what the client, owner and data holders keep.
  for (std::uint64_t k = 0; k < 3; ++k) {
    AuditRequest req{wallet[k].receipt, "certify_rs", aux_for("certify_rs")};
    auto out = run_audit(w.cfg, w.keys.registry(), req, wallet[k].opening, w.tr.owner, w.tr.holders, k);
    EXPECT_TRUE(out.ok());
  }
  EXPECT_NE(wallet[0].receipt.c_x, wallet[1].receipt.c_x);
}

TEST(Receipt, FlippedModelCommitmentFailsAtCommitteeSignature) {
  World w(poc::Backend::Poly);
  auto r = w.tr.receipt;
  Bytes pt = r.c_model.points[0].to_bytes();
  pt.back() ^= 1;
  try {
    r.c_model.points[0] = G1::from_bytes(mock_group(), pt);
  } catch (const ParseError&) {
    GTEST_SKIP() << "flipped encoding is not a point";
  }
  auto v = verify_receipt(r, w.keys.registry());
  EXPECT_FALSE(v);
  EXPECT_EQ(v.failure, "sigma_TC[0]");
}

TEST(Receipt, ReorderedDatasetCommitmentsRejected) {
  World w(poc::Backend::Poly);
  auto r = w.tr.receipt;
  std::swap(r.c_data[0], r.c_data[1]);
  EXPECT_FALSE(verify_receipt(r, w.keys.registry()));
  // Canonical order oracle: the signed message lists c_D1..c_DN, c_M, c_J.
  Bytes expect;
  for (const auto& c : w.tr.receipt.c_data) {
    auto b = c.to_bytes();
    expect.insert(expect.end(), b.begin(), b.end());
  }
  for (const auto* c : {&w.tr.receipt.c_model, &w.tr.receipt.c_rand}) {
    auto b = c->to_bytes();
    expect.insert(expect.end(), b.begin(), b.end());
  }
  EXPECT_EQ(w.tr.receipt.message(), expect);
}

TEST(Receipt, ClientRecomputationCatchesWrongOpening) {
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  auto o = inf.opening;
  o.y[1] += Fe::one(w.cfg.field());
  auto v = verify_receipt(inf.receipt, w.keys.registry(), w.cfg.pp, o);
  EXPECT_FALSE(v);
  EXPECT_EQ(v.failure, "c_y");
  o = inf.opening;
  o.r_x.clear();
  EXPECT_EQ(verify_receipt(inf.receipt, w.keys.registry(), w.cfg.pp, o).failure, "c_x");
}

TEST(Receipt, ArmorRoundTripAndVersionHeader) {
  World w(poc::Backend::Pedersen);
  auto inf = w.infer();
  for (const Receipt& r : {Receipt{w.tr.receipt}, Receipt{inf.receipt}}) {
    std::string text = armor(r);
    EXPECT_EQ(text.substr(0, 8), "00000001");
    Receipt back = dearmor(mock_group(), text + "\n");
    EXPECT_EQ(back, r);
    EXPECT_TRUE(verify_receipt(back, w.keys.registry()));
    EXPECT_EQ(receipt_size(r), text.size() / 2 - 5);
    EXPECT_THROW(dearmor(mock_group(), text.substr(0, text.size() - 2)), ParseError);
    EXPECT_THROW(dearmor(mock_group(), text + "00"), ParseError);
  }
}

TEST(Receipt, ThousandMutationsAllDetected) {
  World w(poc::Backend::Poly);
  auto inf = w.infer();
  const std::string text = armor(inf.receipt);
  const std::size_t n = text.size() / 2;
  Rng rng(99);
  const auto reg = w.keys.registry();
  for (int trial = 0; trial < 1000; ++trial) {
    std::string m = text;
    const std::size_t at = uniform_below(rng, n);
    flip_byte(m, at, static_cast<std::uint8_t>(1 + uniform_below(rng, 255)));
    bool detected = false;
    try {
      detected = !verify_receipt(dearmor(mock_group(), m), reg);
    } catch (const std::exception&) {
      detected = true;
    }
    ASSERT_TRUE(detected) << "mutation at byte " << at;
  }
}

TEST(Receipt, IdenticalSeedsGiveIdenticalReceipts) {
  World a(poc::Backend::Poly, 21), b(poc::Backend::Poly, 21), c(poc::Backend::Poly, 22);
  EXPECT_EQ(armor(a.tr.receipt), armor(b.tr.receipt));
  EXPECT_EQ(armor(a.infer().receipt), armor(b.infer().receipt));
  EXPECT_NE(armor(a.tr.receipt), armor(c.tr.receipt));
}

TEST(Receipt, PolyAndHashSizeIndependentOfModelSize) {
  const Keys keys = Keys::derive(3, 2, 3);
  for (auto b : {poc::Backend::Poly, poc::Backend::Hash}) {
    auto pp = poc::poc_setup(b, mock_group(), 5, 40000);
    std::vector<std::size_t> sizes;
    for (std::size_t m : {4u, 400u, 40000u}) sizes.push_back(receipt_size(synthetic_receipt(pp, keys, m, 64, 4, m)));
    EXPECT_EQ(sizes[0], sizes[1]) << poc::to_string(b);
    EXPECT_EQ(sizes[1], sizes[2]) << poc::to_string(b);
  }
}

TEST(Receipt, PedersenSizeGrowsOneElementPerParameter) {
  const Keys keys = Keys::derive(3, 2, 3);
  auto pp = poc::poc_setup(poc::Backend::Pedersen, mock_group(), 5, 1);
  const auto s4 = receipt_size(synthetic_receipt(pp, keys, 4, 8, 4, 1));
  const auto s400 = receipt_size(synthetic_receipt(pp, keys, 400, 8, 4, 2));
  EXPECT_EQ(s400 - s4, 396 * mock_group().g1_bytes());
}

TEST(Receipt, EmptyDatasetReceiptWellFormed) {
  const Keys keys = Keys::derive(3, 1, 3);
  auto pp = poc::poc_setup(poc::Backend::Poly, mock_group(), 5, 8);
  auto r = synthetic_receipt(pp, keys, 4, 0, 4, 1);
  EXPECT_TRUE(verify_receipt(r, keys.registry()));
  EXPECT_EQ(std::get<InferenceReceipt>(dearmor(mock_group(), armor(r))), r);
}

TEST(Fault, TokensRoundTrip) {
  for (std::string t : {"dh:0:dataset", "m:0:model", "dh:3:audit-dataset", "m:0:audit-model", "c:0:input",
                        "ac:1:share"}) {
    EXPECT_EQ(Fault::parse(t).token(), t);
  }
  EXPECT_EQ(Fault::parse("dh:2:dataset").culprit().name(), "DH_2");
  EXPECT_EQ(Fault::parse("ac:1:share").culprit().name(), "CP_1");
  EXPECT_THROW(Fault::parse("dh:x:dataset"), std::invalid_argument);
  EXPECT_THROW(Fault::parse("tc:0:share"), std::invalid_argument);
  EXPECT_THROW(Fault::parse("dh0dataset"), std::invalid_argument);
}

TEST(Curve, EndToEndOnPairingGroup) {
  World w(poc::Backend::Poly, 5, PairingGroup::bls12_381());
  auto inf = w.infer();
  EXPECT_TRUE(verify_receipt(inf.receipt, w.keys.registry(), w.cfg.pp, inf.opening));
  auto out = w.audit(inf, "knn_shapley", aux_for("knn_shapley"));
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.result().raw, plaintext_audit(w, inf, "knn_shapley", out.result().coin));
  EXPECT_EQ(receipt_size(inf.receipt), receipt_size(synthetic_receipt(w.cfg.pp, w.keys, 5, 20, 4, 1)));
}
