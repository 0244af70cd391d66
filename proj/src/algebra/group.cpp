#include "arc/algebra/group.hpp"

#include <blst.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace arc {
namespace {

static_assert(sizeof(blst_p1) == sizeof(G1::Raw));
static_assert(sizeof(blst_p2) == sizeof(G2::Raw));
static_assert(sizeof(blst_fp12) == sizeof(GT::Raw));

blst_p1* p1(G1::Raw& r) { return reinterpret_cast<blst_p1*>(r.data()); }
const blst_p1* p1(const G1::Raw& r) { return reinterpret_cast<const blst_p1*>(r.data()); }
blst_p2* p2(G2::Raw& r) { return reinterpret_cast<blst_p2*>(r.data()); }
const blst_p2* p2(const G2::Raw& r) { return reinterpret_cast<const blst_p2*>(r.data()); }
blst_fp12* fp12(GT::Raw& r) { return reinterpret_cast<blst_fp12*>(r.data()); }
const blst_fp12* fp12(const GT::Raw& r) { return reinterpret_cast<const blst_fp12*>(r.data()); }

void check_same(const PairingGroup* a, const PairingGroup* b) {
  if (a != b || a == nullptr) throw std::invalid_argument("group elements from different groups");
}

}  // namespace

const PairingGroup& PairingGroup::mock(const PrimeField& f) {
  static std::mutex mu;
  static std::map<const PrimeField*, std::unique_ptr<PairingGroup>> interned;
  std::lock_guard lock(mu);
  auto& slot = interned[&f];
  if (!slot) slot.reset(new PairingGroup(Kind::Mock, f));
  return *slot;
}

const PairingGroup& PairingGroup::bls12_381() {
  static const PairingGroup g(Kind::Bls12381, PrimeField::bls12_381_scalar());
  return g;
}

std::string PairingGroup::name() const {
  return is_mock() ? "mock/" + f_->name() : std::string("bls12-381");
}

std::size_t PairingGroup::g1_bytes() const { return is_mock() ? f_->byte_size() : 48; }
std::size_t PairingGroup::g2_bytes() const { return is_mock() ? f_->byte_size() : 96; }

G1 PairingGroup::g1_identity() const {
  G1 r;
  r.g_ = this;
  r.e_ = Fe::zero(*f_);
  return r;  // all-zero blst point has z = 0, i.e. infinity
}

G1 PairingGroup::g1_generator() const {
  G1 r = g1_identity();
  if (is_mock()) {
    r.e_ = Fe::one(*f_);
  } else {
    std::memcpy(r.raw_.data(), blst_p1_generator(), sizeof(blst_p1));
  }
  return r;
}

G2 PairingGroup::g2_identity() const {
  G2 r;
  r.g_ = this;
  r.e_ = Fe::zero(*f_);
  return r;
}

G2 PairingGroup::g2_generator() const {
  G2 r = g2_identity();
  if (is_mock()) {
    r.e_ = Fe::one(*f_);
  } else {
    std::memcpy(r.raw_.data(), blst_p2_generator(), sizeof(blst_p2));
  }
  return r;
}

G1 PairingGroup::hash_to_g1(std::string_view tag, ByteSpan msg) const {
  if (is_mock()) {
    auto d = sha256(tag, msg);
    Fe e = Fe::from_bytes_reduce(*f_, d);
    if (e.is_zero()) e = Fe::one(*f_);
    return G1::from_exponent(*this, e);
  }
  G1 r = g1_identity();
  blst_hash_to_g1(p1(r.raw_), msg.data(), msg.size(), reinterpret_cast<const byte*>(tag.data()),
                  tag.size(), nullptr, 0);
  return r;
}

GT PairingGroup::pairing(const G1& a, const G2& b) const {
  check_same(this, a.g_);
  check_same(this, b.g_);
  GT r;
  r.g_ = this;
  if (is_mock()) {
    r.e_ = a.e_ * b.e_;
    return r;
  }
  r.e_ = Fe::zero(*f_);
  if (a.is_identity() || b.is_identity()) {
    *fp12(r.raw_) = *blst_fp12_one();
    return r;
  }
  blst_p1_affine pa;
  blst_p2_affine pb;
  blst_p1_to_affine(&pa, p1(a.raw_));
  blst_p2_to_affine(&pb, p2(b.raw_));
  blst_fp12 ml;
  blst_miller_loop(&ml, &pb, &pa);
  blst_final_exp(fp12(r.raw_), &ml);
  return r;
}

bool PairingGroup::pairing_check(const G1& a1, const G2& b1, const G1& a2, const G2& b2) const {
  ++checks_;
  if (is_mock()) return a1.e_ * b1.e_ == a2.e_ * b2.e_;
  // e(a1, b1) * e(-a2, b2) == 1, sharing one final exponentiation
  G1 na2 = -a2;
  std::vector<blst_p1_affine> ps;
  std::vector<blst_p2_affine> qs;
  auto push = [&](const G1& a, const G2& b) {
    if (a.is_identity() || b.is_identity()) return;
    blst_p1_affine pa;
    blst_p2_affine pb;
    blst_p1_to_affine(&pa, p1(a.raw_));
    blst_p2_to_affine(&pb, p2(b.raw_));
    ps.push_back(pa);
    qs.push_back(pb);
  };
  push(a1, b1);
  push(na2, b2);
  if (ps.empty()) return true;
  std::vector<const blst_p1_affine*> pp;
  std::vector<const blst_p2_affine*> qq;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    pp.push_back(&ps[i]);
    qq.push_back(&qs[i]);
  }
  blst_fp12 ml, fe;
  blst_miller_loop_n(&ml, qq.data(), pp.data(), ps.size());
  blst_final_exp(&fe, &ml);
  return blst_fp12_is_one(&fe);
}

// ---- G1 ----

const PairingGroup& G1::group() const {
  if (!g_) throw std::logic_error("detached group element");
  return *g_;
}

G1 G1::from_raw(const PairingGroup& g, const Raw& raw) {
  G1 r = g.g1_identity();
  r.raw_ = raw;
  return r;
}

G1 G1::from_exponent(const PairingGroup& g, const Fe& e) {
  if (&e.field() != &g.scalar_field()) throw ModulusMismatch();
  if (g.is_mock()) {
    G1 r = g.g1_identity();
    r.e_ = e;
    return r;
  }
  return g.g1_generator().mul(e);
}

bool G1::is_identity() const {
  if (group().is_mock()) return e_.is_zero();
  return blst_p1_is_inf(p1(raw_));
}

G1 G1::operator+(const G1& o) const {
  check_same(g_, o.g_);
  G1 r = *this;
  if (g_->is_mock()) {
    r.e_ += o.e_;
  } else {
    blst_p1_add_or_double(p1(r.raw_), p1(raw_), p1(o.raw_));
  }
  return r;
}

G1 G1::operator-() const {
  G1 r = *this;
  if (group().is_mock()) {
    r.e_ = -e_;
  } else {
    blst_p1_cneg(p1(r.raw_), true);
  }
  return r;
}

G1 G1::mul(const Fe& s) const {
  if (&s.field() != &group().scalar_field()) throw ModulusMismatch();
  G1 r = *this;
  if (g_->is_mock()) {
    r.e_ *= s;
  } else {
    auto le = s.scalar_le();
    blst_p1_mult(p1(r.raw_), p1(raw_), le.data(), 255);
  }
  return r;
}

bool G1::operator==(const G1& o) const {
  check_same(g_, o.g_);
  if (g_->is_mock()) return e_ == o.e_;
  return blst_p1_is_equal(p1(raw_), p1(o.raw_));
}

Bytes G1::to_bytes() const {
  if (group().is_mock()) return e_.to_bytes();
  Bytes out(48);
  blst_p1_compress(out.data(), p1(raw_));
  return out;
}

G1 G1::from_bytes(const PairingGroup& g, ByteSpan b) {
  if (g.is_mock()) return from_exponent(g, Fe::from_bytes(g.scalar_field(), b));
  if (b.size() != 48) throw ParseError("G1 point has wrong width");
  blst_p1_affine a;
  if (blst_p1_uncompress(&a, b.data()) != BLST_SUCCESS) throw ParseError("invalid G1 encoding");
  if (!blst_p1_affine_in_g1(&a)) throw ParseError("point not in G1");
  G1 r = g.g1_identity();
  blst_p1_from_affine(p1(r.raw_), &a);
  return r;
}

// ---- G2 ----

const PairingGroup& G2::group() const {
  if (!g_) throw std::logic_error("detached group element");
  return *g_;
}

bool G2::is_identity() const {
  if (group().is_mock()) return e_.is_zero();
  return blst_p2_is_inf(p2(raw_));
}

G2 G2::operator+(const G2& o) const {
  check_same(g_, o.g_);
  G2 r = *this;
  if (g_->is_mock()) {
    r.e_ += o.e_;
  } else {
    blst_p2_add_or_double(p2(r.raw_), p2(raw_), p2(o.raw_));
  }
  return r;
}

G2 G2::operator-() const {
  G2 r = *this;
  if (group().is_mock()) {
    r.e_ = -e_;
  } else {
    blst_p2_cneg(p2(r.raw_), true);
  }
  return r;
}

G2 G2::mul(const Fe& s) const {
  if (&s.field() != &group().scalar_field()) throw ModulusMismatch();
  G2 r = *this;
  if (g_->is_mock()) {
    r.e_ *= s;
  } else {
    auto le = s.scalar_le();
    blst_p2_mult(p2(r.raw_), p2(raw_), le.data(), 255);
  }
  return r;
}

bool G2::operator==(const G2& o) const {
  check_same(g_, o.g_);
  if (g_->is_mock()) return e_ == o.e_;
  return blst_p2_is_equal(p2(raw_), p2(o.raw_));
}

Bytes G2::to_bytes() const {
  if (group().is_mock()) return e_.to_bytes();
  Bytes out(96);
  blst_p2_compress(out.data(), p2(raw_));
  return out;
}

G2 G2::from_bytes(const PairingGroup& g, ByteSpan b) {
  G2 r = g.g2_identity();
  if (g.is_mock()) {
    r.e_ = Fe::from_bytes(g.scalar_field(), b);
    return r;
  }
  if (b.size() != 96) throw ParseError("G2 point has wrong width");
  blst_p2_affine a;
  if (blst_p2_uncompress(&a, b.data()) != BLST_SUCCESS) throw ParseError("invalid G2 encoding");
  if (!blst_p2_affine_in_g2(&a)) throw ParseError("point not in G2");
  blst_p2_from_affine(p2(r.raw_), &a);
  return r;
}

// ---- GT ----

GT GT::operator*(const GT& o) const {
  check_same(g_, o.g_);
  GT r = *this;
  if (g_->is_mock()) {
    r.e_ += o.e_;
  } else {
    blst_fp12_mul(fp12(r.raw_), fp12(raw_), fp12(o.raw_));
  }
  return r;
}

GT GT::pow(const Fe& s) const {
  if (!g_) throw std::logic_error("detached group element");
  GT r = *this;
  if (g_->is_mock()) {
    r.e_ *= s;
    return r;
  }
  *fp12(r.raw_) = *blst_fp12_one();
  Limbs bits = s.limbs();
  for (int i = 255; i >= 0; --i) {
    blst_fp12_sqr(fp12(r.raw_), fp12(r.raw_));
    if ((bits[i / 64] >> (i % 64)) & 1) blst_fp12_mul(fp12(r.raw_), fp12(r.raw_), fp12(raw_));
  }
  return r;
}

bool GT::operator==(const GT& o) const {
  check_same(g_, o.g_);
  if (g_->is_mock()) return e_ == o.e_;
  return blst_fp12_is_equal(fp12(raw_), fp12(o.raw_));
}

bool GT::is_one() const {
  if (!g_) throw std::logic_error("detached group element");
  if (g_->is_mock()) return e_.is_zero();
  return blst_fp12_is_one(fp12(raw_));
}

}  // namespace arc
