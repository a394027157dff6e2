#pragma once

// Truncated ring of integers O/pi^N of a finite extension F/Q_p with residue field F_q and
// ramification index e.
//
// O is modelled as GR(p^m, f)[X]/(E(X)) where GR is the Galois ring Z/p^m[y]/(lifted modulus)
// and E is an Eisenstein polynomial (default X^e - p), m = ceil(N/e). An element is stored as
// sum_{i<e} c_i X^i with c_i in GR reduced modulo p^{ceil((N-i)/e)}, which is a canonical form
// for O/pi^N. The Teichmuller digit view (mu_0, ..., mu_{N-1}) is extracted on demand.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iwahori/errors.hpp"
#include "iwahori/gf.hpp"

namespace iwahori {

class RingContext;

inline constexpr int kInfiniteValuation = std::numeric_limits<int>::max();

/// Element of O/pi^N. Value type; the context must outlive it.
class LocalInt {
 public:
  static constexpr std::size_t kMaxCoeffs = 16;  // e * f

  LocalInt() = default;

  const RingContext* context() const { return ctx_; }

  friend bool operator==(const LocalInt& a, const LocalInt& b) { return a.ctx_ == b.ctx_ && a.c_ == b.c_; }

  LocalInt operator+(const LocalInt& o) const;
  LocalInt operator-(const LocalInt& o) const;
  LocalInt operator*(const LocalInt& o) const;
  LocalInt operator-() const;

 private:
  friend class RingContext;
  const RingContext* ctx_ = nullptr;
  std::array<std::int64_t, kMaxCoeffs> c_{};  // c_[i*f + j]: coefficient of X^i y^j
};

class RingContext {
 public:
  /// `eisenstein` lists a_0..a_{e-1} of X^e + a_{e-1}X^{e-1} + ... + a_0 (integers); empty means X^e - p.
  RingContext(FieldPtr field, std::uint32_t e, std::uint32_t N, std::vector<std::int64_t> eisenstein = {})
      : field_(std::move(field)), e_(e), N_(N) {
    if (!field_) throw ConfigError("missing residue field");
    if (e_ < 1) throw ConfigError("ramification index must be positive");
    if (N_ < 1) throw ConfigError("precision must be positive");
    f_ = field_->f();
    p_ = field_->p();
    if (static_cast<std::size_t>(e_) * f_ > LocalInt::kMaxCoeffs) throw ConfigError("e*f too large");
    m_ = (N_ + e_ - 1) / e_;
    pm_ = 1;
    for (std::uint32_t i = 0; i < m_; ++i) {
      if (pm_ > (std::int64_t{1} << 62) / p_) throw ConfigError("precision too large for 64-bit Galois ring");
      pm_ *= p_;
    }
    for (std::uint32_t i = 0; i < e_; ++i) {
      const std::uint32_t lev = (N_ > i) ? (N_ - i + e_ - 1) / e_ : 0;
      std::int64_t mod = 1;
      for (std::uint32_t k = 0; k < lev; ++k) mod *= p_;
      level_[i] = mod;
    }
    for (std::uint32_t j = 0; j <= f_; ++j) modulus_.push_back(field_->modulus()[j]);
    if (eisenstein.empty()) {
      eis_.assign(e_, 0);
      eis_[0] = -static_cast<std::int64_t>(p_);
    } else {
      if (eisenstein.size() != e_) throw ConfigError("Eisenstein polynomial must have degree e");
      for (auto a : eisenstein)
        if (a % static_cast<std::int64_t>(p_) != 0) throw ConfigError("Eisenstein coefficients must be divisible by p");
      const std::int64_t pp = static_cast<std::int64_t>(p_) * p_;
      if (eisenstein[0] % pp == 0) throw ConfigError("Eisenstein constant term must have valuation exactly 1");
      eis_ = std::move(eisenstein);
    }
    eis_u0_ = eis_[0] / static_cast<std::int64_t>(p_);
    for (auto& a : eis_) a = mod_pm(a);
    build_teichmuller();
    build_pi_data();
  }

  const FieldContext& field() const { return *field_; }
  const FieldPtr& field_ptr() const { return field_; }
  std::uint32_t e() const { return e_; }
  std::uint32_t f() const { return f_; }
  std::uint32_t p() const { return p_; }
  std::uint32_t precision() const { return N_; }
  bool default_eisenstein() const {
    if (eis_[0] != mod_pm(-static_cast<std::int64_t>(p_))) return false;
    for (std::uint32_t i = 1; i < e_; ++i)
      if (eis_[i] != 0) return false;
    return true;
  }
  const std::vector<std::int64_t>& eisenstein() const { return eis_; }

  LocalInt zero() const { return make(); }
  LocalInt one() const {
    LocalInt r = make();
    r.c_[0] = 1;
    return r;
  }
  LocalInt from_int(std::int64_t n) const {
    LocalInt r = make();
    r.c_[0] = mod_pm(n);
    return normalized(r);
  }
  LocalInt teichmuller_lift(FqElem x) const { return lifts_.at(x.v); }
  LocalInt pi_power(std::uint32_t k) const { return k < N_ ? pi_pow_[k] : zero(); }

  LocalInt add(const LocalInt& a, const LocalInt& b) const {
    check(a), check(b);
    LocalInt r = make();
    for (std::size_t k = 0; k < e_ * f_; ++k) r.c_[k] = a.c_[k] + b.c_[k];
    return normalized(r);
  }
  LocalInt neg(const LocalInt& a) const {
    check(a);
    LocalInt r = make();
    for (std::size_t k = 0; k < e_ * f_; ++k) r.c_[k] = -a.c_[k];
    return normalized(r);
  }
  LocalInt sub(const LocalInt& a, const LocalInt& b) const { return add(a, neg(b)); }

  LocalInt mul(const LocalInt& a, const LocalInt& b) const {
    check(a), check(b);
    // product in GR[X] of X-degree <= 2e-2, then reduce with the Eisenstein relation
    std::array<std::int64_t, 2 * LocalInt::kMaxCoeffs> prod{};
    for (std::uint32_t i = 0; i < e_; ++i) {
      if (is_zero_gr(&a.c_[i * f_])) continue;
      for (std::uint32_t j = 0; j < e_; ++j) {
        if (is_zero_gr(&b.c_[j * f_])) continue;
        std::array<std::int64_t, 8> t{};
        gr_mul(&a.c_[i * f_], &b.c_[j * f_], t.data());
        for (std::uint32_t k = 0; k < f_; ++k) prod[(i + j) * f_ + k] = add_pm(prod[(i + j) * f_ + k], t[k]);
      }
    }
    for (std::uint32_t d = 2 * e_ - 1; d-- > e_;) {
      // X^d = X^{d-e} * X^e = -X^{d-e} * sum a_i X^i
      for (std::uint32_t i = 0; i < e_; ++i) {
        if (eis_[i] == 0) continue;
        for (std::uint32_t k = 0; k < f_; ++k) {
          const std::int64_t term = mul_pm(prod[d * f_ + k], eis_[i]);
          prod[(d - e_ + i) * f_ + k] = add_pm(prod[(d - e_ + i) * f_ + k], pm_ - term);
        }
      }
      for (std::uint32_t k = 0; k < f_; ++k) prod[d * f_ + k] = 0;
    }
    LocalInt r = make();
    for (std::size_t k = 0; k < e_ * f_; ++k) r.c_[k] = prod[k];
    return normalized(r);
  }

  /// Teichmuller digits mu_0..mu_{N-1}.
  std::vector<FqElem> digits(const LocalInt& x) const {
    check(x);
    std::vector<FqElem> out;
    out.reserve(N_);
    LocalInt cur = x;
    for (std::uint32_t k = 0; k < N_; ++k) {
      const FqElem mu = residue(cur);
      out.push_back(mu);
      if (k + 1 < N_) cur = div_pi_raw(sub(cur, lifts_[mu.v]));
    }
    return out;
  }
  /// Digit at position k only (cheaper for small k).
  FqElem digit(const LocalInt& x, std::uint32_t k) const {
    check(x);
    if (k >= N_) throw PrecisionError("digit " + std::to_string(k) + " beyond precision " + std::to_string(N_));
    LocalInt cur = x;
    for (std::uint32_t i = 0; i < k; ++i) cur = div_pi_raw(sub(cur, lifts_[residue(cur).v]));
    return residue(cur);
  }
  LocalInt from_digits(const std::vector<FqElem>& d) const {
    if (d.size() > N_) throw PrecisionError("digit vector longer than precision");
    LocalInt r = zero();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (!d[i].is_zero()) r = add(r, mul(lifts_[d[i].v], pi_pow_[i]));
    return r;
  }

  FqElem residue(const LocalInt& x) const {
    std::uint32_t v = 0;
    for (std::uint32_t j = f_; j-- > 0;) v = v * p_ + static_cast<std::uint32_t>(x.c_[j] % p_);
    return {v};
  }

  int valuation(const LocalInt& x) const {
    check(x);
    int best = kInfiniteValuation;
    for (std::uint32_t i = 0; i < e_; ++i) {
      int vp = std::numeric_limits<int>::max();
      for (std::uint32_t j = 0; j < f_; ++j) {
        std::int64_t c = x.c_[i * f_ + j];
        if (c == 0) continue;
        int v = 0;
        while (c % p_ == 0) {
          c /= p_;
          ++v;
        }
        vp = std::min(vp, v);
      }
      if (vp != std::numeric_limits<int>::max()) best = std::min(best, static_cast<int>(e_) * vp + static_cast<int>(i));
    }
    return best;
  }

  /// Zero every digit at position >= level.
  LocalInt truncate(const LocalInt& x, std::uint32_t level) const {
    if (level > N_) throw std::out_of_range("truncation level exceeds precision");
    if (level == N_) return x;
    auto d = digits(x);
    d.resize(level);
    return from_digits(d);
  }

  /// x / pi^k for x with valuation >= k. The result is only meaningful modulo pi^{N-k}.
  LocalInt divide_by_pi(const LocalInt& x, std::uint32_t k) const {
    check(x);
    if (k == 0) return x;
    if (valuation(x) < static_cast<int>(k)) throw std::domain_error("element not divisible by pi^" + std::to_string(k));
    LocalInt cur = x;
    for (std::uint32_t i = 0; i < k; ++i) cur = div_pi_raw(cur);
    return cur;
  }

  /// Inverse of a unit.
  LocalInt inverse_unit(const LocalInt& x) const {
    check(x);
    const FqElem r = residue(x);
    if (r.is_zero()) throw std::domain_error("inverse of a non-unit");
    LocalInt y = lifts_[field_->inv(r).v];
    const LocalInt two = from_int(2);
    for (std::uint32_t it = 0; it < 2 * N_ + 2; ++it) {
      const LocalInt next = mul(y, sub(two, mul(x, y)));
      if (next == y) break;
      y = next;
    }
    if (!(mul(x, y) == one())) throw std::logic_error("unit inversion failed to converge");
    return y;
  }

  /// Digit at position e of [x] + [y] - [x + y].
  FqElem carry_P0(FqElem x, FqElem y) const {
    if (N_ < e_ + 1) throw PrecisionError("carry needs precision at least e + 1");
    const LocalInt s = sub(add(lifts_[x.v], lifts_[y.v]), lifts_[field_->add(x, y).v]);
    return digit(s, e_);
  }

  std::string to_string(const LocalInt& x) const {
    std::string s = "[";
    auto d = digits(x);
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + field_->to_string(d[i]);
    return s + "]";
  }

 private:
  friend class LocalInt;

  LocalInt make() const {
    LocalInt r;
    r.ctx_ = this;
    return r;
  }
  void check(const LocalInt& a) const {
    if (a.ctx_ != this) throw ContextMismatch("LocalInt belongs to a different ring");
  }
  std::int64_t mod_pm(std::int64_t a) const {
    a %= pm_;
    return a < 0 ? a + pm_ : a;
  }
  std::int64_t add_pm(std::int64_t a, std::int64_t b) const {
    std::int64_t s = a + b;
    return s >= pm_ ? s - pm_ : s;
  }
  std::int64_t mul_pm(std::int64_t a, std::int64_t b) const {
    return static_cast<std::int64_t>((static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b)) %
                                     static_cast<unsigned __int128>(pm_));
  }
  bool is_zero_gr(const std::int64_t* a) const {
    for (std::uint32_t k = 0; k < f_; ++k)
      if (a[k] != 0) return false;
    return true;
  }
  // Galois ring product modulo the lifted (monic) modulus.
  void gr_mul(const std::int64_t* a, const std::int64_t* b, std::int64_t* out) const {
    std::array<std::int64_t, 16> t{};
    for (std::uint32_t i = 0; i < f_; ++i) {
      if (a[i] == 0) continue;
      for (std::uint32_t j = 0; j < f_; ++j) t[i + j] = add_pm(t[i + j], mul_pm(a[i], b[j]));
    }
    for (std::uint32_t d = 2 * f_ - 1; d-- > f_;) {
      if (t[d] == 0) continue;
      for (std::uint32_t i = 0; i < f_; ++i) {
        const std::int64_t term = mul_pm(t[d], static_cast<std::int64_t>(modulus_[i]));
        t[d - f_ + i] = add_pm(t[d - f_ + i], pm_ - term);
      }
      t[d] = 0;
    }
    for (std::uint32_t k = 0; k < f_; ++k) out[k] = t[k];
  }
  LocalInt normalized(LocalInt r) const {
    for (std::uint32_t i = 0; i < e_; ++i)
      for (std::uint32_t j = 0; j < f_; ++j) {
        std::int64_t& c = r.c_[i * f_ + j];
        c %= level_[i];
        if (c < 0) c += level_[i];
      }
    return r;
  }
  // Exact division by pi for an element of positive valuation (top digit becomes meaningless).
  LocalInt div_pi_raw(const LocalInt& x) const {
    LocalInt shifted = make();
    for (std::uint32_t i = 1; i < e_; ++i)
      for (std::uint32_t j = 0; j < f_; ++j) shifted.c_[(i - 1) * f_ + j] = x.c_[i * f_ + j];
    LocalInt c0 = make();
    bool nonzero = false;
    for (std::uint32_t j = 0; j < f_; ++j) {
      if (x.c_[j] % p_ != 0) throw std::logic_error("div_pi on a unit");
      c0.c_[j] = x.c_[j] / p_;
      nonzero |= c0.c_[j] != 0;
    }
    if (!nonzero) return normalized(shifted);
    return add(normalized(shifted), mul(normalized(c0), p_over_pi_));
  }

  void build_teichmuller() {
    const std::uint32_t q = field_->q();
    lifts_.resize(q);
    for (std::uint32_t v = 0; v < q; ++v) {
      LocalInt t = make();
      auto cs = field_->coeffs({v});
      for (std::uint32_t j = 0; j < f_; ++j) t.c_[j] = cs[j];
      t = normalized(t);
      bool converged = false;
      for (std::uint32_t it = 0; it < m_ + 2; ++it) {
        LocalInt next = one();
        LocalInt base = t;
        std::uint32_t k = q;
        while (k) {
          if (k & 1) next = mul(next, base);
          base = mul(base, base);
          k >>= 1;
        }
        if (next == t) {
          converged = true;
          break;
        }
        t = next;
      }
      if (!converged) throw std::logic_error("Teichmuller iteration did not stabilize");
      lifts_[v] = t;
    }
  }

  void build_pi_data() {
    // p / X = -u0^{-1} (X^{e-1} + sum_{i>=1} a_i X^{i-1}), where a_0 = p * u0
    LocalInt poly = make();
    for (std::uint32_t i = 1; i < e_; ++i) poly.c_[(i - 1) * f_] = eis_[i];
    poly.c_[(e_ - 1) * f_] = add_pm(poly.c_[(e_ - 1) * f_], 1);
    poly = normalized(poly);
    const LocalInt u0_inv = inverse_unit(from_int(eis_u0_));
    p_over_pi_ = neg(mul(u0_inv, poly));
    pi_pow_.assign(N_, one());
    LocalInt x = make();
    if (e_ > 1) x.c_[f_] = 1;
    else x.c_[0] = mod_pm(-eis_[0]);  // e = 1: the uniformizer is -a_0
    x = normalized(x);
    for (std::uint32_t k = 1; k < N_; ++k) pi_pow_[k] = mul(pi_pow_[k - 1], x);
  }

  FieldPtr field_;
  std::uint32_t e_, N_, f_ = 1, p_ = 3, m_ = 1;
  std::int64_t pm_ = 1;
  std::array<std::int64_t, LocalInt::kMaxCoeffs> level_{};
  std::vector<std::int64_t> modulus_;
  std::vector<std::int64_t> eis_;
  std::int64_t eis_u0_ = -1;  // a_0 / p, kept before reduction mod p^m
  std::vector<LocalInt> lifts_;
  std::vector<LocalInt> pi_pow_;
  LocalInt p_over_pi_;
};

using RingPtr = std::shared_ptr<const RingContext>;

inline LocalInt LocalInt::operator+(const LocalInt& o) const { return ctx_->add(*this, o); }
inline LocalInt LocalInt::operator-(const LocalInt& o) const { return ctx_->sub(*this, o); }
inline LocalInt LocalInt::operator*(const LocalInt& o) const { return ctx_->mul(*this, o); }
inline LocalInt LocalInt::operator-() const { return ctx_->neg(*this); }

/// Closed form of the unramified carry: -sum_{i=1}^{p-1} (1/p) C(p^f, i p^{f-1}) y^{q - i p^{f-1}} x^{i p^{f-1}} mod p.
inline FqElem carry_P0_unramified_closed_form(const FieldContext& F, FqElem x, FqElem y) {
  const std::uint32_t p = F.p();
  const std::uint64_t q = F.q();
  const std::uint64_t step = q / p;
  // C(q, i*step)/p mod p, from the exact binomial mod p^2 (valuation-tracked product).
  auto binom_over_p = [&](std::uint64_t k) -> std::uint32_t {
    const std::uint64_t p2 = static_cast<std::uint64_t>(p) * p;
    std::uint64_t unit = 1;  // unit part mod p^2
    int val = 0;
    auto split = [&](std::uint64_t n, int sign) {
      while (n % p == 0) {
        n /= p;
        val += sign;
      }
      n %= p2;
      if (sign > 0) {
        unit = unit * n % p2;
      } else {
        // multiply by inverse of n mod p^2 (n is a unit mod p)
        std::uint64_t inv = 1, b = n, e = p2 / p * (p - 1) - 1;
        while (e) {
          if (e & 1) inv = inv * b % p2;
          b = b * b % p2;
          e >>= 1;
        }
        unit = unit * inv % p2;
      }
    };
    for (std::uint64_t j = 0; j < k; ++j) {
      split(q - j, +1);
      split(j + 1, -1);
    }
    if (val < 1) throw std::logic_error("binomial not divisible by p");
    if (val >= 2) return 0;
    return static_cast<std::uint32_t>(unit % p);
  };
  FqElem acc = F.zero();
  for (std::uint32_t i = 1; i < p; ++i) {
    const std::uint64_t ex = i * step;
    const FqElem term = F.mul(F.mul(F.from_int(binom_over_p(ex)), F.pow(y, static_cast<std::int64_t>(q - ex))),
                              F.pow(x, static_cast<std::int64_t>(ex)));
    acc = F.add(acc, term);
  }
  return F.neg(acc);
}

}  // namespace iwahori
