#pragma once

// Exact arithmetic in F_p and F_q = F_{p^f}, base-p digits and Lucas binomials.
//
// Elements of F_q are stored as a single integer index v = c_0 + c_1 p + ... + c_{f-1} p^{f-1},
// where (c_0, ..., c_{f-1}) are the coordinates in the power basis 1, y, ..., y^{f-1} of
// F_p[y]/(modulus). All arithmetic goes through lookup tables owned by a FieldContext.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iwahori/errors.hpp"

namespace iwahori {

struct FqElem {
  std::uint32_t v = 0;

  constexpr bool is_zero() const { return v == 0; }
  friend constexpr bool operator==(FqElem, FqElem) = default;
  friend constexpr auto operator<=>(FqElem, FqElem) = default;
};

struct DigitExpansion {
  std::vector<std::uint32_t> digits;  // least significant first
  std::uint64_t value = 0;
};

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  while (exp--) r *= base;
  return r;
}

inline DigitExpansion digits_base_p(std::uint64_t k, std::uint32_t p) {
  DigitExpansion d;
  d.value = k;
  while (k > 0) {
    d.digits.push_back(static_cast<std::uint32_t>(k % p));
    k /= p;
  }
  return d;
}

/// Binomial coefficient n choose r reduced mod p, as a product of digit binomials.
inline std::uint32_t lucas_binom(std::uint64_t n, std::uint64_t r, std::uint32_t p) {
  std::uint64_t result = 1;
  while (n > 0 || r > 0) {
    const std::uint64_t ni = n % p;
    const std::uint64_t ri = r % p;
    if (ri > ni) return 0;
    // small binomial mod p via multiplicative formula with inverses
    std::uint64_t num = 1, den = 1;
    for (std::uint64_t i = 0; i < ri; ++i) {
      num = num * ((ni - i) % p) % p;
      den = den * ((i + 1) % p) % p;
    }
    std::uint64_t inv = 1, b = den, e = p - 2;
    while (e) {
      if (e & 1) inv = inv * b % p;
      b = b * b % p;
      e >>= 1;
    }
    result = result * (num * inv % p) % p;
    n /= p;
    r /= p;
  }
  return static_cast<std::uint32_t>(result);
}

namespace detail {

// Polynomials over F_p as coefficient vectors, lowest degree first.
using PolyP = std::vector<std::uint32_t>;

inline void trim(PolyP& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline PolyP poly_mod(PolyP a, const PolyP& m, std::uint32_t p) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  std::uint64_t lead_inv = 1;
  {
    std::uint64_t b = m.back(), e = p - 2;
    while (e) {
      if (e & 1) lead_inv = lead_inv * b % p;
      b = b * b % p;
      e >>= 1;
    }
  }
  while (a.size() >= m.size()) {
    const std::uint64_t c = a.back() * lead_inv % p;
    const std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i) a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - c * m[i] % p) % p);
    trim(a);
  }
  return a;
}

/// Brute force: no monic factor of degree 1..f/2.
inline bool is_irreducible(const PolyP& m, std::uint32_t p) {
  const std::size_t f = m.size() - 1;
  for (std::size_t d = 1; 2 * d <= f; ++d) {
    const std::uint64_t count = ipow(p, static_cast<unsigned>(d));
    for (std::uint64_t code = 0; code < count; ++code) {
      PolyP cand(d + 1);
      std::uint64_t c = code;
      for (std::size_t i = 0; i < d; ++i) {
        cand[i] = static_cast<std::uint32_t>(c % p);
        c /= p;
      }
      cand[d] = 1;
      if (poly_mod(m, cand, p).empty()) return false;
    }
  }
  return true;
}

struct ConwayEntry {
  std::uint32_t p, f;
  std::vector<std::uint32_t> coeffs;  // lowest first, monic
};

inline const std::vector<ConwayEntry>& conway_table() {
  static const std::vector<ConwayEntry> table = {
      {3, 1, {1, 1}},       {3, 2, {2, 2, 1}},     {3, 3, {1, 2, 0, 1}},  {3, 4, {2, 0, 0, 2, 1}},
      {5, 1, {3, 1}},       {5, 2, {2, 4, 1}},     {5, 3, {3, 3, 0, 1}},  {7, 1, {4, 1}},
      {7, 2, {3, 6, 1}},    {11, 1, {9, 1}},       {11, 2, {2, 7, 1}},    {13, 1, {11, 1}},
      {13, 2, {2, 12, 1}},
  };
  return table;
}

}  // namespace detail

/// Immutable F_q arithmetic tables. Shareable across threads once built.
class FieldContext {
 public:
  static constexpr std::uint32_t kMaxOrder = 1024;

  FieldContext(std::uint32_t p, std::uint32_t f, std::optional<std::vector<std::uint32_t>> modulus = std::nullopt)
      : p_(p), f_(f) {
    if (p < 3 || !is_prime(p)) throw ConfigError("field characteristic must be an odd prime, got " + std::to_string(p));
    if (f < 1) throw ConfigError("field degree must be positive");
    const std::uint64_t q = ipow(p, f);
    if (q > kMaxOrder) throw ConfigError("field order " + std::to_string(q) + " exceeds table limit");
    q_ = static_cast<std::uint32_t>(q);
    modulus_ = modulus ? *modulus : default_modulus(p, f);
    if (modulus_.size() != f + 1 || modulus_.back() != 1)
      throw ConfigError("modulus must be monic of degree " + std::to_string(f));
    for (auto c : modulus_)
      if (c >= p) throw ConfigError("modulus coefficient out of range");
    if (!detail::is_irreducible(modulus_, p)) throw ConfigError("modulus is reducible over F_p");
    build_tables();
  }

  std::uint32_t p() const { return p_; }
  std::uint32_t f() const { return f_; }
  std::uint32_t q() const { return q_; }
  const std::vector<std::uint32_t>& modulus() const { return modulus_; }

  FqElem zero() const { return {0}; }
  FqElem one() const { return {1}; }
  /// Root y of the modulus (for f = 1 this is the residue -modulus[0]).
  FqElem generator() const { return f_ == 1 ? from_int(p_ - modulus_[0]) : FqElem{p_}; }
  /// A fixed generator of the multiplicative group.
  FqElem primitive() const { return {exp_[1]}; }

  FqElem from_int(std::int64_t n) const {
    std::int64_t r = n % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return {static_cast<std::uint32_t>(r)};
  }
  FqElem from_coeffs(std::span<const std::uint32_t> c) const {
    if (c.size() != f_) throw std::invalid_argument("coefficient vector has wrong length");
    std::uint32_t v = 0;
    for (std::size_t i = f_; i-- > 0;) {
      if (c[i] >= p_) throw std::invalid_argument("coefficient out of range");
      v = v * p_ + c[i];
    }
    return {v};
  }
  std::vector<std::uint32_t> coeffs(FqElem x) const {
    std::vector<std::uint32_t> c(f_);
    for (std::uint32_t i = 0; i < f_; ++i) {
      c[i] = x.v % p_;
      x.v /= p_;
    }
    return c;
  }
  /// F_p-basis 1, y, ..., y^{f-1} of F_q.
  std::vector<FqElem> prime_basis() const {
    std::vector<FqElem> b;
    std::uint32_t v = 1;
    for (std::uint32_t i = 0; i < f_; ++i, v *= p_) b.push_back({v});
    return b;
  }
  std::vector<FqElem> elements() const {
    std::vector<FqElem> all(q_);
    for (std::uint32_t i = 0; i < q_; ++i) all[i] = {i};
    return all;
  }

  FqElem add(FqElem x, FqElem y) const { return {add_[x.v * q_ + y.v]}; }
  FqElem neg(FqElem x) const { return {neg_[x.v]}; }
  FqElem sub(FqElem x, FqElem y) const { return add(x, neg(y)); }
  FqElem mul(FqElem x, FqElem y) const {
    if (x.v == 0 || y.v == 0) return {0};
    std::uint32_t s = log_[x.v] + log_[y.v];
    if (s >= q_ - 1) s -= q_ - 1;
    return {exp_[s]};
  }
  FqElem inv(FqElem x) const {
    if (x.v == 0) throw std::domain_error("division by zero in F_q");
    return {exp_[(q_ - 1 - log_[x.v]) % (q_ - 1)]};
  }
  FqElem div(FqElem x, FqElem y) const { return mul(x, inv(y)); }
  /// x^k with 0^0 = 1; negative exponents allowed for nonzero x.
  FqElem pow(FqElem x, std::int64_t k) const {
    if (x.v == 0) {
      if (k == 0) return {1};
      if (k < 0) throw std::domain_error("negative power of zero");
      return {0};
    }
    const std::int64_t n = q_ - 1;
    std::int64_t e = k % n;
    if (e < 0) e += n;
    return {exp_[(static_cast<std::uint64_t>(log_[x.v]) * static_cast<std::uint64_t>(e)) % n]};
  }
  FqElem frobenius(FqElem x, std::int64_t j) const {
    std::int64_t jj = j % f_;
    if (jj < 0) jj += f_;
    for (std::int64_t i = 0; i < jj; ++i) x = {frob_[x.v]};
    return x;
  }
  /// Discrete log w.r.t. primitive(); x must be nonzero.
  std::uint32_t log(FqElem x) const {
    if (x.v == 0) throw std::domain_error("log of zero");
    return log_[x.v];
  }

  std::string to_string(FqElem x) const {
    if (f_ == 1) return std::to_string(x.v);
    std::string s;
    for (auto c : coeffs(x)) s += std::to_string(c);
    return s;
  }

  static std::vector<std::uint32_t> default_modulus(std::uint32_t p, std::uint32_t f) {
    for (const auto& e : detail::conway_table())
      if (e.p == p && e.f == f) return e.coeffs;
    // First monic irreducible polynomial whose root generates the multiplicative group.
    const std::uint64_t count = ipow(p, f);
    for (std::uint64_t code = 1; code < count; ++code) {
      std::vector<std::uint32_t> cand(f + 1);
      std::uint64_t c = code;
      for (std::uint32_t i = 0; i < f; ++i) {
        cand[i] = static_cast<std::uint32_t>(c % p);
        c /= p;
      }
      cand[f] = 1;
      if (cand[0] == 0 || !detail::is_irreducible(cand, p)) continue;
      if (root_is_primitive(cand, p)) return cand;
    }
    throw ConfigError("no primitive modulus found");
  }

 private:
  static std::vector<std::uint32_t> poly_mulmod(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                                                const std::vector<std::uint32_t>& m, std::uint32_t p) {
    detail::PolyP prod(a.size() + b.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        prod[i + j] = static_cast<std::uint32_t>((prod[i + j] + static_cast<std::uint64_t>(a[i]) * b[j]) % p);
    auto r = detail::poly_mod(prod, m, p);
    r.resize(m.size() - 1, 0);
    return r;
  }

  static bool root_is_primitive(const std::vector<std::uint32_t>& m, std::uint32_t p) {
    const std::size_t f = m.size() - 1;
    const std::uint64_t n = ipow(p, static_cast<unsigned>(f)) - 1;
    std::vector<std::uint32_t> x(f, 0), acc(f, 0);
    if (f == 1) x[0] = (p - m[0]) % p;
    else x[1] = 1;
    acc[0] = 1;
    for (std::uint64_t k = 1; k <= n; ++k) {
      acc = poly_mulmod(acc, x, m, p);
      bool is_one = acc[0] == 1;
      for (std::size_t i = 1; i < f && is_one; ++i) is_one = acc[i] == 0;
      if (is_one) return k == n;
    }
    return false;
  }

  void build_tables() {
    add_.assign(static_cast<std::size_t>(q_) * q_, 0);
    neg_.assign(q_, 0);
    for (std::uint32_t x = 0; x < q_; ++x) {
      auto cx = coeffs({x});
      std::vector<std::uint32_t> cn(f_);
      for (std::uint32_t i = 0; i < f_; ++i) cn[i] = (p_ - cx[i]) % p_;
      neg_[x] = from_coeffs(cn).v;
      for (std::uint32_t y = 0; y < q_; ++y) {
        auto cy = coeffs({y});
        std::vector<std::uint32_t> cs(f_);
        for (std::uint32_t i = 0; i < f_; ++i) cs[i] = (cx[i] + cy[i]) % p_;
        add_[x * q_ + y] = from_coeffs(cs).v;
      }
    }
    // find a multiplicative generator by brute force
    exp_.assign(q_ - 1, 0);
    log_.assign(q_, 0);
    for (std::uint32_t g = 1; g < q_; ++g) {
      std::vector<std::uint32_t> acc(f_, 0);
      acc[0] = 1;
      const auto cg = coeffs({g});
      std::vector<bool> seen(q_, false);
      std::uint32_t k = 0;
      bool ok = true;
      for (; k < q_ - 1; ++k) {
        const std::uint32_t v = from_coeffs(acc).v;
        if (seen[v]) {
          ok = false;
          break;
        }
        seen[v] = true;
        exp_[k] = v;
        log_[v] = k;
        acc = poly_mulmod(acc, cg, modulus_, p_);
      }
      if (ok) break;
    }
    frob_.assign(q_, 0);
    for (std::uint32_t x = 0; x < q_; ++x) {
      FqElem y{1};
      for (std::uint32_t i = 0; i < p_; ++i) y = mul(y, {x});
      frob_[x] = y.v;
    }
  }

  std::uint32_t p_, f_, q_ = 0;
  std::vector<std::uint32_t> modulus_;
  std::vector<std::uint32_t> add_, neg_, exp_, log_, frob_;
};

using FieldPtr = std::shared_ptr<const FieldContext>;

}  // namespace iwahori
