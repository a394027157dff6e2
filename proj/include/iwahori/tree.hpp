#pragma once

// Oriented edges of the Bruhat-Tits tree as canonical cosets of G/IZ, and the left G-action on
// the compact induction ind_{IZ}^G chi_r.
//
// Coset representatives come in four families, indexed by (beta, m, lambda, tail):
//   beta = 0, no tail:  g0(m, lambda)            = [[pi^m, lambda], [0, 1]]
//   beta = 0, tail mu:  g0(m, lambda) u([mu]) w  = [[pi^m [mu] + lambda, pi^m], [1, 0]]
//   beta = 1, no tail:  beta g0(m, lambda)       = [[0, 1], [pi^{m+1}, pi lambda]]
//   beta = 1, tail mu:  beta g0(m, lambda) u([mu]) w
// with lambda in I_m (Teichmuller digits lambda_0..lambda_{m-1}) and beta = [[0, 1], [pi, 0]].

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iwahori/errors.hpp"
#include "iwahori/gf.hpp"
#include "iwahori/localring.hpp"

namespace iwahori {

/// 2x2 matrix over O/pi^N whose entries are only trusted modulo pi^prec.
struct GMat2 {
  std::array<LocalInt, 4> a;  // row-major
  std::uint32_t prec = 0;

  const LocalInt& operator()(int i, int j) const { return a[2 * i + j]; }
};

struct CosetRep {
  bool beta = false;
  std::uint32_t m = 0;
  std::vector<FqElem> lambda;  // digits 0..m-1
  std::optional<FqElem> tail;

  std::uint32_t ball_index() const { return tail ? m + 1 : m; }

  /// Ball order: side, ball index, tail presence, then the digit string (lambda, then mu).
  friend std::strong_ordering operator<=>(const CosetRep& x, const CosetRep& y) {
    if (auto c = x.beta <=> y.beta; c != 0) return c;
    if (auto c = x.ball_index() <=> y.ball_index(); c != 0) return c;
    if (auto c = x.tail.has_value() <=> y.tail.has_value(); c != 0) return c;
    if (auto c = x.lambda <=> y.lambda; c != 0) return c;
    if (x.tail) return *x.tail <=> *y.tail;
    return std::strong_ordering::equal;
  }
  friend bool operator==(const CosetRep&, const CosetRep&) = default;

  static CosetRep identity() { return {}; }
  static CosetRep beta_rep() { return CosetRep{true, 0, {}, std::nullopt}; }
};

/// Digits joined by '.', e.g. "3.0.7"; the empty string for no digits.
inline std::string digit_string(const std::vector<FqElem>& d) {
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(d[i].v);
  }
  return s;
}

inline std::ostream& operator<<(std::ostream& os, const CosetRep& r) {
  os << (r.beta ? "beta*" : "") << "g0(" << r.m << ";" << digit_string(r.lambda) << ")";
  if (r.tail) os << "u(" << r.tail->v << ")w";
  return os;
}

inline std::vector<FqElem> parse_digit_string(const std::string& s) {
  std::vector<FqElem> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t dot = s.find('.', pos);
    const std::string tok = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("bad digit string: " + s);
    out.push_back({static_cast<std::uint32_t>(std::stoul(tok))});
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return out;
}

inline void to_json(nlohmann::json& j, const CosetRep& r) {
  j = nlohmann::json{{"beta", r.beta}, {"m", r.m}, {"lambda", digit_string(r.lambda)}};
  j["tail"] = r.tail ? nlohmann::json(r.tail->v) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, CosetRep& r) {
  r.beta = j.at("beta").get<bool>();
  r.m = j.at("m").get<std::uint32_t>();
  r.lambda = parse_digit_string(j.at("lambda").get<std::string>());
  if (r.lambda.size() != r.m) throw std::invalid_argument("lambda must have exactly m digits");
  r.tail.reset();
  if (!j.at("tail").is_null()) r.tail = FqElem{j.at("tail").get<std::uint32_t>()};
}

/// Finite F_q-linear combination of basis vectors [rep, 1].
class ModuleVec {
 public:
  const std::map<CosetRep, FqElem>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const FieldContext& F, const CosetRep& rep, FqElem c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms_.try_emplace(rep, c);
    if (fresh) return;
    it->second = F.add(it->second, c);
    if (it->second.is_zero()) terms_.erase(it);
  }
  void add(const FieldContext& F, const ModuleVec& o, FqElem c = FqElem{1}) {
    for (const auto& [rep, x] : o.terms_) add(F, rep, F.mul(c, x));
  }
  FqElem coeff(const CosetRep& rep) const {
    auto it = terms_.find(rep);
    return it == terms_.end() ? FqElem{0} : it->second;
  }
  std::uint32_t max_ball_index() const {
    std::uint32_t b = 0;
    for (const auto& [rep, x] : terms_) b = std::max(b, rep.ball_index());
    return b;
  }
  static ModuleVec basis(const CosetRep& rep) {
    ModuleVec v;
    v.terms_.emplace(rep, FqElem{1});
    return v;
  }

  friend bool operator==(const ModuleVec&, const ModuleVec&) = default;

 private:
  std::map<CosetRep, FqElem> terms_;
};

inline void to_json(nlohmann::json& j, const ModuleVec& v) {
  j = nlohmann::json::array();
  for (const auto& [rep, c] : v.terms()) {
    nlohmann::json t = rep;
    t["coeff"] = c.v;
    j.push_back(std::move(t));
  }
}

/// Positions of reps with ball index <= t: side 0 then side 1; within a side ball index 0 (one rep),
/// then for each n >= 1 the q^n tail-free reps of depth n followed by the q^n tail reps of depth n-1.
class BallLayout {
 public:
  BallLayout(std::uint32_t q, std::uint32_t t) : q_(q), t_(t) {
    offsets_.push_back(0);
    std::uint64_t total = 1, qn = 1;
    powers_.push_back(1);
    for (std::uint32_t n = 1; n <= t; ++n) {
      offsets_.push_back(total);
      qn *= q;
      powers_.push_back(qn);
      total += 2 * qn;
    }
    powers_.push_back(qn * q);
    side_ = total;
  }

  std::uint32_t q() const { return q_; }
  std::uint32_t depth() const { return t_; }
  std::uint64_t side_size() const { return side_; }
  std::uint64_t size() const { return 2 * side_; }

  bool contains(const CosetRep& r) const { return r.ball_index() <= t_; }

  std::uint64_t index(const CosetRep& r) const {
    const std::uint32_t n = r.ball_index();
    if (n > t_) throw std::out_of_range("rep outside the ball");
    std::uint64_t code = 0;
    for (auto d : r.lambda) code = code * q_ + d.v;
    if (r.tail) code = code * q_ + r.tail->v;
    std::uint64_t idx = (r.beta ? side_ : 0) + offsets_[n] + code;
    if (r.tail) idx += powers_[n];
    return idx;
  }

  CosetRep rep(std::uint64_t idx) const {
    if (idx >= size()) throw std::out_of_range("index outside the ball");
    CosetRep r;
    r.beta = idx >= side_;
    if (r.beta) idx -= side_;
    if (idx == 0) return r;
    std::uint32_t n = 1;
    while (n < t_ && idx >= offsets_[n + 1]) ++n;
    idx -= offsets_[n];
    std::vector<FqElem> digits(n);
    const bool tail = idx >= powers_[n];
    if (tail) idx -= powers_[n];
    for (std::uint32_t i = n; i-- > 0;) {
      digits[i] = {static_cast<std::uint32_t>(idx % q_)};
      idx /= q_;
    }
    if (tail) {
      r.tail = digits.back();
      digits.pop_back();
      r.m = n - 1;
    } else {
      r.m = n;
    }
    r.lambda = std::move(digits);
    return r;
  }

  /// First index of ball index n on the given side.
  std::uint64_t sphere_begin(bool beta, std::uint32_t n) const { return (beta ? side_ : 0) + offsets_.at(n); }
  std::uint64_t sphere_size(std::uint32_t n) const { return n == 0 ? 1 : 2 * powers_[n]; }

 private:
  std::uint32_t q_, t_;
  std::uint64_t side_ = 0;
  std::vector<std::uint64_t> offsets_, powers_;
};

class TreeContext {
 public:
  TreeContext(RingPtr ring, std::uint32_t r) : ring_(std::move(ring)), r_(r) {
    if (!ring_) throw ConfigError("missing ring context");
    if (r_ == 0 || r_ >= ring_->field().q() - 1) throw ConfigError("weight r must satisfy 0 < r < q - 1");
  }

  const RingContext& ring() const { return *ring_; }
  const RingPtr& ring_ptr() const { return ring_; }
  const FieldContext& field() const { return ring_->field(); }
  std::uint32_t r() const { return r_; }

  // ---- matrices ----

  GMat2 mat(const LocalInt& a, const LocalInt& b, const LocalInt& c, const LocalInt& d) const {
    return GMat2{{a, b, c, d}, ring_->precision()};
  }
  GMat2 identity() const { return mat(ring_->one(), ring_->zero(), ring_->zero(), ring_->one()); }
  GMat2 beta() const { return mat(ring_->zero(), ring_->one(), ring_->pi_power(1), ring_->zero()); }
  GMat2 alpha() const { return mat(ring_->one(), ring_->zero(), ring_->zero(), ring_->pi_power(1)); }
  GMat2 w() const { return mat(ring_->zero(), ring_->one(), ring_->one(), ring_->zero()); }
  GMat2 upper(const LocalInt& x) const { return mat(ring_->one(), x, ring_->zero(), ring_->one()); }
  GMat2 lower(const LocalInt& x) const { return mat(ring_->one(), ring_->zero(), x, ring_->one()); }
  GMat2 diag(const LocalInt& x, const LocalInt& y) const { return mat(x, ring_->zero(), ring_->zero(), y); }
  GMat2 g0(std::uint32_t n, const LocalInt& lambda) const {
    return mat(ring_->pi_power(n), lambda, ring_->zero(), ring_->one());
  }

  GMat2 mul(const GMat2& x, const GMat2& y) const {
    const RingContext& R = *ring_;
    GMat2 z;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) z.a[2 * i + j] = R.add(R.mul(x(i, 0), y(0, j)), R.mul(x(i, 1), y(1, j)));
    z.prec = std::min(x.prec, y.prec);
    return z;
  }

  /// Equality modulo the common precision.
  bool equal(const GMat2& x, const GMat2& y) const {
    const std::uint32_t pr = std::min(x.prec, y.prec);
    for (int i = 0; i < 4; ++i)
      if (!(ring_->truncate(x.a[i], pr) == ring_->truncate(y.a[i], pr))) return false;
    return true;
  }

  LocalInt lambda_value(const std::vector<FqElem>& digits) const { return ring_->from_digits(digits); }

  GMat2 rep_matrix(const CosetRep& rep) const {
    if (rep.lambda.size() != rep.m) throw std::invalid_argument("lambda must have exactly m digits");
    if (ring_->precision() < rep.ball_index() + 1)
      throw PrecisionError("rep of ball index " + std::to_string(rep.ball_index()) + " at precision " +
                           std::to_string(ring_->precision()));
    GMat2 g = g0(rep.m, lambda_value(rep.lambda));
    if (rep.tail) g = mul(g, mul(upper(ring_->teichmuller_lift(*rep.tail)), w()));
    if (rep.beta) g = mul(beta(), g);
    return g;
  }

  // ---- character and reduction ----

  /// chi_r(k) = dbar^r for k in IZ, after removing the central power of pi.
  FqElem chi_r(const GMat2& k) const {
    const auto s = min_known_valuation(k);
    if (!s) throw PrecisionError("matrix vanishes within precision");
    if (static_cast<std::uint32_t>(*s) >= k.prec) throw PrecisionError("no residue left after removing the centre");
    const RingContext& R = *ring_;
    const FieldContext& F = R.field();
    const FqElem a = R.residue(R.divide_by_pi(k.a[0], *s));
    const FqElem c = R.residue(R.divide_by_pi(k.a[2], *s));
    const FqElem d = R.residue(R.divide_by_pi(k.a[3], *s));
    if (!c.is_zero() || a.is_zero() || d.is_zero()) throw std::invalid_argument("matrix is not in IZ");
    return F.pow(d, r_);
  }

  struct Reduced {
    CosetRep rep;
    FqElem scalar;
  };

  /// g = rep_matrix(rep) * k with k in IZ; scalar = chi_r(k).
  Reduced coset_reduce(const GMat2& g) const {
    if (auto v = vertex(g)) return edge(g, std::move(*v), false);
    const GMat2 h = mul(beta(), g);
    auto v = vertex(h);
    if (!v) throw std::logic_error("coset reduction: beta translate is not on the even side");
    return edge(h, std::move(*v), true);
  }

  ModuleVec act(const GMat2& g, const ModuleVec& v) const {
    ModuleVec out;
    const FieldContext& F = field();
    for (const auto& [rep, c] : v.terms()) {
      const Reduced red = coset_reduce(mul(g, rep_matrix(rep)));
      out.add(F, red.rep, F.mul(c, red.scalar));
    }
    return out;
  }

  /// Left translation by beta. On reps this only flips the side: beta^2 = pi is central.
  ModuleVec beta_translate(const ModuleVec& v) const {
    ModuleVec out;
    for (const auto& [rep, c] : v.terms()) {
      CosetRep flipped = rep;
      flipped.beta = !rep.beta;
      out.add(field(), flipped, c);
    }
    return out;
  }

  // ---- distinguished vectors ----

  /// s_n^k = sum over mu in I_n of mu_{n-1}^k [g0(n, mu), 1]; s_0^0 = [Id, 1].
  ModuleVec make_s(std::uint32_t n, std::uint32_t k) const {
    if (n == 0) {
      if (k != 0) throw std::invalid_argument("s_0^k is only defined for k = 0");
      return ModuleVec::basis(CosetRep::identity());
    }
    ModuleVec out;
    const FieldContext& F = field();
    for_each_digits(n, [&](const std::vector<FqElem>& d) {
      out.add(F, CosetRep{false, n, d, std::nullopt}, F.pow(d.back(), k));
    });
    return out;
  }

  /// t_n^s = sum over mu in I_n of mu_{n-1}^s [g0(n-1, [mu]_{n-1}) u([mu_{n-1}]) w, 1].
  /// t_0^0 is taken to be [beta, 1]: it is the vector for which t_0^0 + s_1^{q-1-r} lies in the
  /// kernel of T_{1,2}.
  ModuleVec make_t(std::uint32_t n, std::uint32_t s) const {
    if (n == 0) {
      if (s != 0) throw std::invalid_argument("t_0^s is only defined for s = 0");
      return ModuleVec::basis(CosetRep::beta_rep());
    }
    ModuleVec out;
    const FieldContext& F = field();
    for_each_digits(n, [&](const std::vector<FqElem>& d) {
      std::vector<FqElem> lam(d.begin(), d.end() - 1);
      out.add(F, CosetRep{false, n - 1, std::move(lam), d.back()}, F.pow(d.back(), s));
    });
    return out;
  }

  // ---- ball and generators ----

  BallLayout layout(std::uint32_t t) const { return BallLayout(field().q(), t); }

  std::vector<CosetRep> ball_basis(std::uint32_t t) const {
    const BallLayout L = layout(t);
    std::vector<CosetRep> out;
    out.reserve(L.size());
    for (std::uint64_t i = 0; i < L.size(); ++i) out.push_back(L.rep(i));
    return out;
  }

  /// Generators of I(1) acting on the ball of radius t: u([b] pi^j), lower([c] pi^{j+1}),
  /// diag(1 + [a] pi^{j+1}, 1) for 0 <= j <= t and a, b, c over an F_p-basis of F_q.
  std::vector<GMat2> igen_set(std::uint32_t t) const {
    std::vector<GMat2> out;
    const RingContext& R = *ring_;
    for (std::uint32_t j = 0; j <= t; ++j)
      for (FqElem b : field().prime_basis()) {
        const LocalInt lift = R.teichmuller_lift(b);
        out.push_back(upper(R.mul(lift, R.pi_power(j))));
        out.push_back(lower(R.mul(lift, R.pi_power(j + 1))));
        out.push_back(diag(R.add(R.one(), R.mul(lift, R.pi_power(j + 1))), R.one()));
      }
    return out;
  }

 private:
  template <class Fn>
  void for_each_digits(std::uint32_t n, Fn&& fn) const {
    const std::uint32_t q = field().q();
    std::vector<FqElem> d(n, FqElem{0});
    while (true) {
      fn(d);
      std::uint32_t i = n;
      while (i > 0) {
        --i;
        if (++d[i].v < q) break;
        d[i].v = 0;
        if (i == 0) return;
      }
      if (n == 0) return;
    }
  }

  /// Valuation if it is below prec, otherwise nullopt (the entry vanishes within precision).
  std::optional<int> known_valuation(const LocalInt& x, std::uint32_t prec) const {
    const int v = ring_->valuation(x);
    if (v == kInfiniteValuation || v >= static_cast<int>(prec)) return std::nullopt;
    return v;
  }

  std::optional<int> min_known_valuation(const GMat2& g) const {
    std::optional<int> best;
    for (const auto& x : g.a)
      if (auto v = known_valuation(x, g.prec); v && (!best || *v < *best)) best = v;
    return best;
  }

  struct Vertex {
    std::uint32_t n;
    std::vector<FqElem> lambda;
  };

  /// Vertex gKZ as g0(n, lambda) KZ when it lies on the even side, nullopt otherwise.
  std::optional<Vertex> vertex(const GMat2& g) const {
    const RingContext& R = *ring_;
    const auto vc = known_valuation(g(1, 0), g.prec);
    const auto vd = known_valuation(g(1, 1), g.prec);
    if (!vc && !vd) throw PrecisionError("bottom row vanishes within precision");
    // column with the smaller bottom valuation plays the role of (B, D)
    const bool swap = !vd || (vc && *vc < *vd);
    const LocalInt& top = swap ? g(0, 0) : g(0, 1);
    const LocalInt& bot = swap ? g(1, 0) : g(1, 1);
    const int b = swap ? *vc : *vd;
    const auto vdet = known_valuation(R.sub(R.mul(g(0, 0), g(1, 1)), R.mul(g(0, 1), g(1, 0))), g.prec);
    if (!vdet) throw PrecisionError("determinant vanishes within precision");
    const auto vb = known_valuation(top, g.prec);
    if (*vdet < 2 * b || (vb && *vb < b)) return std::nullopt;
    const std::uint32_t n = static_cast<std::uint32_t>(*vdet - 2 * b);
    if (n + b > g.prec) throw PrecisionError("vertex digits beyond precision");
    Vertex v{n, {}};
    if (n == 0) return v;
    const LocalInt x = R.mul(R.divide_by_pi(top, b), R.inverse_unit(R.divide_by_pi(bot, b)));
    auto d = R.digits(x);
    d.resize(n);
    v.lambda = std::move(d);
    return v;
  }

  Reduced edge(const GMat2& g, Vertex v, bool beta_side) const {
    const RingContext& R = *ring_;
    const FieldContext& F = R.field();
    const LocalInt lam = lambda_value(v.lambda);
    // adj(g0(n, lambda)) * g = pi^n g0^{-1} g, which lies in pi^s K
    const GMat2 adj = mat(R.one(), R.neg(lam), R.zero(), R.pi_power(v.n));
    const GMat2 M = mul(adj, g);
    const auto s = min_known_valuation(M);
    if (!s || static_cast<std::uint32_t>(*s) >= M.prec) throw PrecisionError("edge residue beyond precision");
    std::array<FqElem, 4> k;
    for (int i = 0; i < 4; ++i) k[i] = R.residue(R.divide_by_pi(M.a[i], *s));
    if (F.sub(F.mul(k[0], k[3]), F.mul(k[1], k[2])).is_zero())
      throw std::logic_error("coset reduction: normalized matrix is not in K");
    CosetRep rep{beta_side, v.n, std::move(v.lambda), std::nullopt};
    if (k[2].is_zero()) return {std::move(rep), F.pow(k[3], r_)};
    // k lies in u([mu]) w I; (u([mu]) w)^{-1} k has (2,2) entry k_12 - mu k_22
    const FqElem mu = F.div(k[0], k[2]);
    rep.tail = mu;
    const FqElem d = F.sub(k[1], F.mul(mu, k[3]));
    return {std::move(rep), F.pow(d, r_)};
  }

  RingPtr ring_;
  std::uint32_t r_;
};

}  // namespace iwahori
