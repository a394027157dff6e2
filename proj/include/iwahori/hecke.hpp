#pragma once

// The Iwahori-Hecke operators on ind_{IZ}^G chi_r
//   T_{-1,0}[g, 1] = sum_{lambda in I_1} [g g0(1, lambda), 1]
//   T_{1,2}[g, 1]  = sum_{lambda in I_1} [g beta u(lambda) w, 1]
// as sparse matrices V_t -> V_{t+1} on balls of the tree, their kernels, and the quotient by the
// sum of the kernels at a finite horizon.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iwahori/exactla.hpp"
#include "iwahori/gf.hpp"
#include "iwahori/localring.hpp"
#include "iwahori/tree.hpp"

namespace iwahori {

enum class Op { Minus, Plus };

inline const char* op_name(Op op) { return op == Op::Minus ? "T_minus" : "T_plus"; }

struct FieldParams {
  std::uint32_t p = 3, f = 1, e = 1, r = 1;
  std::vector<std::uint32_t> modulus;   // empty: default
  std::vector<std::int64_t> eisenstein;  // empty: X^e - p
};

struct KernelPair {
  SubspaceBasis minus, plus, sum;
};

/// Precision that keeps every reduction on balls of radius <= depth + 1 decidable.
inline std::uint32_t precision_for_depth(std::uint32_t depth, std::uint32_t e) { return 2 * (depth + 2) + e + 2; }

class HeckeContext {
 public:
  /// max_depth: largest t for which operators V_t -> V_{t+1} will be built.
  HeckeContext(const FieldParams& params, std::uint32_t max_depth)
      : params_(params), max_depth_(max_depth) {
    auto F = std::make_shared<FieldContext>(params.p, params.f,
                                            params.modulus.empty() ? std::nullopt
                                                                   : std::optional<std::vector<std::uint32_t>>(params.modulus));
    auto R = std::make_shared<RingContext>(F, params.e, precision_for_depth(max_depth, params.e), params.eisenstein);
    tree_ = std::make_unique<TreeContext>(R, params.r);
    const RingContext& ring = *R;
    for (FqElem l : F->elements()) {
      const LocalInt lift = ring.teichmuller_lift(l);
      minus_factors_.push_back(tree_->g0(1, lift));
      plus_factors_.push_back(tree_->mul(tree_->mul(tree_->beta(), tree_->upper(lift)), tree_->w()));
    }
    if (const char* dir = std::getenv("IWAHORI_CACHE_DIR"); dir && *dir) cache_dir_ = dir;
  }

  const TreeContext& tree() const { return *tree_; }
  const FieldContext& field() const { return tree_->field(); }
  const FieldParams& params() const { return params_; }
  std::uint32_t q() const { return field().q(); }
  std::uint32_t r() const { return params_.r; }
  std::uint32_t max_depth() const { return max_depth_; }

  /// Digits of r in base p all in (0, p-1), and 2 < r < p-3 when f = 1.
  bool in_hypotheses() const {
    const auto d = digits_base_p(params_.r, params_.p).digits;
    if (d.size() != params_.f) return false;
    for (auto x : d)
      if (x == 0 || x == params_.p - 1) return false;
    if (params_.f == 1 && !(2 < params_.r && params_.r + 3 < params_.p)) return false;
    return true;
  }

  void set_cache_dir(std::string dir) { cache_dir_ = std::move(dir); }

  // ---- operators on vectors ----

  ModuleVec apply(Op op, const ModuleVec& v) const {
    ModuleVec out;
    const FieldContext& F = field();
    const auto& factors = op == Op::Minus ? minus_factors_ : plus_factors_;
    for (const auto& [rep, c] : v.terms()) {
      const GMat2 g = tree_->rep_matrix(rep);
      for (const auto& h : factors) {
        const auto red = tree_->coset_reduce(tree_->mul(g, h));
        out.add(F, red.rep, F.mul(c, red.scalar));
      }
    }
    return out;
  }
  ModuleVec T_minus(const ModuleVec& v) const { return apply(Op::Minus, v); }
  ModuleVec T_plus(const ModuleVec& v) const { return apply(Op::Plus, v); }

  // ---- coordinates ----

  SparseVec coords(const ModuleVec& v, std::uint32_t t) const {
    const BallLayout L = tree_->layout(t);
    SparseVec out;
    for (const auto& [rep, c] : v.terms()) {
      if (!L.contains(rep)) throw std::out_of_range("vector support exceeds the ball of radius " + std::to_string(t));
      out.emplace_back(L.index(rep), c);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  ModuleVec vec(const SparseVec& x, std::uint32_t t) const {
    const BallLayout L = tree_->layout(t);
    ModuleVec v;
    for (auto [i, c] : x) v.add(field(), L.rep(i), c);
    return v;
  }

  // ---- operator matrices ----

  /// Matrix of op from V_t to V_{t+1} in ball coordinates.
  const SparseMat& matrix(Op op, std::uint32_t t) const {
    if (t > max_depth_) throw PrecisionError("depth " + std::to_string(t) + " beyond configured maximum " + std::to_string(max_depth_));
    std::lock_guard lock(mu_);
    auto key = std::make_pair(op, t);
    if (auto it = matrices_.find(key); it != matrices_.end()) return it->second;
    SparseMat m;
    if (!load_cached(op, t, m)) {
      m = build_matrix(op, t);
      store_cached(op, t, m);
    }
    return matrices_.emplace(key, std::move(m)).first->second;
  }

  const SubspaceBasis& kernel(Op op, std::uint32_t t) const {
    const SparseMat& m = matrix(op, t);
    std::lock_guard lock(mu_);
    auto key = std::make_pair(op, t);
    if (auto it = kernels_.find(key); it != kernels_.end()) return it->second;
    return kernels_.emplace(key, nullspace(field(), m)).first->second;
  }

  /// Ker T_{-1,0} and Ker T_{1,2} restricted to V_t, and their sum.
  KernelPair kernel_pair(std::uint32_t t) const {
    KernelPair kp{kernel(Op::Minus, t), kernel(Op::Plus, t), {}};
    kp.sum = SubspaceBasis::sum(kp.minus, kp.plus);
    return kp;
  }

  const SubspaceBasis& kernel_sum(std::uint32_t t) const {
    const SubspaceBasis& a = kernel(Op::Minus, t);
    const SubspaceBasis& b = kernel(Op::Plus, t);
    std::lock_guard lock(mu_);
    if (auto it = sums_.find(t); it != sums_.end()) return it->second;
    return sums_.emplace(t, SubspaceBasis::sum(a, b)).first->second;
  }

  /// Dimension of Ker(op) restricted to V_n minus that restricted to V_{n-1}, for n = 0..t.
  std::vector<std::size_t> kernel_dims_per_sphere(Op op, std::uint32_t t) const {
    std::vector<std::size_t> out;
    std::size_t prev = 0;
    for (std::uint32_t n = 0; n <= t; ++n) {
      const std::size_t d = kernel(op, n).dim();
      out.push_back(d - prev);
      prev = d;
    }
    return out;
  }

  // ---- predicted kernel generators ----

  /// Exponents i with sum_mu mu^i [child_mu] in the kernel: for T_{1,2} (fans of tail-free reps)
  /// i <= q-2-r or (i > q-1-r and C(r, q-1-i) = 0 mod p); for T_{-1,0} (fans of tail reps)
  /// i <= r-1 or (i > r and C(q-1-r, q-1-i) = 0 mod p).
  std::vector<std::uint32_t> fan_exponents(Op op) const {
    const std::uint32_t qm1 = q() - 1, r = params_.r, p = params_.p;
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 0; i <= qm1; ++i) {
      if (op == Op::Plus) {
        if (i + 2 + r <= q() || (i > qm1 - r && lucas_binom(r, qm1 - i, p) == 0)) out.push_back(i);
      } else {
        if (i + 1 <= r || (i > r && lucas_binom(qm1 - r, qm1 - i, p) == 0)) out.push_back(i);
      }
    }
    return out;
  }

  /// Exponents of the type-(c) generators only (those beyond the mixed exponent).
  std::vector<std::uint32_t> exceptional_exponents(Op op) const {
    std::vector<std::uint32_t> out;
    const std::uint32_t pivot = op == Op::Plus ? q() - 1 - params_.r : params_.r;
    for (auto i : fan_exponents(op))
      if (i > pivot) out.push_back(i);
    return out;
  }

  /// Translates to every fan of V_t of the generators of Ker(op): pure fans with the exponents
  /// above, and the mixed generator (fan with the critical exponent plus the parent term).
  std::vector<ModuleVec> predicted_kernel_vectors(Op op, std::uint32_t t) const {
    std::vector<ModuleVec> out;
    const FieldContext& F = field();
    const auto exps = fan_exponents(op);
    const std::uint32_t crit = op == Op::Plus ? q() - 1 - params_.r : params_.r;
    for (bool beta : {false, true}) {
      for (std::uint32_t n = 1; n <= t; ++n) {
        for_each_prefix(n - 1, [&](const std::vector<FqElem>& lam) {
          auto fan = [&](std::uint32_t i) {
            ModuleVec v;
            for (FqElem mu : F.elements()) {
              CosetRep rep = op == Op::Plus ? CosetRep{beta, n, lam, std::nullopt} : CosetRep{beta, n - 1, lam, mu};
              if (op == Op::Plus) rep.lambda.push_back(mu);
              v.add(F, rep, F.pow(mu, i));
            }
            return v;
          };
          for (auto i : exps) out.push_back(fan(i));
          ModuleVec mixed = fan(crit);
          if (op == Op::Plus) {
            // parent edge g0(n-1, lambda) beta, reduced
            CosetRep parent = n == 1 ? CosetRep{!beta, 0, {}, std::nullopt}
                                     : CosetRep{beta, n - 2, std::vector<FqElem>(lam.begin(), lam.end() - 1), lam.back()};
            mixed.add(F, parent, F.one());
          } else {
            const FqElem sign = params_.r % 2 == 0 ? F.one() : F.neg(F.one());
            mixed.add(F, CosetRep{beta, n - 1, lam, std::nullopt}, sign);
          }
          out.push_back(std::move(mixed));
        });
      }
    }
    return out;
  }

  SubspaceBasis span(const std::vector<ModuleVec>& vs, std::uint32_t t) const {
    SubspaceBasis s(tree_->layout(t).size(), &field());
    for (const auto& v : vs) s.insert(coords(v, t));
    return s;
  }

  // ---- quotient and image search ----

  /// Normal form of v in V_t / (Ker T_{-1,0} + Ker T_{1,2}) restricted to V_horizon.
  SparseVec quotient_reduce(const ModuleVec& v, std::uint32_t horizon) const {
    return kernel_sum(horizon).reduce(coords(v, horizon));
  }

  /// u with support in V_m and op(u) = v, or nullopt when v is not in op(V_m).
  std::optional<ModuleVec> image_search(const ModuleVec& v, std::uint32_t m, Op op) const {
    if (v.empty()) return ModuleVec{};
    const auto x = solve(field(), matrix(op, m), coords(v, m + 1));
    if (!x) return std::nullopt;
    return vec(*x, m);
  }

  std::string cache_key(Op op, std::uint32_t t) const {
    std::ostringstream os;
    os << "p=" << params_.p << ";f=" << params_.f << ";e=" << params_.e << ";r=" << params_.r << ";mod=";
    for (auto c : field().modulus()) os << c << ',';
    os << ";eis=";
    for (auto c : tree_->ring().eisenstein()) os << c << ',';
    os << ";N=" << tree_->ring().precision() << ";t=" << t << ";op=" << op_name(op) << ";v=1";
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : os.str()) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    std::ostringstream name;
    name << std::hex << h;
    return name.str();
  }

 private:
  template <class Fn>
  void for_each_prefix(std::uint32_t n, Fn&& fn) const {
    const std::uint32_t qq = q();
    std::vector<FqElem> d(n, FqElem{0});
    while (true) {
      fn(d);
      std::uint32_t i = n;
      bool done = true;
      while (i > 0) {
        --i;
        if (++d[i].v < qq) {
          done = false;
          break;
        }
        d[i].v = 0;
      }
      if (done) return;
    }
  }

  SparseMat build_matrix(Op op, std::uint32_t t) const {
    const BallLayout from = tree_->layout(t), to = tree_->layout(t + 1);
    const FieldContext& F = field();
    const auto& factors = op == Op::Minus ? minus_factors_ : plus_factors_;
    SparseMat m;
    m.rows = to.size();
    m.columns.resize(from.size());
    for (std::uint64_t j = 0; j < from.size(); ++j) {
      const GMat2 g = tree_->rep_matrix(from.rep(j));
      std::map<std::uint64_t, FqElem> col;
      for (const auto& h : factors) {
        const auto red = tree_->coset_reduce(tree_->mul(g, h));
        // support locality: the image of V_t must land in V_{t+1}
        if (!to.contains(red.rep)) throw std::logic_error("operator image leaves the ball of radius t+1");
        auto& x = col[to.index(red.rep)];
        x = F.add(x, red.scalar);
      }
      for (auto [i, x] : col)
        if (!x.is_zero()) m.columns[j].emplace_back(i, x);
    }
    return m;
  }

  std::optional<std::filesystem::path> cache_path(Op op, std::uint32_t t) const {
    if (cache_dir_.empty()) return std::nullopt;
    return std::filesystem::path(cache_dir_) / ("op-" + cache_key(op, t) + ".bin");
  }

  // Layout: "IWHK" u32 version, u64 rows, u64 cols, then per column u64 nnz and nnz x (u64 row, u32 value).
  bool load_cached(Op op, std::uint32_t t, SparseMat& m) const {
    auto path = cache_path(op, t);
    if (!path) return false;
    std::ifstream is(*path, std::ios::binary);
    if (!is) return false;
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t rows = 0, cols = 0;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&version), sizeof version);
    is.read(reinterpret_cast<char*>(&rows), sizeof rows);
    is.read(reinterpret_cast<char*>(&cols), sizeof cols);
    const BallLayout from = tree_->layout(t), to = tree_->layout(t + 1);
    if (!is || std::string(magic, 4) != "IWHK" || version != 1 || rows != to.size() || cols != from.size()) return false;
    SparseMat out;
    out.rows = rows;
    out.columns.resize(cols);
    for (auto& c : out.columns) {
      std::uint64_t nnz = 0;
      is.read(reinterpret_cast<char*>(&nnz), sizeof nnz);
      if (!is || nnz > rows) return false;
      c.resize(nnz);
      for (auto& [i, x] : c) {
        is.read(reinterpret_cast<char*>(&i), sizeof i);
        is.read(reinterpret_cast<char*>(&x.v), sizeof x.v);
      }
    }
    if (!is) return false;
    m = std::move(out);
    return true;
  }

  void store_cached(Op op, std::uint32_t t, const SparseMat& m) const {
    auto path = cache_path(op, t);
    if (!path) return;
    std::error_code ec;
    std::filesystem::create_directories(path->parent_path(), ec);
    const auto tmp = path->string() + ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary);
      if (!os) return;
      const std::uint32_t version = 1;
      const std::uint64_t cols = m.cols();
      os.write("IWHK", 4);
      os.write(reinterpret_cast<const char*>(&version), sizeof version);
      os.write(reinterpret_cast<const char*>(&m.rows), sizeof m.rows);
      os.write(reinterpret_cast<const char*>(&cols), sizeof cols);
      for (const auto& c : m.columns) {
        const std::uint64_t nnz = c.size();
        os.write(reinterpret_cast<const char*>(&nnz), sizeof nnz);
        for (const auto& [i, x] : c) {
          os.write(reinterpret_cast<const char*>(&i), sizeof i);
          os.write(reinterpret_cast<const char*>(&x.v), sizeof x.v);
        }
      }
    }
    std::filesystem::rename(tmp, *path, ec);
  }

  FieldParams params_;
  std::uint32_t max_depth_;
  std::unique_ptr<TreeContext> tree_;
  std::vector<GMat2> minus_factors_, plus_factors_;
  std::string cache_dir_;

  mutable std::mutex mu_;
  mutable std::map<std::pair<Op, std::uint32_t>, SparseMat> matrices_;
  mutable std::map<std::pair<Op, std::uint32_t>, SubspaceBasis> kernels_;
  mutable std::map<std::uint32_t, SubspaceBasis> sums_;
};

}  // namespace iwahori
