#pragma once

// Exact linear algebra over F_q: dense RREF/nullspace/solve, a sparse echelon subspace carrier,
// and block elimination for sparse operator matrices whose columns split into small connected
// components.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iwahori/errors.hpp"
#include "iwahori/gf.hpp"

namespace iwahori {

/// Sorted by index, no zero entries.
using SparseVec = std::vector<std::pair<std::uint64_t, FqElem>>;

struct DenseMat {
  std::size_t rows = 0, cols = 0;
  std::vector<FqElem> data;

  DenseMat() = default;
  DenseMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, FqElem{0}) {}

  FqElem& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  FqElem operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static DenseMat identity(std::size_t n) {
    DenseMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = FqElem{1};
    return m;
  }
  friend bool operator==(const DenseMat&, const DenseMat&) = default;
};

struct Rref {
  DenseMat mat;
  std::vector<std::size_t> pivots;
  std::size_t rank() const { return pivots.size(); }
};

/// Reduced row echelon form; pivot in each row is the first nonzero column.
inline Rref rref(const FieldContext& F, DenseMat m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols && row < m.rows; ++col) {
    std::size_t sel = row;
    while (sel < m.rows && m(sel, col).is_zero()) ++sel;
    if (sel == m.rows) continue;
    if (sel != row)
      for (std::size_t j = 0; j < m.cols; ++j) std::swap(m(sel, j), m(row, j));
    const FqElem inv = F.inv(m(row, col));
    for (std::size_t j = col; j < m.cols; ++j) m(row, j) = F.mul(m(row, j), inv);
    for (std::size_t i = 0; i < m.rows; ++i) {
      if (i == row || m(i, col).is_zero()) continue;
      const FqElem c = m(i, col);
      for (std::size_t j = col; j < m.cols; ++j)
        if (!m(row, j).is_zero()) m(i, j) = F.sub(m(i, j), F.mul(c, m(row, j)));
    }
    pivots.push_back(col);
    ++row;
  }
  return {std::move(m), std::move(pivots)};
}

/// Basis of {x : m x = 0}, one vector per free column.
inline std::vector<std::vector<FqElem>> nullspace_vectors(const FieldContext& F, const DenseMat& m) {
  const Rref R = rref(F, m);
  std::vector<bool> is_pivot(m.cols, false);
  for (auto c : R.pivots) is_pivot[c] = true;
  std::vector<std::vector<FqElem>> out;
  for (std::size_t free = 0; free < m.cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<FqElem> x(m.cols, FqElem{0});
    x[free] = FqElem{1};
    for (std::size_t i = 0; i < R.rank(); ++i) x[R.pivots[i]] = F.neg(R.mat(i, free));
    out.push_back(std::move(x));
  }
  return out;
}

inline std::vector<FqElem> apply(const FieldContext& F, const DenseMat& m, const std::vector<FqElem>& x) {
  if (x.size() != m.cols) throw ContextMismatch("vector length does not match matrix columns");
  std::vector<FqElem> y(m.rows, FqElem{0});
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      if (!m(i, j).is_zero() && !x[j].is_zero()) y[i] = F.add(y[i], F.mul(m(i, j), x[j]));
  return y;
}

/// One solution of m x = b, or nullopt when inconsistent.
inline std::optional<std::vector<FqElem>> solve(const FieldContext& F, const DenseMat& m, const std::vector<FqElem>& b) {
  if (b.size() != m.rows) throw ContextMismatch("right-hand side length does not match matrix rows");
  DenseMat aug(m.rows, m.cols + 1);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) aug(i, j) = m(i, j);
    aug(i, m.cols) = b[i];
  }
  const Rref R = rref(F, std::move(aug));
  std::vector<FqElem> x(m.cols, FqElem{0});
  for (std::size_t i = 0; i < R.rank(); ++i) {
    if (R.pivots[i] == m.cols) return std::nullopt;
    x[R.pivots[i]] = R.mat(i, m.cols);
  }
  return x;
}

namespace detail {

/// Dense scratch accumulator reused across reductions on the same thread.
struct Scratch {
  std::vector<FqElem> acc;
  std::vector<std::uint64_t> touched;
  std::vector<bool> mark;

  void ensure(std::uint64_t n) {
    if (acc.size() < n) {
      acc.assign(n, FqElem{0});
      mark.assign(n, false);
    }
  }
  void touch(std::uint64_t i) {
    if (!mark[i]) {
      mark[i] = true;
      touched.push_back(i);
    }
  }
  void clear() {
    for (auto i : touched) {
      acc[i] = FqElem{0};
      mark[i] = false;
    }
    touched.clear();
  }
};

inline Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace detail

inline SparseVec to_sparse(const std::vector<FqElem>& x) {
  SparseVec v;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!x[i].is_zero()) v.emplace_back(i, x[i]);
  return v;
}

inline SparseVec scale(const FieldContext& F, const SparseVec& v, FqElem c) {
  SparseVec out;
  if (c.is_zero()) return out;
  out.reserve(v.size());
  for (auto [i, x] : v) out.emplace_back(i, F.mul(c, x));
  return out;
}

/// a + c b
inline SparseVec axpy(const FieldContext& F, const SparseVec& a, const SparseVec& b, FqElem c = FqElem{1}) {
  SparseVec out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      const FqElem y = F.mul(c, b[j].second);
      if (!y.is_zero()) out.emplace_back(b[j].first, y);
      ++j;
    } else {
      const FqElem y = F.add(a[i].second, F.mul(c, b[j].second));
      if (!y.is_zero()) out.emplace_back(a[i].first, y);
      ++i, ++j;
    }
  }
  return out;
}

/// Subspace of F_q^ambient held as semi-echelon rows: each row has a distinct pivot, its first
/// nonzero coordinate, normalized to 1.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;
  explicit SubspaceBasis(std::uint64_t ambient, const FieldContext* F) : ambient_(ambient), F_(F) {}

  std::uint64_t ambient() const { return ambient_; }
  std::size_t dim() const { return rows_.size(); }
  const std::vector<SparseVec>& rows() const { return rows_; }
  const FieldContext& field() const { return *F_; }

  /// Inserts v; returns false when v was already in the span.
  bool insert(const SparseVec& v) {
    SparseVec r = reduce(v);
    if (r.empty()) return false;
    const FqElem inv = F_->inv(r.front().second);
    for (auto& [i, x] : r) x = F_->mul(x, inv);
    pivot_row_.emplace(r.front().first, rows_.size());
    rows_.push_back(std::move(r));
    return true;
  }

  /// Residual of v after eliminating every pivot coordinate. Zero iff v is in the span, and equal
  /// for vectors that agree modulo the span, so it serves as a normal form in the quotient.
  SparseVec reduce(const SparseVec& v) const {
    check_indices(v);
    auto& S = detail::scratch();
    S.ensure(ambient_);
    std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> heap;
    for (auto [i, x] : v) {
      S.acc[i] = F_->add(S.acc[i], x);
      S.touch(i);
      heap.push(i);
    }
    SparseVec out;
    std::uint64_t last = ~std::uint64_t{0};
    while (!heap.empty()) {
      const std::uint64_t i = heap.top();
      heap.pop();
      if (i == last) continue;
      last = i;
      const FqElem c = S.acc[i];
      if (c.is_zero()) continue;
      auto it = pivot_row_.find(i);
      if (it == pivot_row_.end()) {
        out.emplace_back(i, c);
        continue;
      }
      for (auto [j, x] : rows_[it->second]) {
        S.acc[j] = F_->sub(S.acc[j], F_->mul(c, x));
        S.touch(j);
        if (j != i) heap.push(j);
      }
    }
    S.clear();
    return out;
  }

  bool member(const SparseVec& v) const { return reduce(v).empty(); }

  bool is_pivot(std::uint64_t i) const { return pivot_row_.count(i) != 0; }

  static SubspaceBasis sum(const SubspaceBasis& a, const SubspaceBasis& b) {
    a.check_same(b);
    SubspaceBasis s = a;
    for (const auto& r : b.rows_) s.insert(r);
    return s;
  }

  /// Zassenhaus: rows (x, x) for x in a and (y, 0) for y in b; rows with vanishing first half
  /// carry the intersection in their second half.
  static SubspaceBasis intersect(const SubspaceBasis& a, const SubspaceBasis& b) {
    a.check_same(b);
    const std::uint64_t n = a.ambient_;
    SubspaceBasis z(2 * n, a.F_);
    for (const auto& r : a.rows_) {
      SparseVec d = r;
      for (auto [i, x] : r) d.emplace_back(i + n, x);
      z.insert(d);
    }
    for (const auto& r : b.rows_) z.insert(r);
    SubspaceBasis out(n, a.F_);
    for (const auto& r : z.rows_) {
      if (r.front().first < n) continue;
      SparseVec half;
      for (auto [i, x] : r) half.emplace_back(i - n, x);
      out.insert(half);
    }
    return out;
  }

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "row,index,value\n";
    for (std::size_t r = 0; r < rows_.size(); ++r)
      for (auto [i, x] : rows_[r]) os << r << ',' << i << ',' << x.v << '\n';
  }

 private:
  void check_indices(const SparseVec& v) const {
    if (!v.empty() && v.back().first >= ambient_) throw ContextMismatch("vector index outside the ambient space");
  }
  void check_same(const SubspaceBasis& o) const {
    if (ambient_ != o.ambient_ || F_ != o.F_) throw ContextMismatch("subspaces live in different ambient spaces");
  }

  std::uint64_t ambient_ = 0;
  const FieldContext* F_ = nullptr;
  std::vector<SparseVec> rows_;
  std::unordered_map<std::uint64_t, std::size_t> pivot_row_;
};

/// Column-major sparse matrix: columns[j] lists the nonzero (row, value) pairs of column j.
struct SparseMat {
  std::uint64_t rows = 0;
  std::vector<SparseVec> columns;

  std::uint64_t cols() const { return columns.size(); }

  SparseVec apply(const FieldContext& F, const SparseVec& x) const {
    std::unordered_map<std::uint64_t, FqElem> acc;
    for (auto [j, c] : x)
      for (auto [i, y] : columns.at(j)) acc[i] = F.add(acc[i], F.mul(c, y));
    SparseVec out;
    for (auto [i, y] : acc)
      if (!y.is_zero()) out.emplace_back(i, y);
    std::sort(out.begin(), out.end());
    return out;
  }

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "row,col,value\n";
    for (std::size_t j = 0; j < columns.size(); ++j)
      for (auto [i, x] : columns[j]) os << i << ',' << j << ',' << x.v << '\n';
  }
};

/// Connected components of the bipartite row/column incidence graph of a sparse matrix.
class ColumnBlocks {
 public:
  explicit ColumnBlocks(const SparseMat& m) : parent_(m.cols()) {
    std::iota(parent_.begin(), parent_.end(), std::uint64_t{0});
    std::unordered_map<std::uint64_t, std::uint64_t> first_col;
    for (std::uint64_t j = 0; j < m.cols(); ++j)
      for (auto [i, x] : m.columns[j]) {
        auto [it, fresh] = first_col.try_emplace(i, j);
        if (!fresh) unite(it->second, j);
      }
    std::unordered_map<std::uint64_t, std::size_t> block_of_root;
    for (std::uint64_t j = 0; j < m.cols(); ++j) {
      auto [it, fresh] = block_of_root.try_emplace(find(j), blocks_.size());
      if (fresh) blocks_.emplace_back();
      blocks_[it->second].push_back(j);
    }
    for (const auto& [i, j] : first_col) block_of_row_[i] = block_of_root.at(find(j));
  }

  const std::vector<std::vector<std::uint64_t>>& blocks() const { return blocks_; }
  std::optional<std::size_t> block_of_row(std::uint64_t i) const {
    auto it = block_of_row_.find(i);
    if (it == block_of_row_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t largest() const {
    std::size_t b = 0;
    for (const auto& x : blocks_) b = std::max(b, x.size());
    return b;
  }

 private:
  std::uint64_t find(std::uint64_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::uint64_t a, std::uint64_t b) {
    a = find(a), b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

  std::vector<std::uint64_t> parent_;
  std::vector<std::vector<std::uint64_t>> blocks_;
  std::unordered_map<std::uint64_t, std::size_t> block_of_row_;
};

namespace detail {

/// Dense submatrix of m on the given columns and on the rows they touch (row order returned).
inline DenseMat block_matrix(const SparseMat& m, const std::vector<std::uint64_t>& cols,
                             std::vector<std::uint64_t>& rows_out) {
  rows_out.clear();
  for (auto j : cols)
    for (auto [i, x] : m.columns[j]) rows_out.push_back(i);
  std::sort(rows_out.begin(), rows_out.end());
  rows_out.erase(std::unique(rows_out.begin(), rows_out.end()), rows_out.end());
  DenseMat d(rows_out.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (auto [i, x] : m.columns[cols[c]]) {
      const auto r = std::lower_bound(rows_out.begin(), rows_out.end(), i) - rows_out.begin();
      d(r, c) = x;
    }
  return d;
}

/// Nullspace of the columns in `cols` by sparse elimination with an identity tail appended.
inline std::vector<SparseVec> sparse_dependencies(const FieldContext& F, const SparseMat& m,
                                                  const std::vector<std::uint64_t>& cols) {
  SubspaceBasis z(m.rows + cols.size(), &F);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    SparseVec v = m.columns[cols[c]];
    v.emplace_back(m.rows + c, FqElem{1});
    z.insert(v);
  }
  std::vector<SparseVec> out;
  for (const auto& r : z.rows()) {
    if (r.front().first < m.rows) continue;
    SparseVec x;
    for (auto [i, y] : r) x.emplace_back(cols[i - m.rows], y);
    std::sort(x.begin(), x.end());
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace detail

/// Kernel of m, eliminating each connected block on its own. Blocks with more columns than
/// dense_threshold fall back to sparse elimination.
inline SubspaceBasis nullspace(const FieldContext& F, const SparseMat& m, std::size_t dense_threshold = 2000) {
  SubspaceBasis ker(m.cols(), &F);
  const ColumnBlocks blocks(m);
  std::vector<std::uint64_t> rows;
  for (const auto& cols : blocks.blocks()) {
    if (cols.size() > dense_threshold) {
      for (auto& v : detail::sparse_dependencies(F, m, cols)) ker.insert(v);
      continue;
    }
    const DenseMat d = detail::block_matrix(m, cols, rows);
    for (const auto& x : nullspace_vectors(F, d)) {
      SparseVec v;
      for (std::size_t c = 0; c < cols.size(); ++c)
        if (!x[c].is_zero()) v.emplace_back(cols[c], x[c]);
      ker.insert(v);
    }
  }
  return ker;
}

inline SubspaceBasis nullspace(const FieldContext& F, const DenseMat& m) {
  SubspaceBasis ker(m.cols, &F);
  for (const auto& x : nullspace_vectors(F, m)) ker.insert(to_sparse(x));
  return ker;
}

/// One solution of m x = b restricted to the blocks b touches, or nullopt when inconsistent.
inline std::optional<SparseVec> solve(const FieldContext& F, const SparseMat& m, const SparseVec& b) {
  if (!b.empty() && b.back().first >= m.rows) throw ContextMismatch("right-hand side outside the row space");
  const ColumnBlocks blocks(m);
  std::unordered_map<std::size_t, SparseVec> rhs;
  for (auto [i, x] : b) {
    auto blk = blocks.block_of_row(i);
    if (!blk) return std::nullopt;
    rhs[*blk].emplace_back(i, x);
  }
  SparseVec sol;
  std::vector<std::uint64_t> rows;
  for (auto& [blk, part] : rhs) {
    const auto& cols = blocks.blocks()[blk];
    const DenseMat d = detail::block_matrix(m, cols, rows);
    std::vector<FqElem> rb(rows.size(), FqElem{0});
    for (auto [i, x] : part) rb[std::lower_bound(rows.begin(), rows.end(), i) - rows.begin()] = x;
    auto x = solve(F, d, rb);
    if (!x) return std::nullopt;
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (!(*x)[c].is_zero()) sol.emplace_back(cols[c], (*x)[c]);
  }
  std::sort(sol.begin(), sol.end());
  return sol;
}

}  // namespace iwahori
