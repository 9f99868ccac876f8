#include "bpqm/gf2.hpp"

#include <bit>
#include <algorithm>

namespace bpqm::gf2 {

namespace {

std::uint64_t vec_mask(const BitVector& x) {
  std::uint64_t m = 0;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x.bits[j]) m |= std::uint64_t{1} << j;
  return m;
}

int parity64(std::uint64_t v) { return std::popcount(v) & 1; }

}  // namespace

BitVector BitMatrix::mul(const BitVector& x) const {
  if (static_cast<int>(x.size()) != cols_) fail(Errc::WidthMismatch, "matrix-vector size mismatch");
  const std::uint64_t xm = vec_mask(x);
  BitVector out(static_cast<std::size_t>(rows_));
  for (int r = 0; r < rows_; ++r) out[static_cast<std::size_t>(r)] = static_cast<std::uint8_t>(parity64(row_[static_cast<std::size_t>(r)] & xm));
  return out;
}

BitVector BitMatrix::mul_left(const BitVector& u) const {
  if (static_cast<int>(u.size()) != rows_) fail(Errc::WidthMismatch, "vector-matrix size mismatch");
  std::uint64_t acc = 0;
  for (int r = 0; r < rows_; ++r)
    if (u[static_cast<std::size_t>(r)]) acc ^= row_[static_cast<std::size_t>(r)];
  BitVector out(static_cast<std::size_t>(cols_));
  for (int c = 0; c < cols_; ++c) out[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>((acc >> c) & 1u);
  return out;
}

BitMatrix BitMatrix::mul(const BitMatrix& b) const {
  if (cols_ != b.rows_) fail(Errc::WidthMismatch, "matrix-matrix size mismatch");
  BitMatrix out(rows_, b.cols_);
  for (int r = 0; r < rows_; ++r) {
    std::uint64_t acc = 0;
    std::uint64_t row = row_[static_cast<std::size_t>(r)];
    while (row) {
      const int j = std::countr_zero(row);
      row &= row - 1;
      acc ^= b.row_[static_cast<std::size_t>(j)];
    }
    out.row_[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

BitMatrix BitMatrix::transpose() const {
  BitMatrix out(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      if (get(r, c)) out.set(c, r, 1);
  return out;
}

BitMatrix BitMatrix::vstack(const BitMatrix& below) const {
  if (cols_ != below.cols_ && below.rows_ != 0) fail(Errc::WidthMismatch, "vstack column mismatch");
  BitMatrix out(rows_ + below.rows_, cols_);
  for (int r = 0; r < rows_; ++r) out.row_[static_cast<std::size_t>(r)] = row_[static_cast<std::size_t>(r)];
  for (int r = 0; r < below.rows_; ++r) out.row_[static_cast<std::size_t>(rows_ + r)] = below.row_[static_cast<std::size_t>(r)];
  return out;
}

BitMatrix BitMatrix::col_slice(int c0, int c1) const {
  if (c0 < 0 || c1 < c0 || c1 > cols_) fail(Errc::BadInput, "bad column slice");
  BitMatrix out(rows_, c1 - c0);
  for (int r = 0; r < rows_; ++r) out.row_[static_cast<std::size_t>(r)] = (row_[static_cast<std::size_t>(r)] >> c0) & ((c1 - c0 == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (c1 - c0)) - 1));
  return out;
}

SpanInfo row_span(const BitMatrix& a, int r) {
  const std::uint64_t m = a.row_mask(r);
  if (m == 0) fail(Errc::BadInput, "span of a zero row is undefined");
  return SpanInfo{std::countr_zero(m) + 1, 64 - std::countl_zero(m)};
}

int rank(const BitMatrix& a) {
  std::vector<std::uint64_t> rows;
  rows.reserve(static_cast<std::size_t>(a.rows()));
  for (int r = 0; r < a.rows(); ++r) rows.push_back(a.row_mask(r));
  int rk = 0;
  for (int c = 0; c < a.cols(); ++c) {
    const std::uint64_t bit = std::uint64_t{1} << c;
    int pivot = -1;
    for (int r = rk; r < a.rows(); ++r)
      if (rows[static_cast<std::size_t>(r)] & bit) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(rows[static_cast<std::size_t>(pivot)], rows[static_cast<std::size_t>(rk)]);
    for (int r = 0; r < a.rows(); ++r)
      if (r != rk && (rows[static_cast<std::size_t>(r)] & bit)) rows[static_cast<std::size_t>(r)] ^= rows[static_cast<std::size_t>(rk)];
    ++rk;
  }
  return rk;
}

BitMatrix invert(const BitMatrix& a) {
  if (a.rows() != a.cols()) fail(Errc::BadInput, "invert requires a square matrix");
  const int n = a.rows();
  // Gauss-Jordan on [A | I]
  std::vector<std::uint64_t> left, right;
  for (int r = 0; r < n; ++r) {
    left.push_back(a.row_mask(r));
    right.push_back(std::uint64_t{1} << r);
  }
  for (int c = 0; c < n; ++c) {
    const std::uint64_t bit = std::uint64_t{1} << c;
    int pivot = -1;
    for (int r = c; r < n; ++r)
      if (left[static_cast<std::size_t>(r)] & bit) {
        pivot = r;
        break;
      }
    if (pivot < 0) fail(Errc::Singular, "matrix is singular over GF(2)");
    std::swap(left[static_cast<std::size_t>(pivot)], left[static_cast<std::size_t>(c)]);
    std::swap(right[static_cast<std::size_t>(pivot)], right[static_cast<std::size_t>(c)]);
    for (int r = 0; r < n; ++r)
      if (r != c && (left[static_cast<std::size_t>(r)] & bit)) {
        left[static_cast<std::size_t>(r)] ^= left[static_cast<std::size_t>(c)];
        right[static_cast<std::size_t>(r)] ^= right[static_cast<std::size_t>(c)];
      }
  }
  BitMatrix out(n, n);
  for (int r = 0; r < n; ++r) out.set_row_mask(r, right[static_cast<std::size_t>(r)]);
  return out;
}

std::pair<BitMatrix, BitMatrix> complete_to_invertible(const BitMatrix& g) {
  const int k = g.rows(), n = g.cols();
  if (rank(g) != k) fail(Errc::NotFullRank, "generator matrix must have full row rank");
  BitMatrix m = g;
  BitMatrix kmat(0, n);
  for (int j = 0; j < n && m.rows() < n; ++j) {
    BitMatrix e(1, n);
    e.set(0, j, 1);
    BitMatrix cand = m.vstack(e);
    if (rank(cand) == cand.rows()) {
      m = cand;
      kmat = kmat.vstack(e);
    }
  }
  if (m.rows() != n) fail(Errc::NotFullRank, "completion failed");  // unreachable for full-rank G
  return {m, kmat};
}

BitMatrix adapt_generator_for_bit(const BitMatrix& g, int i) {
  const int k = g.rows(), n = g.cols();
  if (i < 1 || i > n) fail(Errc::OutOfRange, "bit index out of range");
  if (rank(g) != k) fail(Errc::NotFullRank, "generator matrix must have full row rank");
  const int c = i - 1;
  int pivot = -1;
  for (int r = k - 1; r >= 0; --r)
    if (g.get(r, c)) {
      pivot = r;
      break;
    }
  if (pivot < 0) fail(Errc::BitIdenticallyZero, "codeword bit is constant zero");
  BitMatrix out = g;
  if (pivot != 0) {
    const std::uint64_t t = out.row_mask(0);
    out.set_row_mask(0, out.row_mask(pivot));
    out.set_row_mask(pivot, t);
  }
  for (int r = 1; r < k; ++r)
    if (out.get(r, c)) out.xor_row(r, 0);
  return out;
}

std::vector<BitVector> enumerate_codewords(const BitMatrix& g) {
  const int k = g.rows(), n = g.cols();
  if (k > 20) fail(Errc::TooLarge, "codeword enumeration guarded at k <= 20");
  std::vector<BitVector> out;
  out.reserve(std::size_t{1} << k);
  for (std::uint64_t u = 0; u < (std::uint64_t{1} << k); ++u) {
    std::uint64_t acc = 0;
    for (int r = 0; r < k; ++r)
      if ((u >> r) & 1u) acc ^= g.row_mask(r);
    BitVector cw(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) cw[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>((acc >> c) & 1u);
    out.push_back(std::move(cw));
  }
  return out;
}

BitMatrix kernel_basis(const BitMatrix& h) {
  const int m = h.rows(), n = h.cols();
  // row echelon form, tracking pivot columns
  std::vector<std::uint64_t> rows;
  for (int r = 0; r < m; ++r) rows.push_back(h.row_mask(r));
  std::vector<int> pivot_col;
  int rk = 0;
  for (int c = 0; c < n; ++c) {
    const std::uint64_t bit = std::uint64_t{1} << c;
    int pivot = -1;
    for (int r = rk; r < m; ++r)
      if (rows[static_cast<std::size_t>(r)] & bit) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(rows[static_cast<std::size_t>(pivot)], rows[static_cast<std::size_t>(rk)]);
    for (int r = 0; r < m; ++r)
      if (r != rk && (rows[static_cast<std::size_t>(r)] & bit)) rows[static_cast<std::size_t>(r)] ^= rows[static_cast<std::size_t>(rk)];
    pivot_col.push_back(c);
    ++rk;
  }
  std::vector<char> is_pivot(static_cast<std::size_t>(n), 0);
  for (int c : pivot_col) is_pivot[static_cast<std::size_t>(c)] = 1;
  BitMatrix out(n - rk, n);
  int row = 0;
  for (int c = 0; c < n; ++c) {
    if (is_pivot[static_cast<std::size_t>(c)]) continue;
    out.set(row, c, 1);
    for (int r = 0; r < rk; ++r)
      if ((rows[static_cast<std::size_t>(r)] >> c) & 1u) out.set(row, pivot_col[static_cast<std::size_t>(r)], 1);
    ++row;
  }
  return out;
}

bool has_lr_property(const BitMatrix& g) {
  std::uint64_t lefts = 0, rights = 0;
  for (int r = 0; r < g.rows(); ++r) {
    if (g.row_mask(r) == 0) return false;
    const SpanInfo s = row_span(g, r);
    const std::uint64_t lb = std::uint64_t{1} << s.left;
    const std::uint64_t rb = std::uint64_t{1} << s.right;
    if ((lefts & lb) || (rights & rb)) return false;
    lefts |= lb;
    rights |= rb;
  }
  return true;
}

BitMatrix msgm(const BitMatrix& g) {
  const int k = g.rows();
  if (rank(g) != k) fail(Errc::NotFullRank, "generator matrix must have full row rank");
  BitMatrix m = g;
  bool changed = true;
  while (changed) {
    changed = false;
    // L-collisions first, then R-collisions, pairs scanned in ascending order.
    for (int pass = 0; pass < 2 && !changed; ++pass) {
      for (int i = 0; i < k && !changed; ++i) {
        const SpanInfo si = row_span(m, i);
        for (int j = i + 1; j < k && !changed; ++j) {
          const SpanInfo sj = row_span(m, j);
          const bool collide = pass == 0 ? si.left == sj.left : si.right == sj.right;
          if (!collide) continue;
          // the longer row absorbs the shorter one; lowest index on a tie
          int dst;
          if (si.span_length() != sj.span_length())
            dst = si.span_length() > sj.span_length() ? i : j;
          else
            dst = i;
          m.xor_row(dst, dst == i ? j : i);
          changed = true;
        }
      }
    }
  }
  return m;
}

}  // namespace bpqm::gf2
