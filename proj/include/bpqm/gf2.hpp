#pragma once

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

#include "bpqm/errors.hpp"

// Exact GF(2) linear algebra. Bit indices in the public API are 1-based; when
// a bit string is interpreted as an integer, bit 1 is the most significant.

namespace bpqm::gf2 {

struct BitVector {
  std::vector<std::uint8_t> bits;  // values 0/1, bits[0] = bit 1

  BitVector() = default;
  explicit BitVector(std::size_t n) : bits(n, 0) {}
  BitVector(std::initializer_list<int> v) {
    bits.reserve(v.size());
    for (int b : v) bits.push_back(static_cast<std::uint8_t>(b & 1));
  }

  std::size_t size() const { return bits.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits[i]; }
  std::uint8_t& operator[](std::size_t i) { return bits[i]; }
  bool operator==(const BitVector& o) const { return bits == o.bits; }
  bool operator<(const BitVector& o) const { return bits < o.bits; }

  /// x‖y
  BitVector concat(const BitVector& y) const {
    BitVector r = *this;
    r.bits.insert(r.bits.end(), y.bits.begin(), y.bits.end());
    return r;
  }

  /// Integer value with bit 1 most significant.
  std::uint64_t to_index() const {
    std::uint64_t v = 0;
    for (std::uint8_t b : bits) v = (v << 1) | b;
    return v;
  }
  static BitVector from_index(std::uint64_t v, std::size_t n) {
    BitVector r(n);
    for (std::size_t i = 0; i < n; ++i) r.bits[i] = static_cast<std::uint8_t>((v >> (n - 1 - i)) & 1u);
    return r;
  }
};

class BitMatrix {
 public:
  BitMatrix() : rows_(0), cols_(0) {}
  BitMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_(static_cast<std::size_t>(rows), 0) {
    if (rows < 0 || cols < 0 || cols > 64) fail(Errc::TooLarge, "BitMatrix supports up to 64 columns");
  }
  BitMatrix(std::initializer_list<std::initializer_list<int>> m) : BitMatrix(static_cast<int>(m.size()), m.size() ? static_cast<int>(m.begin()->size()) : 0) {
    int r = 0;
    for (const auto& row : m) {
      int c = 0;
      for (int v : row) set(r, c++, v & 1);
      ++r;
    }
  }

  static BitMatrix identity(int n) {
    BitMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool get(int r, int c) const { return (row_[static_cast<std::size_t>(r)] >> c) & 1u; }
  void set(int r, int c, bool v) {
    const std::uint64_t m = std::uint64_t{1} << c;
    if (v)
      row_[static_cast<std::size_t>(r)] |= m;
    else
      row_[static_cast<std::size_t>(r)] &= ~m;
  }
  std::uint64_t row_mask(int r) const { return row_[static_cast<std::size_t>(r)]; }
  void set_row_mask(int r, std::uint64_t m) { row_[static_cast<std::size_t>(r)] = m; }
  void xor_row(int dst, int src) { row_[static_cast<std::size_t>(dst)] ^= row_[static_cast<std::size_t>(src)]; }
  bool operator==(const BitMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && row_ == o.row_; }

  /// A·x for a column vector x (|x| = cols); result has `rows` bits.
  BitVector mul(const BitVector& x) const;
  /// Row-vector product uᵀA (|u| = rows); result has `cols` bits.
  BitVector mul_left(const BitVector& u) const;
  BitMatrix mul(const BitMatrix& b) const;
  BitMatrix transpose() const;
  /// Vertical stack (this on top).
  BitMatrix vstack(const BitMatrix& below) const;
  /// Columns [c0, c1) as a new matrix.
  BitMatrix col_slice(int c0, int c1) const;

 private:
  int rows_, cols_;
  std::vector<std::uint64_t> row_;
};

/// Span of a nonzero row: 1-based left/right indices of the extremal ones.
struct SpanInfo {
  int left;
  int right;
  int span_length() const { return right - left + 1; }
};

/// Span of row r of A; throws BadInput on a zero row.
SpanInfo row_span(const BitMatrix& a, int r);

/// GF(2) row rank via Gaussian elimination.
int rank(const BitMatrix& a);

/// Inverse of a square matrix; throws Singular.
BitMatrix invert(const BitMatrix& a);

/// Completes a full-row-rank G (k×n) to an invertible M = (G over K): K is
/// chosen greedily as the standard basis rows e_1, e_2, ... in order, keeping
/// exactly those that raise the rank. Throws NotFullRank.
std::pair<BitMatrix, BitMatrix> complete_to_invertible(const BitMatrix& g);

/// Row-equivalent generator matrix with a 1 at (row 1, column i) and zeros
/// elsewhere in column i (1-based i). The bottom-most row holding a 1 in
/// column i is moved to the front. Throws BitIdenticallyZero if column i is
/// zero, NotFullRank if G is rank-deficient.
BitMatrix adapt_generator_for_bit(const BitMatrix& g, int i);

/// All 2^k codewords uᵀG. Guarded at k ≤ 20 (TooLarge).
std::vector<BitVector> enumerate_codewords(const BitMatrix& g);

/// Basis of {x : Hx = 0} as the rows of a full-row-rank matrix (a generator
/// matrix of the code with parity-check matrix H).
BitMatrix kernel_basis(const BitMatrix& h);

/// True when all row left indices are distinct and all right indices are
/// distinct (the minimal-span / trellis-oriented property).
bool has_lr_property(const BitMatrix& g);

/// Row-equivalent minimal-span generator matrix satisfying the LR property
/// (all left indices distinct, all right indices distinct). Whenever two rows
/// collide on a left or right index, the row with the longer span absorbs the
/// other; on a full tie the lowest row index absorbs. Each such step strictly
/// reduces the total span length, so the reduction terminates.
BitMatrix msgm(const BitMatrix& g);

}  // namespace bpqm::gf2
