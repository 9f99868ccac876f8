#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "bpqm/gf2.hpp"

using namespace bpqm;
using gf2::BitMatrix;
using gf2::BitVector;

namespace {

// independent rank oracle: enumerate the row span
int rank_by_span_enumeration(const BitMatrix& a) {
  REQUIRE(a.rows() <= 16);
  std::set<std::uint64_t> span;
  for (std::uint64_t u = 0; u < (std::uint64_t{1} << a.rows()); ++u) {
    std::uint64_t acc = 0;
    for (int r = 0; r < a.rows(); ++r)
      if ((u >> r) & 1u) acc ^= a.row_mask(r);
    span.insert(acc);
  }
  int rk = 0;
  while ((std::size_t{1} << rk) < span.size()) ++rk;
  return rk;
}

BitMatrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  BitMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    m.set_row_mask(r, rng() & ((cols == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << cols) - 1)));
  return m;
}

BitMatrix random_invertible(std::mt19937_64& rng, int n) {
  while (true) {
    BitMatrix m = random_matrix(rng, n, n);
    if (gf2::rank(m) == n) return m;
  }
}

BitMatrix random_full_rank(std::mt19937_64& rng, int k, int n) {
  while (true) {
    BitMatrix m = random_matrix(rng, k, n);
    if (gf2::rank(m) == k) return m;
  }
}

std::set<std::uint64_t> codeword_set(const BitMatrix& g) {
  std::set<std::uint64_t> s;
  for (const auto& cw : gf2::enumerate_codewords(g)) s.insert(cw.to_index());
  return s;
}

const BitMatrix kHammingH{{1, 1, 0, 1, 1, 0, 0}, {1, 0, 1, 1, 0, 1, 0}, {0, 1, 1, 1, 0, 0, 1}};
const BitMatrix kHammingG{
    {1, 0, 0, 0, 1, 1, 0}, {0, 1, 0, 0, 1, 0, 1}, {0, 0, 1, 0, 0, 1, 1}, {0, 0, 0, 1, 1, 1, 1}};

}  // namespace

TEST_CASE("rank") {
  CHECK(gf2::rank(kHammingH) == 3);
  CHECK(gf2::rank(BitMatrix::identity(4)) == 4);
  const BitMatrix dup{{1, 0, 1, 1}, {1, 0, 1, 1}};
  CHECK(gf2::rank(dup) == 1);
  CHECK(gf2::rank(dup) == rank_by_span_enumeration(dup));

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 8);
    const int cols = 1 + static_cast<int>(rng() % 12);
    const BitMatrix m = random_matrix(rng, rows, cols);
    CHECK(gf2::rank(m) == rank_by_span_enumeration(m));
  }
}

TEST_CASE("invert") {
  CHECK(gf2::invert(BitMatrix::identity(3)) == BitMatrix::identity(3));
  CHECK(gf2::invert(BitMatrix{{1, 0}, {1, 1}}) == BitMatrix{{1, 0}, {1, 1}});
  CHECK(gf2::invert(BitMatrix{{1, 1}, {1, 0}}) == BitMatrix{{0, 1}, {1, 1}});
  CHECK_THROWS_AS(gf2::invert(BitMatrix{{1, 1}, {1, 1}}), Error);

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const BitMatrix m = random_invertible(rng, n);
    const BitMatrix mi = gf2::invert(m);
    CHECK(m.mul(mi) == BitMatrix::identity(n));
    CHECK(mi.mul(m) == BitMatrix::identity(n));
  }
}

TEST_CASE("complete_to_invertible") {
  {
    const auto [m, k] = gf2::complete_to_invertible(BitMatrix::identity(5));
    CHECK(k.rows() == 0);
    CHECK(m == BitMatrix::identity(5));
  }
  {
    const auto [m, k] = gf2::complete_to_invertible(BitMatrix{{1, 1}});
    CHECK(m == BitMatrix{{1, 1}, {1, 0}});
    CHECK(k == BitMatrix{{1, 0}});
  }
  {
    const auto [m, k] = gf2::complete_to_invertible(kHammingG);
    CHECK(m.rows() == 7);
    CHECK(gf2::rank(m) == 7);
    // first k rows are G itself
    for (int r = 0; r < 4; ++r) CHECK(m.row_mask(r) == kHammingG.row_mask(r));
    CHECK(k.rows() == 3);
    CHECK_NOTHROW(gf2::invert(m));
  }
  CHECK_THROWS_AS(gf2::complete_to_invertible(BitMatrix{{1, 1}, {1, 1}}), Error);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const int k = 1 + static_cast<int>(rng() % n);
    const BitMatrix g = random_full_rank(rng, k, n);
    const auto [m, kk] = gf2::complete_to_invertible(g);
    CHECK(gf2::rank(m) == n);
    for (int r = 0; r < k; ++r) CHECK(m.row_mask(r) == g.row_mask(r));
    CHECK(kk.rows() == n - k);
  }
}

TEST_CASE("adapt_generator_for_bit") {
  {
    const BitMatrix out = gf2::adapt_generator_for_bit(BitMatrix::identity(3), 2);
    CHECK(out == BitMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 1}});
  }
  {
    const BitMatrix g{{1, 1, 0}, {0, 1, 1}};
    const BitMatrix out = gf2::adapt_generator_for_bit(g, 2);
    CHECK(out == BitMatrix{{0, 1, 1}, {1, 0, 1}});
    CHECK(codeword_set(out) == codeword_set(g));
    CHECK(out.get(0, 1));
    CHECK_FALSE(out.get(1, 1));
  }
  {
    BitMatrix g{{1, 0, 0}, {0, 0, 1}};  // column 2 is zero
    CHECK_THROWS_AS(gf2::adapt_generator_for_bit(g, 2), Error);
    try {
      gf2::adapt_generator_for_bit(g, 2);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BitIdenticallyZero);
    }
  }
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 8);
    const int k = 1 + static_cast<int>(rng() % n);
    const BitMatrix g = random_full_rank(rng, k, n);
    for (int i = 1; i <= n; ++i) {
      bool nonzero = false;
      for (int r = 0; r < k; ++r) nonzero = nonzero || g.get(r, i - 1);
      if (!nonzero) continue;
      const BitMatrix a = gf2::adapt_generator_for_bit(g, i);
      CHECK(a.get(0, i - 1));
      for (int r = 1; r < k; ++r) CHECK_FALSE(a.get(r, i - 1));
      if (k <= 12) CHECK(codeword_set(a) == codeword_set(g));
    }
  }
}

TEST_CASE("enumerate_codewords") {
  {
    const auto cw = gf2::enumerate_codewords(BitMatrix{{1, 1, 1}});
    REQUIRE(cw.size() == 2);
    CHECK(cw[0].to_index() == 0);
    CHECK(cw[1].to_index() == 0b111);
  }
  {
    const auto cw = gf2::enumerate_codewords(kHammingG);
    CHECK(cw.size() == 16);
    int min_weight = 7;
    for (const auto& c : cw) {
      int w = 0;
      for (auto b : c.bits) w += b;
      if (w > 0) min_weight = std::min(min_weight, w);
    }
    CHECK(min_weight == 3);
  }
  {
    const auto cw = gf2::enumerate_codewords(BitMatrix{{1, 0}, {1, 1}});
    std::set<std::uint64_t> s;
    for (const auto& c : cw) s.insert(c.to_index());
    CHECK(s == std::set<std::uint64_t>{0, 1, 2, 3});
  }
  CHECK_THROWS_AS(gf2::enumerate_codewords(BitMatrix::identity(21)), Error);
}

TEST_CASE("kernel_basis") {
  const BitMatrix g = gf2::kernel_basis(kHammingH);
  CHECK(g.rows() == 4);
  CHECK(gf2::rank(g) == 4);
  CHECK(codeword_set(g) == codeword_set(kHammingG));
}

TEST_CASE("msgm") {
  CHECK(gf2::msgm(BitMatrix::identity(6)) == BitMatrix::identity(6));
  {
    const BitMatrix m = gf2::msgm(kHammingG);
    CHECK(gf2::has_lr_property(m));
    int total = 0;
    std::set<int> lefts, rights;
    for (int r = 0; r < 4; ++r) {
      const auto s = gf2::row_span(m, r);
      total += s.span_length();
      lefts.insert(s.left);
      rights.insert(s.right);
    }
    CHECK(total == 15);
    CHECK(lefts == std::set<int>{1, 2, 3, 4});
    CHECK(rights == std::set<int>{3, 5, 6, 7});
    CHECK(codeword_set(m) == codeword_set(kHammingG));
  }
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10);
    const int k = 1 + static_cast<int>(rng() % std::min(n, 6));
    const BitMatrix g = random_full_rank(rng, k, n);
    const BitMatrix m = gf2::msgm(g);
    CHECK(gf2::has_lr_property(m));
    CHECK(codeword_set(m) == codeword_set(g));
    int span_in = 0, span_out = 0;
    for (int r = 0; r < k; ++r) {
      span_in += gf2::row_span(g, r).span_length();
      span_out += gf2::row_span(m, r).span_length();
    }
    CHECK(span_out <= span_in);
  }
}

TEST_CASE("hamming fixtures are consistent") {
  // G H^T = 0 and both have full rank
  const BitMatrix prod = kHammingG.mul(kHammingH.transpose());
  for (int r = 0; r < prod.rows(); ++r) CHECK(prod.row_mask(r) == 0);
  CHECK(gf2::rank(kHammingG) == 4);
}

TEST_CASE("bitvector concat and index conversions") {
  const BitVector x{1, 0, 1};
  CHECK(x.to_index() == 0b101);
  CHECK(BitVector::from_index(0b101, 3) == x);
  const BitVector y{1, 1};
  CHECK(x.concat(y).to_index() == 0b10111);
  CHECK(x.concat(y).size() == 5);
}
