#pragma once

#include <cstdint>
#include <vector>

#include "bpqm/errors.hpp"
#include "bpqm/gf2.hpp"

// Dense probability distributions over m-bit strings. Entry i is the
// probability of the bit string whose integer value is i, with bit 1 the most
// significant. This convention is used everywhere in the library.

namespace bpqm::dist {

struct Distribution {
  int m = 0;
  std::vector<double> probs;  // 2^m entries

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }

  /// Validates entry count, non-negativity and normalization (1e-9).
  static Distribution validated(int m, std::vector<double> probs);

  static Distribution uniform(int m);
  static Distribution deterministic(int m, std::uint64_t value = 0);
  /// Classical part of the binary pure-state channel output: (1-p, p).
  static Distribution bspsc(double p);
};

struct GridParams {
  int bits;  // B-bit fixed point, 1 <= B <= 64
};

/// Product distribution D1 x D2; D1 indexes the high bits.
Distribution product(const Distribution& d1, const Distribution& d2);

/// Q(z) = D(M^{-1} z) for an invertible n x n matrix M: a relabeling of the
/// sample space along the GF(2) change of basis.
Distribution relabel(const Distribution& d, const gf2::BitMatrix& m);

/// Gather table for relabel: idx[z] = index of M^{-1} z. Precomputable once
/// per matrix; relabel is then a single gather.
std::vector<std::uint32_t> relabel_table(const gf2::BitMatrix& m);

struct Conditional {
  double p;              // marginal probability of the suffix
  std::uint64_t suffix;  // the (m - l)-bit suffix value
  Distribution d;        // conditional distribution of the leading l bits
};

/// Splits Q over (l + r) bits, laid out (Y high, S low), into the suffix
/// marginal p_s and conditionals D_s. Suffixes with p_s = 0 are omitted.
std::vector<Conditional> conditional_split(const Distribution& q, int l);

/// Marginalizes out the trailing (least significant) `drop` bits.
Distribution marginalize_low(const Distribution& d, int drop);

/// Renyi entropy of order 1/2: 2 log2 sum_z sqrt(D(z)).
double renyi_half(const Distribution& d);

/// Outcome law of the conjugate-basis measurement on the pure-state channel
/// output with classical parameter D and input x:
///   q(y) = 2^{-l} (sum_z sqrt(D(z)) (-1)^{(x xor y) . z})^2.
Distribution conjugate_outcome_dist(const Distribution& d, const gf2::BitVector& x);

/// Rounds every entry to a multiple of 2^{-B} such that the output sums to
/// exactly 1: entries are floored to the grid and the residual mass is handed
/// out in 2^{-B} increments to the largest remainders (lowest index on ties).
/// Satisfies ||out - in||_1 <= 2^{m-B}.
Distribution round_to_grid(const Distribution& d, const GridParams& g);

}  // namespace bpqm::dist
