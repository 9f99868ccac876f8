#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bpqm/gf2.hpp"
#include "bpqm/mpg.hpp"

// Constructions of message-passing graphs for the bit-transmission channel of
// a code: from tree Tanner graphs, from Tanner graphs with a single cycle,
// and from minimal-span generator matrices (trellises). Also the trellis
// machinery itself and the recursive systematic convolutional section
// factors used by density evolution.

namespace bpqm::graphs {

using gf2::BitMatrix;
using gf2::BitVector;

struct TannerGraph {
  int n = 0, m = 0;
  BitMatrix h;
  std::vector<std::vector<int>> var_checks;  // 0-based
  std::vector<std::vector<int>> check_vars;

  static TannerGraph from_parity(const BitMatrix& h);
  int edge_count() const;
};

/// MPG for the bit-transmission channel of the code with parity-check matrix
/// H, rooted at `bit` (1-based). Requires the Tanner graph to be a connected
/// tree. Equality nodes become repetition generators, check nodes the
/// check-form generators, both split to degree 3; degree-2 nodes are elided.
/// Leaf edges are ordered by codeword position. N(G) <= 2.
mpg::Mpg mpg_from_tree_tanner(const BitMatrix& h, int bit);

/// MPG for a code whose Tanner graph contains exactly one cycle. Redundant
/// parity rows are removed first; if that breaks the cycle the tree builder
/// is used. The cycle is flattened into a chain of merged nodes: same-type
/// pairs become the 4-output merged nodes, the far end becomes a 3-node
/// merge. N(G) <= 4.
mpg::Mpg mpg_from_unicyclic_tanner(const BitMatrix& h, int bit);

struct MsgmMpg {
  mpg::Mpg mpg;
  std::vector<std::string> node_cases;  // per node, e.g. "A.ii", "B.i", "C.iii", "eq"
};

/// MPG from an LR-property generator matrix: one chain node per codeword
/// position (or per merged group), rooted at `bit`. merge_groups, when given,
/// is a partition of 1..n into consecutive [first,last] intervals.
MsgmMpg mpg_from_msgm(const BitMatrix& g_msgm, int bit,
                      const std::vector<std::pair<int, int>>& merge_groups = {});

struct Trellis {
  struct Edge {
    int from, to;  // vertex indices within the adjacent layers
    std::uint8_t label;
  };
  std::vector<int> vertex_counts;          // |V_0| .. |V_n|
  std::vector<std::vector<Edge>> sections;  // E_1 .. E_n, binary labels

  int max_state_space() const {
    int s = 1;
    for (int v : vertex_counts) s = std::max(s, v);
    return s;
  }
};

/// Trellis derived from an LR generator matrix; layer sizes are 2^{beta_j}
/// and source-to-sink path labels enumerate the codewords.
Trellis trellis_from_msgm(const BitMatrix& g_msgm);

/// Minimal log2 state space at the boundary after position j (j = 0..n):
/// rank(columns <= j) + rank(columns > j) - k. Independent of any particular
/// generator matrix of the code.
int state_dim_oracle(const BitMatrix& g, int j);

struct ConvCodeSpec {
  std::string p_octal;  // feedforward polynomial, octal digits
  std::string q_octal;  // feedback polynomial, octal digits (odd: constant term 1)
};

/// Per-section factors of the recursive systematic convolutional code in
/// controller canonical form. State bundles carry m bits, bit 1 = the most
/// recent delay cell.
///
/// Column layout of the factors:
///   root_node        in: systematic bit   out: [parity, state-before(m), state-after(m)]
///   bulk_away_right  in: state-before(m)  out: [systematic, parity, state-after(m)]
///   bulk_away_left   in: state-after(m)   out: [systematic, parity, state-before(m)]
struct ConvSections {
  int memory = 0;
  std::uint32_t p_mask = 0, q_mask = 0;  // bit i = coefficient of D^i
  int section_count = 0;
  BitMatrix root_node;
  BitMatrix bulk_away_right;
  BitMatrix bulk_away_left;
};

ConvSections conv_trellis(const ConvCodeSpec& spec, int sections);

/// Shift-register transition map: (systematic bit, state) -> (parity, state').
std::pair<int, std::uint64_t> conv_transition(const ConvSections& cs, int sys_bit,
                                              std::uint64_t state);

}  // namespace bpqm::graphs
