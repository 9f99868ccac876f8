#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "bpqm/dist.hpp"
#include "bpqm/gf2.hpp"

// Message-passing graphs and the classical simulation of message passing with
// quantum messages on them: exact message ensembles, optimal success
// probabilities, trajectory sampling, and the fixed-point discretized variant
// with its ensemble-level error metric.

namespace bpqm::mpg {

using dist::Distribution;
using gf2::BitMatrix;
using gf2::BitVector;

/// One subspace-decoding instance: recover the l-bit prefix of a random
/// G-encoded k-bit source string from the channel output parameterized by P.
struct SdtInstance {
  int n = 0, k = 0, l = 0;
  BitMatrix g;
  Distribution p;

  void check() const;
};

/// Ensemble of classical message values: pairs (probability, distribution).
/// `label` is the concatenated string of node measurement outcomes that led
/// to the entry, so exact and discretized runs can be compared branch by
/// branch.
struct MessageEnsemble {
  struct Entry {
    double p;
    std::uint64_t label;
    Distribution d;
  };
  std::vector<Entry> entries;
};

struct MpgNode {
  int in_edge = -1;
  std::vector<int> out_edges;
  BitMatrix g;  // k_v x n_v, full rank
};

/// Directed tree of local random encoders. Edges are directed away from the
/// root; edge ids are dense 0..edge_count-1. Leaf edges are listed in the
/// order in which their bits appear in the channel output.
struct Mpg {
  std::vector<int> edge_widths;
  std::vector<MpgNode> nodes;
  int root_edge = -1;
  std::vector<int> leaf_edges;

  int edge_count() const { return static_cast<int>(edge_widths.size()); }
  int width(int edge) const { return edge_widths.at(static_cast<std::size_t>(edge)); }
  int add_edge(int w) {
    edge_widths.push_back(w);
    return edge_count() - 1;
  }
  void add_node(int in_edge, std::vector<int> out_edges, BitMatrix g) {
    nodes.push_back(MpgNode{in_edge, std::move(out_edges), std::move(g)});
  }
};

struct ValidationReport {
  int max_variable_dimension;  // N(G); for a zero-node MPG, the root width
  int node_count;
};

/// Checks every structural invariant (tree shape, widths, ranks, dimension
/// ordering) and reports N(G) and the node count. Throws NotATree,
/// WidthMismatch, RankDeficient or DimensionOrder.
ValidationReport validate(const Mpg& g);

/// Ensemble of residual-channel parameters produced by one primitive node
/// operation on input distribution D = inst.p: relabel along M, marginalize
/// the trailing n-k bits, split on the k-l outcome bits.
MessageEnsemble node_ensemble(const SdtInstance& inst);

/// Full message ensemble of the MPG with the given leaf distributions.
/// Entries with p < prune_eps are dropped after each node step and the
/// remaining mass renormalized; prune_eps = 0 computes the exact ensemble.
MessageEnsemble message_ensemble(const Mpg& g, const std::vector<Distribution>& leaf_dists,
                                 double prune_eps = 0.0);

/// Optimal success probability sum_i p_i 2^{H_1/2(D_i) - l}.
double success_probability(const MessageEnsemble& ens, int l);

/// One sample of the channel F[G]: push x from the root to the leaves,
/// appending fresh uniform bits at every node.
BitVector sample_encode(const Mpg& g, const BitVector& x, std::mt19937_64& rng);

/// One decoder trajectory: samples the node outcomes with their exact
/// probabilities and returns the final classical message. The outcome law
/// does not depend on the channel input, so no input is taken.
Distribution sample_final_message(const Mpg& g, const std::vector<Distribution>& leaf_dists,
                                  std::mt19937_64& rng);

/// One full decode: trajectory plus the conjugate-basis outcome draw for the
/// final measurement given the true input x.
BitVector simulate_decode(const Mpg& g, const std::vector<Distribution>& leaf_dists,
                          const BitVector& x, std::mt19937_64& rng);

struct DiscretizedResult {
  MessageEnsemble ensemble;  // the discretized ensemble (exact branch probabilities)
  double observed_err;       // sum_s p_s ||D_s - D~_s||_1 against the exact ensemble
  double bound;              // (2 N + 3)^{|V|} 2^{N - B}
};

/// Discretized message ensemble: leaf messages, every node-input product and
/// every conditional are rounded to the B-bit grid. The error metric compares
/// exact and discretized branches with identical outcome labels.
DiscretizedResult discretized_message_ensemble(const Mpg& g,
                                               const std::vector<Distribution>& leaf_dists,
                                               const dist::GridParams& grid);

// ---------------------------------------------------------------------------
// Precompiled form for Monte Carlo hot loops. Relabel tables are gather
// indices computed once; trajectory sampling then runs on flat buffers.
// ---------------------------------------------------------------------------

struct CompiledNode {
  int n, k, l;
  std::vector<std::uint32_t> relabel_idx;  // size 2^n
  std::vector<int> child_edges;
  int out_edge;
};

struct CompiledMpg {
  const Mpg* src = nullptr;
  std::vector<CompiledNode> order;  // leaves-to-root
  std::vector<int> leaf_edges;
  int root_edge = -1;
  int max_dim = 0;
};

CompiledMpg compile(const Mpg& g);

/// Reusable buffers for sample_final_message on a CompiledMpg.
struct Workspace {
  std::vector<std::vector<double>> edge_msg;  // per edge, 2^width
  std::vector<double> buf_a, buf_b, folded;
};

Distribution sample_final_message(const CompiledMpg& cg,
                                  const std::vector<Distribution>& leaf_dists,
                                  std::mt19937_64& rng, Workspace& ws);

}  // namespace bpqm::mpg
