#include "bpqm/mpg.hpp"

#include <algorithm>
#include <cmath>

#include "bpqm/kernels.hpp"
#include "bpqm/rng.hpp"

namespace bpqm::mpg {

namespace {

constexpr int kMaxNodeDim = 24;              // 2^24 doubles per node buffer at most
constexpr std::size_t kMaxEntries = 1u << 22;  // exact-ensemble enumeration guard

// Producer/consumer maps derived from the node lists.
struct Topology {
  std::vector<int> producer;  // node index emitting the edge, -1 for root
  std::vector<int> consumer;  // node index receiving the edge, -1 for leaves
};

Topology derive_topology(const Mpg& g) {
  Topology t;
  t.producer.assign(static_cast<std::size_t>(g.edge_count()), -1);
  t.consumer.assign(static_cast<std::size_t>(g.edge_count()), -1);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    const MpgNode& node = g.nodes[v];
    if (node.in_edge < 0 || node.in_edge >= g.edge_count())
      fail(Errc::NotATree, "node input edge id out of range");
    if (t.consumer[static_cast<std::size_t>(node.in_edge)] != -1)
      fail(Errc::NotATree, "edge feeds two nodes");
    t.consumer[static_cast<std::size_t>(node.in_edge)] = static_cast<int>(v);
    for (int e : node.out_edges) {
      if (e < 0 || e >= g.edge_count()) fail(Errc::NotATree, "node output edge id out of range");
      if (t.producer[static_cast<std::size_t>(e)] != -1) fail(Errc::NotATree, "edge emitted twice");
      t.producer[static_cast<std::size_t>(e)] = static_cast<int>(v);
    }
  }
  return t;
}

}  // namespace

void SdtInstance::check() const {
  if (!(n >= k && k >= l && l >= 0)) fail(Errc::DimensionOrder, "need n >= k >= l >= 0");
  if (g.rows() != k || g.cols() != n) fail(Errc::WidthMismatch, "generator matrix shape");
  if (p.m != n) fail(Errc::WidthMismatch, "distribution width != n");
  if (gf2::rank(g) != k) fail(Errc::NotFullRank, "generator matrix must have full row rank");
}

ValidationReport validate(const Mpg& g) {
  if (g.root_edge < 0 || g.root_edge >= g.edge_count()) fail(Errc::NotATree, "missing root edge");
  for (int w : g.edge_widths)
    if (w < 1) fail(Errc::WidthMismatch, "edge width must be >= 1");
  const Topology topo = derive_topology(g);

  if (topo.producer[static_cast<std::size_t>(g.root_edge)] != -1)
    fail(Errc::NotATree, "root edge must not be produced by a node");

  // classify edges
  std::vector<char> is_leaf(static_cast<std::size_t>(g.edge_count()), 0);
  for (int e : g.leaf_edges) {
    if (e < 0 || e >= g.edge_count()) fail(Errc::NotATree, "leaf edge id out of range");
    if (is_leaf[static_cast<std::size_t>(e)]) fail(Errc::NotATree, "duplicate leaf edge");
    is_leaf[static_cast<std::size_t>(e)] = 1;
  }
  if (g.nodes.empty()) {
    if (g.leaf_edges.size() != 1 || g.leaf_edges[0] != g.root_edge || g.edge_count() != 1)
      fail(Errc::NotATree, "a zero-node MPG must consist of the root edge alone");
    return ValidationReport{g.width(g.root_edge), 0};
  }
  for (int e = 0; e < g.edge_count(); ++e) {
    const bool produced = topo.producer[static_cast<std::size_t>(e)] != -1;
    const bool consumed = topo.consumer[static_cast<std::size_t>(e)] != -1;
    if (e == g.root_edge) {
      if (!consumed) fail(Errc::NotATree, "root edge not attached");
      if (is_leaf[static_cast<std::size_t>(e)]) fail(Errc::NotATree, "root edge listed as leaf");
    } else if (is_leaf[static_cast<std::size_t>(e)]) {
      if (!produced || consumed) fail(Errc::NotATree, "leaf edge must be produced and unconsumed");
    } else {
      if (!produced || !consumed) fail(Errc::NotATree, "dangling internal edge");
    }
  }

  // connectivity root -> leaves
  std::vector<char> node_seen(g.nodes.size(), 0);
  std::vector<int> stack = {g.root_edge};
  int seen_edges = 0;
  while (!stack.empty()) {
    const int e = stack.back();
    stack.pop_back();
    ++seen_edges;
    const int v = topo.consumer[static_cast<std::size_t>(e)];
    if (v < 0) continue;
    if (node_seen[static_cast<std::size_t>(v)]) fail(Errc::NotATree, "cycle detected");
    node_seen[static_cast<std::size_t>(v)] = 1;
    for (int out : g.nodes[static_cast<std::size_t>(v)].out_edges) stack.push_back(out);
  }
  if (seen_edges != g.edge_count() || !std::all_of(node_seen.begin(), node_seen.end(), [](char c) { return c; }))
    fail(Errc::NotATree, "graph is not connected");

  int max_dim = g.width(g.root_edge);
  for (const MpgNode& v : g.nodes) {
    if (v.out_edges.empty()) fail(Errc::NotATree, "node without outgoing edges");
    int nv = 0;
    for (int e : v.out_edges) nv += g.width(e);
    const int lv = g.width(v.in_edge);
    const int kv = v.g.rows();
    if (v.g.cols() != nv) fail(Errc::WidthMismatch, "G_v columns != sum of outgoing widths");
    if (nv > kMaxNodeDim) fail(Errc::TooLarge, "node dimension too large for dense simulation");
    if (!(nv >= kv && kv >= lv && lv >= 1)) fail(Errc::DimensionOrder, "need n_v >= k_v >= l_v >= 1");
    if (gf2::rank(v.g) != kv) fail(Errc::RankDeficient, "node generator matrix not full rank");
    max_dim = std::max(max_dim, nv);
  }
  return ValidationReport{max_dim, static_cast<int>(g.nodes.size())};
}

MessageEnsemble node_ensemble(const SdtInstance& inst) {
  inst.check();
  const auto [m, kmat] = gf2::complete_to_invertible(inst.g);
  (void)kmat;
  const Distribution q = dist::relabel(inst.p, m);
  const Distribution r = dist::marginalize_low(q, inst.n - inst.k);
  MessageEnsemble ens;
  for (auto& c : dist::conditional_split(r, inst.l))
    ens.entries.push_back(MessageEnsemble::Entry{c.p, c.suffix, std::move(c.d)});
  return ens;
}

double success_probability(const MessageEnsemble& ens, int l) {
  const double scale = std::ldexp(1.0, -l);
  double acc = 0.0;
  for (const auto& e : ens.entries) {
    if (e.d.m != l) fail(Errc::WidthMismatch, "ensemble entry width != l");
    const double s = kern::sum_sqrt(e.d.probs.data(), e.d.size());
    acc += e.p * s * s * scale;
  }
  return acc;
}

CompiledMpg compile(const Mpg& g) {
  validate(g);
  CompiledMpg cg;
  cg.src = &g;
  cg.leaf_edges = g.leaf_edges;
  cg.root_edge = g.root_edge;

  // leaves-to-root order: a node is ready once all its children are emitted
  std::vector<char> edge_ready(static_cast<std::size_t>(g.edge_count()), 0);
  for (int e : g.leaf_edges) edge_ready[static_cast<std::size_t>(e)] = 1;
  std::vector<char> node_done(g.nodes.size(), 0);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
      if (node_done[v]) continue;
      const MpgNode& node = g.nodes[v];
      bool ready = true;
      for (int e : node.out_edges) ready = ready && edge_ready[static_cast<std::size_t>(e)];
      if (!ready) continue;
      CompiledNode cn;
      cn.child_edges = node.out_edges;
      cn.out_edge = node.in_edge;
      cn.l = g.width(node.in_edge);
      cn.k = node.g.rows();
      cn.n = node.g.cols();
      const auto [m, kmat] = gf2::complete_to_invertible(node.g);
      (void)kmat;
      cn.relabel_idx = dist::relabel_table(m);
      cg.max_dim = std::max(cg.max_dim, cn.n);
      cg.order.push_back(std::move(cn));
      edge_ready[static_cast<std::size_t>(node.in_edge)] = 1;
      node_done[v] = 1;
      progress = true;
    }
  }
  return cg;
}

namespace {

void ensure_workspace(const CompiledMpg& cg, const std::vector<Distribution>& leaf_dists,
                      Workspace& ws) {
  const Mpg& g = *cg.src;
  if (leaf_dists.size() != cg.leaf_edges.size())
    fail(Errc::WidthMismatch, "leaf distribution count != leaf count");
  for (std::size_t i = 0; i < leaf_dists.size(); ++i)
    if (leaf_dists[i].m != g.width(cg.leaf_edges[i]))
      fail(Errc::WidthMismatch, "leaf distribution width != leaf edge width");
  ws.edge_msg.resize(static_cast<std::size_t>(g.edge_count()));
  for (int e = 0; e < g.edge_count(); ++e)
    ws.edge_msg[static_cast<std::size_t>(e)].resize(std::size_t{1} << g.width(e));
  const std::size_t cap = std::size_t{1} << cg.max_dim;
  ws.buf_a.resize(cap);
  ws.buf_b.resize(cap);
  ws.folded.resize(cap);
}

// Joint product of the child messages in child order (first child = high bits).
// Returns a pointer to the buffer holding the 2^n joint values.
const double* build_joint(const CompiledNode& cn, Workspace& ws) {
  const double* cur = ws.edge_msg[static_cast<std::size_t>(cn.child_edges[0])].data();
  std::size_t cur_n = ws.edge_msg[static_cast<std::size_t>(cn.child_edges[0])].size();
  double* bufs[2] = {ws.buf_a.data(), ws.buf_b.data()};
  int which = 0;
  for (std::size_t c = 1; c < cn.child_edges.size(); ++c) {
    const auto& child = ws.edge_msg[static_cast<std::size_t>(cn.child_edges[c])];
    kern::outer(cur, cur_n, child.data(), child.size(), bufs[which]);
    cur = bufs[which];
    cur_n *= child.size();
    which ^= 1;
  }
  return cur;
}

}  // namespace

Distribution sample_final_message(const CompiledMpg& cg, const std::vector<Distribution>& leaf_dists,
                                  std::mt19937_64& rng, Workspace& ws) {
  const Mpg& g = *cg.src;
  ensure_workspace(cg, leaf_dists, ws);
  for (std::size_t i = 0; i < leaf_dists.size(); ++i)
    ws.edge_msg[static_cast<std::size_t>(cg.leaf_edges[i])] = leaf_dists[i].probs;

  for (const CompiledNode& cn : cg.order) {
    const double* joint = build_joint(cn, ws);
    const std::size_t nn = std::size_t{1} << cn.n;
    // relabel along M
    double* q = (joint == ws.buf_a.data()) ? ws.buf_b.data() : ws.buf_a.data();
    kern::gather(joint, cn.relabel_idx.data(), q, nn);
    // marginalize the trailing n-k bits
    const std::size_t block = std::size_t{1} << (cn.n - cn.k);
    const std::size_t nk = std::size_t{1} << cn.k;
    double* r = ws.folded.data();
    for (std::size_t i = 0; i < nk; ++i) r[i] = kern::sum(q + i * block, block);
    // outcome probabilities over the k-l suffix bits
    const std::size_t ns = std::size_t{1} << (cn.k - cn.l);
    const std::size_t ny = std::size_t{1} << cn.l;
    std::uint64_t pick = 0;
    if (ns > 1) {
      double u = uniform01(rng);
      std::uint64_t last_positive = 0;
      for (std::uint64_t s = 0; s < ns; ++s) {
        double ps = 0;
        for (std::uint64_t y = 0; y < ny; ++y) ps += r[(y << (cn.k - cn.l)) | s];
        if (ps > 0) {
          last_positive = s;
          u -= ps;
          if (u <= 0) {
            pick = s;
            break;
          }
        }
        if (s + 1 == ns) pick = last_positive;  // guards against fp undersum
      }
    }
    auto& out = ws.edge_msg[static_cast<std::size_t>(cn.out_edge)];
    double ps = 0;
    for (std::uint64_t y = 0; y < ny; ++y) ps += r[(y << (cn.k - cn.l)) | pick];
    const double inv = 1.0 / ps;
    for (std::uint64_t y = 0; y < ny; ++y) out[y] = r[(y << (cn.k - cn.l)) | pick] * inv;
  }

  Distribution final;
  final.m = g.width(cg.root_edge);
  final.probs = ws.edge_msg[static_cast<std::size_t>(cg.root_edge)];
  return final;
}

Distribution sample_final_message(const Mpg& g, const std::vector<Distribution>& leaf_dists,
                                  std::mt19937_64& rng) {
  const CompiledMpg cg = compile(g);
  Workspace ws;
  return sample_final_message(cg, leaf_dists, rng, ws);
}

BitVector simulate_decode(const Mpg& g, const std::vector<Distribution>& leaf_dists,
                          const BitVector& x, std::mt19937_64& rng) {
  if (static_cast<int>(x.size()) != g.width(g.root_edge))
    fail(Errc::WidthMismatch, "input width != root edge width");
  const Distribution d = sample_final_message(g, leaf_dists, rng);
  const Distribution q = dist::conjugate_outcome_dist(d, x);
  double u = uniform01(rng);
  std::uint64_t pick = 0;
  for (std::uint64_t i = 0; i < q.size(); ++i) {
    if (q.probs[i] <= 0) continue;
    pick = i;
    u -= q.probs[i];
    if (u <= 0) break;
  }
  return BitVector::from_index(pick, x.size());
}

BitVector sample_encode(const Mpg& g, const BitVector& x, std::mt19937_64& rng) {
  validate(g);
  if (static_cast<int>(x.size()) != g.width(g.root_edge))
    fail(Errc::WidthMismatch, "input width != root edge width");
  std::vector<BitVector> msg(static_cast<std::size_t>(g.edge_count()));
  msg[static_cast<std::size_t>(g.root_edge)] = x;

  // root-to-leaves: repeatedly process nodes whose input message is ready
  std::vector<char> done(g.nodes.size(), 0);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
      if (done[v]) continue;
      const MpgNode& node = g.nodes[v];
      BitVector& in = msg[static_cast<std::size_t>(node.in_edge)];
      if (static_cast<int>(in.size()) != g.width(node.in_edge)) continue;  // not ready yet
      const int kv = node.g.rows(), lv = g.width(node.in_edge);
      BitVector zr = in;
      for (int i = 0; i < kv - lv; ++i) zr.bits.push_back(static_cast<std::uint8_t>(rng() & 1u));
      const BitVector out = node.g.mul_left(zr);
      std::size_t off = 0;
      for (int e : node.out_edges) {
        BitVector part(static_cast<std::size_t>(g.width(e)));
        for (std::size_t i = 0; i < part.size(); ++i) part[i] = out[off + i];
        off += part.size();
        msg[static_cast<std::size_t>(e)] = std::move(part);
      }
      done[v] = 1;
      progress = true;
    }
  }
  BitVector result;
  for (int e : g.leaf_edges) result = result.concat(msg[static_cast<std::size_t>(e)]);
  return result;
}

namespace {

struct EnsembleOptions {
  double prune_eps = 0.0;
  bool with_disc = false;
  dist::GridParams grid{52};
};

struct Branch {
  double p;
  std::uint64_t label;
  Distribution exact;
  Distribution disc;  // only when with_disc
};

struct SubEnsemble {
  std::vector<Branch> branches;
  int label_bits = 0;  // total outcome bits accumulated in this subtree
};

// Exact (and optionally lockstep-discretized) ensemble for the subtree
// hanging off `edge`. Branches carry exact probabilities; the discretized
// side follows the identical outcome labels. `edge_source[e]` is the node
// whose incoming edge is e, i.e. the node computing the message on e.
SubEnsemble subtree_ensemble(const Mpg& g, const std::vector<int>& edge_leaf_index,
                             const std::vector<int>& edge_source,
                             const std::vector<Distribution>& leaf_dists, int edge,
                             const EnsembleOptions& opt) {
  const int leaf_idx = edge_leaf_index[static_cast<std::size_t>(edge)];
  if (leaf_idx >= 0) {
    Branch b;
    b.p = 1.0;
    b.label = 0;
    b.exact = leaf_dists[static_cast<std::size_t>(leaf_idx)];
    if (opt.with_disc) b.disc = dist::round_to_grid(b.exact, opt.grid);
    SubEnsemble se;
    se.branches.push_back(std::move(b));
    return se;
  }
  const MpgNode& node = g.nodes[static_cast<std::size_t>(edge_source[static_cast<std::size_t>(edge)])];
  const int kv = node.g.rows();
  const int lv = g.width(node.in_edge);
  int nv = 0;
  for (int e : node.out_edges) nv += g.width(e);

  // tensor the child ensembles in child order
  std::vector<Branch> joint;
  int joint_label_bits = 0;
  {
    Branch unit;
    unit.p = 1.0;
    unit.label = 0;
    unit.exact = Distribution::deterministic(0, 0);
    if (opt.with_disc) unit.disc = unit.exact;
    joint.push_back(std::move(unit));
  }
  for (int e : node.out_edges) {
    SubEnsemble child = subtree_ensemble(g, edge_leaf_index, edge_source, leaf_dists, e, opt);
    std::vector<Branch> next;
    if (joint.size() * child.branches.size() > kMaxEntries)
      fail(Errc::TooLarge, "message ensemble exceeds enumeration guard");
    next.reserve(joint.size() * child.branches.size());
    for (const Branch& a : joint)
      for (const Branch& b : child.branches) {
        Branch c;
        c.p = a.p * b.p;
        c.label = (a.label << child.label_bits) | b.label;
        c.exact = dist::product(a.exact, b.exact);
        if (opt.with_disc) c.disc = dist::product(a.disc, b.disc);
        next.push_back(std::move(c));
      }
    joint = std::move(next);
    joint_label_bits += child.label_bits;
  }

  const auto [m, kmat] = gf2::complete_to_invertible(node.g);
  (void)kmat;
  const std::vector<std::uint32_t> idx = dist::relabel_table(m);

  SubEnsemble se;
  se.label_bits = joint_label_bits + (kv - lv);
  for (Branch& jb : joint) {
    // exact node step
    Distribution q;
    q.m = nv;
    q.probs.resize(jb.exact.size());
    kern::gather(jb.exact.probs.data(), idx.data(), q.probs.data(), q.probs.size());
    const Distribution r = dist::marginalize_low(q, nv - kv);
    const auto conds = dist::conditional_split(r, lv);

    Distribution rd;
    if (opt.with_disc) {
      Distribution jd = dist::round_to_grid(jb.disc, opt.grid);
      Distribution qd;
      qd.m = nv;
      qd.probs.resize(jd.size());
      kern::gather(jd.probs.data(), idx.data(), qd.probs.data(), qd.probs.size());
      rd = dist::marginalize_low(qd, nv - kv);
    }

    for (const auto& c : conds) {
      Branch b;
      b.p = jb.p * c.p;
      b.label = (jb.label << (kv - lv)) | c.suffix;
      b.exact = c.d;
      if (opt.with_disc) {
        // conditional of the discretized joint on the same outcome; a branch
        // the discretized run cannot reach gets the uniform convention
        const std::size_t ny = std::size_t{1} << lv;
        double ps = 0;
        for (std::uint64_t y = 0; y < ny; ++y) ps += rd.probs[(y << (kv - lv)) | c.suffix];
        if (ps > 0) {
          Distribution dd;
          dd.m = lv;
          dd.probs.resize(ny);
          for (std::uint64_t y = 0; y < ny; ++y)
            dd.probs[y] = rd.probs[(y << (kv - lv)) | c.suffix] / ps;
          b.disc = dist::round_to_grid(dd, opt.grid);
        } else {
          b.disc = Distribution::uniform(lv);
        }
      }
      se.branches.push_back(std::move(b));
    }
    if (se.branches.size() > kMaxEntries)
      fail(Errc::TooLarge, "message ensemble exceeds enumeration guard");
  }

  if (opt.prune_eps > 0.0) {
    std::vector<Branch> kept;
    double mass = 0.0;
    for (Branch& b : se.branches)
      if (b.p >= opt.prune_eps) {
        mass += b.p;
        kept.push_back(std::move(b));
      }
    if (kept.empty() || mass <= 0.0) fail(Errc::BadInput, "pruning removed all ensemble mass");
    for (Branch& b : kept) b.p /= mass;
    se.branches = std::move(kept);
  }
  return se;
}

std::vector<Branch> run_ensemble(const Mpg& g, const std::vector<Distribution>& leaf_dists,
                                 const EnsembleOptions& opt) {
  validate(g);
  if (leaf_dists.size() != g.leaf_edges.size())
    fail(Errc::WidthMismatch, "leaf distribution count != leaf count");
  for (std::size_t i = 0; i < leaf_dists.size(); ++i)
    if (leaf_dists[i].m != g.width(g.leaf_edges[i]))
      fail(Errc::WidthMismatch, "leaf distribution width != leaf edge width");

  std::vector<int> edge_leaf_index(static_cast<std::size_t>(g.edge_count()), -1);
  for (std::size_t i = 0; i < g.leaf_edges.size(); ++i)
    edge_leaf_index[static_cast<std::size_t>(g.leaf_edges[i])] = static_cast<int>(i);
  std::vector<int> edge_source(static_cast<std::size_t>(g.edge_count()), -1);
  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    edge_source[static_cast<std::size_t>(g.nodes[v].in_edge)] = static_cast<int>(v);

  return subtree_ensemble(g, edge_leaf_index, edge_source, leaf_dists, g.root_edge, opt).branches;
}

}  // namespace

MessageEnsemble message_ensemble(const Mpg& g, const std::vector<Distribution>& leaf_dists,
                                 double prune_eps) {
  EnsembleOptions opt;
  opt.prune_eps = prune_eps;
  MessageEnsemble ens;
  for (Branch& b : run_ensemble(g, leaf_dists, opt))
    ens.entries.push_back(MessageEnsemble::Entry{b.p, b.label, std::move(b.exact)});
  return ens;
}

DiscretizedResult discretized_message_ensemble(const Mpg& g,
                                               const std::vector<Distribution>& leaf_dists,
                                               const dist::GridParams& grid) {
  EnsembleOptions opt;
  opt.with_disc = true;
  opt.grid = grid;
  const ValidationReport rep = validate(g);
  DiscretizedResult res;
  res.observed_err = 0.0;
  for (Branch& b : run_ensemble(g, leaf_dists, opt)) {
    res.observed_err += b.p * kern::l1_dist(b.exact.probs.data(), b.disc.probs.data(), b.exact.size());
    res.ensemble.entries.push_back(MessageEnsemble::Entry{b.p, b.label, std::move(b.disc)});
  }
  const double nn = rep.max_variable_dimension;
  res.bound = std::pow(2.0 * nn + 3.0, rep.node_count) * std::ldexp(1.0, rep.max_variable_dimension - grid.bits);
  return res;
}

}  // namespace bpqm::mpg
