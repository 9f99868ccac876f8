#include "bpqm/graphs.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>

namespace bpqm::graphs {

namespace {

using mpg::Mpg;

const BitMatrix kEq2{{1, 1}};
const BitMatrix kChk2{{1, 0}, {1, 1}};

// Emits a chain of degree-3 equality or check nodes distributing `nports`
// 1-bit legs fed from `in_edge`. A single port is spliced through directly
// (the degree-2 node elision). resolve(i, edge) attaches port i to its edge.
void emit_chain(Mpg& g, int in_edge, int nports, bool is_check,
                const std::function<void(int, int)>& resolve) {
  if (nports < 1) fail(Errc::BadInput, "chain requires at least one port");
  if (nports == 1) {
    resolve(0, in_edge);
    return;
  }
  int cur = in_edge;
  for (int i = 0; i + 2 < nports; ++i) {
    const int port = g.add_edge(1);
    const int link = g.add_edge(1);
    g.add_node(cur, {port, link}, is_check ? kChk2 : kEq2);
    resolve(i, port);
    cur = link;
  }
  const int a = g.add_edge(1);
  const int b = g.add_edge(1);
  g.add_node(cur, {a, b}, is_check ? kChk2 : kEq2);
  resolve(nports - 2, a);
  resolve(nports - 1, b);
}

// Linear channel assembly: symbols are input bits followed by fresh random
// bits; every output column is a GF(2) combination of symbols. emit() fails
// if the symbols are not independent in the output map.
struct ChannelBuilder {
  int n_inputs = 0;
  int n_symbols = 0;
  std::vector<std::uint64_t> cols;

  int add_input() {
    if (n_symbols != n_inputs) fail(Errc::BadInput, "inputs must be added first");
    ++n_inputs;
    return n_symbols++;
  }
  int add_random() { return n_symbols++; }
  static std::uint64_t bit(int sym) { return std::uint64_t{1} << sym; }
  void add_col(std::uint64_t mask) { cols.push_back(mask); }

  BitMatrix emit() const {
    BitMatrix g(n_symbols, static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (int i = 0; i < n_symbols; ++i)
        if ((cols[j] >> i) & 1u) g.set(i, static_cast<int>(j), 1);
    if (gf2::rank(g) != n_symbols)
      fail(Errc::RankDeficient, "constructed node is not a valid random encoder");
    return g;
  }
};

bool bit_identically_zero_h(const BitMatrix& h, int bit) {
  BitMatrix e(1, h.cols());
  e.set(0, bit - 1, 1);
  return gf2::rank(h) == gf2::rank(h.vstack(e));
}

BitMatrix drop_zero_rows(const BitMatrix& h) {
  BitMatrix out(0, h.cols());
  for (int r = 0; r < h.rows(); ++r)
    if (h.row_mask(r) != 0) {
      BitMatrix row(1, h.cols());
      row.set_row_mask(0, h.row_mask(r));
      out = out.vstack(row);
    }
  return out;
}

}  // namespace

TannerGraph TannerGraph::from_parity(const BitMatrix& h) {
  TannerGraph tg;
  tg.n = h.cols();
  tg.m = h.rows();
  tg.h = h;
  tg.var_checks.assign(static_cast<std::size_t>(tg.n), {});
  tg.check_vars.assign(static_cast<std::size_t>(tg.m), {});
  for (int r = 0; r < tg.m; ++r)
    for (int c = 0; c < tg.n; ++c)
      if (h.get(r, c)) {
        tg.var_checks[static_cast<std::size_t>(c)].push_back(r);
        tg.check_vars[static_cast<std::size_t>(r)].push_back(c);
      }
  return tg;
}

int TannerGraph::edge_count() const {
  int e = 0;
  for (const auto& v : var_checks) e += static_cast<int>(v.size());
  return e;
}

// ---------------------------------------------------------------------------
// Tree Tanner construction
// ---------------------------------------------------------------------------

namespace {

struct TreeBuilder {
  const TannerGraph& tg;
  Mpg g;
  std::vector<int> leaf_by_pos;

  explicit TreeBuilder(const TannerGraph& t) : tg(t), leaf_by_pos(static_cast<std::size_t>(t.n), -1) {}

  void var_ports(int v, int from_check, int in_edge) {
    std::vector<int> checks;
    for (int c : tg.var_checks[static_cast<std::size_t>(v)])
      if (c != from_check) checks.push_back(c);
    const int nports = 1 + static_cast<int>(checks.size());
    emit_chain(g, in_edge, nports, false, [&](int i, int edge) {
      if (i == 0)
        leaf_by_pos[static_cast<std::size_t>(v)] = edge;
      else
        check_ports(checks[static_cast<std::size_t>(i - 1)], v, edge);
    });
  }

  void check_ports(int c, int from_var, int in_edge) {
    std::vector<int> vars;
    for (int u : tg.check_vars[static_cast<std::size_t>(c)])
      if (u != from_var) vars.push_back(u);
    if (vars.empty()) fail(Errc::BadInput, "parity check of degree 1 is unsupported");
    emit_chain(g, in_edge, static_cast<int>(vars.size()), true,
               [&](int i, int edge) { var_ports(vars[static_cast<std::size_t>(i)], c, edge); });
  }
};

}  // namespace

mpg::Mpg mpg_from_tree_tanner(const BitMatrix& h_in, int bit) {
  const BitMatrix h = drop_zero_rows(h_in);
  if (bit < 1 || bit > h.cols()) fail(Errc::OutOfRange, "bit index out of range");
  const TannerGraph tg = TannerGraph::from_parity(h);
  for (int r = 0; r < tg.m; ++r)
    if (tg.check_vars[static_cast<std::size_t>(r)].size() < 2)
      fail(Errc::BadInput, "parity check of degree 1 is unsupported");
  if (bit_identically_zero_h(h, bit)) fail(Errc::BitIdenticallyZero, "codeword bit is constant zero");

  // connected tree?
  const int nodes = tg.n + tg.m;
  std::vector<char> seen_v(static_cast<std::size_t>(tg.n), 0), seen_c(static_cast<std::size_t>(tg.m), 0);
  std::vector<int> stack = {bit - 1};
  seen_v[static_cast<std::size_t>(bit - 1)] = 1;
  int reached = 1;
  std::vector<std::pair<char, int>> frontier = {{0, bit - 1}};
  while (!frontier.empty()) {
    auto [is_check, id] = frontier.back();
    frontier.pop_back();
    if (!is_check) {
      for (int c : tg.var_checks[static_cast<std::size_t>(id)])
        if (!seen_c[static_cast<std::size_t>(c)]) {
          seen_c[static_cast<std::size_t>(c)] = 1;
          ++reached;
          frontier.push_back({1, c});
        }
    } else {
      for (int v : tg.check_vars[static_cast<std::size_t>(id)])
        if (!seen_v[static_cast<std::size_t>(v)]) {
          seen_v[static_cast<std::size_t>(v)] = 1;
          ++reached;
          frontier.push_back({0, v});
        }
    }
  }
  if (reached != nodes || tg.edge_count() != nodes - 1)
    fail(Errc::NotATree, "Tanner graph is not a connected tree");

  TreeBuilder tb(tg);
  const int root = tb.g.add_edge(1);
  tb.g.root_edge = root;
  tb.var_ports(bit - 1, -1, root);
  for (int p = 0; p < tg.n; ++p) {
    if (tb.leaf_by_pos[static_cast<std::size_t>(p)] < 0) fail(Errc::NotATree, "unreached codeword position");
    tb.g.leaf_edges.push_back(tb.leaf_by_pos[static_cast<std::size_t>(p)]);
  }
  mpg::validate(tb.g);
  return std::move(tb.g);
}

// ---------------------------------------------------------------------------
// Single-cycle Tanner construction
// ---------------------------------------------------------------------------

namespace {

// Tanner graph with mergeable equality supernodes (several codeword
// positions per equality node, created when degree-2 checks are removed).
struct SuperGraph {
  struct ENode {
    std::vector<int> positions;
    std::vector<int> checks;
    bool alive = true;
  };
  struct CNode {
    std::vector<int> evars;
    bool alive = true;
  };
  std::vector<ENode> eqs;
  std::vector<CNode> chks;

  static SuperGraph from_tanner(const TannerGraph& tg) {
    SuperGraph sg;
    sg.eqs.resize(static_cast<std::size_t>(tg.n));
    sg.chks.resize(static_cast<std::size_t>(tg.m));
    for (int v = 0; v < tg.n; ++v) {
      sg.eqs[static_cast<std::size_t>(v)].positions = {v};
      sg.eqs[static_cast<std::size_t>(v)].checks = tg.var_checks[static_cast<std::size_t>(v)];
    }
    for (int c = 0; c < tg.m; ++c) sg.chks[static_cast<std::size_t>(c)].evars = tg.check_vars[static_cast<std::size_t>(c)];
    return sg;
  }

  // removes degree-2 checks by merging their two equality endpoints
  void peel_degree2_checks() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t c = 0; c < chks.size(); ++c) {
        if (!chks[c].alive || chks[c].evars.size() != 2) continue;
        const int a = chks[c].evars[0], b = chks[c].evars[1];
        if (a == b) fail(Errc::NotUnicyclic, "degree-2 check forms a trivial cycle");
        chks[c].alive = false;
        // merge b into a
        auto& ea = eqs[static_cast<std::size_t>(a)];
        auto& eb = eqs[static_cast<std::size_t>(b)];
        ea.positions.insert(ea.positions.end(), eb.positions.begin(), eb.positions.end());
        for (int cc : eb.checks)
          if (cc != static_cast<int>(c)) ea.checks.push_back(cc);
        auto it = std::find(ea.checks.begin(), ea.checks.end(), static_cast<int>(c));
        if (it != ea.checks.end()) ea.checks.erase(it);
        eb.alive = false;
        for (auto& ch : chks) {
          if (!ch.alive) continue;
          for (int& e : ch.evars)
            if (e == b) e = a;
          std::sort(ch.evars.begin(), ch.evars.end());
          if (std::adjacent_find(ch.evars.begin(), ch.evars.end()) != ch.evars.end())
            fail(Errc::NotUnicyclic, "cycle-removal merge created a double edge");
        }
        changed = true;
        break;
      }
    }
  }
};

// ring node handle: (is_check, id)
using RingNode = std::pair<bool, int>;

struct UniBuilder {
  const SuperGraph& sg;
  Mpg g;
  std::vector<int> leaf_by_pos;
  std::vector<RingNode> ring;           // rotated so ring[0] = entry
  std::vector<char> eq_on_ring, chk_on_ring;

  UniBuilder(const SuperGraph& s, int n) : sg(s), leaf_by_pos(static_cast<std::size_t>(n), -1) {}

  bool on_ring(bool is_check, int id) const {
    return is_check ? chk_on_ring[static_cast<std::size_t>(id)] : eq_on_ring[static_cast<std::size_t>(id)];
  }

  // hanging legs of a ring equality node: its leaves plus off-ring checks
  void eq_hanging(int e, int in_edge) {
    const auto& node = sg.eqs[static_cast<std::size_t>(e)];
    std::vector<int> checks;
    for (int c : node.checks)
      if (!chk_on_ring[static_cast<std::size_t>(c)]) checks.push_back(c);
    const int nports = static_cast<int>(node.positions.size() + checks.size());
    emit_chain(g, in_edge, nports, false, [&](int i, int edge) {
      if (i < static_cast<int>(node.positions.size()))
        leaf_by_pos[static_cast<std::size_t>(node.positions[static_cast<std::size_t>(i)])] = edge;
      else
        check_sub(checks[static_cast<std::size_t>(i - static_cast<int>(node.positions.size()))], e, edge);
    });
  }

  void chk_hanging(int c, int in_edge) {
    const auto& node = sg.chks[static_cast<std::size_t>(c)];
    std::vector<int> evars;
    for (int e : node.evars)
      if (!eq_on_ring[static_cast<std::size_t>(e)]) evars.push_back(e);
    if (evars.empty()) fail(Errc::NotUnicyclic, "ring check without hanging legs");
    emit_chain(g, in_edge, static_cast<int>(evars.size()), true,
               [&](int i, int edge) { eq_sub(evars[static_cast<std::size_t>(i)], c, edge); });
  }

  // ordinary (off-ring) tree descent; entering a ring node triggers the ring
  void eq_sub(int e, int from_check, int in_edge) {
    if (eq_on_ring[static_cast<std::size_t>(e)]) {
      start_ring(RingNode{false, e}, from_check, in_edge);
      return;
    }
    const auto& node = sg.eqs[static_cast<std::size_t>(e)];
    std::vector<int> checks;
    for (int c : node.checks)
      if (c != from_check) checks.push_back(c);
    const int nports = static_cast<int>(node.positions.size() + checks.size());
    emit_chain(g, in_edge, nports, false, [&](int i, int edge) {
      if (i < static_cast<int>(node.positions.size()))
        leaf_by_pos[static_cast<std::size_t>(node.positions[static_cast<std::size_t>(i)])] = edge;
      else
        check_sub(checks[static_cast<std::size_t>(i - static_cast<int>(node.positions.size()))], e, edge);
    });
  }

  void check_sub(int c, int from_eq, int in_edge) {
    if (chk_on_ring[static_cast<std::size_t>(c)]) {
      start_ring(RingNode{true, c}, from_eq, in_edge);
      return;
    }
    const auto& node = sg.chks[static_cast<std::size_t>(c)];
    std::vector<int> evars;
    for (int e : node.evars)
      if (e != from_eq) evars.push_back(e);
    if (evars.empty()) fail(Errc::BadInput, "parity check of degree 1 is unsupported");
    emit_chain(g, in_edge, static_cast<int>(evars.size()), true,
               [&](int i, int edge) { eq_sub(evars[static_cast<std::size_t>(i)], c, edge); });
  }

  // entry node: chain its hanging legs, ending in a core node that emits the
  // 2-bit bundle into the flattened ring
  void start_ring(RingNode entry, int from, int in_edge) {
    // rotate the ring so that `entry` is first
    auto it = std::find(ring.begin(), ring.end(), entry);
    if (it == ring.end()) fail(Errc::NotUnicyclic, "entry node not on the ring");
    std::rotate(ring.begin(), it, ring.end());

    std::vector<int> leaf_ports;  // positions (equality entry only)
    std::vector<int> sub_ports;   // neighbor ids off the ring, minus `from`
    if (!entry.first) {
      const auto& node = sg.eqs[static_cast<std::size_t>(entry.second)];
      leaf_ports = node.positions;
      for (int c : node.checks)
        if (c != from && !chk_on_ring[static_cast<std::size_t>(c)]) sub_ports.push_back(c);
    } else {
      const auto& node = sg.chks[static_cast<std::size_t>(entry.second)];
      for (int e : node.evars)
        if (e != from && !eq_on_ring[static_cast<std::size_t>(e)]) sub_ports.push_back(e);
    }
    const int nports = static_cast<int>(leaf_ports.size() + sub_ports.size()) + 1;
    emit_chain(g, in_edge, nports, entry.first, [&](int i, int edge) {
      if (i < static_cast<int>(leaf_ports.size())) {
        leaf_by_pos[static_cast<std::size_t>(leaf_ports[static_cast<std::size_t>(i)])] = edge;
      } else if (i < nports - 1) {
        const int id = sub_ports[static_cast<std::size_t>(i - static_cast<int>(leaf_ports.size()))];
        if (!entry.first)
          check_sub(id, entry.second, edge);
        else
          eq_sub(id, entry.second, edge);
      } else {
        // core: turn the 1-bit feed into the 2-bit ring bundle
        const int bundle = g.add_edge(2);
        g.add_node(edge, {bundle}, entry.first ? kChk2 : kEq2);
        emit_ring(bundle);
      }
    });
  }

  // the flattened ring: same-type pairs, then the 3-node merge at the far end
  void emit_ring(int bundle_in) {
    const int t = static_cast<int>(ring.size()) / 2;
    if (t < 2) fail(Errc::NotUnicyclic, "cycle too short to flatten");
    int cur = bundle_in;
    for (int j = 1; j + 1 < t; ++j) {
      const RingNode top = ring[static_cast<std::size_t>(j)];
      const RingNode bot = ring[static_cast<std::size_t>(2 * t - j)];
      if (top.first != bot.first) fail(Errc::NotUnicyclic, "cycle does not alternate");
      const int e_top = g.add_edge(1);
      const int e_next = g.add_edge(2);
      const int e_bot = g.add_edge(1);
      if (!top.first) {
        // two equality nodes: (E_t, w_t, w_b, E_b) = (z1, z1, z2, z2)
        g.add_node(cur, {e_top, e_next, e_bot}, BitMatrix{{1, 1, 0, 0}, {0, 0, 1, 1}});
        eq_hanging(top.second, e_top);
        eq_hanging(bot.second, e_bot);
      } else {
        // two check nodes: (F_t, w_t, w_b, F_b) = (r1, z1+r1, z2+r2, r2)
        g.add_node(cur, {e_top, e_next, e_bot},
                   BitMatrix{{0, 1, 0, 0}, {0, 0, 1, 0}, {1, 1, 0, 0}, {0, 0, 1, 1}});
        chk_hanging(top.second, e_top);
        chk_hanging(bot.second, e_bot);
      }
      cur = e_next;
    }
    // far-end merge of (ring[t-1], ring[t], ring[t+1])
    const RingNode top = ring[static_cast<std::size_t>(t - 1)];
    const RingNode far = ring[static_cast<std::size_t>(t)];
    const RingNode bot = ring[static_cast<std::size_t>(t + 1)];
    if (top.first != bot.first || top.first == far.first)
      fail(Errc::NotUnicyclic, "cycle does not alternate");
    const int e_top = g.add_edge(1);
    const int e_far = g.add_edge(1);
    const int e_bot = g.add_edge(1);
    if (far.first) {
      // equality pair + far check: (E_t, F, E_b) = (z1, z1+z2, z2)
      g.add_node(cur, {e_top, e_far, e_bot}, BitMatrix{{1, 1, 0}, {0, 1, 1}});
      eq_hanging(top.second, e_top);
      chk_hanging(far.second, e_far);
      eq_hanging(bot.second, e_bot);
    } else {
      // check pair + far equality: (F_t, E, F_b) = (z1+r, r, z2+r)
      g.add_node(cur, {e_top, e_far, e_bot}, BitMatrix{{1, 0, 0}, {0, 0, 1}, {1, 1, 1}});
      chk_hanging(top.second, e_top);
      eq_hanging(far.second, e_far);
      chk_hanging(bot.second, e_bot);
    }
  }
};

}  // namespace

mpg::Mpg mpg_from_unicyclic_tanner(const BitMatrix& h_in, int bit) {
  // redundant parity rows create spurious cycles; reduce first
  BitMatrix h = drop_zero_rows(h_in);
  {
    BitMatrix reduced(0, h.cols());
    for (int r = 0; r < h.rows(); ++r) {
      BitMatrix row(1, h.cols());
      row.set_row_mask(0, h.row_mask(r));
      BitMatrix cand = reduced.vstack(row);
      if (gf2::rank(cand) == cand.rows()) reduced = cand;
    }
    h = reduced;
  }
  if (bit < 1 || bit > h.cols()) fail(Errc::OutOfRange, "bit index out of range");
  const TannerGraph tg = TannerGraph::from_parity(h);
  for (int r = 0; r < tg.m; ++r)
    if (tg.check_vars[static_cast<std::size_t>(r)].size() < 2)
      fail(Errc::BadInput, "parity check of degree 1 is unsupported");
  if (bit_identically_zero_h(h, bit)) fail(Errc::BitIdenticallyZero, "codeword bit is constant zero");

  SuperGraph sg = SuperGraph::from_tanner(tg);
  sg.peel_degree2_checks();

  // degrees on the peeled supergraph
  int alive_nodes = 0, edges = 0;
  for (const auto& e : sg.eqs)
    if (e.alive) {
      ++alive_nodes;
      edges += static_cast<int>(e.checks.size());
    }
  for (const auto& c : sg.chks)
    if (c.alive) ++alive_nodes;

  if (edges == alive_nodes - 1) return mpg_from_tree_tanner(h, bit);  // cycle was spurious
  if (edges != alive_nodes) fail(Errc::NotUnicyclic, "Tanner graph has more than one cycle");

  // find the ring: strip leaves iteratively
  std::vector<int> eq_deg(sg.eqs.size(), 0), chk_deg(sg.chks.size(), 0);
  for (std::size_t e = 0; e < sg.eqs.size(); ++e)
    if (sg.eqs[e].alive) eq_deg[e] = static_cast<int>(sg.eqs[e].checks.size());
  for (std::size_t c = 0; c < sg.chks.size(); ++c)
    if (sg.chks[c].alive) chk_deg[c] = static_cast<int>(sg.chks[c].evars.size());
  std::vector<char> eq_ring(sg.eqs.size(), 0), chk_ring(sg.chks.size(), 0);
  for (std::size_t e = 0; e < sg.eqs.size(); ++e) eq_ring[e] = sg.eqs[e].alive;
  for (std::size_t c = 0; c < sg.chks.size(); ++c) chk_ring[c] = sg.chks[c].alive;
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (std::size_t e = 0; e < sg.eqs.size(); ++e)
      if (eq_ring[e] && eq_deg[e] <= 1) {
        eq_ring[e] = 0;
        stripped = true;
        for (int c : sg.eqs[e].checks)
          if (chk_ring[static_cast<std::size_t>(c)]) --chk_deg[static_cast<std::size_t>(c)];
      }
    for (std::size_t c = 0; c < sg.chks.size(); ++c)
      if (chk_ring[c] && chk_deg[c] <= 1) {
        chk_ring[c] = 0;
        stripped = true;
        for (int e : sg.chks[c].evars)
          if (eq_ring[static_cast<std::size_t>(e)]) --eq_deg[static_cast<std::size_t>(e)];
      }
  }

  // walk the ring into an ordered list
  std::vector<RingNode> ring;
  RingNode start{false, -1};
  for (std::size_t e = 0; e < sg.eqs.size(); ++e)
    if (eq_ring[e]) {
      start = {false, static_cast<int>(e)};
      break;
    }
  if (start.second < 0) fail(Errc::NotUnicyclic, "no cycle found");
  RingNode prev{false, -1}, cur = start;
  do {
    ring.push_back(cur);
    RingNode next{false, -1};
    if (!cur.first) {
      std::vector<int> cand;
      for (int c : sg.eqs[static_cast<std::size_t>(cur.second)].checks)
        if (chk_ring[static_cast<std::size_t>(c)] && !(prev.first && prev.second == c)) cand.push_back(c);
      std::sort(cand.begin(), cand.end());
      if (cand.empty()) fail(Errc::NotUnicyclic, "broken ring");
      next = {true, cand.front()};
    } else {
      std::vector<int> cand;
      for (int e : sg.chks[static_cast<std::size_t>(cur.second)].evars)
        if (eq_ring[static_cast<std::size_t>(e)] && !(!prev.first && prev.second == e)) cand.push_back(e);
      std::sort(cand.begin(), cand.end());
      if (cand.empty()) fail(Errc::NotUnicyclic, "broken ring");
      next = {false, cand.front()};
    }
    prev = cur;
    cur = next;
  } while (cur != start);

  UniBuilder ub(sg, tg.n);
  ub.ring = std::move(ring);
  ub.eq_on_ring = eq_ring;
  ub.chk_on_ring = chk_ring;

  // locate the supernode holding the root position
  int root_eq = -1;
  for (std::size_t e = 0; e < sg.eqs.size(); ++e)
    if (sg.eqs[e].alive)
      for (int p : sg.eqs[e].positions)
        if (p == bit - 1) root_eq = static_cast<int>(e);
  if (root_eq < 0) fail(Errc::BadInput, "root position vanished during preprocessing");

  const int root = ub.g.add_edge(1);
  ub.g.root_edge = root;
  ub.eq_sub(root_eq, -1, root);
  for (int p = 0; p < tg.n; ++p) {
    if (ub.leaf_by_pos[static_cast<std::size_t>(p)] < 0) fail(Errc::NotUnicyclic, "unreached codeword position");
    ub.g.leaf_edges.push_back(ub.leaf_by_pos[static_cast<std::size_t>(p)]);
  }
  mpg::validate(ub.g);
  return std::move(ub.g);
}

// ---------------------------------------------------------------------------
// MSGM chain construction
// ---------------------------------------------------------------------------

namespace {

struct MsgmLayout {
  int n, k;
  std::vector<int> left, right;             // 1-based spans per row
  std::vector<std::vector<int>> active;     // active[p], p = 1..n (index 0 unused)
  std::vector<std::vector<int>> bundle;     // bundle[b], b = 0..n
};

MsgmLayout msgm_layout(const BitMatrix& g) {
  MsgmLayout lay;
  lay.n = g.cols();
  lay.k = g.rows();
  lay.left.resize(static_cast<std::size_t>(lay.k));
  lay.right.resize(static_cast<std::size_t>(lay.k));
  for (int r = 0; r < lay.k; ++r) {
    const gf2::SpanInfo s = gf2::row_span(g, r);
    lay.left[static_cast<std::size_t>(r)] = s.left;
    lay.right[static_cast<std::size_t>(r)] = s.right;
  }
  lay.active.assign(static_cast<std::size_t>(lay.n) + 1, {});
  for (int p = 1; p <= lay.n; ++p)
    for (int r = 0; r < lay.k; ++r)
      if (lay.left[static_cast<std::size_t>(r)] <= p && p <= lay.right[static_cast<std::size_t>(r)])
        lay.active[static_cast<std::size_t>(p)].push_back(r);
  lay.bundle.assign(static_cast<std::size_t>(lay.n) + 1, {});
  for (int b = 1; b < lay.n; ++b)
    for (int r = 0; r < lay.k; ++r)
      if (lay.left[static_cast<std::size_t>(r)] <= b && lay.right[static_cast<std::size_t>(r)] >= b + 1)
        lay.bundle[static_cast<std::size_t>(b)].push_back(r);
  return lay;
}

}  // namespace

MsgmMpg mpg_from_msgm(const BitMatrix& g_msgm, int bit,
                      const std::vector<std::pair<int, int>>& merge_groups) {
  const int n = g_msgm.cols(), k = g_msgm.rows();
  if (!gf2::has_lr_property(g_msgm)) fail(Errc::NotLR, "matrix does not satisfy the LR property");
  if (bit < 1 || bit > n) fail(Errc::OutOfRange, "bit index out of range");
  {
    bool nonzero = false;
    for (int r = 0; r < k; ++r) nonzero = nonzero || g_msgm.get(r, bit - 1);
    if (!nonzero) fail(Errc::BitIdenticallyZero, "codeword bit is constant zero");
  }
  const MsgmLayout lay = msgm_layout(g_msgm);

  // groups: consecutive intervals covering 1..n
  std::vector<std::pair<int, int>> groups = merge_groups;
  if (groups.empty())
    for (int p = 1; p <= n; ++p) groups.push_back({p, p});
  int expect = 1;
  for (const auto& [lo, hi] : groups) {
    if (lo != expect || hi < lo || hi > n) fail(Errc::BadInput, "merge groups must partition 1..n");
    expect = hi + 1;
  }
  if (expect != n + 1) fail(Errc::BadInput, "merge groups must partition 1..n");
  int gi = -1;
  for (std::size_t t = 0; t < groups.size(); ++t)
    if (groups[t].first <= bit && bit <= groups[t].second) gi = static_cast<int>(t);

  MsgmMpg out;
  Mpg& g = out.mpg;

  // special case: [1,1]-style single position; the identity channel
  if (n == 1) {
    const int e = g.add_edge(1);
    g.root_edge = e;
    g.leaf_edges = {e};
    out.node_cases = {};
    mpg::validate(g);
    return out;
  }

  const int root_edge = g.add_edge(1);
  g.root_edge = root_edge;

  // X_p leaf edges
  std::vector<int> leaf_edge(static_cast<std::size_t>(n) + 1, -1);
  for (int p = 1; p <= n; ++p) leaf_edge[static_cast<std::size_t>(p)] = g.add_edge(1);

  // positions outside the union of row spans are identically zero in every
  // codeword; their leaves are emitted as zero columns of the root node and
  // the chain is truncated at the last live group on each side
  int lmin = n + 1, rmax = 0;
  for (int r = 0; r < k; ++r) {
    lmin = std::min(lmin, lay.left[static_cast<std::size_t>(r)]);
    rmax = std::max(rmax, lay.right[static_cast<std::size_t>(r)]);
  }
  const int ng = static_cast<int>(groups.size());
  int t_left = gi, t_right = gi;
  while (t_left > 0 && groups[static_cast<std::size_t>(t_left - 1)].second >= lmin) --t_left;
  while (t_right + 1 < ng && groups[static_cast<std::size_t>(t_right + 1)].first <= rmax) ++t_right;
  std::vector<int> dead_positions;
  for (int t = 0; t < t_left; ++t)
    for (int p = groups[static_cast<std::size_t>(t)].first; p <= groups[static_cast<std::size_t>(t)].second; ++p)
      dead_positions.push_back(p);
  for (int t = t_right + 1; t < ng; ++t)
    for (int p = groups[static_cast<std::size_t>(t)].first; p <= groups[static_cast<std::size_t>(t)].second; ++p)
      dead_positions.push_back(p);

  // boundary edges between consecutive live groups (bridge width 1 when beta = 0)
  std::vector<int> bedge(static_cast<std::size_t>(ng), -1);  // bedge[t] = edge after group t
  std::vector<char> bridged(static_cast<std::size_t>(ng), 0);
  for (int t = t_left; t < t_right; ++t) {
    const int b = groups[static_cast<std::size_t>(t)].second;
    const int beta = static_cast<int>(lay.bundle[static_cast<std::size_t>(b)].size());
    bridged[static_cast<std::size_t>(t)] = beta == 0;
    bedge[static_cast<std::size_t>(t)] = g.add_edge(beta == 0 ? 1 : beta);
  }

  // builds the node of group t; returns its generator matrix and records the
  // out-edge list. `toward` = -1 when the root lies to the left, +1 to the
  // right, 0 for the root group itself.
  auto build_group = [&](int t, int toward) {
    const auto [lo, hi] = groups[static_cast<std::size_t>(t)];
    ChannelBuilder cb;
    std::vector<std::uint64_t> mask(static_cast<std::size_t>(k), 0);

    std::vector<int> in_rows;
    if (toward == -1)  // fed from the left boundary
      in_rows = lay.bundle[static_cast<std::size_t>(lo - 1)];
    else if (toward == +1)
      in_rows = lay.bundle[static_cast<std::size_t>(hi)];

    // rows alive anywhere in this group
    std::vector<int> rows_here;
    for (int r = 0; r < k; ++r)
      if (lay.left[static_cast<std::size_t>(r)] <= hi && lay.right[static_cast<std::size_t>(r)] >= lo)
        rows_here.push_back(r);

    bool pass_through = false;
    {
      const bool bridge_in = toward == -1 ? bridged[static_cast<std::size_t>(t - 1)] : bridged[static_cast<std::size_t>(t)];
      std::vector<int> fresh;
      for (int r : rows_here) {
        const bool starts_here = toward == -1
                                     ? (lay.left[static_cast<std::size_t>(r)] >= lo)
                                     : (lay.right[static_cast<std::size_t>(r)] <= hi);
        if (!starts_here) continue;
        fresh.push_back(r);
      }
      if (bridge_in) {
        const int in_sym = cb.add_input();
        if (fresh.empty()) {
          // a span-free stretch: forward the bridge bit to the far side
          pass_through = true;
          (void)in_sym;
        } else {
          mask[static_cast<std::size_t>(fresh.front())] = ChannelBuilder::bit(in_sym);
          for (std::size_t i = 1; i < fresh.size(); ++i)
            mask[static_cast<std::size_t>(fresh[i])] = ChannelBuilder::bit(cb.add_random());
        }
      } else {
        for (int r : in_rows) mask[static_cast<std::size_t>(r)] = ChannelBuilder::bit(cb.add_input());
        for (int r : fresh) mask[static_cast<std::size_t>(r)] = ChannelBuilder::bit(cb.add_random());
      }
    }

    // output columns and edges
    std::vector<int> outs;
    auto add_bundle_out = [&](int t_edge_idx) {
      const int e = bedge[static_cast<std::size_t>(t_edge_idx)];
      const int b = groups[static_cast<std::size_t>(t_edge_idx)].second;
      outs.push_back(e);
      if (bridged[static_cast<std::size_t>(t_edge_idx)]) {
        cb.add_col(pass_through ? ChannelBuilder::bit(0) : ChannelBuilder::bit(cb.add_random()));
      } else {
        for (int r : lay.bundle[static_cast<std::size_t>(b)]) cb.add_col(mask[static_cast<std::size_t>(r)]);
      }
    };

    if (toward == +1 && t > t_left) add_bundle_out(t - 1);  // left boundary, away from root
    for (int p = lo; p <= hi; ++p) {
      std::uint64_t col = 0;
      for (int r : lay.active[static_cast<std::size_t>(p)])
        if (g_msgm.get(r, p - 1)) col ^= mask[static_cast<std::size_t>(r)];
      outs.push_back(leaf_edge[static_cast<std::size_t>(p)]);
      cb.add_col(col);
    }
    if (toward == -1 && t < t_right) add_bundle_out(t);  // right boundary, away from root
    return std::pair<BitMatrix, std::vector<int>>(cb.emit(), outs);
  };

  // Root group node. Symbols: the copied bit z plus one free bit per active
  // row, with one connected row eliminated against the copy constraint
  // X_bit = z. Random symbols whose effect on the outputs is linearly
  // dependent are dropped (uniform randomness absorbs them). When the
  // remaining outputs carry no trace of z at all, the copied bit's leaf is
  // folded into the node itself instead of a separate equality node.
  {
    const auto [lo, hi] = groups[static_cast<std::size_t>(gi)];
    std::vector<int> rows_here;
    for (int r = 0; r < k; ++r)
      if (lay.left[static_cast<std::size_t>(r)] <= hi && lay.right[static_cast<std::size_t>(r)] >= lo)
        rows_here.push_back(r);
    int pivot = -1;
    for (int r : lay.active[static_cast<std::size_t>(bit)])
      if (g_msgm.get(r, bit - 1) && pivot < 0) pivot = r;

    std::vector<std::uint64_t> mask(static_cast<std::size_t>(k), 0);
    int nsym = 1;  // symbol 0 = z
    for (int r : rows_here)
      if (r != pivot) mask[static_cast<std::size_t>(r)] = std::uint64_t{1} << nsym++;
    std::uint64_t pmask = 1;
    for (int r : lay.active[static_cast<std::size_t>(bit)])
      if (r != pivot && g_msgm.get(r, bit - 1)) pmask ^= mask[static_cast<std::size_t>(r)];
    mask[static_cast<std::size_t>(pivot)] = pmask;
    const int first_bridge_sym = nsym;
    nsym += (gi > t_left && bridged[static_cast<std::size_t>(gi - 1)] ? 1 : 0) +
            (gi < t_right && bridged[static_cast<std::size_t>(gi)] ? 1 : 0);
    if (nsym > 63) fail(Errc::TooLarge, "root section has too many symbols");

    auto assemble = [&](bool emit_xstar) {
      std::vector<std::uint64_t> cols;
      std::vector<int> outs;
      int bridge_sym = first_bridge_sym;
      for (int p = lo; p <= hi; ++p) {
        if (p == bit && !emit_xstar) continue;
        std::uint64_t col = 0;
        for (int r : lay.active[static_cast<std::size_t>(p)])
          if (g_msgm.get(r, p - 1)) col ^= mask[static_cast<std::size_t>(r)];
        outs.push_back(leaf_edge[static_cast<std::size_t>(p)]);
        cols.push_back(col);
      }
      for (int side = 0; side < 2; ++side) {
        const bool exists = side == 0 ? gi > t_left : gi < t_right;
        if (!exists) continue;
        const int bt = side == 0 ? gi - 1 : gi;
        outs.push_back(bedge[static_cast<std::size_t>(bt)]);
        if (bridged[static_cast<std::size_t>(bt)]) {
          cols.push_back(std::uint64_t{1} << bridge_sym++);
        } else {
          for (int r : lay.bundle[static_cast<std::size_t>(groups[static_cast<std::size_t>(bt)].second)])
            cols.push_back(mask[static_cast<std::size_t>(r)]);
        }
      }
      for (int p : dead_positions) {
        outs.push_back(leaf_edge[static_cast<std::size_t>(p)]);
        cols.push_back(0);
      }
      return std::pair<std::vector<std::uint64_t>, std::vector<int>>(std::move(cols), std::move(outs));
    };

    // symbol-row patterns across columns (needs one bit per column)
    auto row_patterns = [&](const std::vector<std::uint64_t>& cols) {
      if (cols.size() > 64) fail(Errc::TooLarge, "root section has too many outputs");
      std::vector<std::uint64_t> pat(static_cast<std::size_t>(nsym), 0);
      for (std::size_t j = 0; j < cols.size(); ++j)
        for (int s = 0; s < nsym; ++s)
          if ((cols[j] >> s) & 1u) pat[static_cast<std::size_t>(s)] |= std::uint64_t{1} << j;
      return pat;
    };
    // greedy XOR basis over the random symbols; returns kept symbols and
    // whether z's pattern lies inside their span
    auto reduce = [&](const std::vector<std::uint64_t>& pat) {
      std::vector<std::uint64_t> basis;
      std::vector<int> kept;
      auto insert = [&](std::uint64_t v) {
        for (std::uint64_t b : basis) v = std::min(v, v ^ b);
        if (v) basis.push_back(v);
        return v != 0;
      };
      for (int s = 1; s < nsym; ++s)
        if (insert(pat[static_cast<std::size_t>(s)])) kept.push_back(s);
      std::uint64_t z = pat[0];
      for (std::uint64_t b : basis) z = std::min(z, z ^ b);
      return std::pair<std::vector<int>, bool>(std::move(kept), z == 0);
    };

    auto [cols, outs] = assemble(false);
    auto [kept, z_dependent] = reduce(row_patterns(cols));
    const bool fold = z_dependent;
    if (fold) {
      std::tie(cols, outs) = assemble(true);
      kept = reduce(row_patterns(cols)).first;
    }
    BitMatrix gm(1 + static_cast<int>(kept.size()), static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] & 1u) gm.set(0, static_cast<int>(j), 1);
      for (std::size_t i = 0; i < kept.size(); ++i)
        if ((cols[j] >> kept[i]) & 1u) gm.set(static_cast<int>(i) + 1, static_cast<int>(j), 1);
    }
    if (gf2::rank(gm) != gm.rows())
      fail(Errc::RankDeficient, "root section reduction failed");  // should be unreachable

    if (fold) {
      g.add_node(root_edge, outs, gm);
    } else {
      const int wire = g.add_edge(1);
      g.add_node(root_edge, {leaf_edge[static_cast<std::size_t>(bit)], wire}, kEq2);
      out.node_cases.push_back("eq");
      g.add_node(wire, outs, gm);
    }
    const bool s = std::any_of(lay.left.begin(), lay.left.end(), [&](int l) { return l == bit; });
    const bool e = std::any_of(lay.right.begin(), lay.right.end(), [&](int r) { return r == bit; });
    const char* sub = (!s && !e) ? "i" : (s && !e) ? "ii" : (!s && e) ? "iii" : "iv";
    out.node_cases.push_back(lo == hi ? std::string("C.") + sub : "C.merged");
  }

  // remaining groups away from the root
  for (int t = gi - 1; t >= t_left; --t) {
    auto [gm, outs] = build_group(t, +1);
    g.add_node(bedge[static_cast<std::size_t>(t)], outs, gm);
    const auto [lo, hi] = groups[static_cast<std::size_t>(t)];
    const bool s = std::any_of(lay.right.begin(), lay.right.end(), [&](int r) { return lo <= r && r <= hi; });
    const bool e = std::any_of(lay.left.begin(), lay.left.end(), [&](int l) { return lo <= l && l <= hi; });
    const char* sub = (!s && !e) ? "i" : (s && !e) ? "ii" : (!s && e) ? "iii" : "iv";
    out.node_cases.push_back(lo == hi ? std::string("B.") + sub : "B.merged");
  }
  for (int t = gi + 1; t <= t_right; ++t) {
    auto [gm, outs] = build_group(t, -1);
    g.add_node(bedge[static_cast<std::size_t>(t - 1)], outs, gm);
    const auto [lo, hi] = groups[static_cast<std::size_t>(t)];
    const bool s = std::any_of(lay.left.begin(), lay.left.end(), [&](int l) { return lo <= l && l <= hi; });
    const bool e = std::any_of(lay.right.begin(), lay.right.end(), [&](int r) { return lo <= r && r <= hi; });
    const char* sub = (!s && !e) ? "i" : (s && !e) ? "ii" : (!s && e) ? "iii" : "iv";
    out.node_cases.push_back(lo == hi ? std::string("A.") + sub : "A.merged");
  }

  for (int p = 1; p <= n; ++p) g.leaf_edges.push_back(leaf_edge[static_cast<std::size_t>(p)]);
  mpg::validate(g);
  return out;
}

// ---------------------------------------------------------------------------
// Trellis machinery
// ---------------------------------------------------------------------------

Trellis trellis_from_msgm(const BitMatrix& g_msgm) {
  if (!gf2::has_lr_property(g_msgm)) fail(Errc::NotLR, "matrix does not satisfy the LR property");
  const MsgmLayout lay = msgm_layout(g_msgm);
  Trellis tr;
  tr.vertex_counts.resize(static_cast<std::size_t>(lay.n) + 1);
  for (int b = 0; b <= lay.n; ++b) {
    if (lay.bundle[static_cast<std::size_t>(b)].size() > 20) fail(Errc::TooLarge, "trellis state space too large");
    tr.vertex_counts[static_cast<std::size_t>(b)] = 1 << lay.bundle[static_cast<std::size_t>(b)].size();
  }
  tr.sections.resize(static_cast<std::size_t>(lay.n));
  for (int p = 1; p <= lay.n; ++p) {
    const auto& act = lay.active[static_cast<std::size_t>(p)];
    const auto& bl = lay.bundle[static_cast<std::size_t>(p - 1)];
    const auto& br = lay.bundle[static_cast<std::size_t>(p)];
    if (act.size() > 20) fail(Errc::TooLarge, "trellis section too large");
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << act.size()); ++a) {
      auto value_of = [&](int row) {
        const auto it = std::find(act.begin(), act.end(), row);
        return static_cast<int>((a >> (act.end() - it - 1)) & 1u);  // first row = MSB
      };
      int from = 0, to = 0, label = 0;
      for (int r : bl) from = (from << 1) | value_of(r);
      for (int r : br) to = (to << 1) | value_of(r);
      for (int r : act)
        if (g_msgm.get(r, p - 1)) label ^= value_of(r);
      tr.sections[static_cast<std::size_t>(p - 1)].push_back(
          Trellis::Edge{from, to, static_cast<std::uint8_t>(label)});
    }
  }
  return tr;
}

int state_dim_oracle(const BitMatrix& g, int j) {
  const int n = g.cols(), k = g.rows();
  if (j < 0 || j > n) fail(Errc::OutOfRange, "boundary index out of range");
  return gf2::rank(g.col_slice(0, j)) + gf2::rank(g.col_slice(j, n)) - k;
}

// ---------------------------------------------------------------------------
// Convolutional section factors
// ---------------------------------------------------------------------------

namespace {

std::uint32_t parse_octal(const std::string& s) {
  if (s.empty()) fail(Errc::InvalidPolynomial, "empty polynomial");
  std::uint32_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '7') fail(Errc::InvalidPolynomial, "polynomial must be octal digits");
    v = v * 8 + static_cast<std::uint32_t>(c - '0');
  }
  return v;
}

}  // namespace

ConvSections conv_trellis(const ConvCodeSpec& spec, int sections) {
  ConvSections cs;
  cs.p_mask = parse_octal(spec.p_octal);
  cs.q_mask = parse_octal(spec.q_octal);
  cs.section_count = sections;
  if (cs.p_mask == 0 || cs.q_mask == 0) fail(Errc::InvalidPolynomial, "zero polynomial");
  if ((cs.q_mask & 1u) == 0)
    fail(Errc::InvalidPolynomial, "feedback polynomial needs constant term 1");
  const int deg_p = 31 - std::countl_zero(cs.p_mask);
  const int deg_q = 31 - std::countl_zero(cs.q_mask);
  const int m = std::max(deg_p, deg_q);
  if (m < 1 || m > 16) fail(Errc::InvalidPolynomial, "memory out of supported range");
  cs.memory = m;

  const auto pbit = [&](int i) { return (cs.p_mask >> i) & 1u; };
  const auto qbit = [&](int i) { return (cs.q_mask >> i) & 1u; };

  // feedback bit a = z + sum q_i s_i; new state (a, s_1..s_{m-1});
  // parity = p_0 a + sum p_i s_i
  {
    ChannelBuilder cb;  // root: in z, out [xp, s(m), s'(m)]
    const int z = cb.add_input();
    std::vector<int> s(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) s[static_cast<std::size_t>(i)] = cb.add_random();
    std::uint64_t a = ChannelBuilder::bit(z);
    for (int i = 1; i <= m; ++i)
      if (qbit(i)) a ^= ChannelBuilder::bit(s[static_cast<std::size_t>(i - 1)]);
    std::uint64_t xp = pbit(0) ? a : 0;
    for (int i = 1; i <= m; ++i)
      if (pbit(i)) xp ^= ChannelBuilder::bit(s[static_cast<std::size_t>(i - 1)]);
    cb.add_col(xp);
    for (int i = 0; i < m; ++i) cb.add_col(ChannelBuilder::bit(s[static_cast<std::size_t>(i)]));
    cb.add_col(a);
    for (int i = 0; i < m - 1; ++i) cb.add_col(ChannelBuilder::bit(s[static_cast<std::size_t>(i)]));
    cs.root_node = cb.emit();
  }
  {
    ChannelBuilder cb;  // right of root: in s (m), out [xs, xp, s'(m)]
    std::vector<int> s(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) s[static_cast<std::size_t>(i)] = cb.add_input();
    const int z = cb.add_random();
    std::uint64_t a = ChannelBuilder::bit(z);
    for (int i = 1; i <= m; ++i)
      if (qbit(i)) a ^= ChannelBuilder::bit(s[static_cast<std::size_t>(i - 1)]);
    std::uint64_t xp = pbit(0) ? a : 0;
    for (int i = 1; i <= m; ++i)
      if (pbit(i)) xp ^= ChannelBuilder::bit(s[static_cast<std::size_t>(i - 1)]);
    cb.add_col(ChannelBuilder::bit(z));
    cb.add_col(xp);
    cb.add_col(a);
    for (int i = 0; i < m - 1; ++i) cb.add_col(ChannelBuilder::bit(s[static_cast<std::size_t>(i)]));
    cs.bulk_away_right = cb.emit();
  }
  {
    ChannelBuilder cb;  // left of root: in s' (m), out [xs, xp, s(m)]
    std::vector<int> t(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) t[static_cast<std::size_t>(i)] = cb.add_input();
    const int r = cb.add_random();  // the bit shifted out, s_m
    std::vector<std::uint64_t> s(static_cast<std::size_t>(m));
    for (int i = 0; i < m - 1; ++i) s[static_cast<std::size_t>(i)] = ChannelBuilder::bit(t[static_cast<std::size_t>(i + 1)]);
    s[static_cast<std::size_t>(m - 1)] = ChannelBuilder::bit(r);
    const std::uint64_t a = ChannelBuilder::bit(t[0]);
    std::uint64_t xs = a;
    for (int i = 1; i <= m; ++i)
      if (qbit(i)) xs ^= s[static_cast<std::size_t>(i - 1)];
    std::uint64_t xp = pbit(0) ? a : 0;
    for (int i = 1; i <= m; ++i)
      if (pbit(i)) xp ^= s[static_cast<std::size_t>(i - 1)];
    cb.add_col(xs);
    cb.add_col(xp);
    for (int i = 0; i < m; ++i) cb.add_col(s[static_cast<std::size_t>(i)]);
    cs.bulk_away_left = cb.emit();
  }
  return cs;
}

std::pair<int, std::uint64_t> conv_transition(const ConvSections& cs, int sys_bit,
                                              std::uint64_t state) {
  const int m = cs.memory;
  int a = sys_bit & 1;
  for (int i = 1; i <= m; ++i)
    if ((cs.q_mask >> i) & 1u) a ^= static_cast<int>((state >> (m - i)) & 1u);
  int xp = (cs.p_mask & 1u) ? a : 0;
  for (int i = 1; i <= m; ++i)
    if ((cs.p_mask >> i) & 1u) xp ^= static_cast<int>((state >> (m - i)) & 1u);
  const std::uint64_t next = (static_cast<std::uint64_t>(a) << (m - 1)) | (state >> 1);
  return {xp, next};
}

}  // namespace bpqm::graphs
