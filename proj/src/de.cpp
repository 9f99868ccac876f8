#include "bpqm/de.hpp"

#include <bit>
#include <cmath>
#include <thread>

#include "bpqm/kernels.hpp"
#include "bpqm/rng.hpp"

namespace bpqm::de {

ChannelParam channel_param(double omega) {
  if (!(omega >= 0.0 && omega <= 0.5)) fail(Errc::OutOfRange, "omega must be in [0, 1/2]");
  return ChannelParam{omega, 0.5 - std::sqrt(omega * (1.0 - omega))};
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

namespace {

double bisect_decreasing(double (*f)(double), double target, double lo, double hi) {
  // f decreasing on [lo, hi], f(lo) >= target >= f(hi)
  for (int it = 0; it < 200 && hi - lo > 1e-7 / 2; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double shannon_curve(double omega) { return 1.0 - binary_entropy(omega); }
double holevo_curve(double omega) { return binary_entropy(0.5 - std::sqrt(omega * (1.0 - omega))); }

}  // namespace

double shannon_limit(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) fail(Errc::OutOfRange, "rate must be in (0,1)");
  return bisect_decreasing(shannon_curve, rate, 0.0, 0.5);
}

double holevo_limit(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) fail(Errc::OutOfRange, "rate must be in (0,1)");
  return bisect_decreasing(holevo_curve, rate, 0.0, 0.5);
}

WindowGraph build_window(const graphs::ConvCodeSpec& family, int w) {
  if (w < 0) fail(Errc::OutOfRange, "window size must be >= 0");
  const graphs::ConvSections cs = graphs::conv_trellis(family, 2 * w + 1);
  const int m = cs.memory;

  WindowGraph wg;
  wg.w = w;
  wg.memory = m;
  wg.graph = std::make_shared<mpg::Mpg>();
  mpg::Mpg& g = *wg.graph;

  auto add_leaf = [&](int width, WindowGraph::Role role) {
    const int e = g.add_edge(width);
    g.leaf_edges.push_back(e);
    wg.roles.push_back(role);
    return e;
  };

  const int root = g.add_edge(1);
  g.root_edge = root;
  const int xp0 = add_leaf(1, WindowGraph::Role::Parity);
  const int state_l = w > 0 ? g.add_edge(m) : add_leaf(m, WindowGraph::Role::Boundary);
  const int state_r = w > 0 ? g.add_edge(m) : add_leaf(m, WindowGraph::Role::Boundary);
  g.add_node(root, {xp0, state_l, state_r}, cs.root_node);

  // neighbor systematic bit: equality node over channel + extrinsic leaves
  auto add_sys_eq = [&](int xs_edge) {
    const int chan = add_leaf(1, WindowGraph::Role::SysChannel);
    const int extr = add_leaf(1, WindowGraph::Role::SysExtrinsic);
    wg.extrinsic_leaf.push_back(static_cast<int>(wg.roles.size()) - 1);
    g.add_node(xs_edge, {chan, extr}, gf2::BitMatrix{{1, 1}});
  };

  int cur = state_l;
  for (int d = 1; d <= w; ++d) {
    const int xs = g.add_edge(1);
    const int xp = add_leaf(1, WindowGraph::Role::Parity);
    const int next = d < w ? g.add_edge(m) : add_leaf(m, WindowGraph::Role::Boundary);
    g.add_node(cur, {xs, xp, next}, cs.bulk_away_left);
    add_sys_eq(xs);
    cur = next;
  }
  cur = state_r;
  for (int d = 1; d <= w; ++d) {
    const int xs = g.add_edge(1);
    const int xp = add_leaf(1, WindowGraph::Role::Parity);
    const int next = d < w ? g.add_edge(m) : add_leaf(m, WindowGraph::Role::Boundary);
    g.add_node(cur, {xs, xp, next}, cs.bulk_away_right);
    add_sys_eq(xs);
    cur = next;
  }

  wg.compiled = mpg::compile(g);
  return wg;
}

Distribution windowed_extrinsic(const WindowGraph& wg, double omega,
                                const std::vector<Distribution>& incoming,
                                std::mt19937_64& rng, mpg::Workspace& ws) {
  if (static_cast<int>(incoming.size()) != 2 * wg.w)
    fail(Errc::WidthMismatch, "need one incoming message per neighbor systematic bit");
  const ChannelParam cp = channel_param(omega);
  const Distribution chan = Distribution::bspsc(cp.p);
  const Distribution boundary = Distribution::deterministic(wg.memory, 0);

  std::vector<Distribution> leaves(wg.roles.size());
  std::size_t extr = 0;
  for (std::size_t i = 0; i < wg.roles.size(); ++i) {
    switch (wg.roles[i]) {
      case WindowGraph::Role::Parity:
      case WindowGraph::Role::SysChannel:
        leaves[i] = chan;
        break;
      case WindowGraph::Role::Boundary:
        leaves[i] = boundary;
        break;
      case WindowGraph::Role::SysExtrinsic:
        leaves[i] = incoming[extr++];
        break;
    }
  }
  return mpg::sample_final_message(wg.compiled, leaves, rng, ws);
}

Distribution windowed_extrinsic(const graphs::ConvCodeSpec& family, double omega,
                                const std::vector<Distribution>& incoming, int w,
                                std::mt19937_64& rng) {
  const WindowGraph wg = build_window(family, w);
  mpg::Workspace ws;
  return windowed_extrinsic(wg, omega, incoming, rng, ws);
}

DePopulation initial_population(int pop) {
  if (pop < 1) fail(Errc::OutOfRange, "population size must be >= 1");
  DePopulation p;
  p.samples.assign(static_cast<std::size_t>(pop), Distribution::deterministic(1, 0));
  p.iteration = 0;
  return p;
}

namespace {

std::uint64_t omega_tag(double omega) {
  return std::bit_cast<std::uint64_t>(omega);
}

}  // namespace

DePopulation de_iteration(const DePopulation& in, const WindowGraph& wg, const DeConfig& cfg,
                          double omega) {
  DePopulation out;
  out.iteration = in.iteration + 1;
  out.samples.resize(in.samples.size());
  const std::uint64_t seed = cfg.seed ^ omega_tag(omega);
  const int iteration = out.iteration;

  int nthreads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (nthreads < 1) nthreads = 1;
  nthreads = std::min<int>(nthreads, static_cast<int>(in.samples.size()));

  auto worker = [&](std::size_t begin, std::size_t end) {
    mpg::Workspace ws;
    std::vector<Distribution> incoming(static_cast<std::size_t>(2 * wg.w));
    for (std::size_t j = begin; j < end; ++j) {
      std::mt19937_64 rng = derive_rng(seed, static_cast<std::uint64_t>(iteration), j);
      for (auto& d : incoming)
        d = in.samples[uniform_below(rng, in.samples.size())];
      out.samples[j] = windowed_extrinsic(wg, omega, incoming, rng, ws);
    }
  };

  if (nthreads == 1) {
    worker(0, in.samples.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (in.samples.size() + nthreads - 1) / static_cast<std::size_t>(nthreads);
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t b = static_cast<std::size_t>(t) * chunk;
      const std::size_t e = std::min(in.samples.size(), b + chunk);
      if (b >= e) break;
      pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

Distribution combine_extrinsic(const Distribution& a, const Distribution& b) {
  if (a.m != 1 || b.m != 1) fail(Errc::WidthMismatch, "extrinsic messages are 1-bit");
  Distribution out;
  out.m = 1;
  out.probs = {a.probs[0] * b.probs[0] + a.probs[1] * b.probs[1],
               a.probs[0] * b.probs[1] + a.probs[1] * b.probs[0]};
  return out;
}

namespace {

double bit_error(const Distribution& d) {
  const double s = kern::sum_sqrt(d.probs.data(), d.size());
  return 1.0 - 0.5 * s * s;
}

}  // namespace

BerStats population_ber(const DePopulation& pop, const DeConfig& cfg, double omega) {
  const ChannelParam cp = channel_param(omega);
  const Distribution chan = Distribution::bspsc(cp.p);
  std::mt19937_64 rng = derive_rng(cfg.seed ^ omega_tag(omega), 0x6265727374617473ULL,
                                   static_cast<std::uint64_t>(pop.iteration));
  double combined = 0, single = 0;
  const std::size_t n = pop.samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Distribution& e1 = pop.samples[i];
    const Distribution& e2 = pop.samples[uniform_below(rng, n)];
    single += bit_error(combine_extrinsic(chan, e1));
    combined += bit_error(combine_extrinsic(combine_extrinsic(chan, e1), e2));
  }
  return BerStats{combined / static_cast<double>(n), single / static_cast<double>(n)};
}

std::vector<BerPoint> ber_curve(const DeConfig& cfg, const std::vector<double>& omegas) {
  std::vector<BerPoint> out;
  const WindowGraph wg = build_window(cfg.family, cfg.w);
  for (double omega : omegas) {
    DePopulation pop = initial_population(cfg.pop);
    BerStats st = population_ber(pop, cfg, omega);
    out.push_back(BerPoint{omega, 0, st.combined, st.single});
    for (int it = 1; it <= cfg.l; ++it) {
      pop = de_iteration(pop, wg, cfg, omega);
      st = population_ber(pop, cfg, omega);
      out.push_back(BerPoint{omega, it, st.combined, st.single});
    }
  }
  return out;
}

namespace {

bool converges(const DeConfig& cfg, const WindowGraph& wg, double omega) {
  DePopulation pop = initial_population(cfg.pop);
  for (int it = 1; it <= cfg.l; ++it) {
    pop = de_iteration(pop, wg, cfg, omega);
    if (population_ber(pop, cfg, omega).combined < 1e-4) return true;
  }
  return false;
}

}  // namespace

double threshold(const DeConfig& cfg, double tol) {
  if (tol < 1e-3) fail(Errc::OutOfRange, "threshold tolerance must be >= 1e-3");
  const WindowGraph wg = build_window(cfg.family, cfg.w);
  double lo = shannon_limit(1.0 / 3.0);
  double hi = holevo_limit(1.0 / 3.0);
  if (!converges(cfg, wg, lo)) return lo;  // already stuck at the Shannon limit
  if (converges(cfg, wg, hi)) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (converges(cfg, wg, mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace bpqm::de
