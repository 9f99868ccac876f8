#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "bpqm/dist.hpp"
#include "bpqm/graphs.hpp"
#include "bpqm/mpg.hpp"

// Monte Carlo density evolution for rate-1/3 parallel concatenated turbo
// codes over the pure-state channel family W_omega. Tracks the population of
// extrinsic 1-bit message distributions under windowed trellis decoding.

namespace bpqm::de {

using dist::Distribution;

struct ChannelParam {
  double omega;
  double p;  // 1/2 - sqrt(omega (1 - omega))
};

/// Channel parameterization W_omega = bspsc[1/2 - sqrt(omega(1-omega))];
/// omega = 0 is the noiseless (perfectly distinguishable) channel.
ChannelParam channel_param(double omega);

double binary_entropy(double x);

/// Largest omega admitting rate-`rate` transmission with bitwise measurement:
/// solves 1 - h(omega) = rate.
double shannon_limit(double rate);

/// Largest omega admitting rate-`rate` transmission with collective quantum
/// decoding: solves h(1/2 - sqrt(omega(1-omega))) = rate.
double holevo_limit(double rate);

struct DeConfig {
  graphs::ConvCodeSpec family;
  int w = 50;     // window half-width in trellis sections
  int l = 50;     // iterations
  int pop = 2000; // population size
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
};

struct DePopulation {
  std::vector<Distribution> samples;  // 1-bit extrinsic distributions
  int iteration = 0;
};

/// The windowed-decoding MPG of one constituent code: 2w+1 trellis sections
/// rooted at the target systematic bit, with equality nodes combining channel
/// and incoming-extrinsic leaves at the neighbor systematic bits, and
/// deterministic (information-destroying) state messages at the window
/// boundaries.
struct WindowGraph {
  enum class Role { Parity, SysChannel, SysExtrinsic, Boundary };

  std::shared_ptr<mpg::Mpg> graph;
  mpg::CompiledMpg compiled;
  std::vector<Role> roles;          // per leaf index
  std::vector<int> extrinsic_leaf;  // leaf indices for incoming messages, neighbor order
  int w = 0;
  int memory = 0;
};

WindowGraph build_window(const graphs::ConvCodeSpec& family, int w);

/// One windowed-BPQM trajectory: returns the sampled extrinsic distribution
/// for the target bit. `incoming` holds 2w neighbor extrinsic messages in the
/// order given by WindowGraph::extrinsic_leaf.
Distribution windowed_extrinsic(const WindowGraph& wg, double omega,
                                const std::vector<Distribution>& incoming,
                                std::mt19937_64& rng, mpg::Workspace& ws);

/// Convenience form matching the one-shot use; builds the window internally.
Distribution windowed_extrinsic(const graphs::ConvCodeSpec& family, double omega,
                                const std::vector<Distribution>& incoming, int w,
                                std::mt19937_64& rng);

/// Population of "no information" extrinsics (deterministic distributions).
DePopulation initial_population(int pop);

/// One synchronous density-evolution step: every output sample runs one
/// windowed trajectory with incoming messages drawn uniformly at random (with
/// replacement) from the input population. Deterministic for a given seed,
/// independent of the thread count.
DePopulation de_iteration(const DePopulation& in, const WindowGraph& wg, const DeConfig& cfg,
                          double omega);

/// Equality-node combination of two 1-bit message distributions.
Distribution combine_extrinsic(const Distribution& a, const Distribution& b);

struct BerStats {
  double combined;  // channel + both constituent extrinsics
  double single;    // channel + one extrinsic (diagnostic)
};

BerStats population_ber(const DePopulation& pop, const DeConfig& cfg, double omega);

struct BerPoint {
  double omega;
  int iteration;
  double ber;
  double ber_single;
};

/// Full density-evolution run over the given channel parameters; emits one
/// row per (omega, iteration) including iteration 0.
std::vector<BerPoint> ber_curve(const DeConfig& cfg, const std::vector<double>& omegas);

/// Decoding threshold: bisection over omega between the Shannon and Holevo
/// limits at rate 1/3; an omega "converges" when the combined bit error rate
/// falls below 1e-4 within cfg.l iterations.
double threshold(const DeConfig& cfg, double tol);

}  // namespace bpqm::de
