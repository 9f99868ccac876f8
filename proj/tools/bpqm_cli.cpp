// bpqm command-line front end. Subcommands cover success-probability
// evaluation, trajectory simulation, oracle cross-checks, MPG construction,
// MSGM/trellis computation, density evolution and capacity limits.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "bpqm/de.hpp"
#include "bpqm/graphs.hpp"
#include "bpqm/io.hpp"
#include "bpqm/mpg.hpp"
#include "bpqm/oracle.hpp"
#include "bpqm/rng.hpp"

namespace {

using namespace bpqm;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

struct GlobalArgs {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
};

std::vector<double> channel_vector(double p, int n) { return std::vector<double>(static_cast<std::size_t>(n), p); }

gf2::BitMatrix adapted_generator(const io::CodeInput& code, int bit) {
  return gf2::adapt_generator_for_bit(code.generator(), bit);
}

mpg::Mpg build_construction(const io::CodeInput& code, const std::string& construction, int bit) {
  if (construction == "tree-tanner") {
    if (!code.h) fail(Errc::BadInput, "tree-tanner construction needs H");
    return graphs::mpg_from_tree_tanner(*code.h, bit);
  }
  if (construction == "unicyclic") {
    if (!code.h) fail(Errc::BadInput, "unicyclic construction needs H");
    return graphs::mpg_from_unicyclic_tanner(*code.h, bit);
  }
  if (construction == "trellis") {
    const gf2::BitMatrix g = gf2::msgm(adapted_generator(code, bit));
    return graphs::mpg_from_msgm(g, bit).mpg;
  }
  fail(Errc::BadInput, "unknown construction (tree-tanner|unicyclic|trellis): " + construction);
}

double parse_rate(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return std::stod(s);
  return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
}

graphs::ConvCodeSpec parse_family(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) fail(Errc::BadInput, "family must look like 13/15");
  return graphs::ConvCodeSpec{s.substr(0, slash), s.substr(slash + 1)};
}

json config_json(const GlobalArgs& ga) {
  return json{{"seed", ga.seed}, {"threads", ga.threads}};
}

int cmd_succprob(const GlobalArgs&, const std::string& mpg_path, const std::string& leaves_path,
                 double prune_eps) {
  const mpg::Mpg g = io::mpg_from_json(io::load_json_file(mpg_path));
  const auto leaves = io::dist_list_from_json(io::load_json_file(leaves_path));
  const auto rep = mpg::validate(g);
  const auto ens = mpg::message_ensemble(g, leaves, prune_eps);
  const double p = mpg::success_probability(ens, g.width(g.root_edge));
  std::printf("success_probability %.12g\n", p);
  std::printf("ensemble_size %zu\n", ens.entries.size());
  std::printf("max_variable_dimension %d\n", rep.max_variable_dimension);
  return kExitOk;
}

int cmd_simulate(const GlobalArgs& ga, const std::string& mpg_path, const std::string& leaves_path,
                 const std::string& x_bits, int runs) {
  const mpg::Mpg g = io::mpg_from_json(io::load_json_file(mpg_path));
  const auto leaves = io::dist_list_from_json(io::load_json_file(leaves_path));
  gf2::BitVector x;
  for (char c : x_bits) {
    if (c != '0' && c != '1') fail(Errc::BadInput, "--x must be a bit string");
    x.bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  const auto ens = mpg::message_ensemble(g, leaves, 0.0);
  const double exact = mpg::success_probability(ens, g.width(g.root_edge));
  std::mt19937_64 rng = derive_rng(ga.seed, 0x73696d, 0);
  const mpg::CompiledMpg cg = mpg::compile(g);
  mpg::Workspace ws;
  long long hits = 0;
  for (int i = 0; i < runs; ++i) {
    const dist::Distribution d = mpg::sample_final_message(cg, leaves, rng, ws);
    const dist::Distribution q = dist::conjugate_outcome_dist(d, x);
    double u = uniform01(rng);
    std::uint64_t pick = 0;
    for (std::uint64_t z = 0; z < q.size(); ++z) {
      if (q.probs[z] <= 0) continue;
      pick = z;
      u -= q.probs[z];
      if (u <= 0) break;
    }
    hits += pick == x.to_index() ? 1 : 0;
  }
  const double emp = static_cast<double>(hits) / runs;
  std::printf("empirical_success %.6f\n", emp);
  std::printf("exact_success %.12g\n", exact);
  std::printf("runs %d seed %" PRIu64 "\n", runs, ga.seed);
  return kExitOk;
}

int cmd_oracle_check(const GlobalArgs&, const std::string& code_path, const std::string& construction,
                     int bit, double p) {
  const io::CodeInput code = io::code_from_json(io::load_json_file(code_path));
  const gf2::BitMatrix gen = code.generator();
  if (gen.cols() > 10) fail(Errc::TooLarge, "oracle comparison guarded at n <= 10; use smaller codes");
  const mpg::Mpg g = build_construction(code, construction, bit);
  const auto leaves = std::vector<dist::Distribution>(static_cast<std::size_t>(gen.cols()),
                                                      dist::Distribution::bspsc(p));
  const double bpqm_value =
      mpg::success_probability(mpg::message_ensemble(g, leaves, 0.0), g.width(g.root_edge));
  const double oracle_value = oracle::helstrom_bit_success_dense(gen, channel_vector(p, gen.cols()), bit);
  const double diff = std::fabs(bpqm_value - oracle_value);
  std::printf("bpqm %.12g\n", bpqm_value);
  std::printf("helstrom %.12g\n", oracle_value);
  std::printf("difference %.3e\n", diff);
  return diff <= 1e-8 ? kExitOk : kExitNumeric;
}

int cmd_mpg_build(const GlobalArgs& ga, const std::string& code_path, const std::string& construction,
                  int bit) {
  const io::CodeInput code = io::code_from_json(io::load_json_file(code_path));
  const mpg::Mpg g = build_construction(code, construction, bit);
  const auto rep = mpg::validate(g);
  const json j = io::mpg_to_json(g);
  if (!ga.out.empty())
    io::save_json_file(ga.out, j);
  else
    std::cout << j.dump(2) << "\n";
  std::fprintf(stderr, "nodes %d max_variable_dimension %d\n", rep.node_count,
               rep.max_variable_dimension);
  return kExitOk;
}

int cmd_msgm(const GlobalArgs& ga, const std::string& code_path) {
  const io::CodeInput code = io::code_from_json(io::load_json_file(code_path));
  const gf2::BitMatrix m = gf2::msgm(code.generator());
  int span = 0;
  for (int r = 0; r < m.rows(); ++r) span += gf2::row_span(m, r).span_length();
  const json j = json{{"G", io::matrix_to_json(m)}, {"total_span_length", span}};
  if (!ga.out.empty())
    io::save_json_file(ga.out, j);
  else
    std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_trellis(const GlobalArgs& ga, const std::string& code_path) {
  const io::CodeInput code = io::code_from_json(io::load_json_file(code_path));
  const gf2::BitMatrix m = gf2::msgm(code.generator());
  const graphs::Trellis t = graphs::trellis_from_msgm(m);
  json j = io::trellis_to_json(t);
  j["max_state_space"] = t.max_state_space();
  if (!ga.out.empty())
    io::save_json_file(ga.out, j);
  else
    std::cout << j.dump(2) << "\n";
  std::fprintf(stderr, "max_state_space %d\n", t.max_state_space());
  return kExitOk;
}

int cmd_de(const GlobalArgs& ga, const std::string& family, double omega_lo, double omega_hi,
           double omega_step, int w, int l, int pop, bool diag) {
  de::DeConfig cfg;
  cfg.family = parse_family(family);
  cfg.w = w;
  cfg.l = l;
  cfg.pop = pop;
  cfg.seed = ga.seed;
  cfg.threads = ga.threads;
  std::vector<double> omegas;
  for (double o = omega_lo; o <= omega_hi + 1e-12; o += omega_step) omegas.push_back(o);
  const auto curve = de::ber_curve(cfg, omegas);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!ga.out.empty()) {
    file.open(ga.out);
    if (!file) fail(Errc::BadInput, "cannot open " + ga.out);
    os = &file;
  }
  (*os) << "omega,iteration,ber";
  if (diag) (*os) << ",ber_single";
  (*os) << "\n";
  char buf[128];
  for (const auto& pt : curve) {
    if (diag)
      std::snprintf(buf, sizeof buf, "%.6f,%d,%.8g,%.8g\n", pt.omega, pt.iteration, pt.ber, pt.ber_single);
    else
      std::snprintf(buf, sizeof buf, "%.6f,%d,%.8g\n", pt.omega, pt.iteration, pt.ber);
    (*os) << buf;
  }
  return kExitOk;
}

int cmd_threshold(const GlobalArgs& ga, const std::string& family, bool paper_scale, int w, int l,
                  int pop, double tol) {
  de::DeConfig cfg;
  cfg.family = parse_family(family);
  if (paper_scale) {
    cfg.w = 200;
    cfg.l = 200;
    cfg.pop = 10000;
  } else {
    cfg.w = w;
    cfg.l = l;
    cfg.pop = pop;
  }
  cfg.seed = ga.seed;
  cfg.threads = ga.threads;
  const double th = de::threshold(cfg, tol);
  json j{{"family", family},
         {"threshold", th},
         {"tol", tol},
         {"config", json{{"w", cfg.w}, {"l", cfg.l}, {"pop", cfg.pop}, {"seed", cfg.seed},
                         {"threads", cfg.threads}}}};
  if (!ga.out.empty()) io::save_json_file(ga.out, j);
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_limits(const GlobalArgs& ga, const std::string& rate_str) {
  const double rate = parse_rate(rate_str);
  const double sh = de::shannon_limit(rate);
  const double ho = de::holevo_limit(rate);
  std::printf("shannon_limit %.5f\n", sh);
  std::printf("holevo_limit %.5f\n", ho);
  if (!ga.out.empty())
    io::save_json_file(ga.out, json{{"rate", rate}, {"shannon", sh}, {"holevo", ho}});
  return kExitOk;
}

int cmd_discretize_report(const GlobalArgs&, const std::string& mpg_path,
                          const std::string& leaves_path, const std::vector<int>& bits) {
  const mpg::Mpg g = io::mpg_from_json(io::load_json_file(mpg_path));
  const auto leaves = io::dist_list_from_json(io::load_json_file(leaves_path));
  bool ok = true;
  std::printf("%4s  %14s  %14s  %s\n", "B", "observed", "bound", "note");
  for (int b : bits) {
    const auto res = mpg::discretized_message_ensemble(g, leaves, dist::GridParams{b});
    const bool vacuous = res.bound >= 2.0;
    ok = ok && res.observed_err <= res.bound;
    std::printf("%4d  %14.6e  %14.6e  %s\n", b, res.observed_err, res.bound,
                vacuous ? "vacuous bound" : "");
  }
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief propagation with quantum messages: classical simulation toolkit"};
  app.require_subcommand(1);

  GlobalArgs ga;
  app.add_option("--seed", ga.seed, "RNG seed recorded in all outputs");
  app.add_option("--threads", ga.threads, "worker threads (0 = hardware)");
  app.add_option("--out", ga.out, "output file path");

  std::string mpg_path, leaves_path, code_path, construction = "trellis", x_bits, family, rate = "1/3";
  double prune_eps = 0.0, p = 0.1, omega_lo = 0.0, omega_hi = 0.0, omega_step = 0.01, tol = 2e-3;
  int bit = 1, runs = 100000, w = 50, l = 50, pop = 2000;
  bool paper_scale = false, desk = false, diag = false;
  std::vector<int> bits{8, 16, 24};

  auto* succ = app.add_subcommand("succprob", "exact success probability of an MPG");
  succ->add_option("--mpg", mpg_path)->required();
  succ->add_option("--leaves", leaves_path)->required();
  succ->add_option("--prune-eps", prune_eps);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo decoding of an MPG");
  sim->add_option("--mpg", mpg_path)->required();
  sim->add_option("--leaves", leaves_path)->required();
  sim->add_option("--x", x_bits)->required();
  sim->add_option("--runs", runs);

  auto* oc = app.add_subcommand("oracle-check", "compare an MPG construction against the dense oracle");
  oc->add_option("--code", code_path)->required();
  oc->add_option("--construction", construction);
  oc->add_option("--bit", bit);
  oc->add_option("--p", p);

  auto* mb = app.add_subcommand("mpg-build", "construct an MPG for a bit-transmission channel");
  mb->add_option("--code", code_path)->required();
  mb->add_option("--construction", construction);
  mb->add_option("--bit", bit);

  auto* ms = app.add_subcommand("msgm", "minimal-span generator matrix of a code");
  ms->add_option("--code", code_path)->required();

  auto* tr = app.add_subcommand("trellis", "minimal trellis of a code");
  tr->add_option("--code", code_path)->required();

  auto* de_cmd = app.add_subcommand("de", "density evolution bit-error curve (CSV)");
  de_cmd->add_option("--family", family)->required();
  de_cmd->add_option("--omega", omega_lo)->required();
  de_cmd->add_option("--omega-hi", omega_hi);
  de_cmd->add_option("--omega-step", omega_step);
  de_cmd->add_option("--w", w);
  de_cmd->add_option("--l", l);
  de_cmd->add_option("--pop", pop);
  de_cmd->add_flag("--diag", diag, "append the single-extrinsic diagnostic column");

  auto* th = app.add_subcommand("threshold", "density evolution decoding threshold");
  th->add_option("--family", family)->required();
  th->add_flag("--paper", paper_scale, "paper-scale configuration (pop 10000, w 200, l 200)");
  th->add_flag("--desk", desk, "desk-scale configuration (default)");
  th->add_option("--w", w);
  th->add_option("--l", l);
  th->add_option("--pop", pop);
  th->add_option("--tol", tol);

  auto* lim = app.add_subcommand("limits", "Shannon and Holevo limits for a rate");
  lim->add_option("--rate", rate);

  auto* dr = app.add_subcommand("discretize-report", "fixed-point error vs. the ensemble bound");
  dr->add_option("--mpg", mpg_path)->required();
  dr->add_option("--leaves", leaves_path)->required();
  dr->add_option("--bits", bits);

  CLI11_PARSE(app, argc, argv);

  try {
    if (succ->parsed()) return cmd_succprob(ga, mpg_path, leaves_path, prune_eps);
    if (sim->parsed()) return cmd_simulate(ga, mpg_path, leaves_path, x_bits, runs);
    if (oc->parsed()) return cmd_oracle_check(ga, code_path, construction, bit, p);
    if (mb->parsed()) return cmd_mpg_build(ga, code_path, construction, bit);
    if (ms->parsed()) return cmd_msgm(ga, code_path);
    if (tr->parsed()) return cmd_trellis(ga, code_path);
    if (de_cmd->parsed())
      return cmd_de(ga, family, omega_lo, omega_hi < omega_lo ? omega_lo : omega_hi, omega_step, w,
                    l, pop, diag);
    if (th->parsed()) return cmd_threshold(ga, family, paper_scale, w, l, pop, tol);
    if (lim->parsed()) return cmd_limits(ga, rate);
    if (dr->parsed()) return cmd_discretize_report(ga, mpg_path, leaves_path, bits);
  } catch (const bpqm::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
  (void)desk;
  return kExitValidation;
}
