// cotype_lab: experiment runner for the metric-cotype toolkit.
//
//   cotype_lab <op> [--config FILE] [--key value ...]
//   cotype_lab --config FILE [--key value ...]        (op taken from the file)
//
// Flags override config-file values.  The report goes to stdout (or --output)
// as JSON (default) or CSV; human-readable detail goes to stderr.  Exit code
// 0 = all claimed inequalities passed, 1 = a mathematical check failed,
// 2 = usage or IO error.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "cotype/config.hpp"
#include "cotype/cotype.hpp"
#include "cotype/embedding.hpp"
#include "cotype/graphgap.hpp"
#include "cotype/martingale.hpp"
#include "cotype/measure.hpp"
#include "cotype/numeric.hpp"
#include "cotype/report.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"
#include "cotype/space_checks.hpp"
#include "cotype/torus.hpp"

namespace {

using namespace cotype;

// ---------------------------------------------------------------------------
// Shared resolution helpers
// ---------------------------------------------------------------------------

SpacePtr space_of(const ExperimentConfig& cfg) { return parse_space(cfg.require("space")); }

BarycenterMap map_of(const ExperimentConfig& cfg, const Space& space, double q) {
  const std::string s = cfg.get_string("strategy", "canonical");
  if (s == "canonical") return BarycenterMap::canonical(space, q);
  if (s == "linear") return BarycenterMap::linear();
  if (s == "frechet") return BarycenterMap::frechet(q);
  if (s == "tree2") return BarycenterMap::tree_mean2();
  throw UsageError("strategy must be canonical|linear|frechet|tree2");
}

std::size_t size_arg(const ExperimentConfig& cfg, const std::string& key, long long fallback) {
  const long long v = cfg.get_int(key, fallback);
  if (v < 0) throw UsageError("config key " + key + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

std::size_t require_size(const ExperimentConfig& cfg, const std::string& key) {
  const long long v = detail::parse_int(cfg.require(key), "config key " + key);
  if (v <= 0) throw UsageError("config key " + key + " must be positive");
  return static_cast<std::size_t>(v);
}

// Default tolerance: tight for closed-form barycenters, relaxed when the
// barycenter comes out of an iterative minimizer.
double tol_of(const ExperimentConfig& cfg, const BarycenterMap& map) {
  const double fallback =
      (map.strategy == BarycenterStrategy::FrechetQMean) ? 1e-6 : kRelTol;
  return cfg.get_double("tol", fallback);
}

std::string fmt_int(std::uint64_t v) { return std::to_string(v); }

// A torus function input: from file when function= is given, else random.
TorusFunction torus_input(const ExperimentConfig& cfg, SpacePtr target, std::size_t n,
                          std::size_t m, std::uint64_t seed) {
  const auto file = cfg.find("function");
  if (!file) return make_random_torus_function(n, m, target, seed);
  std::size_t expect_dim = 0;
  if (const auto lp = std::dynamic_pointer_cast<const LpSpace>(target)) {
    expect_dim = lp->dim();
  } else {
    throw UsageError("function files require a coordinate (l<p>:<dim>) target space");
  }
  TorusFunction f = load_torus_function(*file, target, expect_dim);
  if (f.n() != n || f.m() != m) {
    throw UsageError("function file shape (n=" + std::to_string(f.n()) +
                     ", m=" + std::to_string(f.m()) + ") does not match n=" + std::to_string(n) +
                     ", m=" + std::to_string(m));
  }
  return f;
}

// Vertex/point configurations: from an embedding-style file (index, coords)
// when points come from disk, else sampled from the space.
std::vector<Point> points_input(const ExperimentConfig& cfg, const Space& space,
                                std::size_t count, std::uint64_t seed) {
  const auto file = cfg.find("embedding");
  if (!file) {
    SplitRng root(seed);
    std::vector<Point> pts(count);
    for (std::size_t i = 0; i < count; ++i) {
      SplitRng r = root.split(i);
      pts[i] = space.sample_point(r);
    }
    return pts;
  }
  const EmbeddingRows rows = load_embedding_rows(*file);
  std::vector<Point> pts(count);
  std::vector<char> seen(count, 0);
  for (std::size_t r = 0; r < rows.domain_index.size(); ++r) {
    const std::size_t i = rows.domain_index[r];
    if (i >= count) throw UsageError(*file + ": index " + std::to_string(i) + " out of range");
    pts[i] = point_for_space(space, rows.coords[r], *file);
    seen[i] = 1;
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!seen[i]) throw UsageError(*file + ": missing point for index " + std::to_string(i));
  }
  return pts;
}

std::size_t require_size_from(const std::string& text) {
  const long long v = detail::parse_int(text, "graph size");
  if (v <= 0) throw UsageError("graph size must be positive");
  return static_cast<std::size_t>(v);
}

RegularGraph graph_of(const ExperimentConfig& cfg) {
  const std::string spec = cfg.require("graph");
  if (spec.rfind("complete:", 0) == 0) {
    return make_complete_graph(require_size_from(spec.substr(9)));
  }
  if (spec.rfind("cycle:", 0) == 0) {
    return make_cycle_graph(require_size_from(spec.substr(6)));
  }
  return load_graph(spec);
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

Report run_verify_cotype(const ExperimentConfig& cfg) {
  SpacePtr target = space_of(cfg);
  const double q = cfg.get_double("q", 2.0);
  const double beta = cfg.get_double("beta", 1.0);
  const std::size_t n = require_size(cfg, "n");
  const std::size_t m = require_size(cfg, "m");
  const std::size_t samples = cfg.has("function") ? 1 : size_arg(cfg, "samples", 1);
  const std::uint64_t seed = cfg.get_seed();
  const double tol = cfg.get_double("tol", kRelTol);
  const double budget = cfg.get_double("budget", 1e9);

  SplitRng root(seed);
  CotypeReport worst;
  bool all_pass = true;
  for (std::size_t s = 0; s < samples; ++s) {
    TorusFunction f = torus_input(cfg, target, n, m, root.split(s).next_u64());
    const CotypeReport r = verify_main_inequality(f, q, beta, tol, false, budget);
    all_pass = all_pass && r.pass;
    if (s == 0 || r.slack < worst.slack) worst = r;
  }
  std::fprintf(stderr,
               "verify-cotype: %zu sample(s) on %s, q=%g beta=%g n=%zu m=%zu -> worst slack "
               "%.6g, gamma_hat %.6g%s\n",
               samples, target->describe().c_str(), q, beta, n, m, worst.slack,
               worst.gamma_hat, worst.odd_m ? " (odd m: outside the certified hypothesis)" : "");

  Report rep;
  rep.op = "verify-cotype";
  rep.params = {{"beta", format_g17(beta)}, {"m", fmt_int(m)},
                {"n", fmt_int(n)},          {"q", format_g17(q)},
                {"samples", fmt_int(samples)}, {"space", cfg.require("space")},
                {"tol", format_g17(tol)}};
  rep.lhs = worst.lhs;
  rep.rhs = worst.rhs_sign;
  rep.bound = worst.bound;
  rep.ratio = worst.gamma_hat;
  rep.slack = worst.slack;
  rep.pass = all_pass;
  rep.seed = seed;
  return rep;
}

Report run_decompose_proof(const ExperimentConfig& cfg) {
  SpacePtr target = space_of(cfg);
  const double q = cfg.get_double("q", 2.0);
  const double beta = cfg.get_double("beta", 1.0);
  const std::size_t n = require_size(cfg, "n");
  const std::size_t m = require_size(cfg, "m");  // proof scale: torus side 4m
  const std::size_t samples = cfg.has("function") ? 1 : size_arg(cfg, "samples", 1);
  const std::uint64_t seed = cfg.get_seed();
  const BarycenterMap map = map_of(cfg, *target, q);
  const double tol = tol_of(cfg, map);
  const double budget = cfg.get_double("budget", 1e9);

  SplitRng root(seed);
  CotypeReport worst;
  bool all_pass = true;
  double min_sub_slack = infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    TorusFunction f = torus_input(cfg, target, n, 2 * m, root.split(s).next_u64());
    const CotypeReport r = decompose_main_proof(f, q, beta, map, tol, budget);
    all_pass = all_pass && r.pass;
    const double nq = std::pow(static_cast<double>(n), 1.0 / q);
    const double sub =
        std::min({2.0 * r.t_approx + r.t_shift - r.lhs, 2.0 * nq * r.rhs_sign - r.t_approx,
                  beta * static_cast<double>(f.m()) * r.rhs_sign - r.t_shift});
    if (s == 0 || sub < min_sub_slack) {
      min_sub_slack = sub;
      worst = r;
    }
  }
  std::fprintf(stderr,
               "decompose-proof: %zu sample(s), barycenter %s -> t_approx %.6g, t_shift %.6g, "
               "triangle %s, approximation %s, decay %s\n",
               samples, map.name().c_str(), worst.t_approx, worst.t_shift,
               worst.triangle_pass ? "ok" : "FAIL", worst.approx_pass ? "ok" : "FAIL",
               worst.shift_pass ? "ok" : "FAIL");

  Report rep;
  rep.op = "decompose-proof";
  rep.params = {{"beta", format_g17(beta)},     {"m", fmt_int(m)},
                {"n", fmt_int(n)},              {"q", format_g17(q)},
                {"samples", fmt_int(samples)},  {"space", cfg.require("space")},
                {"strategy", map.name()},       {"tol", format_g17(tol)}};
  rep.lhs = worst.lhs;
  rep.rhs = worst.rhs_sign;
  rep.bound = worst.bound;
  rep.ratio = worst.gamma_hat;
  rep.slack = min_sub_slack;
  rep.pass = all_pass;
  rep.seed = seed;
  return rep;
}

Report run_estimate_constant(const ExperimentConfig& cfg) {
  SpacePtr target = space_of(cfg);
  const double q = cfg.get_double("q", 2.0);
  const double beta = cfg.get_double("beta", 1.0);
  const std::size_t n = require_size(cfg, "n");
  const std::size_t m = require_size(cfg, "m");
  const std::size_t budget = size_arg(cfg, "budget", 200);
  const std::size_t restarts = size_arg(cfg, "restarts", 20);
  const std::uint64_t seed = cfg.get_seed();
  const std::string edges_txt = cfg.get_string("edges", "sign");
  EdgeKind edges;
  if (edges_txt == "sign") {
    edges = EdgeKind::Signs;
  } else if (edges_txt == "linf") {
    edges = EdgeKind::Linf;
  } else {
    throw UsageError("edges must be sign|linf");
  }
  const double tol = cfg.get_double("tol", kRelTol);

  const ConstantSearchReport sr =
      estimate_cotype_constant(target, q, n, m, edges, budget, restarts, seed);
  const double ceiling = theorem_bound(n, m, q, beta) / static_cast<double>(m);
  std::fprintf(stderr,
               "estimate-constant: %zu evaluations over %zu restart(s) -> c_hat %.6g "
               "(ceiling %.6g)%s%s\n",
               sr.evaluations, sr.restarts, sr.c_hat, ceiling,
               sr.infinite ? " [unbounded ratio witness]" : "",
               sr.degenerate ? " [degenerate: constant functions only]" : "");

  Report rep;
  rep.op = "estimate-constant";
  rep.params = {{"beta", format_g17(beta)},   {"budget", fmt_int(budget)},
                {"edges", edges_txt},         {"m", fmt_int(m)},
                {"n", fmt_int(n)},            {"q", format_g17(q)},
                {"restarts", fmt_int(restarts)}, {"space", cfg.require("space")}};
  rep.lhs = sr.best_lhs;
  rep.rhs = sr.best_rhs;
  rep.bound = ceiling;
  rep.ratio = sr.infinite ? infinity() : sr.c_hat;
  rep.slack = ceiling - sr.c_hat;
  rep.pass = !sr.infinite && sr.c_hat <= ceiling + tol * std::max(1.0, ceiling);
  rep.seed = seed;
  return rep;
}

Report run_equivalence(const ExperimentConfig& cfg) {
  SpacePtr target = space_of(cfg);
  const double q = cfg.get_double("q", 2.0);
  const std::size_t n = require_size(cfg, "n");
  const std::size_t m = require_size(cfg, "m");
  const std::size_t samples = size_arg(cfg, "samples", 3);
  const std::uint64_t seed = cfg.get_seed();
  const double tol = cfg.get_double("tol", kRelTol);

  SplitRng root(seed);
  std::vector<TorusFunction> half, full;
  for (std::size_t s = 0; s < samples; ++s) {
    half.push_back(make_random_torus_function(n, m, target, root.split(2 * s).next_u64()));
    full.push_back(
        make_random_torus_function(n, 2 * m, target, root.split(2 * s + 1).next_u64()));
  }
  const EquivalenceReport er = check_equivalence_chain(q, n, m, half, full, tol);
  std::fprintf(stderr,
               "equivalence: coefficient %llu (closed form %llu), identity errors %.3g / %.3g, "
               "C_linf %.6g, C_signs(2m) %.6g, chain %s/%s, %zu function(s)\n",
               static_cast<unsigned long long>(er.coefficient),
               static_cast<unsigned long long>(er.closed_form), er.restriction_identity_err,
               er.support_split_identity_err, er.c_linf_hat, er.c_signs_2m_hat,
               er.chain_a_pass ? "ok" : "FAIL", er.chain_b_pass ? "ok" : "FAIL",
               er.functions_checked);

  double c_signs_max = 0.0;
  for (const double c : er.c_signs_hat) c_signs_max = std::max(c_signs_max, c);

  Report rep;
  rep.op = "equivalence";
  rep.params = {{"m", fmt_int(m)},          {"n", fmt_int(n)},
                {"q", format_g17(q)},       {"samples", fmt_int(samples)},
                {"space", cfg.require("space")}, {"tol", format_g17(tol)}};
  rep.lhs = er.c_linf_hat;
  rep.rhs = c_signs_max;
  rep.bound = std::pow(6.0, 1.0 / q) * c_signs_max;
  rep.ratio = er.c_signs_2m_hat;
  rep.slack = std::min(er.chain_a_slack, er.chain_b_slack);
  rep.pass = er.pass;
  rep.seed = seed;
  return rep;
}

Report run_estimate_beta(const ExperimentConfig& cfg) {
  SpacePtr space = space_of(cfg);
  const double q = cfg.get_double("q", 2.0);
  const double beta = cfg.get_double("beta", 1.0);
  const std::size_t samples = size_arg(cfg, "samples", 500);
  const std::size_t max_support = size_arg(cfg, "max-support", 4);
  const std::uint64_t seed = cfg.get_seed();
  const BarycenterMap map = map_of(cfg, *space, q);
  const double tol = tol_of(cfg, map);

  const BetaEstimate est = estimate_beta(*space, map, q, samples, seed, max_support);
  std::fprintf(stderr,
               "estimate-beta: %zu sample(s) (%zu informative, %zu degenerate) with %s -> "
               "beta_hat %s, claimed beta %g\n",
               est.samples, est.used, est.skipped, map.name().c_str(),
               est.infinite ? "inf" : format_g17(est.beta_hat).c_str(), beta);

  Report rep;
  rep.op = "estimate-beta";
  rep.params = {{"beta", format_g17(beta)},       {"max-support", fmt_int(max_support)},
                {"q", format_g17(q)},             {"samples", fmt_int(samples)},
                {"space", cfg.require("space")},  {"strategy", map.name()},
                {"tol", format_g17(tol)}};
  rep.lhs = est.witness_num;
  rep.rhs = est.witness_den;
  rep.bound = beta;
  rep.ratio = est.infinite ? infinity() : est.beta_hat;
  rep.slack = est.infinite ? -infinity() : beta + tol - est.beta_hat;
  rep.pass = !est.infinite && est.beta_hat <= beta + tol;
  rep.seed = seed;
  return rep;
}

// Shared sampler for the two cube-martingale checks: a random map of the
// n-cube into the space plus a random base point per sample.
template <class Check>
void for_each_cube_sample(SpacePtr space, const BarycenterMap& map, std::size_t n,
                          std::size_t samples, std::uint64_t seed, Check&& check) {
  SplitRng root(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    SplitRng rng = root.split(s);
    std::vector<Point> h(std::size_t{1} << n);
    for (std::size_t i = 0; i < h.size(); ++i) {
      SplitRng hr = rng.split(i);
      h[i] = space->sample_point(hr);
    }
    SplitRng xr = rng.split(1u << 20);
    const Point x = space->sample_point(xr);
    const CubeMartingale mart = build_cube_martingale(space, map, h);
    check(mart, x, s);
  }
}

Report run_pisier(const ExperimentConfig& cfg) {
  SpacePtr space = space_of(cfg);
  const double q = cfg.get_double("q", 2.0);
  const double beta = cfg.get_double("beta", 1.0);
  const std::size_t n = size_arg(cfg, "n", 3);
  const std::size_t samples = size_arg(cfg, "samples", 200);
  const std::uint64_t seed = cfg.get_seed();
  const BarycenterMap map = map_of(cfg, *space, q);
  const double tol = tol_of(cfg, map);

  DecayReport worst;
  bool first = true, all_pass = true;
  for_each_cube_sample(space, map, n, samples, seed,
                       [&](const CubeMartingale& mart, const Point& x, std::size_t) {
                         const DecayReport r = check_pisier(mart, x, q, beta, tol);
                         all_pass = all_pass && r.pass;
                         if (first || r.slack < worst.slack) worst = r;
                         first = false;
                       });
  std::fprintf(stderr,
               "pisier: %zu sample(s), cube dim %zu, %s, q=%g beta=%g -> worst slack %.6g "
               "(lhs %.6g vs rhs %.6g)\n",
               samples, n, map.name().c_str(), q, beta, worst.slack, worst.lhs, worst.rhs);

  Report rep;
  rep.op = "pisier";
  rep.params = {{"beta", format_g17(beta)}, {"n", fmt_int(n)},
                {"q", format_g17(q)},       {"samples", fmt_int(samples)},
                {"space", cfg.require("space")}, {"strategy", map.name()},
                {"tol", format_g17(tol)}};
  rep.lhs = worst.lhs;
  rep.rhs = worst.rhs;
  rep.ratio = worst.rhs > 0.0 ? worst.lhs / worst.rhs : 0.0;
  rep.slack = worst.slack;
  rep.pass = all_pass;
  rep.seed = seed;
  return rep;
}

Report run_monotonicity(const ExperimentConfig& cfg) {
  SpacePtr space = space_of(cfg);
  const double q = cfg.get_double("q", 2.0);
  const std::size_t n = size_arg(cfg, "n", 3);
  const std::size_t samples = size_arg(cfg, "samples", 200);
  const std::uint64_t seed = cfg.get_seed();
  const BarycenterMap map = map_of(cfg, *space, q);
  const double tol = tol_of(cfg, map);

  double worst_violation = -infinity();
  std::size_t worst_level = 0;
  double worst_lo = 0.0, worst_hi = 0.0;
  bool all_pass = true;
  for_each_cube_sample(space, map, n, samples, seed,
                       [&](const CubeMartingale& mart, const Point& x, std::size_t) {
                         const MonotonicityReport r = check_monotonicity(mart, x, q, tol);
                         all_pass = all_pass && r.pass;
                         if (r.worst_violation > worst_violation) {
                           worst_violation = r.worst_violation;
                           worst_level = r.worst_level;
                           worst_lo = r.moments[r.worst_level];
                           worst_hi = r.moments[r.worst_level + 1];
                         }
                       });
  std::fprintf(stderr,
               "monotonicity: %zu sample(s), cube dim %zu, %s -> worst step M_%zu=%.6g vs "
               "M_%zu=%.6g (violation %.3g)\n",
               samples, n, map.name().c_str(), worst_level, worst_lo, worst_level + 1, worst_hi,
               worst_violation);

  Report rep;
  rep.op = "monotonicity";
  rep.params = {{"n", fmt_int(n)},           {"q", format_g17(q)},
                {"samples", fmt_int(samples)}, {"space", cfg.require("space")},
                {"strategy", map.name()},    {"tol", format_g17(tol)}};
  rep.lhs = worst_lo;
  rep.rhs = worst_hi;
  rep.slack = -worst_violation;
  rep.pass = all_pass;
  rep.seed = seed;
  return rep;
}

Report run_translation_identity(const ExperimentConfig& cfg) {
  SpacePtr target = space_of(cfg);
  const std::size_t n = size_arg(cfg, "n", 2);
  const std::size_t m = size_arg(cfg, "m", 1);
  const std::size_t samples = cfg.has("function") ? 1 : size_arg(cfg, "samples", 5);
  const std::uint64_t seed = cfg.get_seed();
  const double q = cfg.get_double("q", 2.0);
  const BarycenterMap map = map_of(cfg, *target, q);
  const double tol = tol_of(cfg, map);

  SplitRng root(seed);
  double worst = 0.0;
  std::size_t checked = 0;
  bool all_pass = true;
  for (std::size_t s = 0; s < samples; ++s) {
    TorusFunction f = torus_input(cfg, target, n, m, root.split(s).next_u64());
    const TranslationIdentityReport r = check_translation_identity(f, map, tol);
    all_pass = all_pass && r.pass;
    worst = std::max(worst, r.max_deviation);
    checked += r.checked;
  }
  std::fprintf(stderr,
               "translation-identity: %zu sample(s), %zu instance(s), %s -> max deviation %.3g "
               "(tol %.3g)\n",
               samples, checked, map.name().c_str(), worst, tol);

  Report rep;
  rep.op = "translation-identity";
  rep.params = {{"m", fmt_int(m)},           {"n", fmt_int(n)},
                {"samples", fmt_int(samples)}, {"space", cfg.require("space")},
                {"strategy", map.name()},    {"tol", format_g17(tol)}};
  rep.lhs = worst;
  rep.bound = tol;
  rep.slack = tol - worst;
  rep.pass = all_pass;
  rep.seed = seed;
  return rep;
}

Report run_grid_distortion(const ExperimentConfig& cfg) {
  const std::size_t m = require_size(cfg, "m");
  const std::size_t n = require_size(cfg, "n");
  const double q = cfg.get_double("q", 2.0);
  const double beta = cfg.get_double("beta", 2.0);
  const double tol = cfg.get_double("tol", kRelTol);
  double psi_dist = cfg.get_double("psi-dist", 0.0);
  if (psi_dist == 0.0) psi_dist = (m >= 2) ? psi_cycle_distortion(m) : 1.0;

  const GridLowerBound glb = grid_distortion_lower_bound(m, n, q, psi_dist, beta);

  std::optional<double> id_dist, forget_dist;
  double grid_size = 1.0;
  for (std::size_t i = 0; i < n; ++i) grid_size *= static_cast<double>(m);
  if (grid_size <= 2000.0) {
    id_dist = distortion(make_trivial_embedding(TrivialKind::Id, m, n, q));
    if (grid_size <= 1024.0) {
      forget_dist = distortion(make_trivial_embedding(TrivialKind::Forget, m, n, q));
    }
  }
  double best_trivial = infinity();
  if (id_dist) best_trivial = std::min(best_trivial, *id_dist);
  if (forget_dist) best_trivial = std::min(best_trivial, *forget_dist);

  std::fprintf(stderr,
               "grid-distortion: [%zu]^%zu into l_%g -> lower bound %.6g (asymptote %.6g, "
               "psi %.6g); trivial distortions: Id %s, Forget %s\n",
               m, n, q, glb.bound, glb.asymptote, psi_dist,
               id_dist ? format_g17(*id_dist).c_str() : "skipped",
               forget_dist ? format_g17(*forget_dist).c_str() : "skipped");

  Report rep;
  rep.op = "grid-distortion";
  rep.params = {{"beta", format_g17(beta)}, {"m", fmt_int(m)},
                {"n", fmt_int(n)},          {"psi-dist", format_g17(psi_dist)},
                {"q", format_g17(q)}};
  rep.lhs = glb.bound;
  if (!std::isinf(best_trivial)) rep.rhs = best_trivial;
  rep.bound = glb.asymptote;
  rep.ratio = psi_dist;
  if (!std::isinf(best_trivial)) rep.slack = best_trivial - glb.bound;
  rep.pass = std::isinf(best_trivial) || glb.bound <= best_trivial + tol;
  rep.seed = cfg.get_seed();
  return rep;
}

Report run_p_alpha(const ExperimentConfig& cfg) {
  const std::size_t m = require_size(cfg, "m");
  const std::size_t n = require_size(cfg, "n");
  const double alpha = cfg.get_double("alpha", 2.0);
  const double psi_dist = cfg.get_double("psi-dist", 2.0);
  const double beta = cfg.get_double("beta", 2.0);

  const PAlphaBounds b = p_alpha_bounds(m, n, alpha, psi_dist, beta);
  std::fprintf(stderr, "p-alpha: [%zu]^%zu, alpha=%g -> p_alpha within [%.9g, %.9g]\n", m, n,
               alpha, b.lower, b.upper);

  Report rep;
  rep.op = "p-alpha";
  rep.params = {{"alpha", format_g17(alpha)}, {"beta", format_g17(beta)},
                {"m", fmt_int(m)},            {"n", fmt_int(n)},
                {"psi-dist", format_g17(psi_dist)}};
  rep.lhs = b.lower;
  rep.rhs = b.upper;
  rep.slack = b.upper - b.lower;
  rep.pass = b.lower <= b.upper + kAbsFloor;
  rep.seed = cfg.get_seed();
  return rep;
}

Report run_obstruction(const ExperimentConfig& cfg) {
  const double p = cfg.get_double("p", 3.0);
  const std::size_t n = require_size(cfg, "n");
  const std::size_t m = require_size(cfg, "m");
  const double q = cfg.get_double("q", 2.0);
  const double gamma = cfg.get_double("gamma", 2.0);
  const double c = cfg.get_double("c", 1.0);
  const std::size_t sample_cap = size_arg(cfg, "exhaustive-cap", 256);
  const std::uint64_t seed = cfg.get_seed();

  const ObstructionCurve curve = make_obstruction_curve(p, n, m);
  const ObstructionReport idr = check_obstruction_identities(curve, sample_cap, seed);

  std::optional<ObstructionCertificate> cert;
  const double formula_value =
      2.0 / gamma * std::pow(static_cast<double>(n), 1.0 / q - 1.0 / p);
  if (curve.idx.size() <= 4096) {
    auto dom = std::make_shared<TorusGridSpace>(m, n);
    std::vector<Point> dom_pts(curve.idx.size()), img(curve.idx.size());
    for (std::size_t i = 0; i < curve.idx.size(); ++i) {
      dom_pts[i] = dom->enumerate_point(i);
      img[i] = curve.value(i);
    }
    const FiniteEmbedding emb =
        make_embedding(dom, curve.target, std::move(dom_pts), std::move(img));
    const ModuliEnvelope env = moduli_envelope(emb);
    cert = obstruction_certificate(env, n, m, q, p, gamma, c);
  }

  std::fprintf(stderr,
               "obstruction: p=%g n=%zu m=%zu -> shift identity err %.3g, step identity err "
               "%.3g (%s, %zu base points); certificate argument %.6g%s\n",
               p, n, m, idr.shift_identity_err, idr.step_identity_err,
               idr.exhaustive ? "exhaustive" : "sampled", idr.checked, formula_value,
               cert ? (cert->holds ? ", envelope constraint holds" : ", envelope constraint FAILS")
                    : ", envelope skipped (lattice too large)");

  Report rep;
  rep.op = "obstruction";
  rep.params = {{"c", format_g17(c)},       {"gamma", format_g17(gamma)},
                {"m", fmt_int(m)},          {"n", fmt_int(n)},
                {"p", format_g17(p)},       {"q", format_g17(q)}};
  rep.lhs = idr.shift_identity_err;
  rep.rhs = idr.step_identity_err;
  rep.bound = idr.step_bound;
  rep.ratio = formula_value;
  if (cert) rep.slack = cert->cap - cert->omega_val;
  rep.pass = idr.pass;
  rep.seed = seed;
  return rep;
}

Report run_spectral_gap(const ExperimentConfig& cfg, bool relative) {
  SpacePtr space = space_of(cfg);
  const RegularGraph g = graph_of(cfg);
  const std::uint64_t seed = cfg.get_seed();
  const std::vector<Point> pts = points_input(cfg, *space, g.vertices, seed);

  GapReport gr;
  if (relative) {
    const std::string pspec = cfg.require("partition");
    Partition part;
    if (pspec == "trivial") {
      part = Partition::trivial(g.vertices);
    } else if (pspec == "singletons") {
      part = Partition::singletons(g.vertices);
    } else {
      part = load_partition(pspec, g.vertices);
    }
    gr = relative_spectral_gap(g, part, *space, pts);
  } else {
    gr = spectral_gap(g, *space, pts);
  }
  std::fprintf(stderr,
               "%s: N=%zu d=%zu |E|=%zu -> lhs %.6g rhs %.6g %s %.6g%s "
               "(single-configuration evidence only)\n",
               relative ? "relative-gap" : "spectral-gap", gr.vertices, gr.degree, gr.edge_count,
               gr.lhs, gr.rhs, relative ? "rho_hat" : "gamma_hat", gr.gamma_hat,
               gr.degenerate ? " [degenerate: constant configuration]" : "");

  Report rep;
  rep.op = relative ? "relative-gap" : "spectral-gap";
  rep.params = {{"graph", cfg.require("graph")}, {"space", cfg.require("space")}};
  if (relative) rep.params.emplace_back("partition", cfg.require("partition"));
  rep.lhs = gr.lhs;
  rep.rhs = gr.rhs;
  rep.ratio = gr.gamma_hat;
  rep.pass = true;  // evaluation, not an inequality claim
  rep.seed = seed;
  return rep;
}

Report run_quadratic(const ExperimentConfig& cfg) {
  SpacePtr space = space_of(cfg);
  const QuadraticForms forms = load_quadratic_forms(cfg.require("quadratic"));
  const std::uint64_t seed = cfg.get_seed();
  const double tol = cfg.get_double("tol", kRelTol);
  const std::vector<Point> pts = points_input(cfg, *space, forms.a.size(), seed);

  const QuadraticCheck qc = quadratic_inequality_check(*space, forms.a, forms.b, pts);
  std::fprintf(stderr, "quadratic: %zu point(s) -> lhs %.6g, rhs %.6g, slack %.6g\n",
               pts.size(), qc.lhs, qc.rhs, qc.slack);

  Report rep;
  rep.op = "quadratic";
  rep.params = {{"quadratic", cfg.require("quadratic")}, {"space", cfg.require("space")},
                {"tol", format_g17(tol)}};
  rep.lhs = qc.lhs;
  rep.rhs = qc.rhs;
  rep.slack = qc.slack;
  rep.pass = qc.slack >= -std::max(kAbsFloor, tol * std::max(std::abs(qc.lhs), std::abs(qc.rhs)));
  rep.seed = seed;
  return rep;
}

Report run_axioms(const ExperimentConfig& cfg) {
  SpacePtr space = space_of(cfg);
  const std::size_t samples = size_arg(cfg, "samples", 32);
  const std::size_t cap = size_arg(cfg, "exhaustive-cap", 64);
  const std::uint64_t seed = cfg.get_seed();

  const AxiomReport ar = verify_metric_axioms(*space, samples, seed, cap);
  std::fprintf(stderr,
               "axioms: %zu point(s), %zu triple(s)%s -> self %.3g, asymmetry %.3g, triangle "
               "slack %.3g, min offdiag %.6g\n",
               ar.points, ar.triples, ar.exhaustive ? " (exhaustive)" : "",
               ar.max_self_distance, ar.max_asymmetry, ar.worst_triangle_slack,
               ar.min_offdiag_distance);

  Report rep;
  rep.op = "axioms";
  rep.params = {{"samples", fmt_int(samples)}, {"space", cfg.require("space")}};
  rep.lhs = ar.max_self_distance;
  rep.rhs = ar.max_asymmetry;
  rep.ratio = ar.min_offdiag_distance;
  rep.slack = -ar.worst_triangle_slack;
  rep.pass = ar.pass;
  rep.seed = seed;
  return rep;
}

Report run_cat0(const ExperimentConfig& cfg) {
  SpacePtr space = space_of(cfg);
  const std::size_t samples = size_arg(cfg, "samples", 200);
  const std::uint64_t seed = cfg.get_seed();
  const double tol = cfg.get_double("tol", kRelTol);

  SplitRng root(seed);
  double worst = -infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    SplitRng rng = root.split(s);
    SplitRng rx = rng.split(1), ry = rng.split(2), rz = rng.split(3);
    const Point x = space->sample_point(rx);
    const Point y = space->sample_point(ry);
    const Point z = space->sample_point(rz);
    const QuadrupleReport qr = cat0_quadruple_check(*space, x, y, z);
    worst = std::max(worst, qr.slack);
  }
  std::fprintf(stderr,
               "cat0: %zu sampled quadruple(s) -> worst comparison slack %.3g (<= 0 certifies "
               "the midpoint inequality on the sample)\n",
               samples, worst);

  Report rep;
  rep.op = "cat0";
  rep.params = {{"samples", fmt_int(samples)}, {"space", cfg.require("space")},
                {"tol", format_g17(tol)}};
  rep.lhs = worst;
  rep.slack = -worst;
  rep.pass = worst <= std::max(kAbsFloor, tol);
  rep.seed = seed;
  return rep;
}

// ---------------------------------------------------------------------------
// Dispatch and IO
// ---------------------------------------------------------------------------

Report dispatch(const std::string& op, const ExperimentConfig& cfg) {
  if (op == "verify-cotype") return run_verify_cotype(cfg);
  if (op == "decompose-proof") return run_decompose_proof(cfg);
  if (op == "estimate-constant") return run_estimate_constant(cfg);
  if (op == "equivalence") return run_equivalence(cfg);
  if (op == "estimate-beta") return run_estimate_beta(cfg);
  if (op == "pisier") return run_pisier(cfg);
  if (op == "monotonicity") return run_monotonicity(cfg);
  if (op == "translation-identity") return run_translation_identity(cfg);
  if (op == "grid-distortion") return run_grid_distortion(cfg);
  if (op == "p-alpha") return run_p_alpha(cfg);
  if (op == "obstruction") return run_obstruction(cfg);
  if (op == "spectral-gap") return run_spectral_gap(cfg, false);
  if (op == "relative-gap") return run_spectral_gap(cfg, true);
  if (op == "quadratic") return run_quadratic(cfg);
  if (op == "axioms") return run_axioms(cfg);
  if (op == "cat0") return run_cat0(cfg);
  throw UsageError("unknown op \"" + op + "\"");
}

void print_usage(std::FILE* to) {
  std::fprintf(to,
               "usage: cotype_lab <op> [--config FILE] [--key value ...]\n"
               "       cotype_lab --config FILE [--key value ...]\n"
               "\n"
               "ops: verify-cotype decompose-proof estimate-constant equivalence\n"
               "     estimate-beta pisier monotonicity translation-identity\n"
               "     grid-distortion p-alpha obstruction spectral-gap relative-gap\n"
               "     quadratic axioms cat0\n"
               "\n"
               "common keys: space=<spec> q= n= m= beta= seed= samples= tol= budget=\n"
               "             strategy=canonical|linear|frechet|tree2 output= format=json|csv\n"
               "space spec:  l<p>:<dim> finite:<file> tree:<file> snow:<theta>:<spec>\n"
               "             wass:<p>:<file> union:<spec>,<spec> pyth:<spec>,<spec>\n"
               "environment: COTYPE_LAB_THREADS caps worker threads\n");
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    print_usage(stderr);
    return 2;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    print_usage(stdout);
    return 0;
  }

  std::string op;
  std::size_t i = 0;
  if (args[0].rfind("--", 0) != 0) {
    op = args[0];
    i = 1;
  }

  // Collect flag overrides first so --config is loaded before they apply.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string config_path;
  for (; i < args.size(); i += 2) {
    const std::string& key = args[i];
    if (key.rfind("--", 0) != 0) throw UsageError("expected --key, got \"" + key + "\"");
    if (i + 1 >= args.size()) throw UsageError("missing value for " + key);
    const std::string name = key.substr(2);
    if (name == "config") {
      config_path = args[i + 1];
    } else {
      check_known_key(name, 0);
      overrides.emplace_back(name, args[i + 1]);
    }
  }

  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  if (!op.empty()) cfg.set("op", op);
  op = cfg.require("op");

  const auto started = std::chrono::steady_clock::now();
  Report rep = dispatch(op, cfg);
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();

  const std::string format = cfg.get_string("format", "json");
  std::string text;
  if (format == "json") {
    text = to_json(rep);
  } else if (format == "csv") {
    text = to_csv(rep);
  } else {
    throw UsageError("format must be json or csv");
  }

  const auto out_path = cfg.find("output");
  if (out_path) {
    std::ofstream out(*out_path);
    if (!out) throw UsageError("cannot open output file: " + *out_path);
    out << text;
    if (!out) throw UsageError("failed writing output file: " + *out_path);
  } else {
    std::fputs(text.c_str(), stdout);
  }
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const cotype::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
}
