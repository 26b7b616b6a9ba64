#include "spg/mirror.hpp"

#include <cmath>
#include <stdexcept>

#include "spg/dynamics.hpp"
#include "spg/parallel.hpp"

namespace spg {

namespace {

BpSolver restore(const GameInstance& inst, const MirrorResult& fp) {
  BpSolver solver(inst, fp.messages.mu);
  solver.enable_mirror(true);
  solver.set_messages(fp.messages);
  solver.set_activity_weights(fp.fields.q);
  return solver;
}

}  // namespace

MirrorResult run_bp_mirror(const GameInstance& inst, double mu, const BpOptions& options) {
  BpSolver solver(inst, mu, options);
  solver.enable_mirror(true);
  MirrorResult r;
  r.report = solver.run();
  r.messages = solver.messages();
  r.fields.q = solver.activity_weights();
  r.fields.q_hat.resize(inst.n_users());
  for (Index u = 0; u < inst.n_users(); ++u) r.fields.q_hat[u] = solver.activity_cavity(u);
  return r;
}

LandscapePoint stochastic_thermodynamics(const GameInstance& inst, const MirrorResult& fp) {
  LandscapePoint pt = restore(inst, fp).thermodynamics();
  pt.converged = fp.report.converged;
  pt.iterations = fp.report.iterations;
  pt.branch = "mirror";
  return pt;
}

std::vector<double> mirror_marginals(const GameInstance& inst, const MirrorResult& fp) {
  const Marginals m = restore(inst, fp).marginals();
  std::vector<double> out(inst.n_edges());
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = m.serving(e);
  return out;
}

std::vector<double> activity_beliefs(const GameInstance& inst, const MirrorResult& fp) {
  const BpSolver solver = restore(inst, fp);
  std::vector<double> out(inst.n_users());
  for (Index u = 0; u < inst.n_users(); ++u) out[u] = solver.activity_belief(u);
  return out;
}

MirrorValidationReport validate_mirror(const GameInstance& inst, const MirrorValidationOptions& options) {
  if (options.samples < 2) throw std::invalid_argument("validation needs at least 2 samples");
  MirrorValidationReport rep;
  const MirrorResult fp = run_bp_mirror(inst, options.mu, options.bp);
  rep.mirror_converged = fp.report.converged;
  const auto m = mirror_marginals(inst, fp);

  const std::size_t n = static_cast<std::size_t>(options.samples);
  std::vector<std::vector<double>> per_sample(n);
  parallel_for(
      n,
      [&](std::size_t s) {
        Rng rng = make_rng(options.seed, s);
        const auto t = draw_activity(inst, rng);
        BpSolver solver(inst, options.mu, options.bp);
        solver.set_activity(t);
        try {
          if (!solver.run().converged) return;
        } catch (const BpContradiction&) {
          return;
        }
        const Marginals mk = solver.marginals();
        per_sample[s].resize(inst.n_edges());
        for (std::size_t e = 0; e < inst.n_edges(); ++e) per_sample[s][e] = mk.serving(e);
      },
      options.workers);

  const std::size_t ne = inst.n_edges();
  // Welford: identical samples give exactly zero spread
  std::vector<double> mean(ne, 0.0), m2(ne, 0.0);
  for (const auto& row : per_sample) {
    if (row.empty()) {
      ++rep.dropped;
      continue;
    }
    ++rep.samples_used;
    for (std::size_t e = 0; e < ne; ++e) {
      const double d = row[e] - mean[e];
      mean[e] += d / rep.samples_used;
      m2[e] += d * (row[e] - mean[e]);
    }
  }
  if (rep.dropped > options.max_drop_fraction * options.samples || rep.samples_used < 2) {
    rep.refused = true;
    rep.refusal = std::to_string(rep.dropped) + " of " + std::to_string(options.samples) +
                  " samples did not converge";
    return rep;
  }

  const double k = rep.samples_used;
  std::vector<double> z;
  rep.edges.resize(ne);
  double abs_delta = 0.0, m_total = 0.0;
  for (std::size_t e = 0; e < ne; ++e) {
    EdgeValidation& ev = rep.edges[e];
    ev.m = m[e];
    ev.m_bar = mean[e];
    const double var = std::max(0.0, m2[e] / (k - 1.0));
    ev.sigma = std::sqrt(var / k);
    ev.delta = ev.m - ev.m_bar;
    abs_delta += std::abs(ev.delta);
    m_total += ev.m_bar;
    ev.sigma_zero = !(ev.sigma > 1e-12);
    if (ev.sigma_zero) {
      ++rep.sigma_zero_edges;
    } else {
      ev.z = ev.delta / ev.sigma;
      z.push_back(ev.z);
    }
  }
  rep.mean_abs_delta = ne ? abs_delta / static_cast<double>(ne) : 0.0;
  rep.mean_m = ne ? m_total / static_cast<double>(ne) : 0.0;
  rep.relative_error = rep.mean_m > 0.0 ? rep.mean_abs_delta / rep.mean_m : 0.0;
  if (!z.empty()) {
    int above = 0;
    for (double v : z) above += std::abs(v) > 3.0;
    rep.fraction_above_3 = static_cast<double>(above) / static_cast<double>(z.size());
    rep.ks = stats::ks_normal(z);
  }
  return rep;
}

}  // namespace spg
