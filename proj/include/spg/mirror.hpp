#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spg/bp.hpp"
#include "spg/stats.hpp"

namespace spg {

/// Per-user mirror messages Q_u(t) and cavity fields Q^_u(t), t in {0, 1}.
struct MirrorFields {
  std::vector<std::array<double, 2>> q;
  std::vector<std::array<double, 2>> q_hat;
};

struct MirrorResult {
  MessageSet messages;
  MirrorFields fields;
  BpReport report;
};

/// BP with mirror messages restoring P(t_u = 1) = p_u. Users with p_u = 1
/// keep Q = (0, 1) and p_u = 0 gives Q = (1, 0). Throws BpContradiction.
MirrorResult run_bp_mirror(const GameInstance& inst, double mu, const BpOptions& options = {});

/// Bethe averages under the mirror measure. The entropy is that of y given
/// t, averaged over t.
LandscapePoint stochastic_thermodynamics(const GameInstance& inst, const MirrorResult& fixed_point);

/// Per-edge P[y_ua = S] at a mirror fixed point.
std::vector<double> mirror_marginals(const GameInstance& inst, const MirrorResult& fixed_point);

/// Belief P(t_u = 1) at a mirror fixed point, per user.
std::vector<double> activity_beliefs(const GameInstance& inst, const MirrorResult& fixed_point);

struct MirrorValidationOptions {
  int samples = 1000;
  double mu = 0.0;
  BpOptions bp;
  std::uint64_t seed = 1;
  double max_drop_fraction = 0.2;
  unsigned workers = 0;  // 0: worker_count()
};

struct EdgeValidation {
  double m = 0.0;       // mirror estimate
  double m_bar = 0.0;   // sampled average
  double sigma = 0.0;   // standard error of m_bar
  double delta = 0.0;   // m - m_bar
  double z = 0.0;       // delta / sigma, 0 when sigma = 0
  bool sigma_zero = false;
};

struct MirrorValidationReport {
  std::vector<EdgeValidation> edges;
  int samples_used = 0;
  int dropped = 0;                 // activity draws whose BP did not converge
  bool refused = false;            // more than max_drop_fraction dropped
  std::string refusal;
  bool mirror_converged = false;
  double mean_abs_delta = 0.0;
  double mean_m = 0.0;
  double relative_error = 0.0;     // mean |delta| / mean m
  int sigma_zero_edges = 0;
  double fraction_above_3 = 0.0;   // of edges with sigma > 0, share with |z| > 3
  stats::KsResult ks;              // z against N(0, 1)
};

/// Mirror marginals against plain BP averaged over sampled activity vectors.
MirrorValidationReport validate_mirror(const GameInstance& inst,
                                       const MirrorValidationOptions& options = {});

}  // namespace spg
