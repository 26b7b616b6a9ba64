#include "spg/maxsum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spg/dynamics.hpp"
#include "spg/rng.hpp"

namespace spg {

Sense parse_sense(const std::string& name) {
  if (name == "max") return Sense::Maximize;
  if (name == "min") return Sense::Minimize;
  throw std::invalid_argument("sense must be 'max' or 'min'");
}

namespace {

double sign_of(Sense s) { return s == Sense::Maximize ? 1.0 : -1.0; }

Triple add3(const Triple& a, const Triple& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

void user_inputs(const GameInstance& inst, const MaxSumMessages& ms, Index u,
                 std::vector<UserNeighbor>& nb) {
  const auto edges = inst.user_edges(u);
  nb.resize(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    nb[i] = UserNeighbor{add3(ms.to_user[edges[i]], ms.field[edges[i]]), inst.edge(edges[i]).value, true};
}

UserFactorInput input_for(const std::vector<UserNeighbor>& nb, Sense sense) {
  return UserFactorInput{nb, sign_of(sense), MaxPlus::zero(), MaxPlus::one(), true};
}

class MaxSumRun {
 public:
  MaxSumRun(const GameInstance& inst, Sense sense, const MaxSumOptions& opt, std::uint64_t stream)
      : inst_(inst), opt_(opt), rng_(make_rng(opt.seed, stream)) {
    const Triple flat{0.0, 0.0, 0.0};
    ms_.to_user.assign(inst.n_edges(), flat);
    ms_.to_unit.assign(inst.n_edges(), flat);
    ms_.field.assign(inst.n_edges(), flat);
    ms_.sense = sense;
    for (auto& f : ms_.field)
      for (double& x : f) x = opt.noise * uniform01(rng_);
  }

  // One asynchronous sweep, then reinforcement; returns max message change.
  double iterate(int t) {
    double change = 0.0;
    const Index n = inst_.n_users() + inst_.n_units();
    for (Index node : random_permutation(n, rng_))
      change = std::max(change, node < inst_.n_users() ? update_user(node)
                                                       : update_unit(node - inst_.n_users()));
    for (std::size_t e = 0; e < inst_.n_edges(); ++e) {
      Triple b = add3(add3(ms_.to_user[e], ms_.to_unit[e]), ms_.field[e]);
      if (!normalize<MaxPlus>(b)) continue;
      for (int k = 0; k < 3; ++k)
        if (std::isfinite(b[k])) ms_.field[e][k] += opt_.rho * t * b[k];
    }
    return change;
  }

  const MaxSumMessages& messages() const { return ms_; }

 private:
  double update_user(Index u) {
    const auto edges = inst_.user_edges(u);
    if (edges.empty()) return 0.0;
    user_inputs(inst_, ms_, u, nb_);
    std::vector<Triple> out(edges.size());
    UserFactorSummary summary;
    user_factor<MaxPlus>(input_for(nb_, ms_.sense), out, summary);
    double change = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!normalize<MaxPlus>(out[i])) continue;  // keep the old message
      change = std::max(change, diff(out[i], ms_.to_unit[edges[i]]));
      ms_.to_unit[edges[i]] = out[i];
    }
    return change;
  }

  double update_unit(Index a) {
    const auto edges = inst_.unit_edges(a);
    if (edges.empty()) return 0.0;
    std::vector<UnitNeighbor> nb(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i)
      nb[i] = UnitNeighbor{add3(ms_.to_unit[edges[i]], ms_.field[edges[i]]), inst_.edge(edges[i]).weight};
    std::vector<Triple> out(edges.size());
    unit_factor<MaxPlus>(nb, inst_.capacity(a), out);
    double change = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (!normalize<MaxPlus>(out[i])) continue;
      change = std::max(change, diff(out[i], ms_.to_user[edges[i]]));
      ms_.to_user[edges[i]] = out[i];
    }
    return change;
  }

  static double diff(const Triple& a, const Triple& b) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (std::isinf(a[k]) || std::isinf(b[k])) {
        if (a[k] != b[k]) d = std::max(d, 1.0);
      } else {
        d = std::max(d, std::abs(a[k] - b[k]));
      }
    }
    return d;
  }

  const GameInstance& inst_;
  MaxSumOptions opt_;
  Rng rng_;
  MaxSumMessages ms_;
  std::vector<UserNeighbor> nb_;
};

bool better(Sense sense, std::int64_t a, std::int64_t b) {
  return sense == Sense::Maximize ? a > b : a < b;
}

}  // namespace

Assignment decode_maxsum(const GameInstance& inst, const MaxSumMessages& ms) {
  Assignment x = Assignment::empty(inst);
  std::vector<UserNeighbor> nb;
  for (Index u = 0; u < inst.n_users(); ++u) {
    const auto edges = inst.user_edges(u);
    if (edges.empty()) continue;
    user_inputs(inst, ms, u, nb);
    std::vector<Triple> out(edges.size());
    UserFactorSummary s;
    user_factor<MaxPlus>(input_for(nb, ms.sense), out, s);
    double best = s.disconnected;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const double score = s.served[i];
      if (score > MaxPlus::zero() && (x.choice[u] == kDisconnected ? score >= best : score > best)) {
        best = score;
        x.choice[u] = inst.edge(edges[i]).unit;
      }
    }
  }
  return x;
}

MaxSumResult run_maxsum(const GameInstance& inst, Sense sense, const MaxSumOptions& options) {
  if (!(options.rho > 0.0)) throw std::invalid_argument("reinforcement rate must be positive");
  if (options.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  MaxSumResult best;
  bool have = false;
  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    MaxSumRun run(inst, sense, options, static_cast<std::uint64_t>(attempt));
    Assignment last;
    int stable = 0;
    bool converged = false;
    int it = 1;
    for (; it <= options.max_iterations; ++it) {
      run.iterate(it);
      Assignment x = decode_maxsum(inst, run.messages());
      stable = (x == last) ? stable + 1 : 0;
      last = std::move(x);
      if (stable >= options.stable_iterations && is_nash(inst, last)) {
        converged = true;
        break;
      }
    }
    MaxSumResult r;
    r.converged = converged;
    r.iterations = std::min(it, options.max_iterations);
    if (is_nash(inst, last)) {
      r.assignment = std::move(last);
    } else {
      auto rep = repair_to_nash(inst, std::move(last));
      r.repaired = true;
      r.repair_moves = rep.moves + rep.dropped;
      r.assignment = std::move(rep.assignment);
    }
    r.utility = observables(inst, r.assignment).total_utility;
    r.attempts = attempt + 1;
    if (!have || (r.converged && !best.converged) ||
        (r.converged == best.converged && better(sense, r.utility, best.utility))) {
      best = r;
      have = true;
    }
    best.attempts = attempt + 1;
    if (converged) break;
  }
  best.failed = !best.converged;
  return best;
}

}  // namespace spg
