#include "spg/bp.hpp"

#include <algorithm>
#include <cmath>

namespace spg {

namespace {

constexpr double kExpLimit = 700.0;

double max_abs_diff(const Triple& a, const Triple& b) {
  return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
}

void check_bias_range(const GameInstance& inst, double mu) {
  std::int64_t vmax = 0;
  for (const Edge& e : inst.edges()) vmax = std::max(vmax, e.value);
  if (std::abs(mu) * static_cast<double>(vmax) > kExpLimit)
    throw std::invalid_argument("|mu| * max value exceeds the linear-domain range of exp");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

MessageSet MessageSet::uniform(const GameInstance& inst, double mu) {
  const Triple third{1.0 / 3, 1.0 / 3, 1.0 / 3};
  return MessageSet{std::vector<Triple>(inst.n_edges(), third),
                    std::vector<Triple>(inst.n_edges(), third), mu};
}

BpSolver::BpSolver(const GameInstance& inst, double mu, BpOptions options)
    : inst_(&inst),
      options_(options),
      messages_(MessageSet::uniform(inst, mu)),
      q_(inst.n_users(), {0.0, 1.0}),
      clamp_(inst.n_users(), kFree),
      rng_(make_rng(options.seed)) {
  check_bias_range(inst, mu);
}

void BpSolver::set_mu(double mu) {
  check_bias_range(*inst_, mu);
  messages_.mu = mu;
}

void BpSolver::set_messages(MessageSet messages) {
  if (messages.to_user.size() != inst_->n_edges() || messages.to_unit.size() != inst_->n_edges())
    throw std::invalid_argument("message set does not match the instance");
  check_bias_range(*inst_, messages.mu);
  messages_ = std::move(messages);
}

void BpSolver::set_activity(const std::vector<std::uint8_t>& active) {
  if (active.size() != static_cast<std::size_t>(inst_->n_users()))
    throw std::invalid_argument("activity vector length mismatch");
  mirror_ = false;
  for (Index u = 0; u < inst_->n_users(); ++u)
    q_[u] = active[u] ? std::array<double, 2>{0.0, 1.0} : std::array<double, 2>{1.0, 0.0};
}

void BpSolver::enable_mirror(bool on) {
  mirror_ = on;
  for (Index u = 0; u < inst_->n_users(); ++u) {
    const double p = on ? inst_->activity(u) : 1.0;
    q_[u] = {1.0 - p, p};
  }
}

void BpSolver::set_activity_weights(std::vector<std::array<double, 2>> q) {
  if (q.size() != static_cast<std::size_t>(inst_->n_users()))
    throw std::invalid_argument("activity weight vector length mismatch");
  q_ = std::move(q);
}

std::array<double, 2> BpSolver::activity_cavity(Index u) const {
  const auto s = user_summary(u);
  const double z = s.inactive + s.active;
  if (!(z > 0.0)) return {0.0, 0.0};
  return {s.inactive / z, s.active / z};
}

void BpSolver::clamp(Index u, Index choice) {
  if (choice >= 0 && inst_->find_edge(u, choice) < 0)
    throw std::invalid_argument("clamp to a non-adjacent unit");
  clamp_[u] = choice;
}

UserFactorInput BpSolver::user_input(Index u, std::vector<UserNeighbor>& buf) const {
  const auto edges = inst_->user_edges(u);
  buf.resize(edges.size());
  const Index c = clamp_[u];
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& ed = inst_->edge(edges[i]);
    buf[i] = UserNeighbor{messages_.to_user[edges[i]], ed.value, c == kFree || c == ed.unit};
  }
  return UserFactorInput{buf, messages_.mu, q_[u][0], q_[u][1], c == kFree || c == kDisconnected};
}

UserFactorSummary BpSolver::user_summary(Index u) const {
  std::vector<UserNeighbor> buf;
  const auto input = user_input(u, buf);
  std::vector<Triple> out(buf.size());
  UserFactorSummary summary;
  user_factor<SumProduct>(input, out, summary);
  return summary;
}

double BpSolver::update_user(Index u) {
  const auto edges = inst_->user_edges(u);
  std::vector<UserNeighbor> buf;
  std::vector<Triple> out(edges.size());
  UserFactorSummary summary;
  double change = 0.0;

  if (mirror_) {
    user_factor<SumProduct>(user_input(u, buf), out, summary);
    const double p = inst_->activity(u);
    const double qhat0 = summary.inactive;
    const double qhat1 = summary.active;
    if ((p < 1.0 && !(qhat0 > 0.0)) || (p > 0.0 && !(qhat1 > 0.0)))
      throw BpContradiction("activity state with positive probability is forbidden", -1, u);
    std::array<double, 2> q{1.0 - p, p};
    if (p > 0.0 && p < 1.0) {
      q = {(1.0 - p) * qhat1, p * qhat0};
      const double s = q[0] + q[1];
      q = {q[0] / s, q[1] / s};
    }
    if (options_.damping > 0.0)
      for (int t = 0; t < 2; ++t) q[t] = (1.0 - options_.damping) * q[t] + options_.damping * q_[u][t];
    change = std::max(change, std::abs(q[1] - q_[u][1]));
    q_[u] = q;
  }
  if (edges.empty()) return change;

  user_factor<SumProduct>(user_input(u, buf), out, summary);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    Triple t = out[i];
    if (!normalize<SumProduct>(t))
      throw BpContradiction("user factor forbids every state of edge " + std::to_string(edges[i]),
                            edges[i], u);
    Triple& old = messages_.to_unit[edges[i]];
    if (options_.damping > 0.0)
      for (int k = 0; k < 3; ++k) t[k] = (1.0 - options_.damping) * t[k] + options_.damping * old[k];
    change = std::max(change, max_abs_diff(t, old));
    old = t;
  }
  return change;
}

double BpSolver::update_unit(Index a) {
  const auto edges = inst_->unit_edges(a);
  if (edges.empty()) return 0.0;
  std::vector<UnitNeighbor> nb(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    nb[i] = UnitNeighbor{messages_.to_unit[edges[i]], inst_->edge(edges[i]).weight};
  std::vector<Triple> out(edges.size());
  unit_factor<SumProduct>(nb, inst_->capacity(a), out);
  double change = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    Triple t = out[i];
    if (!normalize<SumProduct>(t))
      throw BpContradiction("unit factor forbids every state of edge " + std::to_string(edges[i]),
                            edges[i], inst_->edge(edges[i]).user);
    Triple& old = messages_.to_user[edges[i]];
    if (options_.damping > 0.0)
      for (int k = 0; k < 3; ++k) t[k] = (1.0 - options_.damping) * t[k] + options_.damping * old[k];
    change = std::max(change, max_abs_diff(t, old));
    old = t;
  }
  return change;
}

double BpSolver::sweep() {
  const Index n = inst_->n_users() + inst_->n_units();
  const auto order = random_permutation(n, rng_);
  double change = 0.0;
  for (Index node : order) {
    if (node < inst_->n_users())
      change = std::max(change, update_user(node));
    else
      change = std::max(change, update_unit(node - inst_->n_users()));
  }
  ++sweeps_done_;
  return change;
}

BpReport BpSolver::run() {
  BpReport report;
  for (int it = 1; it <= options_.max_iterations; ++it) {
    report.max_change = sweep();
    report.iterations = it;
    if (report.max_change < options_.tolerance) {
      report.converged = true;
      break;
    }
  }
  return report;
}

double BpSolver::activity_belief(Index u) const {
  const auto s = user_summary(u);
  const double on = q_[u][1] * s.active;
  const double total = q_[u][0] * s.inactive + on;
  return total > 0.0 ? on / total : 0.0;
}

Marginals BpSolver::marginals() const {
  Marginals m;
  m.edge.resize(inst_->n_edges());
  for (std::size_t e = 0; e < inst_->n_edges(); ++e) {
    Triple b;
    for (int k = 0; k < 3; ++k) b[k] = messages_.to_user[e][k] * messages_.to_unit[e][k];
    if (!normalize<SumProduct>(b)) b = {0.0, 0.0, 0.0};
    m.edge[e] = b;
  }
  m.user.resize(inst_->n_users());
  for (Index u = 0; u < inst_->n_users(); ++u) {
    const auto s = user_summary(u);
    UserMarginal& um = m.user[u];
    const double total = s.total;
    if (!(total > 0.0)) {
      um.served.assign(s.served.size(), 0.0);
      continue;
    }
    um.inactive = q_[u][0] * s.inactive / total;
    um.disconnected = q_[u][1] * s.disconnected / total;
    um.served.resize(s.served.size());
    for (std::size_t i = 0; i < s.served.size(); ++i) um.served[i] = q_[u][1] * s.served[i] / total;
  }
  return m;
}

LandscapePoint BpSolver::thermodynamics() const {
  LandscapePoint pt;
  pt.mu = messages_.mu;
  const auto m = marginals();

  double log_z = 0.0;
  for (Index a = 0; a < inst_->n_units(); ++a) {
    const auto edges = inst_->unit_edges(a);
    std::vector<UnitNeighbor> nb(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i)
      nb[i] = UnitNeighbor{messages_.to_unit[edges[i]], inst_->edge(edges[i]).weight};
    std::vector<Triple> out(edges.size());
    log_z += unit_factor<SumProduct>(nb, inst_->capacity(a), out);
  }
  double activity_term = 0.0;
  for (Index u = 0; u < inst_->n_users(); ++u) {
    const auto s = user_summary(u);
    log_z += std::log(s.total);
    if (mirror_) {
      const double b1 = s.total > 0.0 ? q_[u][1] * s.active / s.total : 0.0;
      const double b0 = s.total > 0.0 ? q_[u][0] * s.inactive / s.total : 0.0;
      if (b0 > 0.0) activity_term += b0 * std::log(q_[u][0]);
      if (b1 > 0.0) activity_term += b1 * std::log(q_[u][1]);
      const double p = inst_->activity(u);
      activity_term -= xlogx(p) + xlogx(1.0 - p);  // adds the entropy of P(t_u)
    }
  }
  for (std::size_t e = 0; e < inst_->n_edges(); ++e) {
    double z = 0.0;
    for (int k = 0; k < 3; ++k) z += messages_.to_user[e][k] * messages_.to_unit[e][k];
    log_z -= std::log(z);
  }

  double load = 0.0;
  for (std::size_t e = 0; e < inst_->n_edges(); ++e) {
    const Edge& ed = inst_->edge(e);
    pt.utility += static_cast<double>(ed.value) * m.edge[e][kS];
    load += static_cast<double>(ed.weight) * m.edge[e][kS];
  }
  for (const auto& um : m.user) pt.disconnected += um.disconnected;
  pt.spare_capacity = static_cast<double>(inst_->total_capacity()) - load;
  pt.log_z = log_z;
  // conditional entropy of y given t; equals the Gibbs entropy when t is fixed
  pt.entropy = log_z - pt.mu * pt.utility - activity_term;
  pt.free_entropy = pt.mu * pt.utility + pt.entropy;
  return pt;
}

BpResult run_bp(const GameInstance& inst, double mu, const BpOptions& options,
                const MessageSet* warm_start) {
  BpSolver solver(inst, mu, options);
  if (warm_start) {
    MessageSet ms = *warm_start;
    ms.mu = mu;
    solver.set_messages(std::move(ms));
  }
  BpResult result;
  result.report = solver.run();
  result.messages = solver.messages();
  return result;
}

Marginals marginals(const GameInstance& inst, const MessageSet& messages) {
  BpSolver solver(inst, messages.mu);
  solver.set_messages(messages);
  return solver.marginals();
}

LandscapePoint bethe_thermodynamics(const GameInstance& inst, const MessageSet& messages) {
  BpSolver solver(inst, messages.mu);
  solver.set_messages(messages);
  return solver.thermodynamics();
}

}  // namespace spg
