#include "spg/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "spg/bp.hpp"
#include "spg/dynamics.hpp"
#include "spg/fixtures.hpp"
#include "spg/maxsum.hpp"
#include "spg/mirror.hpp"
#include "spg/oracle.hpp"
#include "spg/parallel.hpp"
#include "spg/stats.hpp"

namespace spg {

namespace fs = std::filesystem;
using io::fmt;
using io::Json;

namespace {

const std::map<std::string, std::set<std::string>>& task_options() {
  static const std::set<std::string> bp{"mu", "damping", "tolerance", "max_iterations"};
  static const std::map<std::string, std::set<std::string>> opts{
      {"gen", {}},
      {"dyn", {"algo", "gamma", "gammas", "runs", "steps", "burn_in"}},
      {"bp", bp},
      {"musweep", {"mu_min", "mu_max", "mu_step", "direction", "damping", "tolerance", "max_iterations"}},
      {"maxsum", {"sense", "rho", "restarts", "max_iterations"}},
      {"decimate", {"mu", "max_retries", "damping", "tolerance", "max_iterations"}},
      {"mirror", bp},
      {"mirror-validate", {"samples", "mu", "damping", "tolerance", "max_iterations"}},
      {"enumerate", {"budget"}},
      {"quenched", {"samples", "observable", "budget"}},
  };
  return opts;
}

template <class T>
T opt(const Json& o, const char* key, T fallback) {
  return o.contains(key) ? o.at(key).get<T>() : fallback;
}

BpOptions bp_options(const Json& o, std::uint64_t seed) {
  BpOptions b;
  b.damping = opt(o, "damping", b.damping);
  b.tolerance = opt(o, "tolerance", b.tolerance);
  b.max_iterations = opt(o, "max_iterations", b.max_iterations);
  b.seed = seed;
  return b;
}

struct Csv {
  std::ostringstream s;
  explicit Csv(const std::string& header) { s << header << "\n"; }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((s << (first ? "" : ",") << cell(cells), first = false), ...);
    s << "\n";
  }
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }
  static std::string cell(bool x) { return x ? "1" : "0"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I x) { return std::to_string(x); }
};

// Per-instance scalar metrics, aggregated as mean and std-of-mean.
struct Metrics {
  std::map<std::string, std::vector<double>> values;
  void add(const std::string& k, double v) { values[k].push_back(v); }
  Json aggregate() const {
    Json j = Json::object();
    for (const auto& [k, v] : values) {
      const double sd = stats::stddev(v);
      j[k] = {{"n", v.size()}, {"mean", stats::mean(v)},
              {"sem", v.size() > 1 ? sd / std::sqrt(static_cast<double>(v.size())) : 0.0}};
    }
    return j;
  }
};

std::vector<GameInstance> load_instances(const ExperimentSpec& spec) {
  std::vector<GameInstance> out;
  if (!spec.fixture.empty()) {
    if (spec.fixture == "example") out.push_back(fixtures::example());
    else if (spec.fixture == "star") out.push_back(fixtures::star());
    else if (spec.fixture == "star-half") out.push_back(fixtures::star(0.5, 0.5));
    else throw std::invalid_argument("unknown fixture '" + spec.fixture + "'");
  } else if (!spec.instance_file.empty()) {
    out.push_back(io::instance_from_json(io::read_json(spec.instance_file)));
  } else {
    out.resize(static_cast<std::size_t>(spec.instances));
    parallel_for(out.size(), [&](std::size_t i) { out[i] = sample_instance(*spec.ensemble, i); });
  }
  return out;
}

std::string suffix(std::size_t i) { return "_" + std::to_string(i); }

struct TaskContext {
  const ExperimentSpec& spec;
  const std::vector<GameInstance>& instances;
  ExperimentOutcome& outcome;
  Metrics metrics;
  Json per_instance = Json::array();

  void write(const std::string& name, const std::string& text) {
    const fs::path p = spec.out / name;
    io::write_text(p, text);
    outcome.files.push_back(p);
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }
  std::uint64_t instance_seed(std::size_t i) const { return derive_seed(spec.seed, i); }
};

void task_gen(TaskContext& ctx) {
  for (std::size_t i = 0; i < ctx.instances.size(); ++i) {
    const auto& inst = ctx.instances[i];
    Json j = io::to_json(inst);
    if (ctx.spec.ensemble) j["params"] = io::to_json(*ctx.spec.ensemble), j["params"]["index"] = i;
    ctx.write_json("instance" + suffix(i) + ".json", j);
    const auto cb = capacity_bounds(inst, !inst.deterministic());
    ctx.metrics.add("edges", static_cast<double>(inst.n_edges()));
    ctx.metrics.add("C_lower", cb.lower);
    ctx.metrics.add("C_upper", cb.upper);
    ctx.metrics.add("U_plus", utility_upper_bound(inst, !inst.deterministic()));
  }
}

void task_dyn(TaskContext& ctx) {
  const Json& o = ctx.spec.options;
  const Algorithm algo = parse_algorithm(opt<std::string>(o, "algo", "br"));
  std::vector<double> gammas{opt(o, "gamma", 0.0)};
  if (o.contains("gammas")) gammas = o.at("gammas").get<std::vector<double>>();
  const int runs = opt(o, "runs", 100);
  ArrivalsDeparturesOptions ad;
  ad.steps = opt<std::int64_t>(o, "steps", 0);
  ad.burn_in = opt<std::int64_t>(o, "burn_in", -1);

  for (std::size_t i = 0; i < ctx.instances.size(); ++i) {
    const auto& inst = ctx.instances[i];
    Csv csv("gamma,run_id,init_U,final_U,D,Cstar,rounds,moves,nash,mean_U,mean_D,mean_Cstar");
    std::int64_t not_nash = 0;
    std::vector<double> finals;
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      struct Row {
        std::int64_t init = 0, final_u = 0, d = 0, cs = 0, rounds = 0, moves = 0;
        bool nash = true;
        double mu = 0, md = 0, mc = 0;
      };
      std::vector<Row> rows(static_cast<std::size_t>(runs));
      parallel_for(rows.size(), [&](std::size_t r) {
        Rng rng = make_rng(derive_seed(ctx.instance_seed(i), g), r);
        Row& row = rows[r];
        if (algo == Algorithm::ArrivalsDepartures) {
          const auto run = arrivals_departures(inst, ad, rng);
          const auto obs = observables(inst, run.run.final);
          row = {run.run.init_utility, run.run.final_utility, obs.disconnected, obs.spare_capacity,
                 run.run.rounds, run.run.moves, run.all_nash && run.trajectories_increasing};
          for (const auto& s : run.series) {
            row.mu += static_cast<double>(s.utility);
            row.md += static_cast<double>(s.disconnected);
            row.mc += static_cast<double>(s.spare_capacity);
          }
          const double n = std::max<std::size_t>(1, run.series.size());
          row.mu /= n, row.md /= n, row.mc /= n;
        } else {
          const auto run = run_dynamics(inst, algo, gammas[g], rng);
          const auto obs = observables(inst, run.final);
          row = {run.init_utility, run.final_utility, obs.disconnected, obs.spare_capacity, run.rounds,
                 run.moves, is_nash(inst, run.final) && strictly_increasing(run.trajectory)};
          row.mu = static_cast<double>(obs.total_utility);
          row.md = static_cast<double>(obs.disconnected);
          row.mc = static_cast<double>(obs.spare_capacity);
        }
      });
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const Row& w = rows[r];
        csv.row(gammas[g], r, w.init, w.final_u, w.d, w.cs, w.rounds, w.moves, w.nash, w.mu, w.md, w.mc);
        not_nash += !w.nash;
        finals.push_back(w.mu);
        ctx.metrics.add("U", w.mu);
        ctx.metrics.add("D", w.md);
        ctx.metrics.add("Cstar", w.mc);
      }
    }
    ctx.write("dyn" + suffix(i) + ".csv", csv.s.str());
    ctx.per_instance.push_back({{"instance", i}, {"runs", finals.size()}, {"not_nash", not_nash},
                                {"U_mean", stats::mean(finals)}});
    if (not_nash) ctx.outcome.hard_failure = true;
  }
}

void point_row(Csv& csv, const LandscapePoint& p, bool physical = true) {
  csv.row(p.mu, p.utility, p.disconnected, p.spare_capacity, p.entropy, p.free_entropy, p.converged,
          p.iterations, p.branch, physical);
}

constexpr const char* kPointHeader = "mu,U,D,Cstar,S,muF,converged,iterations,branch,physical";

void task_bp(TaskContext& ctx) {
  const double mu = opt(ctx.spec.options, "mu", 0.0);
  const std::size_t n = ctx.instances.size();
  std::vector<LandscapePoint> pts(n);
  std::vector<std::string> marg(n), err(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& inst = ctx.instances[i];
    try {
      BpSolver solver(inst, mu, bp_options(ctx.spec.options, ctx.instance_seed(i)));
      const auto rep = solver.run();
      pts[i] = solver.thermodynamics();
      pts[i].converged = rep.converged;
      pts[i].iterations = rep.iterations;
      const auto m = solver.marginals();
      Csv c("edge,u,a,m");
      for (std::size_t e = 0; e < inst.n_edges(); ++e) c.row(e, inst.edge(e).user, inst.edge(e).unit, m.serving(e));
      marg[i] = c.s.str();
    } catch (const BpContradiction& e) {
      err[i] = e.what();
    }
  });
  Csv csv(kPointHeader);
  for (std::size_t i = 0; i < n; ++i) {
    if (!err[i].empty()) {
      ctx.outcome.hard_failure = true;
      ctx.per_instance.push_back({{"instance", i}, {"error", err[i]}});
      continue;
    }
    point_row(csv, pts[i]);
    ctx.write("bp_marginals" + suffix(i) + ".csv", marg[i]);
    ctx.metrics.add("U", pts[i].utility);
    ctx.metrics.add("D", pts[i].disconnected);
    ctx.metrics.add("Cstar", pts[i].spare_capacity);
    ctx.metrics.add("S", pts[i].entropy);
    ctx.metrics.add("converged", pts[i].converged);
  }
  ctx.write("bp.csv", csv.s.str());
}

Json transition_json(const TransitionReport& t) {
  auto o = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
  return {{"two_branches", t.two_branches}, {"mu_star", o(t.mu_star)}, {"jump_up", o(t.jump_up)},
          {"jump_down", o(t.jump_down)}, {"gap_low", t.gap_low}, {"gap_high", t.gap_high}};
}

void task_musweep(TaskContext& ctx) {
  const Json& o = ctx.spec.options;
  const double lo = opt(o, "mu_min", -2.0), hi = opt(o, "mu_max", 2.0), step = opt(o, "mu_step", 0.1);
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("bad mu grid");
  std::vector<double> grid;
  for (int k = 0; lo + k * step <= hi + 1e-9 * step; ++k) grid.push_back(std::round((lo + k * step) * 1e12) / 1e12);
  const std::string dir = opt<std::string>(o, "direction", "both");
  const SweepDirection d = dir == "up" ? SweepDirection::Up : dir == "down" ? SweepDirection::Down : SweepDirection::Both;
  if (dir != "up" && dir != "down" && dir != "both") throw std::invalid_argument("direction must be up, down or both");

  const std::size_t n = ctx.instances.size();
  std::vector<MuSweepResult> res(n);
  parallel_for(n, [&](std::size_t i) {
    res[i] = mu_sweep(ctx.instances[i], grid, d, bp_options(o, ctx.instance_seed(i)));
  });
  for (std::size_t i = 0; i < n; ++i) {
    Csv csv(kPointHeader);
    for (const auto& sp : res[i].up) point_row(csv, sp.point, sp.physical);
    for (const auto& sp : res[i].down) point_row(csv, sp.point, sp.physical);
    ctx.write("musweep" + suffix(i) + ".csv", csv.s.str());
    ctx.per_instance.push_back({{"instance", i}, {"U_plus", utility_upper_bound(ctx.instances[i])},
                                {"transition", transition_json(res[i].transition)}});
  }
}

void certificate(TaskContext& ctx, std::size_t i, const std::string& name, const Assignment& x, Json extra) {
  const auto& inst = ctx.instances[i];
  ctx.write_json(name + suffix(i) + ".json", io::to_json(x));
  const auto obs = observables(inst, x);
  const bool nash = is_nash(inst, x);
  extra["instance"] = i;
  extra["U"] = obs.total_utility;
  extra["D"] = obs.disconnected;
  extra["Cstar"] = obs.spare_capacity;
  extra["is_nash"] = nash;
  extra["U_plus"] = utility_upper_bound(inst);
  ctx.per_instance.push_back(extra);
  ctx.metrics.add("U", static_cast<double>(obs.total_utility));
  ctx.metrics.add("D", static_cast<double>(obs.disconnected));
  ctx.metrics.add("Cstar", static_cast<double>(obs.spare_capacity));
  if (!nash) ctx.outcome.hard_failure = true;
}

void task_maxsum(TaskContext& ctx) {
  const Json& o = ctx.spec.options;
  const Sense sense = parse_sense(opt<std::string>(o, "sense", "max"));
  const std::size_t n = ctx.instances.size();
  std::vector<MaxSumResult> res(n);
  parallel_for(n, [&](std::size_t i) {
    MaxSumOptions m;
    m.rho = opt(o, "rho", m.rho);
    m.restarts = opt(o, "restarts", m.restarts);
    m.max_iterations = opt(o, "max_iterations", m.max_iterations);
    m.seed = ctx.instance_seed(i);
    res[i] = run_maxsum(ctx.instances[i], sense, m);
  });
  Csv csv("instance,U,U_plus,converged,repaired,repair_moves,attempts,iterations");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = res[i];
    csv.row(i, r.utility, utility_upper_bound(ctx.instances[i]), r.converged, r.repaired, r.repair_moves,
            r.attempts, r.iterations);
    certificate(ctx, i, "maxsum", r.assignment,
                {{"converged", r.converged}, {"repaired", r.repaired}, {"attempts", r.attempts}});
  }
  ctx.write("maxsum.csv", csv.s.str());
}

void task_decimate(TaskContext& ctx) {
  const Json& o = ctx.spec.options;
  const double mu = opt(o, "mu", 0.0);
  const std::size_t n = ctx.instances.size();
  std::vector<DecimationResult> res(n);
  parallel_for(n, [&](std::size_t i) {
    DecimationOptions d;
    d.bp = bp_options(o, ctx.instance_seed(i));
    d.max_retries = opt(o, "max_retries", d.max_retries);
    res[i] = decimate(ctx.instances[i], mu, d);
  });
  for (std::size_t i = 0; i < n; ++i) {
    certificate(ctx, i, "decimate", res[i].assignment,
                {{"repaired", res[i].repaired}, {"retries", res[i].retries}, {"failed", res[i].failed},
                 {"failure", res[i].failure}});
    if (res[i].failed) ctx.outcome.hard_failure = true;
  }
}

void task_mirror(TaskContext& ctx) {
  const double mu = opt(ctx.spec.options, "mu", 0.0);
  const std::size_t n = ctx.instances.size();
  std::vector<LandscapePoint> pts(n);
  std::vector<std::string> marg(n), err(n);
  parallel_for(n, [&](std::size_t i) {
    const auto& inst = ctx.instances[i];
    try {
      const auto fp = run_bp_mirror(inst, mu, bp_options(ctx.spec.options, ctx.instance_seed(i)));
      pts[i] = stochastic_thermodynamics(inst, fp);
      const auto m = mirror_marginals(inst, fp);
      Csv c("edge,u,a,m");
      for (std::size_t e = 0; e < inst.n_edges(); ++e) c.row(e, inst.edge(e).user, inst.edge(e).unit, m[e]);
      marg[i] = c.s.str();
    } catch (const BpContradiction& e) {
      err[i] = e.what();
    }
  });
  Csv csv(kPointHeader);
  for (std::size_t i = 0; i < n; ++i) {
    if (!err[i].empty()) {
      ctx.outcome.hard_failure = true;
      ctx.per_instance.push_back({{"instance", i}, {"error", err[i]}});
      continue;
    }
    point_row(csv, pts[i]);
    ctx.write("mirror_marginals" + suffix(i) + ".csv", marg[i]);
    ctx.metrics.add("U", pts[i].utility);
    ctx.metrics.add("D", pts[i].disconnected);
    ctx.metrics.add("Cstar", pts[i].spare_capacity);
  }
  ctx.write("mirror.csv", csv.s.str());
}

void task_mirror_validate(TaskContext& ctx) {
  const Json& o = ctx.spec.options;
  for (std::size_t i = 0; i < ctx.instances.size(); ++i) {
    const auto& inst = ctx.instances[i];
    MirrorValidationOptions v;
    v.samples = opt(o, "samples", v.samples);
    v.mu = opt(o, "mu", v.mu);
    v.bp = bp_options(o, ctx.instance_seed(i));
    v.seed = ctx.instance_seed(i);
    const auto rep = validate_mirror(inst, v);
    Json s{{"instance", i}, {"samples_used", rep.samples_used}, {"dropped", rep.dropped},
           {"refused", rep.refused}, {"mirror_converged", rep.mirror_converged}};
    if (rep.refused) {
      s["refusal"] = rep.refusal;
      ctx.outcome.hard_failure = true;
      ctx.per_instance.push_back(s);
      continue;
    }
    Csv csv("edge,u,a,m,m_bar,sigma,Delta,delta,sigma_zero");
    for (std::size_t e = 0; e < rep.edges.size(); ++e) {
      const auto& ev = rep.edges[e];
      csv.row(e, inst.edge(e).user, inst.edge(e).unit, ev.m, ev.m_bar, ev.sigma, ev.delta, ev.z, ev.sigma_zero);
    }
    ctx.write("mirror_validate" + suffix(i) + ".csv", csv.s.str());
    s["mean_abs_Delta"] = rep.mean_abs_delta;
    s["mean_m"] = rep.mean_m;
    s["relative_error"] = rep.relative_error;
    s["ks_statistic"] = rep.ks.statistic;
    s["ks_p_value"] = rep.ks.p_value;
    s["fraction_above_3"] = rep.fraction_above_3;
    s["sigma_zero_edges"] = rep.sigma_zero_edges;
    ctx.per_instance.push_back(s);
    ctx.metrics.add("relative_error", rep.relative_error);
    ctx.metrics.add("ks_p_value", rep.ks.p_value);
  }
}

void task_enumerate(TaskContext& ctx) {
  const double budget = opt(ctx.spec.options, "budget", oracle::kDefaultBudget);
  for (std::size_t i = 0; i < ctx.instances.size(); ++i) {
    const auto& inst = ctx.instances[i];
    const auto census = oracle::enumerate_nash(inst, {}, budget);
    ctx.write_json("census" + suffix(i) + ".json", io::to_json(census));
    Csv csv("U,count");
    std::vector<std::int64_t> utilities;
    for (const auto& [u, c] : census.utility_histogram) {
      csv.row(u, c);
      utilities.push_back(u);
    }
    ctx.write("census" + suffix(i) + ".csv", csv.s.str());
    ctx.per_instance.push_back({{"instance", i}, {"count", census.count}, {"utilities", utilities}});
    ctx.metrics.add("count", static_cast<double>(census.count));
  }
}

void task_quenched(TaskContext& ctx) {
  const Json& o = ctx.spec.options;
  const std::string name = opt<std::string>(o, "observable", "utility");
  oracle::Observable obs;
  if (name == "utility") obs = oracle::observe_utility;
  else if (name == "disconnected") obs = oracle::observe_disconnected;
  else if (name == "spare_capacity") obs = oracle::observe_spare_capacity;
  else throw std::invalid_argument("unknown observable '" + name + "'");
  std::optional<std::int64_t> samples;
  if (o.contains("samples")) samples = o.at("samples").get<std::int64_t>();
  const double budget = opt(o, "budget", oracle::kDefaultBudget);
  Csv csv("instance,observable,mean,realizations,exhaustive");
  for (std::size_t i = 0; i < ctx.instances.size(); ++i) {
    const auto r = oracle::quenched_average(ctx.instances[i], obs, samples, ctx.instance_seed(i), budget);
    csv.row(i, name, r.mean, r.realizations, r.exhaustive);
    ctx.per_instance.push_back({{"instance", i}, {"mean", r.mean}, {"realizations", r.realizations}});
    ctx.metrics.add(name, r.mean);
  }
  ctx.write("quenched.csv", csv.s.str());
}

}  // namespace

const std::vector<std::string>& experiment_tasks() {
  static const std::vector<std::string> tasks = [] {
    std::vector<std::string> t;
    for (const auto& [k, _] : task_options()) t.push_back(k);
    return t;
  }();
  return tasks;
}

void ExperimentSpec::validate() const {
  const auto& opts = task_options();
  const auto it = opts.find(task);
  if (it == opts.end()) throw std::invalid_argument("unknown task '" + task + "'");
  const int sources = !!ensemble + !instance_file.empty() + !fixture.empty();
  if (sources != 1) throw std::invalid_argument("exactly one of ensemble, instance, fixture is required");
  if (instances < 1) throw std::invalid_argument("instances must be >= 1");
  if (!options.is_object()) throw std::invalid_argument("options must be an object");
  for (const auto& [k, _] : options.items())
    if (!it->second.count(k)) throw std::invalid_argument("unknown option '" + k + "' for task " + task);
  if (ensemble) ensemble->validate();
}

ExperimentSpec spec_from_json(const Json& j) {
  ExperimentSpec s;
  for (const auto& [k, v] : j.items()) {
    if (k == "task") s.task = v.get<std::string>();
    else if (k == "ensemble") s.ensemble = io::params_from_json(v);
    else if (k == "instance") s.instance_file = v.get<std::string>();
    else if (k == "fixture") s.fixture = v.get<std::string>();
    else if (k == "instances") s.instances = v.get<int>();
    else if (k == "seed") s.seed = v.get<std::uint64_t>();
    else if (k == "out") s.out = v.get<std::string>();
    else if (k == "options") s.options = v;
    else throw std::invalid_argument("unknown spec field '" + k + "'");
  }
  s.validate();
  return s;
}

Json to_json(const ExperimentSpec& s) {
  Json j{{"task", s.task}};
  if (s.ensemble) j["ensemble"] = io::to_json(*s.ensemble);
  if (!s.instance_file.empty()) j["instance"] = s.instance_file;
  if (!s.fixture.empty()) j["fixture"] = s.fixture;
  j["instances"] = s.instances;
  j["seed"] = s.seed;
  j["out"] = s.out.string();
  j["options"] = s.options;
  return j;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentOutcome outcome;
  const auto instances = load_instances(spec);
  TaskContext ctx{spec, instances, outcome, {}, Json::array()};
  static const std::map<std::string, void (*)(TaskContext&)> run{
      {"gen", task_gen},           {"dyn", task_dyn},           {"bp", task_bp},
      {"musweep", task_musweep},   {"maxsum", task_maxsum},     {"decimate", task_decimate},
      {"mirror", task_mirror},     {"mirror-validate", task_mirror_validate},
      {"enumerate", task_enumerate}, {"quenched", task_quenched}};
  run.at(spec.task)(ctx);
  outcome.summary = {{"task", spec.task},
                     {"spec", to_json(spec)},
                     {"instances", instances.size()},
                     {"hard_failure", outcome.hard_failure},
                     {"aggregate", ctx.metrics.aggregate()},
                     {"per_instance", ctx.per_instance}};
  const fs::path summary = spec.out / "summary.json";
  io::write_json(summary, outcome.summary);
  outcome.files.push_back(summary);
  return outcome;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("missing column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

void histogram_csv(std::ostringstream& s, const std::string& label, const std::vector<double>& x,
                   double lo, double hi, std::size_t bins, bool normal_reference) {
  const auto h = stats::histogram(x, lo, hi, bins);
  s << "# " << label << ": bins=" << bins << " lo=" << fmt(lo) << " hi=" << fmt(hi) << " n=" << x.size() << "\n";
  s << "quantity,center,count,density" << (normal_reference ? ",normal" : "") << "\n";
  for (std::size_t b = 0; b < bins; ++b) {
    const double dens = x.empty() ? 0.0 : static_cast<double>(h.counts[b]) / (static_cast<double>(x.size()) * h.width());
    s << label << "," << fmt(h.center(b)) << "," << h.counts[b] << "," << fmt(dens);
    if (normal_reference) s << "," << fmt(stats::normal_pdf(h.center(b)));
    s << "\n";
  }
}

}  // namespace

std::vector<fs::path> figure_data(const std::vector<fs::path>& inputs, const fs::path& out) {
  std::vector<std::string> missing;
  std::vector<Json> summaries;
  for (const auto& dir : inputs) {
    if (!fs::exists(dir / "summary.json")) missing.push_back((dir / "summary.json").string());
    else summaries.push_back(io::read_json(dir / "summary.json"));
  }
  if (inputs.empty()) missing.push_back("<no input directories>");
  auto need = [&](const fs::path& p) {
    if (!fs::exists(p)) missing.push_back(p.string());
    return fs::exists(p);
  };
  // first pass only checks existence, so every missing file is listed at once
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const std::string task = summaries[k]["task"];
    const auto n = summaries[k]["instances"].get<std::size_t>();
    for (std::size_t i = 0; i < n; ++i) {
      if (task == "musweep") need(inputs[k] / ("musweep" + suffix(i) + ".csv"));
      if (task == "dyn") need(inputs[k] / ("dyn" + suffix(i) + ".csv"));
      if (task == "mirror-validate" && !summaries[k]["per_instance"][i].value("refused", false))
        need(inputs[k] / ("mirror_validate" + suffix(i) + ".csv"));
    }
  }
  if (!missing.empty()) {
    std::string msg = "figure-data: missing inputs:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw std::runtime_error(msg);
  }

  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    io::write_text(out / name, text);
    written.push_back(out / name);
  };
  Csv vs_c("source,c,algo,U_mean,D_mean,Cstar_mean,instances");
  bool any_dyn = false;
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const Json& sm = summaries[k];
    const std::string task = sm["task"];
    const std::string tag = "src" + std::to_string(k);
    const auto n = sm["instances"].get<std::size_t>();
    if (task == "musweep") {
      for (std::size_t i = 0; i < n; ++i) {
        const auto rows = read_csv(inputs[k] / ("musweep" + suffix(i) + ".csv"));
        const auto cu = column(rows[0], "U"), cs = column(rows[0], "S"), cb = column(rows[0], "branch"),
                   cm = column(rows[0], "mu"), cp = column(rows[0], "physical"), cc = column(rows[0], "converged");
        Csv c("branch,mu,U,S");
        for (std::size_t r = 1; r < rows.size(); ++r)
          if (rows[r][cp] == "1" && rows[r][cc] == "1") c.row(rows[r][cb], rows[r][cm], rows[r][cu], rows[r][cs]);
        emit(tag + "_entropy_vs_utility" + suffix(i) + ".csv", c.s.str());
      }
    } else if (task == "dyn") {
      any_dyn = true;
      std::map<double, std::vector<std::array<double, 2>>> by_gamma;  // (init, final)
      std::vector<double> all_u, all_d, all_c;
      for (std::size_t i = 0; i < n; ++i) {
        const auto rows = read_csv(inputs[k] / ("dyn" + suffix(i) + ".csv"));
        const auto cg = column(rows[0], "gamma"), ci = column(rows[0], "init_U"), cf = column(rows[0], "final_U"),
                   cu = column(rows[0], "mean_U"), cd = column(rows[0], "mean_D"), cc = column(rows[0], "mean_Cstar");
        for (std::size_t r = 1; r < rows.size(); ++r) {
          by_gamma[std::stod(rows[r][cg])].push_back({std::stod(rows[r][ci]), std::stod(rows[r][cf])});
          all_u.push_back(std::stod(rows[r][cu]));
          all_d.push_back(std::stod(rows[r][cd]));
          all_c.push_back(std::stod(rows[r][cc]));
        }
      }
      const Json& spec = sm["spec"];
      const double c = spec.contains("ensemble") ? spec["ensemble"]["c"].get<double>() : 0.0;
      const std::string algo = spec["options"].value("algo", std::string("br"));
      vs_c.row(tag, c, algo, stats::mean(all_u), stats::mean(all_d), stats::mean(all_c), n);
      if (by_gamma.size() > 1) {
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (const auto& [g, v] : by_gamma)
          for (const auto& r : v) lo = std::min(lo, r[1]), hi = std::max(hi, r[1]);
        const double threshold = 0.5 * (lo + hi);
        std::ostringstream s;
        s << "# good equilibrium: final_U >= " << fmt(threshold) << " (midpoint of observed final_U range)\n";
        Csv g("gamma,init_U_mean,final_U_mean,good_fraction,runs");
        for (const auto& [gamma, v] : by_gamma) {
          double si = 0, sf = 0, good = 0;
          for (const auto& r : v) si += r[0], sf += r[1], good += r[1] >= threshold;
          const double m = static_cast<double>(v.size());
          g.row(gamma, si / m, sf / m, good / m, v.size());
        }
        emit(tag + "_gamma_scan.csv", s.str() + g.s.str());
      }
    } else if (task == "mirror-validate") {
      for (std::size_t i = 0; i < n; ++i) {
        if (sm["per_instance"][i].value("refused", false)) continue;
        const auto rows = read_csv(inputs[k] / ("mirror_validate" + suffix(i) + ".csv"));
        const auto cd = column(rows[0], "Delta"), cz = column(rows[0], "delta"), c0 = column(rows[0], "sigma_zero");
        std::vector<double> delta, z;
        for (std::size_t r = 1; r < rows.size(); ++r) {
          delta.push_back(std::stod(rows[r][cd]));
          if (rows[r][c0] == "0") z.push_back(std::stod(rows[r][cz]));
        }
        double span = 1e-12;
        for (double d : delta) span = std::max(span, std::abs(d));
        std::ostringstream s;
        histogram_csv(s, "Delta", delta, -span, span, 40, false);
        histogram_csv(s, "delta", z, -5.0, 5.0, 40, true);
        emit(tag + "_mirror_validation" + suffix(i) + ".csv", s.str());
      }
    }
  }
  if (any_dyn) emit("observables_vs_c.csv", vs_c.s.str());
  return written;
}

}  // namespace spg
