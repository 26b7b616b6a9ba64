// Command-line front end: every task subcommand builds an ExperimentSpec
// (optionally from --spec, with flags taking precedence) and runs it.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spg/experiment.hpp"
#include "spg/io.hpp"

namespace {

using spg::io::Json;

// Flag name -> option key for each task.
const std::map<std::string, std::vector<std::pair<std::string, std::string>>>& task_flags() {
  static const std::vector<std::pair<std::string, std::string>> bp{
      {"--mu", "mu"}, {"--damping", "damping"}, {"--tol", "tolerance"}, {"--max-iter", "max_iterations"}};
  static const std::map<std::string, std::vector<std::pair<std::string, std::string>>> flags{
      {"gen", {}},
      {"dyn",
       {{"--algo", "algo"}, {"--gamma", "gamma"}, {"--gammas", "gammas"}, {"--runs", "runs"},
        {"--steps", "steps"}, {"--burn-in", "burn_in"}}},
      {"bp", bp},
      {"musweep",
       {{"--mu-min", "mu_min"}, {"--mu-max", "mu_max"}, {"--mu-step", "mu_step"}, {"--direction", "direction"},
        {"--damping", "damping"}, {"--tol", "tolerance"}, {"--max-iter", "max_iterations"}}},
      {"maxsum", {{"--sense", "sense"}, {"--rho", "rho"}, {"--restarts", "restarts"}, {"--max-iter", "max_iterations"}}},
      {"decimate",
       {{"--mu", "mu"}, {"--max-retries", "max_retries"}, {"--damping", "damping"}, {"--tol", "tolerance"},
        {"--max-iter", "max_iterations"}}},
      {"mirror", bp},
      {"mirror-validate",
       {{"--samples", "samples"}, {"--mu", "mu"}, {"--damping", "damping"}, {"--tol", "tolerance"},
        {"--max-iter", "max_iterations"}}},
      {"enumerate", {{"--budget", "budget"}}},
      {"quenched", {{"--samples", "samples"}, {"--observable", "observable"}, {"--budget", "budget"}}},
  };
  return flags;
}

// Numbers, booleans and lists parse as JSON; anything else stays a string.
// A comma-separated list of numbers becomes an array.
Json flag_value(const std::string& raw) {
  const Json j = Json::parse(raw, nullptr, false);
  if (!j.is_discarded()) return j;
  if (raw.find(',') != std::string::npos) {
    const Json list = Json::parse("[" + raw + "]", nullptr, false);
    if (!list.is_discarded()) return list;
  }
  return raw;
}

struct Common {
  std::string spec, out, instance, fixture;
  std::optional<std::uint64_t> seed;
  std::optional<int> instances;
  std::map<std::string, std::string> ensemble;  // key -> raw value
  std::map<std::string, std::string> options;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--spec", c.spec, "JSON experiment spec; flags override its fields");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--instance", c.instance, "instance JSON file");
  app->add_option("--fixture", c.fixture, "built-in instance: example, star, star-half");
  app->add_option("--instances", c.instances, "number of ensemble instances");
  const std::vector<std::pair<std::string, std::string>> ens{
      {"-N,--users", "N"}, {"-M,--units", "M"}, {"-C,--capacity", "C"}, {"-q,--edge-prob", "q"},
      {"--w-min", "w_min"}, {"--w-max", "w_max"}, {"--v-min", "v_min"}, {"--v-max", "v_max"},
      {"-c,--correlation", "c"}, {"--stochastic", "stochastic"}};
  for (const auto& [flag, key] : ens) app->add_option(flag, c.ensemble[key], "ensemble parameter " + key);
}

spg::ExperimentSpec build_spec(const std::string& task, const Common& c) {
  Json j = c.spec.empty() ? Json::object() : spg::io::read_json(c.spec);
  if (!task.empty()) j["task"] = task;
  if (!c.out.empty()) j["out"] = c.out;
  if (c.seed) j["seed"] = *c.seed;
  if (c.instances) j["instances"] = *c.instances;
  auto set_source = [&](const char* key, const std::string& v) {
    j.erase("ensemble"), j.erase("instance"), j.erase("fixture");
    j[key] = v;
  };
  if (!c.instance.empty()) set_source("instance", c.instance);
  if (!c.fixture.empty()) set_source("fixture", c.fixture);

  Json ens = j.contains("ensemble") ? j["ensemble"] : Json::object();
  bool touched = false;
  for (const auto& [key, raw] : c.ensemble) {
    if (raw.empty()) continue;
    touched = true;
    const Json v = flag_value(raw);
    if (key == "w_min" || key == "w_max" || key == "v_min" || key == "v_max") {
      const std::string range = key.substr(0, 1);
      if (!ens.contains(range)) ens[range] = range == "w" ? Json{6, 15} : Json{1, 10};
      ens[range][key.ends_with("min") ? 0 : 1] = v;
    } else {
      ens[key] = v;
    }
  }
  if (touched) {
    j.erase("instance"), j.erase("fixture");
    j["ensemble"] = ens;
  }
  if (!j.contains("options")) j["options"] = Json::object();
  for (const auto& [key, raw] : c.options)
    if (!raw.empty()) j["options"][key] = flag_value(raw);
  return spg::spec_from_json(j);
}

int report(const spg::ExperimentOutcome& o) {
  std::cout << o.summary.dump(2) << "\n";
  return o.hard_failure ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacitated service-provision game: equilibria, dynamics and message passing"};
  app.require_subcommand(1);

  std::map<std::string, Common> common;
  for (const auto& [task, flags] : task_flags()) {
    auto* sub = app.add_subcommand(task, "run the " + task + " task");
    Common& c = common[task];
    add_common(sub, c);
    for (const auto& [flag, key] : flags) sub->add_option(flag, c.options[key], "task option " + key);
  }

  auto* run = app.add_subcommand("run", "run an experiment spec file");
  Common& run_c = common["run"];
  add_common(run, run_c);
  run->get_option("--spec")->required();

  std::vector<std::string> fig_inputs;
  std::string fig_out = "figures";
  auto* fig = app.add_subcommand("figure-data", "curves from experiment output directories");
  fig->add_option("inputs", fig_inputs, "experiment output directories")->required();
  fig->add_option("--out", fig_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* sub : app.get_subcommands()) {
      const std::string name = sub->get_name();
      if (name == "figure-data") {
        for (const auto& p : spg::figure_data({fig_inputs.begin(), fig_inputs.end()}, fig_out))
          std::cout << p.string() << "\n";
        return 0;
      }
      const std::string task = name == "run" ? "" : name;
      return report(spg::run_experiment(build_spec(task, common[name])));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
