#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spg/ensemble.hpp"
#include "spg/io.hpp"

namespace spg {

/// One batch job: a task run over a set of instances. The instances come
/// from exactly one of an ensemble, an instance file or a named fixture
/// ("example", "star", "star-half").
struct ExperimentSpec {
  std::string task;
  std::optional<EnsembleParams> ensemble;
  std::string instance_file;
  std::string fixture;
  int instances = 1;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  io::Json options = io::Json::object();

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

const std::vector<std::string>& experiment_tasks();

/// Unknown fields (top level and per-task options) are rejected.
ExperimentSpec spec_from_json(const io::Json& j);
io::Json to_json(const ExperimentSpec& spec);

struct ExperimentOutcome {
  io::Json summary;                       // also written to <out>/summary.json
  std::vector<std::filesystem::path> files;
  bool hard_failure = false;
};

/// Runs the task over all instances (in parallel where independent) and
/// writes per-instance CSV files plus an aggregate summary into spec.out.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

/// Figure-ready curves from the outputs of one or more run_experiment
/// directories. Throws std::runtime_error listing any missing inputs.
std::vector<std::filesystem::path> figure_data(const std::vector<std::filesystem::path>& inputs,
                                               const std::filesystem::path& out);

}  // namespace spg
