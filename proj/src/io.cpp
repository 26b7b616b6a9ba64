#include "spg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace spg::io {

Json to_json(const GameInstance& inst) {
  Json j;
  j["n_users"] = inst.n_users();
  j["n_units"] = inst.n_units();
  Json edges = Json::array();
  for (const Edge& e : inst.edges()) edges.push_back({{"u", e.user}, {"a", e.unit}, {"w", e.weight}, {"v", e.value}});
  j["edges"] = std::move(edges);
  j["capacities"] = std::vector<std::int64_t>(inst.capacities().begin(), inst.capacities().end());
  j["p"] = std::vector<double>(inst.activities().begin(), inst.activities().end());
  return j;
}

GameInstance instance_from_json(const Json& j) {
  static const std::set<std::string> keys{"n_users", "n_units", "edges", "capacities", "p", "params"};
  for (const auto& [k, _] : j.items())
    if (!keys.count(k)) throw std::invalid_argument("unknown instance field '" + k + "'");
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges"))
    edges.push_back(Edge{e.at("u").get<Index>(), e.at("a").get<Index>(), e.at("w").get<std::int64_t>(),
                         e.at("v").get<std::int64_t>()});
  std::vector<double> p;
  if (j.contains("p")) p = j.at("p").get<std::vector<double>>();
  return GameInstance(j.at("n_users").get<Index>(), j.at("n_units").get<Index>(), std::move(edges),
                      j.at("capacities").get<std::vector<std::int64_t>>(), std::move(p));
}

Json to_json(const Assignment& x) { return Json(x.choice); }

Assignment assignment_from_json(const GameInstance& inst, const Json& j) {
  Assignment x;
  if (j.is_array()) {
    x.choice = j.get<std::vector<Index>>();
    x.active.assign(x.choice.size(), 1);
  } else {
    x.choice = j.at("choice").get<std::vector<Index>>();
    x.active = j.contains("active") ? j.at("active").get<std::vector<std::uint8_t>>()
                                    : std::vector<std::uint8_t>(x.choice.size(), 1);
  }
  check_structure(inst, x);
  return x;
}

Json to_json(const oracle::EquilibriumCensus& census) {
  Json hist = Json::object();
  for (const auto& [u, n] : census.utility_histogram) hist[std::to_string(u)] = n;
  Json eq = Json::array();
  for (const auto& x : census.equilibria) eq.push_back(to_json(x));
  return Json{{"count", census.count}, {"utility_histogram", hist}, {"equilibria", eq}};
}

Json to_json(const EnsembleParams& p) {
  return Json{{"N", p.n_users},  {"M", p.n_units},   {"C", p.capacity},
              {"q", p.q},        {"w", {p.w.lo, p.w.hi}}, {"v", {p.v.lo, p.v.hi}},
              {"c", p.c},        {"stochastic", p.stochastic}, {"seed", p.seed}};
}

EnsembleParams params_from_json(const Json& j, EnsembleParams p) {
  for (const auto& [k, v] : j.items()) {
    if (k == "N") p.n_users = v.get<Index>();
    else if (k == "M") p.n_units = v.get<Index>();
    else if (k == "C") p.capacity = v.get<std::int64_t>();
    else if (k == "q") p.q = v.get<double>();
    else if (k == "w") p.w = {v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>()};
    else if (k == "v") p.v = {v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>()};
    else if (k == "c") p.c = v.get<double>();
    else if (k == "stochastic") p.stochastic = v.get<bool>();
    else if (k == "seed") p.seed = v.get<std::uint64_t>();
    else throw std::invalid_argument("unknown ensemble field '" + k + "'");
  }
  p.validate();
  return p;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Json::parse(in);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace spg::io
