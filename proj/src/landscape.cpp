#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spg/bp.hpp"

namespace spg {

namespace {

constexpr double kUnphysical = 1e-6;

std::vector<SweepPoint> sweep_one_way(const GameInstance& inst, const std::vector<double>& grid,
                                      const BpOptions& options, double upper_bound,
                                      const std::string& tag) {
  std::vector<SweepPoint> out;
  if (grid.empty()) return out;
  BpSolver solver(inst, grid.front(), options);
  for (double mu : grid) {
    solver.set_mu(mu);
    SweepPoint sp;
    try {
      const BpReport report = solver.run();
      sp.point = solver.thermodynamics();
      sp.point.converged = report.converged;
      sp.point.iterations = report.iterations;
      sp.point.branch = tag;
    } catch (const BpContradiction&) {
      sp.point.mu = mu;
      sp.point.converged = false;
      sp.point.branch = tag + "-contradiction";
      sp.physical = false;
      out.push_back(sp);
      solver.set_messages(MessageSet::uniform(inst, mu));
      continue;
    }
    sp.physical = std::isfinite(sp.point.entropy) && sp.point.entropy >= -kUnphysical &&
                  sp.point.utility <= upper_bound + kUnphysical;
    out.push_back(sp);
    if (!sp.physical) break;
  }
  return out;
}

// Valid points (converged, physical) in sweep order.
std::vector<const LandscapePoint*> usable(const std::vector<SweepPoint>& sweep) {
  std::vector<const LandscapePoint*> pts;
  for (const auto& sp : sweep)
    if (sp.physical && sp.point.converged) pts.push_back(&sp.point);
  return pts;
}

// Index of the largest consecutive utility change above `threshold`, or -1.
// The branch is pts[0..k].
int find_jump(const std::vector<const LandscapePoint*>& pts, double threshold) {
  int best = -1;
  double best_step = threshold;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double step = std::abs(pts[i + 1]->utility - pts[i]->utility);
    if (step > best_step) {
      best_step = step;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

MuSweepResult mu_sweep(const GameInstance& inst, std::vector<double> grid,
                       SweepDirection direction, const BpOptions& options) {
  if (grid.empty()) throw std::invalid_argument("empty mu grid");
  const bool ascending = std::is_sorted(grid.begin(), grid.end());
  const bool descending = std::is_sorted(grid.rbegin(), grid.rend());
  if (!ascending && !descending) throw std::invalid_argument("mu grid must be monotone");
  if (!ascending) std::reverse(grid.begin(), grid.end());

  const double upper = utility_upper_bound(inst);
  MuSweepResult result;
  if (direction != SweepDirection::Down) result.up = sweep_one_way(inst, grid, options, upper, "up");
  if (direction != SweepDirection::Up) {
    std::vector<double> rev(grid.rbegin(), grid.rend());
    result.down = sweep_one_way(inst, rev, options, upper, "down");
  }
  result.transition = analyze_transition(result.up, result.down, upper);
  return result;
}

TransitionReport analyze_transition(const std::vector<SweepPoint>& up,
                                    const std::vector<SweepPoint>& down, double upper_bound,
                                    double jump_fraction) {
  TransitionReport report;
  const auto lo = usable(up);
  const auto hi = usable(down);
  const double threshold = jump_fraction * upper_bound;
  const int ju = find_jump(lo, threshold);
  const int jd = find_jump(hi, threshold);
  if (ju >= 0) report.jump_up = lo[ju]->mu;
  if (jd >= 0) report.jump_down = hi[jd]->mu;
  if (ju < 0 || jd < 0) return report;

  // low branch: up sweep before its jump; high branch: down sweep before its jump
  const std::vector<const LandscapePoint*> low(lo.begin(), lo.begin() + ju + 1);
  std::vector<const LandscapePoint*> high(hi.begin(), hi.begin() + jd + 1);
  report.gap_low = low.front()->utility;
  for (auto* p : low) report.gap_low = std::max(report.gap_low, p->utility);
  report.gap_high = high.front()->utility;
  for (auto* p : high) report.gap_high = std::min(report.gap_high, p->utility);
  report.two_branches = report.gap_high > report.gap_low;

  // free-entropy difference on the grid points both branches share, in increasing mu
  std::reverse(high.begin(), high.end());
  std::vector<std::pair<double, double>> diff;
  for (auto* h : high)
    for (auto* l : low)
      if (std::abs(h->mu - l->mu) < 1e-12) diff.emplace_back(h->mu, h->free_entropy - l->free_entropy);
  for (std::size_t i = 0; i + 1 < diff.size(); ++i) {
    const auto [m0, d0] = diff[i];
    const auto [m1, d1] = diff[i + 1];
    if (d0 == 0.0) {
      report.mu_star = m0;
      break;
    }
    if ((d0 < 0.0) != (d1 < 0.0)) {
      report.mu_star = m0 + (m1 - m0) * (-d0) / (d1 - d0);
      break;
    }
  }
  if (!report.mu_star && !diff.empty() && diff.back().second == 0.0) report.mu_star = diff.back().first;
  return report;
}

}  // namespace spg
