#include "pcekit/oed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pcekit {

namespace {

const char* kHenriDoc = R"json({
  "states": [
    {"name": "x1", "pdf": "beta4", "data": [3, 3, 0.96, 0.98],
     "rhs": "(p1 + p3)*(x2 - 1)*x1 + (p2 + u)*x2"},
    {"name": "x2", "pdf": "beta4", "data": [3, 3, 0.01, 0.03],
     "rhs": "p1*(1 - x2)*x1 - (p2 + u)*x2"}
  ],
  "parameters": [
    {"name": "p1", "pdf": "uniform", "data": [0.9, 1.1]},
    {"name": "p2", "pdf": "uniform", "data": [0.9, 1.1]},
    {"name": "p3", "pdf": "uniform", "data": [0.9, 1.1]}
  ],
  "inputs": [
    {"name": "u", "rhs": "piecewise(u_t, u_v, t)",
     "u_t": [0, 1, 2, 3, 4], "u_v": [0, 0, 0, 0, 0]}
  ]
})json";

const char* kMichaelisMentenDoc = R"json({
  "states": [
    {"name": "x1", "pdf": "beta4", "data": [3, 3, 0.96, 0.98],
     "rhs": "p1*(x2 - 1)*x1 + (p2 + u)*x2"},
    {"name": "x2", "pdf": "beta4", "data": [3, 3, 0.01, 0.03],
     "rhs": "p1*(1 - x2)*x1 - (p3 + p2 + u)*x2"}
  ],
  "parameters": [
    {"name": "p1", "pdf": "uniform", "data": [0.9, 1.15]},
    {"name": "p2", "pdf": "uniform", "data": [0.9, 1.15]},
    {"name": "p3", "pdf": "uniform", "data": [0.9, 1.15]}
  ],
  "inputs": [
    {"name": "u", "rhs": "piecewise(u_t, u_v, t)",
     "u_t": [0, 1, 2, 3, 4], "u_v": [0, 0, 0, 0, 0]}
  ]
})json";

}  // namespace

OedProblem build_reference_problem() {
  OedProblem prob;
  prob.model_a = load_system(kHenriDoc);
  prob.model_b = load_system(kMichaelisMentenDoc);
  prob.measured_state = "x2";
  prob.measurement_time = 10.0;
  prob.input_times.resize(5);
  prob.input_times << 0, 1, 2, 3, 4;
  prob.input_lower = 0.0;
  prob.input_upper = 5.0;
  prob.pce_order = 2;
  prob.sim.t0 = 0.0;
  prob.sim.tf = prob.measurement_time;
  prob.sim.dt = 0.05;
  prob.sim.rel_tol = 1e-6;
  prob.sim.abs_tol = 1e-9;
  return prob;
}

OedStudy::OedStudy(OedProblem prob)
    : prob_(std::move(prob)),
      a_(compose(prob_.model_a, prob_.pce_order)),
      b_(compose(prob_.model_b, prob_.pce_order)),
      state_a_(prob_.model_a.state_index(prob_.measured_state)),
      state_b_(prob_.model_b.state_index(prob_.measured_state)) {
  if (state_a_ < 0 || state_b_ < 0)
    throw Error("oed: measured state '" + prob_.measured_state + "' missing from a model");
  if (prob_.sim.tf < prob_.measurement_time)
    throw Error("oed: simulation horizon ends before the measurement time");
  if (prob_.input_times.size() > 0 &&
      prob_.measurement_time < prob_.input_times[prob_.input_times.size() - 1])
    throw Error("oed: measurement time precedes the last input breakpoint");
}

std::pair<Beta4Fit, Beta4Fit> OedStudy::fits(const Eigen::VectorXd& u_v) const {
  if (u_v.size() != prob_.input_times.size())
    throw Error("oed: input value count must match the breakpoint count");
  InputOverrides overrides;
  overrides["u_v"] = u_v;

  auto fit_final = [&](const ExpandedSystem& es, int state) {
    const Trajectory traj = sim_galerkin(es, prob_.sim, overrides);
    const MomentSeries ms = state_moments(es, traj, state, 4);
    const int last = static_cast<int>(ms.times.size()) - 1;
    return fit_beta4(ms.raw(0, last), ms.raw(1, last), ms.raw(2, last), ms.raw(3, last));
  };
  return {fit_final(a_, state_a_), fit_final(b_, state_b_)};
}

double OedStudy::score(const Eigen::VectorXd& u_v) const {
  const auto [fa, fb] = fits(u_v);
  return bhattacharyya(fa, fb);
}

namespace {

/// Raised internally once the score saturates at +infinity (fully separated
/// densities); no input can improve on it.
struct PerfectDiscrimination {};

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;  // negated score (minimization)
  void sort() {
    std::vector<int> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return f[i] < f[j]; });
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> fs;
    for (int i : order) {
      xs.push_back(x[i]);
      fs.push_back(f[i]);
    }
    x.swap(xs);
    f.swap(fs);
  }
};

}  // namespace

OedResult OedStudy::optimize(int n_starts, int max_iter_per_start,
                             unsigned long long seed) const {
  if (n_starts < 1) throw Error("oed: need at least one start");
  const int dim = static_cast<int>(prob_.input_times.size());
  const double lo = prob_.input_lower, hi = prob_.input_upper;

  OedResult result;
  result.u_v = Eigen::VectorXd::Constant(dim, lo);
  result.score = -std::numeric_limits<double>::infinity();

  auto clip = [&](Eigen::VectorXd v) {
    for (int i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo, hi);
    return v;
  };
  auto objective = [&](const Eigen::VectorXd& v) {
    const double s = score(v);
    ++result.eval_count;
    if (s > result.score) {
      result.score = s;
      result.u_v = v;
    }
    result.trace.push_back(result.score);
    if (std::isinf(result.score)) throw PerfectDiscrimination{};
    return -s;
  };

  // deterministic starts: an increasing staircase, the bound midpoint, then
  // seeded random points
  std::vector<Eigen::VectorXd> starts;
  Eigen::VectorXd ramp(dim);
  for (int i = 0; i < dim; ++i) ramp[i] = lo + (hi - lo) * (i + 1.0) / dim;
  starts.push_back(ramp);
  starts.push_back(Eigen::VectorXd::Constant(dim, 0.5 * (lo + hi)));
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  while (static_cast<int>(starts.size()) < n_starts) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uni(rng);
    starts.push_back(v);
  }

  constexpr double rho = 1.0, chi = 2.0, gamma = 0.5, sigma = 0.5;
  try {
  for (int s = 0; s < n_starts; ++s) {
    if (lo == hi) {  // degenerate bounds: the input is fixed
      objective(starts[s]);
      continue;
    }
    Simplex sim;
    sim.x.push_back(clip(starts[s]));
    sim.f.push_back(objective(sim.x[0]));
    const double step = 0.25 * (hi - lo);
    for (int d = 0; d < dim; ++d) {
      Eigen::VectorXd v = sim.x[0];
      v[d] = v[d] + step <= hi ? v[d] + step : v[d] - step;
      sim.x.push_back(clip(v));
      sim.f.push_back(objective(sim.x.back()));
    }

    for (int it = 0; it < max_iter_per_start; ++it) {
      sim.sort();
      const double spread = std::abs(sim.f.front() - sim.f.back());
      if (spread < 1e-6 * std::max(1.0, std::abs(sim.f.front()))) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
      for (int i = 0; i < dim; ++i) centroid += sim.x[i];
      centroid /= dim;
      const Eigen::VectorXd& worst = sim.x[dim];

      const Eigen::VectorXd reflected = clip(centroid + rho * (centroid - worst));
      const double fr = objective(reflected);
      if (fr < sim.f[0]) {
        const Eigen::VectorXd expanded = clip(centroid + chi * (reflected - centroid));
        const double fe = objective(expanded);
        if (fe < fr) {
          sim.x[dim] = expanded;
          sim.f[dim] = fe;
        } else {
          sim.x[dim] = reflected;
          sim.f[dim] = fr;
        }
      } else if (fr < sim.f[dim - 1]) {
        sim.x[dim] = reflected;
        sim.f[dim] = fr;
      } else {
        const bool outside = fr < sim.f[dim];
        const Eigen::VectorXd candidate = outside
                                              ? (centroid + gamma * (reflected - centroid)).eval()
                                              : (centroid - gamma * (centroid - worst)).eval();
        const Eigen::VectorXd contracted = clip(candidate);
        const double fc = objective(contracted);
        if (fc < std::min(fr, sim.f[dim])) {
          sim.x[dim] = contracted;
          sim.f[dim] = fc;
        } else {
          for (int i = 1; i <= dim; ++i) {
            sim.x[i] = clip(sim.x[0] + sigma * (sim.x[i] - sim.x[0]));
            sim.f[i] = objective(sim.x[i]);
          }
        }
      }
    }
  }
  } catch (const PerfectDiscrimination&) {
    // densities no longer overlap; stop searching
  }
  return result;
}

double discrimination_score(const OedProblem& prob, const Eigen::VectorXd& u_v) {
  return OedStudy(prob).score(u_v);
}

OedResult optimize_input(const OedProblem& prob) { return OedStudy(prob).optimize(); }

}  // namespace pcekit
