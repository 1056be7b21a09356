#include "pcekit/simulate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pcekit {

double piecewise(const Eigen::VectorXd& times, const Eigen::VectorXd& values, double t) {
  if (times.size() == 0) throw Error("piecewise: empty breakpoint vector");
  if (times.size() != values.size())
    throw Error("piecewise: times and values must have the same length");
  for (int k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw Error("piecewise: times must be strictly increasing");
  if (t < times[0])
    throw Error("piecewise: t = " + std::to_string(t) + " precedes the first breakpoint");
  int k = static_cast<int>(times.size()) - 1;
  while (k > 0 && t < times[k]) --k;
  return values[k];
}

void SimOptions::validate() const {
  if (!(t0 < tf)) throw Error("simulation options: t0 must be < tf");
  if (!(dt > 0.0)) throw Error("simulation options: dt must be > 0");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw Error("simulation options: tolerances must be > 0");
}

int SimOptions::grid_points() const {
  return static_cast<int>(std::floor((tf - t0) / dt + 1e-9)) + 1;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784,
                 kB6 = 11.0 / 84;
// difference between 5th- and 4th-order weights, for the error estimate
constexpr double kE1 = kB1 - 5179.0 / 57600, kE3 = kB3 - 7571.0 / 16695, kE4 = kB4 - 393.0 / 640,
                 kE5 = kB5 + 92097.0 / 339200, kE6 = kB6 - 187.0 / 2100, kE7 = -1.0 / 40;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;

struct DormandPrince {
  const RhsFn& rhs;
  Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, ytmp, yerr;

  explicit DormandPrince(const RhsFn& f, Eigen::Index n) : rhs(f) {
    for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp, &yerr}) v->resize(n);
  }

  /// One trial step from (t, y) with size h into ynew; returns the scaled
  /// error norm used by the controller.
  double attempt(double t, const Eigen::VectorXd& y, double h, Eigen::VectorXd& ynew,
                 double rel_tol, double abs_tol) {
    rhs(t, y, k1);
    ytmp = y + h * kA21 * k1;
    rhs(t + kC2 * h, ytmp, k2);
    ytmp = y + h * (kA31 * k1 + kA32 * k2);
    rhs(t + kC3 * h, ytmp, k3);
    ytmp = y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3);
    rhs(t + kC4 * h, ytmp, k4);
    ytmp = y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
    rhs(t + kC5 * h, ytmp, k5);
    ytmp = y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    rhs(t + h, ynew, k7);
    yerr = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = yerr[i] / scale;
      acc += r * r;
    }
    const double err = std::sqrt(acc / std::max<Eigen::Index>(y.size(), 1));
    if (!std::isfinite(err) || !ynew.allFinite())
      throw IntegrationError("integration failure: non-finite derivative at t = " +
                                 std::to_string(t),
                             t);
    return err;
  }
};

void fixed_step(const RhsFn& rhs, double t, double h, Eigen::VectorXd& y, SolverKind kind,
                Eigen::VectorXd& k1, Eigen::VectorXd& k2, Eigen::VectorXd& k3,
                Eigen::VectorXd& k4, Eigen::VectorXd& ytmp) {
  rhs(t, y, k1);
  if (kind == SolverKind::Euler) {
    y += h * k1;
  } else {
    ytmp = y + 0.5 * h * k1;
    rhs(t + 0.5 * h, ytmp, k2);
    ytmp = y + 0.5 * h * k2;
    rhs(t + 0.5 * h, ytmp, k3);
    ytmp = y + h * k3;
    rhs(t + h, ytmp, k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!y.allFinite())
    throw IntegrationError("integration failure: non-finite state at t = " + std::to_string(t),
                           t);
}

}  // namespace

Trajectory integrate(const RhsFn& rhs, const Eigen::VectorXd& y0, const SimOptions& opts) {
  opts.validate();
  const int n_pts = opts.grid_points();
  Trajectory out;
  out.times.resize(n_pts);
  out.values.resize(n_pts, y0.size());
  for (int k = 0; k < n_pts; ++k) out.times[k] = opts.t0 + k * opts.dt;

  Eigen::VectorXd y = y0, ynew(y0.size());
  out.values.row(0) = y.transpose();

  if (opts.solver != SolverKind::RK45) {
    Eigen::VectorXd k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), ytmp(y.size());
    for (int k = 1; k < n_pts; ++k) {
      fixed_step(rhs, out.times[k - 1], opts.dt, y, opts.solver, k1, k2, k3, k4, ytmp);
      out.values.row(k) = y.transpose();
    }
    return out;
  }

  DormandPrince stepper(rhs, y0.size());
  double h = opts.dt;
  double t = opts.t0;
  for (int k = 1; k < n_pts; ++k) {
    const double t_target = out.times[k];
    while (t < t_target) {
      const double h_try = std::min(h, t_target - t);
      const double err = stepper.attempt(t, y, h_try, ynew, opts.rel_tol, opts.abs_tol);
      if (err <= 1.0) {
        t = (t + h_try >= t_target - 1e-14 * std::max(1.0, std::abs(t_target))) ? t_target
                                                                                : t + h_try;
        y.swap(ynew);
      }
      const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::max(h_try * grow, std::numeric_limits<double>::min());
      if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
        throw IntegrationError(
            "integration failure: step size underflow at t = " + std::to_string(t), t);
    }
    out.values.row(k) = y.transpose();
  }
  return out;
}

Eigen::MatrixXd sample_basis(const ExpandedSystem& es, int n, Rng& rng) {
  if (n < 1) throw Error("sample_basis: sample count must be >= 1");
  const int n_xi = es.basis.n_xi();
  Eigen::MatrixXd out(n_xi, n);
  for (int s = 0; s < n; ++s)
    for (int d = 0; d < n_xi; ++d) out(d, s) = es.basis.family(d).sample_germ(rng);
  return out;
}

Eigen::MatrixXd sample_variables(const ExpandedSystem& es, int n, Rng& rng) {
  Eigen::MatrixXd germ = sample_basis(es, n, rng);
  for (int d = 0; d < es.germs.size(); ++d) {
    const auto [off, scale] = es.germs.vars[d].dist.germ_affine_map();
    germ.row(d) = (germ.row(d).array() * scale + off).matrix();
  }
  return germ;
}

Trajectory sim_galerkin(const ExpandedSystem& es, const SimOptions& opts,
                        const InputOverrides& overrides) {
  if (!es.galerkin_ready)
    throw ComposeError("sim_galerkin: system was not composed for the Galerkin path");
  const BoundInputs inputs = es.bind_inputs(overrides);
  const RhsFn rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    es.expanded_rhs(t, y, inputs, dy);
  };
  return integrate(rhs, es.x0_hat, opts);
}

namespace {

/// Nominal trajectory for one germ-space sample.
Trajectory run_nominal(const ExpandedSystem& es, const SimOptions& opts,
                       const Eigen::VectorXd& params, const Eigen::VectorXd& x0,
                       const BoundInputs& inputs) {
  const RhsFn rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    es.nominal_rhs(t, y, params, inputs, dy);
  };
  return integrate(rhs, x0, opts);
}

}  // namespace

Trajectory sim_collocation(const ExpandedSystem& es, const SimOptions& opts,
                           const Eigen::MatrixXd& basis_samples, const InputOverrides& overrides) {
  const int pb = es.pbasis();
  const int q = static_cast<int>(basis_samples.cols());
  if (basis_samples.rows() != es.basis.n_xi())
    throw Error("sim_collocation: basis sample rows must match the germ count");
  if (q < pb)
    throw Error("sim_collocation: needs at least " + std::to_string(pb) + " samples, got " +
                std::to_string(q));

  Eigen::MatrixXd phi(q, pb);
  for (int s = 0; s < q; ++s) phi.row(s) = es.basis.eval(basis_samples.col(s)).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  if (qr.rank() < pb)
    throw Error("sim_collocation: regression matrix is rank-deficient (rank " +
                std::to_string(qr.rank()) + " < " + std::to_string(pb) +
                "); draw more or better-spread samples");

  const BoundInputs inputs = es.bind_inputs(overrides);
  const int n_pts = opts.grid_points();
  const int ns = es.n_states();
  // observations: per state, a (samples x times) matrix
  std::vector<Eigen::MatrixXd> obs(ns, Eigen::MatrixXd(q, n_pts));
  Eigen::VectorXd times;
  for (int s = 0; s < q; ++s) {
    const Trajectory traj = run_nominal(es, opts, es.realize_parameters(basis_samples.col(s)),
                                        es.realize_initial(basis_samples.col(s)), inputs);
    if (s == 0) times = traj.times;
    for (int st = 0; st < ns; ++st) obs[st].row(s) = traj.values.col(st).transpose();
  }

  Trajectory out;
  out.times = times;
  out.values.resize(n_pts, ns * pb);
  for (int st = 0; st < ns; ++st) {
    const Eigen::MatrixXd coeffs = qr.solve(obs[st]);  // (pb x n_pts)
    out.values.block(0, st * pb, n_pts, pb) = coeffs.transpose();
  }
  return out;
}

void sim_montecarlo_foreach(const ExpandedSystem& es, const SimOptions& opts,
                            const Eigen::MatrixXd& variable_samples,
                            const InputOverrides& overrides,
                            const std::function<void(int, const Trajectory&)>& consume) {
  if (variable_samples.rows() != es.germs.size())
    throw Error("sim_montecarlo: sample rows must match the uncertain-variable count");
  const BoundInputs inputs = es.bind_inputs(overrides);
  const int ns = es.n_states();
  const int n = static_cast<int>(variable_samples.cols());
  Eigen::VectorXd params(es.n_parameters()), x0(ns);
  for (int s = 0; s < n; ++s) {
    // variable samples are physical values in germ order
    for (int p = 0; p < es.n_parameters(); ++p) {
      const Distribution& d = es.def.parameters[p].dist;
      const int dim = es.germs.dim_of(es.def.parameters[p].name);
      params[p] = d.is_deterministic() ? d.value : variable_samples(dim, s);
    }
    for (int st = 0; st < ns; ++st) {
      const Distribution& d = es.def.states[st].initial;
      const int dim = es.germs.dim_of(es.def.states[st].name);
      x0[st] = d.is_deterministic() ? d.value : variable_samples(dim, s);
    }
    try {
      consume(s, run_nominal(es, opts, params, x0, inputs));
    } catch (const IntegrationError& e) {
      throw IntegrationError("sample " + std::to_string(s) + ": " + e.what(), e.time_of_failure);
    }
  }
}

std::vector<Trajectory> sim_montecarlo(const ExpandedSystem& es, const SimOptions& opts,
                                       const Eigen::MatrixXd& variable_samples,
                                       const InputOverrides& overrides) {
  std::vector<Trajectory> out(variable_samples.cols());
  sim_montecarlo_foreach(es, opts, variable_samples, overrides,
                         [&](int s, const Trajectory& traj) { out[s] = traj; });
  return out;
}

Eigen::MatrixXd output_coefficient_series(const ExpandedSystem& es, const Trajectory& traj,
                                          int output, const InputOverrides& overrides) {
  const BoundInputs inputs = es.bind_inputs(overrides);
  const int pb = es.pbasis();
  Eigen::MatrixXd out(traj.times.size(), pb);
  for (Eigen::Index k = 0; k < traj.times.size(); ++k)
    out.row(k) =
        es.output_coeffs(output, traj.times[k], traj.values.row(k).transpose(), inputs)
            .transpose();
  return out;
}

}  // namespace pcekit
