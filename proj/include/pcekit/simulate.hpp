#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "pcekit/compose.hpp"
#include "pcekit/piecewise.hpp"

namespace pcekit {

enum class SolverKind { RK45, RK4, Euler };

/// Integration options: dense output on the grid t0, t0+dt, ..., tf.
struct SimOptions {
  double t0 = 0.0;
  double tf = 1.0;
  double dt = 0.01;
  SolverKind solver = SolverKind::RK45;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;

  void validate() const;
  int grid_points() const;  ///< floor((tf-t0)/dt) + 1
};

/// Solution samples on the output grid; one column per variable
/// (expanded coefficients or raw states, depending on the producer).
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd values;  // rows match times
};

using RhsFn = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Integrate dy/dt = rhs(t, y). RK45 is the adaptive Dormand-Prince pair
/// with the embedded error estimate against rel_tol/abs_tol; RK4 and Euler
/// take one fixed step per grid interval. Steps never cross grid points.
/// Throws IntegrationError on step underflow or non-finite derivatives.
Trajectory integrate(const RhsFn& rhs, const Eigen::VectorXd& y0, const SimOptions& opts);

/// Germ samples, one column per sample, rows in germ-dimension order.
Eigen::MatrixXd sample_basis(const ExpandedSystem& es, int n, Rng& rng);

/// Physical samples of the uncertain variables (germ samples pushed through
/// each variable's affine map), rows in germ-dimension order.
Eigen::MatrixXd sample_variables(const ExpandedSystem& es, int n, Rng& rng);

/// Galerkin path: integrate the expanded system from x0_hat.
/// Columns: state-major blocks of P-tilde coefficients.
Trajectory sim_galerkin(const ExpandedSystem& es, const SimOptions& opts,
                        const InputOverrides& overrides = {});

/// Collocation path: integrate the nominal system per basis sample, then fit
/// coefficients by least squares per state and time step. Requires at least
/// P-tilde samples and a full-rank regression matrix.
Trajectory sim_collocation(const ExpandedSystem& es, const SimOptions& opts,
                           const Eigen::MatrixXd& basis_samples,
                           const InputOverrides& overrides = {});

/// Monte Carlo path, streaming: integrates the nominal system per variable
/// sample column and hands each raw-state trajectory to the consumer in
/// sample order.
void sim_montecarlo_foreach(const ExpandedSystem& es, const SimOptions& opts,
                            const Eigen::MatrixXd& variable_samples,
                            const InputOverrides& overrides,
                            const std::function<void(int, const Trajectory&)>& consume);

/// Monte Carlo path, collecting all sampled trajectories.
std::vector<Trajectory> sim_montecarlo(const ExpandedSystem& es, const SimOptions& opts,
                                       const Eigen::MatrixXd& variable_samples,
                                       const InputOverrides& overrides = {});

/// Output coefficient series for one output on a Galerkin/collocation result.
Eigen::MatrixXd output_coefficient_series(const ExpandedSystem& es, const Trajectory& traj,
                                          int output, const InputOverrides& overrides = {});

}  // namespace pcekit
