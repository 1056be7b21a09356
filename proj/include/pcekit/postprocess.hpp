#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "pcekit/pcebasis.hpp"
#include "pcekit/simulate.hpp"

namespace pcekit {

/// Raw and central moments of one variable over a time grid.
/// raw(m-1, k) is the m-th raw moment at time step k; central moments are
/// derived from raw by the binomial shift around the mean.
struct MomentSeries {
  Eigen::VectorXd times;
  Eigen::MatrixXd raw;      // max_order x k
  Eigen::MatrixXd central;  // max_order x k, first row identically 0
  int max_order() const { return static_cast<int>(raw.rows()); }
};

/// Moment tensors of orders 1..max_order for a basis.
std::vector<MomentTensor> moment_tensors(const BasisSet& b, int max_order);

/// Contract coefficient rows (k x P-tilde) against the moment tensors.
MomentSeries calc_moments(const std::vector<MomentTensor>& tensors,
                          const Eigen::MatrixXd& coeffs, const Eigen::VectorXd& times);

/// Moments of one state block of a Galerkin/collocation trajectory.
MomentSeries state_moments(const ExpandedSystem& es, const Trajectory& traj, int state,
                           int max_order);

/// Central moments mu_2..mu_4 from raw nu_1..nu_4 (helper for fits).
std::array<double, 3> central_from_raw(double nu1, double nu2, double nu3, double nu4);

/// Four-parameter beta distribution recovered from moments.
struct Beta4Fit {
  double alpha = 0.0;
  double beta = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  Distribution distribution() const;
};

/// Invert the first four raw moments into (alpha, beta, lower, upper) via the
/// standard beta moment equations: shape from (skewness, kurtosis), support
/// from (mean, variance). Throws FitError with the feasibility margin when
/// the variance degenerates or (skewness^2, kurtosis) leaves the beta region.
Beta4Fit fit_beta4(double nu1, double nu2, double nu3, double nu4);
Beta4Fit fit_beta4(const std::array<double, 4>& nu);

/// First four raw moments of a Beta4 (closed form; fit roundtrip partner).
std::array<double, 4> beta4_raw_moments(const Beta4Fit& f);

/// Samples of x = coeffs . Phi(xi) under the germ distributions.
Eigen::VectorXd sample_pce(const BasisSet& b, const Eigen::VectorXd& coeffs, int n, Rng& rng);

/// A density on a bounded interval, for overlap integrals.
struct Density {
  double lower = 0.0;
  double upper = 1.0;
  std::function<double(double)> pdf;
};

Density density_of(const Beta4Fit& f);
/// Gaussian support is truncated at +-12 standard deviations.
Density density_of(const Distribution& d);

/// Bhattacharyya distance -ln integral sqrt(p q) over the union support,
/// fixed 200-node Gauss-Legendre, refined once; writes the refinement
/// disagreement to *precision when given and warns on stderr above 1e-6.
/// Disjoint supports return +infinity.
double bhattacharyya(const Density& p, const Density& q, double* precision = nullptr);
double bhattacharyya(const Beta4Fit& p, const Beta4Fit& q, double* precision = nullptr);
/// Sample sets are first reduced to Beta4 fits via their empirical moments.
double bhattacharyya(const std::vector<double>& p_samples, const std::vector<double>& q_samples);

/// Pointwise min/max envelope of sampled trajectories for one column.
std::pair<Eigen::VectorXd, Eigen::VectorXd> outer_bounds(const std::vector<Trajectory>& samples,
                                                         int column);

/// Streaming envelope for large Monte Carlo runs.
class EnvelopeAccumulator {
 public:
  explicit EnvelopeAccumulator(int column) : column_(column) {}
  void add(const Trajectory& traj);
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  bool empty() const { return count_ == 0; }

 private:
  int column_;
  long count_ = 0;
  Eigen::VectorXd lower_, upper_;
};

}  // namespace pcekit
