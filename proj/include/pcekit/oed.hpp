#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "pcekit/postprocess.hpp"

namespace pcekit {

/// Input-design study for discriminating two model hypotheses by the
/// Bhattacharyya distance between their output densities at the
/// measurement time.
struct OedProblem {
  SystemDef model_a;
  SystemDef model_b;
  std::string measured_state = "x2";
  double measurement_time = 10.0;
  Eigen::VectorXd input_times;  // breakpoints of the piecewise-constant input
  double input_lower = 0.0;     // per-segment bounds
  double input_upper = 5.0;
  int pce_order = 2;
  SimOptions sim;
};

/// The enzyme-kinetics reference study: two mass-action mechanisms for a
/// substrate/complex pair with uncertain initial concentrations and rate
/// constants, a piecewise-constant additive input on the second rate, and
/// a measurement of the complex concentration at t = 10 s.
OedProblem build_reference_problem();

struct OedResult {
  Eigen::VectorXd u_v;
  double score = 0.0;
  int eval_count = 0;
  std::vector<double> trace;  // best score after each objective evaluation
};

/// Composes both models once and evaluates candidate inputs repeatedly.
class OedStudy {
 public:
  explicit OedStudy(OedProblem prob);

  const OedProblem& problem() const { return prob_; }
  const ExpandedSystem& system_a() const { return a_; }
  const ExpandedSystem& system_b() const { return b_; }

  /// Beta4 fits of the measured state at the measurement time.
  std::pair<Beta4Fit, Beta4Fit> fits(const Eigen::VectorXd& u_v) const;

  /// Bhattacharyya distance between the two fitted densities.
  double score(const Eigen::VectorXd& u_v) const;

  /// Derivative-free maximization of the score: Nelder-Mead with bound
  /// clipping, multi-start. Deterministic for a fixed seed.
  OedResult optimize(int n_starts = 3, int max_iter_per_start = 120,
                     unsigned long long seed = kDefaultSeed) const;

 private:
  OedProblem prob_;
  ExpandedSystem a_;
  ExpandedSystem b_;
  int state_a_;
  int state_b_;
};

/// One-shot wrappers.
double discrimination_score(const OedProblem& prob, const Eigen::VectorXd& u_v);
OedResult optimize_input(const OedProblem& prob);

}  // namespace pcekit
