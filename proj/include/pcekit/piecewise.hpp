#pragma once

#include <Eigen/Core>

namespace pcekit {

/// Piecewise-constant signal: value of the segment [times[k], times[k+1])
/// containing t; holds the last value after the final breakpoint.
/// t before the first breakpoint is undefined and throws.
double piecewise(const Eigen::VectorXd& times, const Eigen::VectorXd& values, double t);

}  // namespace pcekit
