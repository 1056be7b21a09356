#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcekit/oed.hpp"
#include "pcekit/postprocess.hpp"

namespace pcekit {

/// Full-precision text form of a double (17 significant digits, bit-stable
/// on round trip).
std::string fmt17(double v);

/// Expanded trajectory CSV: header t,<name>_0,...,<name>_{P-1} per state.
void write_expanded_trajectory_csv(std::ostream& os, const ExpandedSystem& es,
                                   const Trajectory& traj);

/// Raw-state trajectory CSV (one Monte Carlo sample): header t,<names...>.
void write_state_trajectory_csv(std::ostream& os, const std::vector<std::string>& names,
                                const Trajectory& traj);

/// Moment matrix CSV with a time header row and labeled raw/central rows.
void write_moments_csv(std::ostream& os, const MomentSeries& ms);
MomentSeries read_moments_csv(std::istream& is);

/// Trajectory CSV reader (expects a time column first).
Trajectory read_trajectory_csv(std::istream& is, std::vector<std::string>* header = nullptr);

/// {"alpha":..., "beta":..., "lower":..., "upper":...}
std::string beta4_to_json(const Beta4Fit& fit);

/// Envelope CSV: t,lower,upper.
void write_envelope_csv(std::ostream& os, const Eigen::VectorXd& times,
                        const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// Structural dump of an expanded system, including every tensor nonzero;
/// re-composing from the same document must reproduce it exactly.
std::string expanded_system_to_json(const ExpandedSystem& es);

}  // namespace pcekit
