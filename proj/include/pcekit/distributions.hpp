#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pcekit/errors.hpp"

namespace pcekit {

/// Seeded random source threaded through every sampling operation.
using Rng = std::mt19937_64;

/// Default seed used by the CLI and examples; fixed so runs are reproducible.
inline constexpr std::uint64_t kDefaultSeed = 42;

enum class DistKind { Gaussian, Uniform, Beta, Beta4, Dirac };

/// A scalar probability distribution. Use the named factories; they validate
/// the parameter constraints (variance > 0, shapes > 0, lower < upper).
///
/// Gaussian data is (mean, variance), not standard deviation.
struct Distribution {
  DistKind kind = DistKind::Dirac;
  double mean = 0.0;      ///< Gaussian
  double variance = 0.0;  ///< Gaussian
  double alpha = 0.0;     ///< Beta / Beta4 shape
  double beta = 0.0;      ///< Beta / Beta4 shape
  double lower = 0.0;     ///< Uniform / Beta4 support
  double upper = 0.0;     ///< Uniform / Beta4 support
  double value = 0.0;     ///< Dirac

  static Distribution make_gaussian(double mean, double variance);
  static Distribution make_uniform(double lower, double upper);
  static Distribution make_beta(double alpha, double beta);
  static Distribution make_beta4(double alpha, double beta, double lower, double upper);
  static Distribution make_dirac(double value);

  /// Build from the document encoding: pdf name + data array
  /// (arity 2/2/2/4/1 for gaussian/uniform/beta/beta4/dirac).
  static Distribution from_pdf_data(const std::string& pdf, const std::vector<double>& data);

  bool is_deterministic() const { return kind == DistKind::Dirac; }

  /// Support interval; +-infinity for Gaussian.
  std::pair<double, double> support() const;

  /// Affine map X = offset + scale * xi from the canonical germ
  /// (standard normal / uniform on [-1,1] / beta on [-1,1]).
  /// Dirac maps to (value, 0).
  std::pair<double, double> germ_affine_map() const;

  bool operator==(const Distribution&) const = default;
};

/// Density at x. Zero outside the support; throws for Dirac
/// ("no density representation").
double pdf_eval(const Distribution& d, double x);

/// n i.i.d. samples. Reproducible given the same seeded generator state.
std::vector<double> sample(const Distribution& d, std::size_t n, Rng& rng);

/// One sample.
double sample_one(const Distribution& d, Rng& rng);

/// Closed-form raw moment E[X^m], m >= 1.
double raw_moment(const Distribution& d, int m);

const char* dist_kind_name(DistKind kind);

}  // namespace pcekit
