#include "pcekit/postprocess.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>

namespace pcekit {

std::vector<MomentTensor> moment_tensors(const BasisSet& b, int max_order) {
  if (max_order < 1) throw Error("moment_tensors: max_order must be >= 1");
  std::vector<MomentTensor> out;
  out.reserve(max_order);
  for (int m = 1; m <= max_order; ++m) out.push_back(moment_tensor(b, m));
  return out;
}

MomentSeries calc_moments(const std::vector<MomentTensor>& tensors,
                          const Eigen::MatrixXd& coeffs, const Eigen::VectorXd& times) {
  if (tensors.empty()) throw Error("calc_moments: no moment tensors given");
  const int m_max = static_cast<int>(tensors.size());
  const int k = static_cast<int>(coeffs.rows());
  if (times.size() != k) throw Error("calc_moments: time grid does not match coefficient rows");
  for (int m = 0; m < m_max; ++m) {
    if (tensors[m].moment_order() != m + 1)
      throw Error("calc_moments: tensors must cover orders 1..m in order");
    if (tensors[m].dim() != coeffs.cols())
      throw Error("calc_moments: coefficient length " + std::to_string(coeffs.cols()) +
                  " does not match tensor basis size " + std::to_string(tensors[m].dim()));
  }

  MomentSeries out;
  out.times = times;
  out.raw.resize(m_max, k);
  out.central.resize(m_max, k);
  for (int step = 0; step < k; ++step) {
    const Eigen::VectorXd x = coeffs.row(step).transpose();
    for (int m = 0; m < m_max; ++m) out.raw(m, step) = tensors[m].contract(x);
    // central moments by the binomial shift; nu_0 = 1
    const double mu = out.raw(0, step);
    for (int m = 1; m <= m_max; ++m) {
      double acc = 0.0, binom = 1.0;
      for (int j = 0; j <= m; ++j) {
        const double nu_j = j == 0 ? 1.0 : out.raw(j - 1, step);
        acc += binom * nu_j * std::pow(-mu, m - j);
        binom = binom * (m - j) / (j + 1);
      }
      out.central(m - 1, step) = m == 1 ? 0.0 : acc;
    }
  }
  return out;
}

MomentSeries state_moments(const ExpandedSystem& es, const Trajectory& traj, int state,
                           int max_order) {
  if (state < 0 || state >= es.n_states()) throw Error("state_moments: state index out of range");
  const int pb = es.pbasis();
  const auto tensors = moment_tensors(es.basis, max_order);
  return calc_moments(tensors, traj.values.middleCols(state * pb, pb), traj.times);
}

std::array<double, 3> central_from_raw(double nu1, double nu2, double nu3, double nu4) {
  const double mu = nu1;
  const double m2 = nu2 - mu * mu;
  const double m3 = nu3 - 3 * mu * nu2 + 2 * mu * mu * mu;
  const double m4 = nu4 - 4 * mu * nu3 + 6 * mu * mu * nu2 - 3 * mu * mu * mu * mu;
  return {m2, m3, m4};
}

Distribution Beta4Fit::distribution() const {
  return Distribution::make_beta4(alpha, beta, lower, upper);
}

Beta4Fit fit_beta4(double nu1, double nu2, double nu3, double nu4) {
  const auto [m2, m3, m4] = central_from_raw(nu1, nu2, nu3, nu4);
  if (!(m2 > 0.0))
    throw FitError("fit_beta4: degenerate distribution (variance " + std::to_string(m2) + ")",
                   m2);
  const double sigma = std::sqrt(m2);
  const double g1 = m3 / (sigma * sigma * sigma);
  const double beta1 = g1 * g1;          // squared skewness
  const double beta2 = m4 / (m2 * m2);   // kurtosis

  const double lower_margin = beta2 - beta1 - 1.0;
  if (!(lower_margin > 0.0))
    throw FitError("fit_beta4: moments below the feasibility boundary kurtosis > skewness^2 + 1 "
                   "(margin " + std::to_string(lower_margin) + ")",
                   lower_margin);
  const double upper_margin = 6.0 + 3.0 * beta1 - 2.0 * beta2;
  if (!(upper_margin > 0.0))
    throw FitError(
        "fit_beta4: moments outside the beta family region (margin " +
            std::to_string(upper_margin) + ")",
        upper_margin);

  // shape from (skewness, kurtosis)
  const double s = 6.0 * lower_margin / upper_margin;  // alpha + beta
  const double denom = 16.0 * (s + 1.0) + beta1 * (s + 2.0) * (s + 2.0);
  double delta = std::sqrt(beta1 * (s + 2.0) * (s + 2.0) * s * s / denom);  // beta - alpha
  if (g1 < 0.0) delta = -delta;

  Beta4Fit fit;
  fit.alpha = 0.5 * (s - delta);
  fit.beta = 0.5 * (s + delta);
  // support from (mean, variance)
  const double width = sigma * s * std::sqrt((s + 1.0) / (fit.alpha * fit.beta));
  fit.lower = nu1 - width * fit.alpha / s;
  fit.upper = fit.lower + width;
  return fit;
}

Beta4Fit fit_beta4(const std::array<double, 4>& nu) {
  return fit_beta4(nu[0], nu[1], nu[2], nu[3]);
}

std::array<double, 4> beta4_raw_moments(const Beta4Fit& f) {
  const Distribution d = f.distribution();
  return {raw_moment(d, 1), raw_moment(d, 2), raw_moment(d, 3), raw_moment(d, 4)};
}

Eigen::VectorXd sample_pce(const BasisSet& b, const Eigen::VectorXd& coeffs, int n, Rng& rng) {
  if (coeffs.size() != b.size()) throw Error("sample_pce: coefficient length mismatch");
  if (n < 1) throw Error("sample_pce: sample count must be >= 1");
  Eigen::VectorXd out(n);
  Eigen::VectorXd xi(b.n_xi());
  for (int s = 0; s < n; ++s) {
    for (int d = 0; d < b.n_xi(); ++d) xi[d] = b.family(d).sample_germ(rng);
    out[s] = coeffs.dot(b.eval(xi));
  }
  return out;
}

Density density_of(const Beta4Fit& f) { return density_of(f.distribution()); }

Density density_of(const Distribution& d) {
  auto [lo, hi] = d.support();
  if (d.kind == DistKind::Gaussian) {
    const double sigma = std::sqrt(d.variance);
    lo = d.mean - 12.0 * sigma;
    hi = d.mean + 12.0 * sigma;
  }
  if (d.kind == DistKind::Dirac) throw Error("dirac distribution has no density representation");
  return Density{lo, hi, [d](double x) { return pdf_eval(d, x); }};
}

namespace {

double overlap_integral(const Density& p, const Density& q, int nodes) {
  // 200/400-node Legendre rules, built once; weights carry the 1/2 density
  static const QuadratureRule rule200 = make_gauss_rule(FamilyKind::Legendre, 0, 0, 200);
  static const QuadratureRule rule400 = make_gauss_rule(FamilyKind::Legendre, 0, 0, 400);
  const QuadratureRule& rule = nodes <= 200 ? rule200 : rule400;
  const double lo = std::min(p.lower, q.lower);
  const double hi = std::max(p.upper, q.upper);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (int k = 0; k < rule.size(); ++k) {
    const double x = mid + half * rule.nodes[k];
    if (x < p.lower || x > p.upper || x < q.lower || x > q.upper) continue;
    acc += rule.weights[k] * std::sqrt(p.pdf(x) * q.pdf(x));
  }
  return acc * (hi - lo);  // probability weights sum to 1, so scale by length
}

}  // namespace

double bhattacharyya(const Density& p, const Density& q, double* precision) {
  if (p.upper <= q.lower || q.upper <= p.lower) {
    if (precision) *precision = 0.0;
    return std::numeric_limits<double>::infinity();
  }
  const double coarse = overlap_integral(p, q, 200);
  const double fine = overlap_integral(p, q, 400);
  const double disagreement = std::abs(coarse - fine);
  if (precision) *precision = disagreement;
  static std::atomic<bool> warned{false};
  if (disagreement > 1e-6 && !warned.exchange(true))
    std::cerr << "bhattacharyya: quadrature refinement disagrees by " << disagreement
              << "; result may be imprecise (further warnings suppressed)\n";
  if (!(fine > 0.0)) return std::numeric_limits<double>::infinity();
  return -std::log(fine);
}

double bhattacharyya(const Beta4Fit& p, const Beta4Fit& q, double* precision) {
  return bhattacharyya(density_of(p), density_of(q), precision);
}

namespace {

std::array<double, 4> empirical_raw_moments(const std::vector<double>& samples) {
  if (samples.empty()) throw Error("bhattacharyya: empty sample set");
  std::array<double, 4> nu{0, 0, 0, 0};
  for (double x : samples) {
    double p = x;
    for (int m = 0; m < 4; ++m) {
      nu[m] += p;
      p *= x;
    }
  }
  for (double& v : nu) v /= static_cast<double>(samples.size());
  return nu;
}

}  // namespace

double bhattacharyya(const std::vector<double>& p_samples, const std::vector<double>& q_samples) {
  return bhattacharyya(fit_beta4(empirical_raw_moments(p_samples)),
                       fit_beta4(empirical_raw_moments(q_samples)));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> outer_bounds(const std::vector<Trajectory>& samples,
                                                         int column) {
  if (samples.empty()) throw Error("outer_bounds: no sampled trajectories");
  EnvelopeAccumulator acc(column);
  for (const Trajectory& t : samples) acc.add(t);
  return {acc.lower(), acc.upper()};
}

void EnvelopeAccumulator::add(const Trajectory& traj) {
  if (column_ < 0 || column_ >= traj.values.cols())
    throw Error("envelope: column index out of range");
  const Eigen::VectorXd col = traj.values.col(column_);
  if (count_ == 0) {
    lower_ = col;
    upper_ = col;
  } else {
    if (col.size() != lower_.size()) throw Error("envelope: trajectory grids differ");
    lower_ = lower_.cwiseMin(col);
    upper_ = upper_.cwiseMax(col);
  }
  ++count_;
}

}  // namespace pcekit
