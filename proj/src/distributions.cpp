#include "pcekit/distributions.hpp"

#include <cmath>

namespace pcekit {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw SchemaError(msg);
}

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

/// Raw moment of Beta(alpha, beta) on [0,1]: prod_{k<m} (alpha+k)/(alpha+beta+k).
double beta01_raw_moment(double alpha, double beta, int m) {
  double r = 1.0;
  for (int k = 0; k < m; ++k) r *= (alpha + k) / (alpha + beta + k);
  return r;
}

double beta01_sample(double alpha, double beta, Rng& rng) {
  std::gamma_distribution<double> ga(alpha, 1.0), gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

Distribution Distribution::make_gaussian(double mean, double variance) {
  require(std::isfinite(mean) && std::isfinite(variance), "gaussian: parameters must be finite");
  require(variance > 0.0, "gaussian: variance must be > 0");
  Distribution d;
  d.kind = DistKind::Gaussian;
  d.mean = mean;
  d.variance = variance;
  return d;
}

Distribution Distribution::make_uniform(double lower, double upper) {
  require(std::isfinite(lower) && std::isfinite(upper), "uniform: bounds must be finite");
  require(lower < upper, "uniform: requires lower < upper");
  Distribution d;
  d.kind = DistKind::Uniform;
  d.lower = lower;
  d.upper = upper;
  return d;
}

Distribution Distribution::make_beta(double alpha, double beta) {
  require(std::isfinite(alpha) && std::isfinite(beta), "beta: shapes must be finite");
  require(alpha > 0.0 && beta > 0.0, "beta: requires alpha > 0 and beta > 0");
  Distribution d;
  d.kind = DistKind::Beta;
  d.alpha = alpha;
  d.beta = beta;
  d.lower = 0.0;
  d.upper = 1.0;
  return d;
}

Distribution Distribution::make_beta4(double alpha, double beta, double lower, double upper) {
  require(std::isfinite(alpha) && std::isfinite(beta), "beta4: shapes must be finite");
  require(alpha > 0.0 && beta > 0.0, "beta4: requires alpha > 0 and beta > 0");
  require(std::isfinite(lower) && std::isfinite(upper), "beta4: bounds must be finite");
  require(lower < upper, "beta4: requires lower < upper");
  Distribution d;
  d.kind = DistKind::Beta4;
  d.alpha = alpha;
  d.beta = beta;
  d.lower = lower;
  d.upper = upper;
  return d;
}

Distribution Distribution::make_dirac(double value) {
  require(std::isfinite(value), "dirac: value must be finite");
  Distribution d;
  d.kind = DistKind::Dirac;
  d.value = value;
  return d;
}

Distribution Distribution::from_pdf_data(const std::string& pdf, const std::vector<double>& data) {
  auto arity = [&](std::size_t n) {
    if (data.size() != n)
      throw SchemaError("pdf '" + pdf + "' expects " + std::to_string(n) + " data value(s), got " +
                        std::to_string(data.size()));
  };
  if (pdf == "gaussian" || pdf == "normal") {
    arity(2);
    return make_gaussian(data[0], data[1]);
  }
  if (pdf == "uniform") {
    arity(2);
    return make_uniform(data[0], data[1]);
  }
  if (pdf == "beta") {
    arity(2);
    return make_beta(data[0], data[1]);
  }
  if (pdf == "beta4") {
    arity(4);
    return make_beta4(data[0], data[1], data[2], data[3]);
  }
  if (pdf == "dirac") {
    arity(1);
    return make_dirac(data[0]);
  }
  throw SchemaError("unknown pdf '" + pdf + "' (expected gaussian/uniform/beta/beta4/dirac)");
}

std::pair<double, double> Distribution::support() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case DistKind::Gaussian: return {-inf, inf};
    case DistKind::Uniform: return {lower, upper};
    case DistKind::Beta: return {0.0, 1.0};
    case DistKind::Beta4: return {lower, upper};
    case DistKind::Dirac: return {value, value};
  }
  return {0.0, 0.0};
}

std::pair<double, double> Distribution::germ_affine_map() const {
  switch (kind) {
    case DistKind::Gaussian: return {mean, std::sqrt(variance)};
    case DistKind::Uniform: return {0.5 * (lower + upper), 0.5 * (upper - lower)};
    case DistKind::Beta: return {0.5, 0.5};
    case DistKind::Beta4: return {0.5 * (lower + upper), 0.5 * (upper - lower)};
    case DistKind::Dirac: return {value, 0.0};
  }
  return {0.0, 0.0};
}

double pdf_eval(const Distribution& d, double x) {
  switch (d.kind) {
    case DistKind::Gaussian: {
      const double z = (x - d.mean) * (x - d.mean) / d.variance;
      return std::exp(-0.5 * z) / std::sqrt(2.0 * M_PI * d.variance);
    }
    case DistKind::Uniform:
      return (x >= d.lower && x <= d.upper) ? 1.0 / (d.upper - d.lower) : 0.0;
    case DistKind::Beta: {
      if (x < 0.0 || x > 1.0) return 0.0;
      const double lp = (d.alpha - 1.0) * std::log(x) + (d.beta - 1.0) * std::log1p(-x) -
                        log_beta_fn(d.alpha, d.beta);
      return std::exp(lp);
    }
    case DistKind::Beta4: {
      if (x < d.lower || x > d.upper) return 0.0;
      const double w = d.upper - d.lower;
      const double u = (x - d.lower) / w;
      const double lp = (d.alpha - 1.0) * std::log(u) + (d.beta - 1.0) * std::log1p(-u) -
                        log_beta_fn(d.alpha, d.beta);
      return std::exp(lp) / w;
    }
    case DistKind::Dirac:
      throw Error("dirac distribution has no density representation");
  }
  return 0.0;
}

double sample_one(const Distribution& d, Rng& rng) {
  switch (d.kind) {
    case DistKind::Gaussian: {
      std::normal_distribution<double> n(d.mean, std::sqrt(d.variance));
      return n(rng);
    }
    case DistKind::Uniform: {
      std::uniform_real_distribution<double> u(d.lower, d.upper);
      return u(rng);
    }
    case DistKind::Beta:
      return beta01_sample(d.alpha, d.beta, rng);
    case DistKind::Beta4:
      return d.lower + (d.upper - d.lower) * beta01_sample(d.alpha, d.beta, rng);
    case DistKind::Dirac:
      return d.value;
  }
  return 0.0;
}

std::vector<double> sample(const Distribution& d, std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  for (auto& v : out) v = sample_one(d, rng);
  return out;
}

double raw_moment(const Distribution& d, int m) {
  if (m < 1) throw Error("raw_moment: order must be >= 1");
  switch (d.kind) {
    case DistKind::Gaussian: {
      // E[X^m] = mean*E[X^{m-1}] + (m-1)*variance*E[X^{m-2}]
      double prev2 = 1.0, prev1 = d.mean;
      for (int k = 2; k <= m; ++k) {
        const double cur = d.mean * prev1 + (k - 1) * d.variance * prev2;
        prev2 = prev1;
        prev1 = cur;
      }
      return prev1;
    }
    case DistKind::Uniform: {
      // (b^{m+1} - a^{m+1}) / ((m+1)(b-a)), evaluated stably as a mean of powers.
      double s = 0.0;
      for (int k = 0; k <= m; ++k) s += std::pow(d.lower, k) * std::pow(d.upper, m - k);
      return s / (m + 1);
    }
    case DistKind::Beta:
      return beta01_raw_moment(d.alpha, d.beta, m);
    case DistKind::Beta4: {
      const double w = d.upper - d.lower;
      double acc = 0.0;
      for (int k = 0; k <= m; ++k)
        acc += binomial(m, k) * std::pow(d.lower, m - k) * std::pow(w, k) *
               beta01_raw_moment(d.alpha, d.beta, k);
      return acc;
    }
    case DistKind::Dirac:
      return std::pow(d.value, m);
  }
  return 0.0;
}

const char* dist_kind_name(DistKind kind) {
  switch (kind) {
    case DistKind::Gaussian: return "gaussian";
    case DistKind::Uniform: return "uniform";
    case DistKind::Beta: return "beta";
    case DistKind::Beta4: return "beta4";
    case DistKind::Dirac: return "dirac";
  }
  return "?";
}

}  // namespace pcekit
