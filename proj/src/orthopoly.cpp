#include "pcekit/orthopoly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pcekit {

namespace {

/// Monic three-term recurrence coefficients (alpha_k, beta_k) of the weight;
/// beta_0 = 1 because the weights are probability densities.
std::pair<double, double> monic_coeffs(FamilyKind kind, double a, double b, int k) {
  switch (kind) {
    case FamilyKind::Hermite:
      return {0.0, k == 0 ? 1.0 : static_cast<double>(k)};
    case FamilyKind::Legendre: {
      if (k == 0) return {0.0, 1.0};
      const double kk = k;
      return {0.0, kk * kk / (4.0 * kk * kk - 1.0)};
    }
    case FamilyKind::Jacobi: {
      double alpha, beta;
      if (k == 0) {
        alpha = (b - a) / (a + b + 2.0);
        beta = 1.0;
      } else {
        const double c = 2.0 * k + a + b;
        alpha = (b * b - a * a) / (c * (c + 2.0));
        if (k == 1) {
          beta = 4.0 * (a + 1.0) * (b + 1.0) / ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0));
        } else {
          const double kk = k;
          beta = 4.0 * kk * (kk + a) * (kk + b) * (kk + a + b) / (c * c * (c + 1.0) * (c - 1.0));
        }
      }
      return {alpha, beta};
    }
  }
  return {0.0, 1.0};
}

}  // namespace

PolyFamily1D::PolyFamily1D(FamilyKind kind, double jacobi_a, double jacobi_b, int max_order)
    : kind_(kind), jacobi_a_(jacobi_a), jacobi_b_(jacobi_b), max_order_(max_order) {
  if (max_order_ < 0) throw Error("PolyFamily1D: max_order must be >= 0");
  if (kind_ == FamilyKind::Jacobi && (jacobi_a_ <= -1.0 || jacobi_b_ <= -1.0))
    throw Error("jacobi: weight exponents must be > -1");

  // Precompute all Gauss rules up to the largest one eval/product_integral
  // can ask for: total degree <= 2*max_order+... norms need max_order+1 nodes,
  // tensor assembly asks per total degree, capped by callers.
  const int n_max = max_order_ + 1;
  rules_.reserve(n_max);
  for (int n = 1; n <= n_max; ++n)
    rules_.push_back(make_gauss_rule(kind_, jacobi_a_, jacobi_b_, n));

  norms_.resize(max_order_ + 1);
  for (int k = 0; k <= max_order_; ++k) {
    const int orders[2] = {k, k};
    norms_[k] = product_integral(std::span<const int>(orders, 2));
  }
}

PolyFamily1D PolyFamily1D::for_distribution(const Distribution& d, int max_order) {
  switch (d.kind) {
    case DistKind::Gaussian: return PolyFamily1D(FamilyKind::Hermite, 0, 0, max_order);
    case DistKind::Uniform: return PolyFamily1D(FamilyKind::Legendre, 0, 0, max_order);
    case DistKind::Beta:
    case DistKind::Beta4:
      return PolyFamily1D(FamilyKind::Jacobi, d.beta - 1.0, d.alpha - 1.0, max_order);
    case DistKind::Dirac: break;
  }
  throw Error("dirac distribution occupies no germ dimension");
}

double PolyFamily1D::eval(int n, double x) const {
  if (n < 0) throw Error("eval_poly: order must be >= 0");
  if (n > max_order_)
    throw Error("eval_poly: order " + std::to_string(n) + " exceeds max_order " +
                std::to_string(max_order_));
  double pm1 = 0.0, p = 1.0;
  switch (kind_) {
    case FamilyKind::Hermite:
      // He_{k+1} = x He_k - k He_{k-1}
      for (int k = 0; k < n; ++k) {
        const double next = x * p - k * pm1;
        pm1 = p;
        p = next;
      }
      return p;
    case FamilyKind::Legendre:
      // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
      for (int k = 0; k < n; ++k) {
        const double next = ((2 * k + 1) * x * p - k * pm1) / (k + 1);
        pm1 = p;
        p = next;
      }
      return p;
    case FamilyKind::Jacobi: {
      const double a = jacobi_a_, b = jacobi_b_;
      if (n == 0) return 1.0;
      double prev = 1.0;
      double cur = 0.5 * (a + b + 2.0) * x + 0.5 * (a - b);
      for (int k = 1; k < n; ++k) {
        const double c = 2.0 * k + a + b;
        const double a1 = 2.0 * (k + 1) * (k + a + b + 1.0) * c;
        const double a2 = (c + 1.0) * (a * a - b * b);
        const double a3 = c * (c + 1.0) * (c + 2.0);
        const double a4 = 2.0 * (k + a) * (k + b) * (c + 2.0);
        const double next = ((a2 + a3 * x) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
      }
      return cur;
    }
  }
  return 0.0;
}

double PolyFamily1D::norm(int n) const {
  if (n < 0 || n > max_order_) throw Error("norm: order out of range");
  return norms_[n];
}

std::pair<double, double> PolyFamily1D::monic_recurrence(int k) const {
  return monic_coeffs(kind_, jacobi_a_, jacobi_b_, k);
}

const QuadratureRule& PolyFamily1D::gauss_rule(int n) const {
  if (n < 1) throw Error("gauss_rule: node count must be >= 1");
  if (n > static_cast<int>(rules_.size()))
    throw Error("gauss_rule: node count " + std::to_string(n) + " exceeds table size " +
                std::to_string(rules_.size()) + " (raise max_order)");
  return rules_[n - 1];
}

double PolyFamily1D::product_integral(std::span<const int> orders) const {
  int degree = 0;
  for (int o : orders) {
    if (o < 0) throw Error("product_integral: negative order");
    degree += o;
  }
  const int n = degree / 2 + 1;  // exact for degree <= 2n-1
  const QuadratureRule& rule = gauss_rule(n);
  double acc = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    double term = 1.0;
    for (int o : orders) term *= eval(o, rule.nodes[q]);
    acc += rule.weights[q] * term;
  }
  return acc;
}

double PolyFamily1D::sample_germ(Rng& rng) const {
  switch (kind_) {
    case FamilyKind::Hermite: {
      std::normal_distribution<double> n(0.0, 1.0);
      return n(rng);
    }
    case FamilyKind::Legendre: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      return u(rng);
    }
    case FamilyKind::Jacobi: {
      // beta(alpha,beta) on [-1,1] with alpha = b+1, beta = a+1
      std::gamma_distribution<double> ga(jacobi_b_ + 1.0, 1.0), gb(jacobi_a_ + 1.0, 1.0);
      const double x = ga(rng);
      const double y = gb(rng);
      return 2.0 * x / (x + y) - 1.0;
    }
  }
  return 0.0;
}

bool PolyFamily1D::same_weight(const PolyFamily1D& other) const {
  if (kind_ != other.kind_) return false;
  if (kind_ != FamilyKind::Jacobi) return true;
  return jacobi_a_ == other.jacobi_a_ && jacobi_b_ == other.jacobi_b_;
}

QuadratureRule make_gauss_rule(FamilyKind kind, double jacobi_a, double jacobi_b, int n) {
  if (n < 1) throw Error("gauss_rule: node count must be >= 1");
  auto recurrence = [&](int k) { return monic_coeffs(kind, jacobi_a, jacobi_b, k); };

  // Golub-Welsch: eigenvalues of the symmetric tridiagonal Jacobi matrix.
  // The eigensolver leaves ~1e-9 node error for wide supports, so each node
  // is Newton-polished on the monic polynomial and the weights recomputed
  // from the Christoffel function.
  Eigen::VectorXd diag(n), sub(std::max(0, n - 1));
  for (int k = 0; k < n; ++k) diag[k] = recurrence(k).first;
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(recurrence(k).second);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    double x = es.eigenvalues()[k];
    for (int it = 0; it < 3; ++it) {
      double pm1 = 0.0, p = 1.0, dm1 = 0.0, dp = 0.0;
      for (int r = 0; r < n; ++r) {
        const auto [al, be] = recurrence(r);
        const double pn = (x - al) * p - (r > 0 ? be : 0.0) * pm1;
        const double dn = p + (x - al) * dp - (r > 0 ? be : 0.0) * dm1;
        pm1 = p;
        p = pn;
        dm1 = dp;
        dp = dn;
      }
      if (dp == 0.0) break;
      const double step = p / dp;
      x -= step;
      if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x)))
        break;
    }
    // w_k = 1 / sum_j p_j(x_k)^2 over the orthonormal family, beta_0 = 1
    double qm1 = 0.0, q = 1.0, sumsq = 1.0;
    for (int r = 1; r < n; ++r) {
      const auto [al_prev, be_prev] = recurrence(r - 1);
      const auto [al, be] = recurrence(r);
      const double qn =
          ((x - al_prev) * q - (r > 1 ? std::sqrt(be_prev) : 0.0) * qm1) / std::sqrt(be);
      qm1 = q;
      q = qn;
      sumsq += q * q;
    }
    rule.nodes[k] = x;
    rule.weights[k] = 1.0 / sumsq;
  }
  return rule;
}

double eval_poly(const PolyFamily1D& f, int n, double x) { return f.eval(n, x); }

QuadratureRule gauss_rule(const PolyFamily1D& f, int n) { return f.gauss_rule(n); }

double inner_product(const PolyFamily1D& f, std::span<const int> orders) {
  return f.product_integral(orders);
}

double inner_product(const PolyFamily1D& f, std::initializer_list<int> orders) {
  return f.product_integral(orders);
}

}  // namespace pcekit
