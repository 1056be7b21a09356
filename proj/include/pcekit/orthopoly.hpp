#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "pcekit/distributions.hpp"
#include "pcekit/errors.hpp"

namespace pcekit {

enum class FamilyKind { Hermite, Legendre, Jacobi };

/// Gauss rule against a probability weight: weights sum to 1, n nodes
/// integrate polynomials of degree <= 2n-1 exactly.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// One-dimensional orthogonal polynomial family matched to a canonical germ:
///   Hermite  (probabilists') -- weight = standard normal density on R,
///   Legendre                 -- weight = 1/2 on [-1,1],
///   Jacobi(a,b)              -- weight = beta density mapped to [-1,1],
///                                a = beta_shape - 1, b = alpha_shape - 1.
///
/// Polynomials use the classical normalizations (He_n, P_n(1)=1, P_n^{(a,b)});
/// they are not unit-norm, the norms lambda_n = <phi_n,phi_n> are carried
/// explicitly. All tables are computed at construction; instances are
/// immutable and safe to share between threads.
class PolyFamily1D {
 public:
  /// max_order bounds eval() orders and the largest product degree the
  /// family can integrate exactly (2*max_order + 1).
  explicit PolyFamily1D(FamilyKind kind, double jacobi_a = 0.0, double jacobi_b = 0.0,
                        int max_order = kDefaultMaxOrder);

  /// Family for the germ of a distribution (Gaussian->Hermite,
  /// Uniform->Legendre, Beta/Beta4->Jacobi). Dirac has no germ.
  static PolyFamily1D for_distribution(const Distribution& d, int max_order = kDefaultMaxOrder);

  FamilyKind kind() const { return kind_; }
  int max_order() const { return max_order_; }
  double jacobi_a() const { return jacobi_a_; }
  double jacobi_b() const { return jacobi_b_; }

  /// phi_n(x) via the classical three-term recurrence. n <= max_order.
  double eval(int n, double x) const;

  /// Norm lambda_n = <phi_n, phi_n> under the probability weight.
  double norm(int n) const;

  /// Monic-recurrence coefficients (alpha_k, beta_k) of the weight,
  /// beta_0 = 1 for a probability measure.
  std::pair<double, double> monic_recurrence(int k) const;

  /// Golub-Welsch Gauss rule with n nodes.
  const QuadratureRule& gauss_rule(int n) const;

  /// Integral of prod_j phi_{orders[j]} against the weight, evaluated with a
  /// Gauss rule sized from the total degree (always exact).
  double product_integral(std::span<const int> orders) const;
  double product_integral(std::initializer_list<int> orders) const {
    return product_integral(std::span<const int>(orders.begin(), orders.size()));
  }

  /// Draw one sample of the canonical germ.
  double sample_germ(Rng& rng) const;

  /// True if two families define the same weight (and hence the same tables).
  bool same_weight(const PolyFamily1D& other) const;

  static constexpr int kDefaultMaxOrder = 32;

 private:
  FamilyKind kind_;
  double jacobi_a_ = 0.0;
  double jacobi_b_ = 0.0;
  int max_order_;
  std::vector<QuadratureRule> rules_;  // rules_[n-1] has n nodes
  std::vector<double> norms_;
};

/// Spec-level convenience wrappers.
double eval_poly(const PolyFamily1D& f, int n, double x);
QuadratureRule gauss_rule(const PolyFamily1D& f, int n);
double inner_product(const PolyFamily1D& f, std::span<const int> orders);
double inner_product(const PolyFamily1D& f, std::initializer_list<int> orders);

/// One n-node Gauss rule for a weight, without building family tables.
QuadratureRule make_gauss_rule(FamilyKind kind, double jacobi_a, double jacobi_b, int n);

}  // namespace pcekit
