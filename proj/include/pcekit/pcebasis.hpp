#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "pcekit/orthopoly.hpp"

namespace pcekit {

/// Per-dimension polynomial degrees; total degree <= P for basis membership.
using MultiIndex = std::vector<int>;

/// Number of basis polynomials (N_xi + P)! / (N_xi! P!). Throws on overflow.
std::uint64_t basis_size(int n_xi, int order);

/// All multi-indices with total degree <= order, graded-lexicographic:
/// ascending total degree, and within a degree block the leading dimensions
/// carry the degree first ((1,0) before (0,1)). Index 0 is all-zero.
std::vector<MultiIndex> enumerate_indices(int n_xi, int order);

/// Multivariate orthogonal basis over independent canonical germs.
/// Immutable after construction.
class BasisSet {
 public:
  BasisSet(std::vector<PolyFamily1D> families, int order);

  int n_xi() const { return static_cast<int>(families_.size()); }
  int order() const { return order_; }
  int size() const { return static_cast<int>(indices_.size()); }  ///< P-tilde
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const PolyFamily1D& family(int dim) const { return families_.at(dim); }

  /// lambda_i = <phi_i, phi_i> (product of 1-D norms).
  double norm(int i) const { return norms_[i]; }
  const std::vector<double>& norms() const { return norms_; }

  /// Position of the first-order multi-index of a germ dimension (1 + dim).
  int first_order_index(int dim) const;

  /// Phi(xi): entry n = prod_d phi_{indices[n][d]}(xi[d]).
  Eigen::VectorXd eval(std::span<const double> xi) const;
  Eigen::VectorXd eval(const Eigen::VectorXd& xi) const;

 private:
  std::vector<PolyFamily1D> families_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<double> norms_;
};

Eigen::VectorXd eval_basis(const BasisSet& b, const Eigen::VectorXd& xi);

/// Sparse Galerkin coefficient tensor E^(p): entries
///   e_{j k_1..k_p i} = <phi_j phi_{k1}...phi_{kp}, phi_i> / <phi_i, phi_i>,
/// stored as nonzeros grouped by j. Entries below 1e-14 of the largest
/// magnitude are dropped as structural zeros.
class CoeffTensor {
 public:
  int monomial_order() const { return p_; }
  int dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }

  /// Nonzeros of one j-slice: k-tuples are p consecutive ints in k_flat.
  struct Slice {
    std::span<const int> k_flat;
    std::span<const int> i;
    std::span<const double> value;
    int p;
    std::size_t size() const { return i.size(); }
    std::span<const int> k(std::size_t e) const { return k_flat.subspan(e * p, p); }
  };
  Slice slice(int j) const;

  /// Dense export, laid out [j][k1]..[kp][i]; for tests and dumps.
  std::vector<double> dense() const;

  /// Lines "j,k1,...,kp,i,value" with full double precision.
  void dump_csv(std::ostream& os) const;

  friend CoeffTensor galerkin_tensor(const BasisSet& b, int p);

 private:
  int p_ = 0;
  int dim_ = 0;
  std::vector<std::size_t> j_offsets_;  // dim+1 entries
  std::vector<int> k_flat_;             // nnz * p
  std::vector<int> i_idx_;              // nnz
  std::vector<double> values_;          // nnz
};

/// Build E^(p) for the basis. Multivariate integrals factor into per-germ
/// 1-D product integrals; no tensor-grid quadrature is used.
CoeffTensor galerkin_tensor(const BasisSet& b, int p);

/// Sparse moment tensor for Eq.-(10)-style raw moments: epsilon_{i1..im} =
/// <phi_{i1}...phi_{i(m-1)}, phi_{im}>, fully symmetric; stored once per
/// non-decreasing tuple with its permutation multiplicity.
class MomentTensor {
 public:
  int moment_order() const { return m_; }
  int dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }

  /// sum over tuples of epsilon * multiplicity * prod coeffs[i_j].
  double contract(const Eigen::VectorXd& coeffs) const;

  /// Dense export of the full P-tilde^m tensor (tests only; mind the size).
  std::vector<double> dense() const;

  friend MomentTensor moment_tensor(const BasisSet& b, int m);

 private:
  int m_ = 0;
  int dim_ = 0;
  std::vector<int> idx_flat_;   // nnz * m, each tuple non-decreasing
  std::vector<double> values_;  // epsilon
  std::vector<double> mult_;    // number of distinct permutations
};

MomentTensor moment_tensor(const BasisSet& b, int m);

}  // namespace pcekit
