#include "pcekit/pcebasis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace pcekit {

namespace {

constexpr double kStructuralZero = 1e-14;  // relative to the largest entry

void append_compositions(int n_dims, int degree, MultiIndex& scratch,
                         std::vector<MultiIndex>& out) {
  if (n_dims == 0) {
    if (degree == 0) out.push_back(scratch);
    return;
  }
  for (int lead = degree; lead >= 0; --lead) {
    scratch.push_back(lead);
    append_compositions(n_dims - 1, degree - lead, scratch, out);
    scratch.pop_back();
  }
}

}  // namespace

std::uint64_t basis_size(int n_xi, int order) {
  if (n_xi < 0 || order < 0) throw Error("basis_size: arguments must be >= 0");
  const int n = n_xi + order;
  const int k = std::min(n_xi, order);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    std::uint64_t tmp;
    if (__builtin_mul_overflow(r, static_cast<std::uint64_t>(n - k + i), &tmp))
      throw Error("basis_size: overflow at n_xi=" + std::to_string(n_xi) + ", order=" +
                  std::to_string(order));
    r = tmp / i;  // exact: C(n-k+i, i) * i! is divisible by i
  }
  return r;
}

std::vector<MultiIndex> enumerate_indices(int n_xi, int order) {
  if (n_xi < 0 || order < 0) throw Error("enumerate_indices: arguments must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(basis_size(n_xi, order));
  MultiIndex scratch;
  scratch.reserve(n_xi);
  for (int degree = 0; degree <= order; ++degree) {
    append_compositions(n_xi, degree, scratch, out);
    if (n_xi == 0) break;  // only the empty index exists
  }
  return out;
}

BasisSet::BasisSet(std::vector<PolyFamily1D> families, int order)
    : families_(std::move(families)), order_(order) {
  if (order_ < 0) throw Error("BasisSet: order must be >= 0");
  for (const auto& f : families_)
    if (order_ > f.max_order()) throw Error("BasisSet: order exceeds family max_order");
  indices_ = enumerate_indices(n_xi(), order_);
  norms_.resize(indices_.size());
  for (std::size_t n = 0; n < indices_.size(); ++n) {
    double lambda = 1.0;
    for (int d = 0; d < n_xi(); ++d) lambda *= families_[d].norm(indices_[n][d]);
    norms_[n] = lambda;
  }
}

int BasisSet::first_order_index(int dim) const {
  if (dim < 0 || dim >= n_xi()) throw Error("first_order_index: dimension out of range");
  if (order_ < 1) throw Error("first_order_index: basis has order 0");
  return 1 + dim;  // graded-lex: degree-1 block follows the zero index in dim order
}

Eigen::VectorXd BasisSet::eval(std::span<const double> xi) const {
  if (static_cast<int>(xi.size()) != n_xi()) throw Error("eval_basis: germ vector length mismatch");
  Eigen::VectorXd out(size());
  // Evaluate each 1-D family at its coordinate once, up to the basis order.
  std::vector<std::vector<double>> vals(n_xi());
  for (int d = 0; d < n_xi(); ++d) {
    vals[d].resize(order_ + 1);
    for (int o = 0; o <= order_; ++o) vals[d][o] = families_[d].eval(o, xi[d]);
  }
  for (int n = 0; n < size(); ++n) {
    double prod = 1.0;
    for (int d = 0; d < n_xi(); ++d) prod *= vals[d][indices_[n][d]];
    out[n] = prod;
  }
  return out;
}

Eigen::VectorXd BasisSet::eval(const Eigen::VectorXd& xi) const {
  return eval(std::span<const double>(xi.data(), xi.size()));
}

Eigen::VectorXd eval_basis(const BasisSet& b, const Eigen::VectorXd& xi) { return b.eval(xi); }

namespace {

/// Dense per-dimension table of 1-D product integrals for tuples of
/// `n_factors` orders, each <= order: entry(o_0..o_{f-1}) at flat index
/// sum o_j * (order+1)^j.
std::vector<double> factor_table(const PolyFamily1D& family, int order, int n_factors) {
  const int base = order + 1;
  std::size_t total = 1;
  for (int j = 0; j < n_factors; ++j) total *= base;
  std::vector<double> table(total);
  std::vector<int> orders(n_factors, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    table[flat] = family.product_integral(orders);
    for (int j = 0; j < n_factors; ++j) {
      if (++orders[j] < base) break;
      orders[j] = 0;
    }
  }
  return table;
}

}  // namespace

CoeffTensor galerkin_tensor(const BasisSet& b, int p) {
  if (p < 0) throw Error("galerkin_tensor: monomial order must be >= 0");
  const int dim = b.size();
  const int n_xi = b.n_xi();
  const int n_factors = p + 2;
  const int base = b.order() + 1;

  // Quadrature budget check: total degree P*(p+2) must be integrable.
  for (int d = 0; d < n_xi; ++d) {
    const int degree = b.order() * n_factors;
    const int needed = degree / 2 + 1;
    if (needed > b.family(d).max_order() + 1)
      throw Error("galerkin_tensor: needs a " + std::to_string(needed) +
                  "-node rule; raise the family max_order");
  }

  std::vector<std::vector<double>> tables(n_xi);
  for (int d = 0; d < n_xi; ++d) tables[d] = factor_table(b.family(d), b.order(), n_factors);

  // Strides for per-dimension table lookup: factor slot f has stride base^f.
  std::vector<std::size_t> stride(n_factors);
  stride[0] = 1;
  for (int f = 1; f < n_factors; ++f) stride[f] = stride[f - 1] * base;

  const auto& idx = b.indices();
  // entry value for (j, k..., i); orders[f] holds the basis row of factor f
  std::vector<int> rows(n_factors);
  auto raw_entry = [&](const std::vector<int>& row_of_factor) {
    double prod = 1.0;
    for (int d = 0; d < n_xi; ++d) {
      std::size_t flat = 0;
      for (int f = 0; f < n_factors; ++f) flat += stride[f] * idx[row_of_factor[f]][d];
      prod *= tables[d][flat];
    }
    return prod;
  };

  // Pass 1: largest normalized magnitude, for the structural-zero threshold.
  // Pass 2: collect surviving entries grouped by j.
  CoeffTensor t;
  t.p_ = p;
  t.dim_ = dim;
  double max_abs = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const double threshold = kStructuralZero * max_abs;
    if (pass == 1) t.j_offsets_.push_back(0);
    for (int j = 0; j < dim; ++j) {
      rows.assign(n_factors, 0);
      rows[0] = j;
      // odometer over (k_1..k_p, i) in slots 1..n_factors-1
      bool done = false;
      while (!done) {
        const int i = rows[n_factors - 1];
        const double e = raw_entry(rows) / b.norm(i);
        if (pass == 0) {
          max_abs = std::max(max_abs, std::abs(e));
        } else if (std::abs(e) > threshold) {
          for (int f = 1; f <= p; ++f) t.k_flat_.push_back(rows[f]);
          t.i_idx_.push_back(i);
          t.values_.push_back(e);
        }
        done = true;
        for (int f = 1; f < n_factors; ++f) {
          if (++rows[f] < dim) {
            done = false;
            break;
          }
          rows[f] = 0;
        }
      }
      if (pass == 1) t.j_offsets_.push_back(t.values_.size());
    }
  }
  return t;
}

CoeffTensor::Slice CoeffTensor::slice(int j) const {
  const std::size_t lo = j_offsets_.at(j), hi = j_offsets_.at(j + 1);
  return Slice{std::span<const int>(k_flat_).subspan(lo * p_, (hi - lo) * p_),
               std::span<const int>(i_idx_).subspan(lo, hi - lo),
               std::span<const double>(values_).subspan(lo, hi - lo), p_};
}

std::vector<double> CoeffTensor::dense() const {
  std::size_t total = 1;
  for (int f = 0; f < p_ + 2; ++f) total *= dim_;
  std::vector<double> out(total, 0.0);
  // layout [j][k1]...[kp][i], i fastest
  for (int j = 0; j < dim_; ++j) {
    auto s = slice(j);
    for (std::size_t e = 0; e < s.size(); ++e) {
      std::size_t flat = j;
      auto k = s.k(e);
      for (int f = 0; f < p_; ++f) flat = flat * dim_ + k[f];
      flat = flat * dim_ + s.i[e];
      out[flat] = s.value[e];
    }
  }
  return out;
}

void CoeffTensor::dump_csv(std::ostream& os) const {
  char buf[40];
  for (int j = 0; j < dim_; ++j) {
    auto s = slice(j);
    for (std::size_t e = 0; e < s.size(); ++e) {
      os << j;
      for (int f = 0; f < p_; ++f) os << ',' << s.k(e)[f];
      std::snprintf(buf, sizeof buf, "%.17g", s.value[e]);
      os << ',' << s.i[e] << ',' << buf << '\n';
    }
  }
}

MomentTensor moment_tensor(const BasisSet& b, int m) {
  if (m < 1) throw Error("moment_tensor: moment order must be >= 1");
  const int dim = b.size();
  const int n_xi = b.n_xi();
  const int base = b.order() + 1;

  std::vector<std::vector<double>> tables(n_xi);
  for (int d = 0; d < n_xi; ++d) tables[d] = factor_table(b.family(d), b.order(), m);
  std::vector<std::size_t> stride(m);
  stride[0] = 1;
  for (int f = 1; f < m; ++f) stride[f] = stride[f - 1] * base;

  const auto& idx = b.indices();
  auto epsilon = [&](const std::vector<int>& tuple) {
    double prod = 1.0;
    for (int d = 0; d < n_xi; ++d) {
      std::size_t flat = 0;
      for (int f = 0; f < m; ++f) flat += stride[f] * idx[tuple[f]][d];
      prod *= tables[d][flat];
    }
    return prod;
  };

  // multiplicity m! / prod(run lengths!) for a non-decreasing tuple
  auto multiplicity = [m](const std::vector<int>& tuple) {
    double mult = 1.0;
    for (int f = 1; f <= m; ++f) mult *= f;
    int run = 1;
    for (std::size_t f = 1; f < tuple.size(); ++f) {
      if (tuple[f] == tuple[f - 1]) {
        ++run;
        mult /= run;
      } else {
        run = 1;
      }
    }
    return mult;
  };

  MomentTensor t;
  t.m_ = m;
  t.dim_ = dim;
  double max_abs = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const double threshold = kStructuralZero * max_abs;
    std::vector<int> tuple(m, 0);
    bool done = false;
    while (!done) {
      const double eps = epsilon(tuple);
      if (pass == 0) {
        max_abs = std::max(max_abs, std::abs(eps));
      } else if (std::abs(eps) > threshold) {
        t.idx_flat_.insert(t.idx_flat_.end(), tuple.begin(), tuple.end());
        t.values_.push_back(eps);
        t.mult_.push_back(multiplicity(tuple));
      }
      // advance to the next non-decreasing tuple
      done = true;
      for (int f = m - 1; f >= 0; --f) {
        if (tuple[f] + 1 < dim) {
          const int v = tuple[f] + 1;
          for (int g = f; g < m; ++g) tuple[g] = v;
          done = false;
          break;
        }
      }
    }
  }
  return t;
}

double MomentTensor::contract(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() != dim_)
    throw Error("moment contraction: coefficient length " + std::to_string(coeffs.size()) +
                " does not match basis size " + std::to_string(dim_));
  double acc = 0.0;
  for (std::size_t e = 0; e < values_.size(); ++e) {
    double prod = values_[e] * mult_[e];
    for (int f = 0; f < m_; ++f) prod *= coeffs[idx_flat_[e * m_ + f]];
    acc += prod;
  }
  return acc;
}

std::vector<double> MomentTensor::dense() const {
  std::size_t total = 1;
  for (int f = 0; f < m_; ++f) total *= dim_;
  std::vector<double> out(total, 0.0);
  std::vector<int> tuple(m_);
  for (std::size_t e = 0; e < values_.size(); ++e) {
    tuple.assign(idx_flat_.begin() + e * m_, idx_flat_.begin() + (e + 1) * m_);
    do {
      std::size_t flat = 0;
      for (int f = 0; f < m_; ++f) flat = flat * dim_ + tuple[f];
      out[flat] = values_[e];
    } while (std::next_permutation(tuple.begin(), tuple.end()));
  }
  return out;
}

}  // namespace pcekit
