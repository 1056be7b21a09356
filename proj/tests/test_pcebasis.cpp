#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pcekit/pcebasis.hpp"

using namespace pcekit;

namespace {

BasisSet hermite_basis(int order) {
  std::vector<PolyFamily1D> fams;
  fams.emplace_back(FamilyKind::Hermite);
  return BasisSet(std::move(fams), order);
}

BasisSet legendre_basis(int order) {
  std::vector<PolyFamily1D> fams;
  fams.emplace_back(FamilyKind::Legendre);
  return BasisSet(std::move(fams), order);
}

BasisSet jacobi_basis(int order, double a, double b) {
  std::vector<PolyFamily1D> fams;
  fams.emplace_back(FamilyKind::Jacobi, a, b);
  return BasisSet(std::move(fams), order);
}

// Brute-force oracle for 1-D tensors: one oversized Gauss rule applied
// directly to the polynomial products, no factor tables, no sparsity.
double dense_entry_1d(const BasisSet& b, const std::vector<int>& rows) {
  const auto& f = b.family(0);
  const auto& rule = f.gauss_rule(f.max_order() + 1);
  const int i = rows.back();
  double num = 0.0, den = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    double prod = 1.0;
    for (int r : rows) prod *= f.eval(b.indices()[r][0], rule.nodes[q]);
    num += rule.weights[q] * prod;
    const double phi_i = f.eval(b.indices()[i][0], rule.nodes[q]);
    den += rule.weights[q] * phi_i * phi_i;
  }
  return num / den;
}

// Tensor-grid oracle for multivariate bases: full product quadrature,
// deliberately not using the per-dimension factorization.
double dense_entry_grid(const BasisSet& b, const std::vector<int>& rows) {
  const int n_xi = b.n_xi();
  std::vector<const QuadratureRule*> rules(n_xi);
  for (int d = 0; d < n_xi; ++d) rules[d] = &b.family(d).gauss_rule(b.family(d).max_order() + 1);
  std::vector<int> q(n_xi, 0);
  const int i = rows.back();
  double num = 0.0, den = 0.0;
  while (true) {
    double w = 1.0;
    std::vector<double> xi(n_xi);
    for (int d = 0; d < n_xi; ++d) {
      w *= rules[d]->weights[q[d]];
      xi[d] = rules[d]->nodes[q[d]];
    }
    double prod = 1.0;
    for (int r : rows) {
      double phi = 1.0;
      for (int d = 0; d < n_xi; ++d) phi *= b.family(d).eval(b.indices()[r][d], xi[d]);
      prod *= phi;
    }
    double phi_i = 1.0;
    for (int d = 0; d < n_xi; ++d) phi_i *= b.family(d).eval(b.indices()[i][d], xi[d]);
    num += w * prod;
    den += w * phi_i * phi_i;
    int d = 0;
    for (; d < n_xi; ++d) {
      if (++q[d] < rules[d]->size()) break;
      q[d] = 0;
    }
    if (d == n_xi) break;
  }
  return num / den;
}

}  // namespace

TEST_CASE("basis_size binomials") {
  CHECK(basis_size(1, 3) == 4);
  CHECK(basis_size(2, 2) == 6);
  CHECK(basis_size(3, 3) == 20);
  CHECK(basis_size(0, 5) == 1);
  CHECK(basis_size(5, 0) == 1);
  CHECK_THROWS_AS(basis_size(40, 40), Error);  // C(80,40) > 2^64
}

TEST_CASE("enumerate_indices: graded lexicographic order") {
  CHECK(enumerate_indices(1, 2) ==
        std::vector<MultiIndex>{{0}, {1}, {2}});
  CHECK(enumerate_indices(2, 1) ==
        std::vector<MultiIndex>{{0, 0}, {1, 0}, {0, 1}});
  const auto idx22 = enumerate_indices(2, 2);
  REQUIRE(idx22.size() == 6);
  CHECK(idx22[0] == MultiIndex{0, 0});
  CHECK(idx22[3] == MultiIndex{2, 0});
  CHECK(idx22[4] == MultiIndex{1, 1});
  CHECK(idx22[5] == MultiIndex{0, 2});
  CHECK(enumerate_indices(0, 3) == std::vector<MultiIndex>{{}});

  for (int n_xi = 1; n_xi <= 4; ++n_xi)
    for (int order = 0; order <= 4; ++order)
      CHECK(enumerate_indices(n_xi, order).size() == basis_size(n_xi, order));
}

TEST_CASE("eval_basis: separability and low-order values") {
  auto b1 = hermite_basis(3);
  Eigen::VectorXd xi(1);
  xi << 1.0;
  auto v = b1.eval(xi);
  CHECK(v[0] == 1.0);
  CHECK(v[2] == doctest::Approx(0.0));  // He_2(1) = 0
  CHECK(v[3] == doctest::Approx(-2.0)); // He_3(1) = 1 - 3

  std::vector<PolyFamily1D> fams;
  fams.emplace_back(FamilyKind::Hermite);
  fams.emplace_back(FamilyKind::Legendre);
  BasisSet b2(std::move(fams), 2);
  Eigen::VectorXd xy(2);
  xy << 0.7, -0.4;
  auto w = b2.eval(xy);
  CHECK(w[0] == 1.0);
  // index (1,1) sits at position 4 in graded-lex order
  CHECK(b2.indices()[4] == MultiIndex{1, 1});
  CHECK(w[4] == doctest::Approx(0.7 * -0.4));
}

TEST_CASE("galerkin_tensor: j=0 slice of E^(1) is the identity exactly") {
  for (const BasisSet& b : {hermite_basis(3), legendre_basis(3), jacobi_basis(3, 1.0, 1.0)}) {
    const auto t = galerkin_tensor(b, 1);
    auto s = t.slice(0);
    REQUIRE(s.size() == static_cast<std::size_t>(b.size()));
    for (std::size_t e = 0; e < s.size(); ++e) {
      CHECK(s.k(e)[0] == s.i[e]);
      CHECK(s.value[e] == 1.0);  // exact, not approximate
    }
  }
}

TEST_CASE("galerkin_tensor: hand-checked entries") {
  const auto th = galerkin_tensor(hermite_basis(3), 1);
  const auto dh = th.dense();
  const int n = 4;
  auto at = [&](int j, int k, int i) { return dh[(j * n + k) * n + i]; };
  CHECK(at(1, 1, 2) == doctest::Approx(1.0).epsilon(1e-13));  // <He1 He1, He2>/2! = 2/2
  CHECK(at(1, 1, 0) == doctest::Approx(1.0).epsilon(1e-13));  // <He1 He1, 1>/1 = 1

  const auto tl = galerkin_tensor(legendre_basis(3), 1);
  const auto dl = tl.dense();
  CHECK(dl[(1 * n + 1) * n + 0] == doctest::Approx(1.0 / 3).epsilon(1e-13));
}

TEST_CASE("E^(1) matches the brute-force dense-quadrature oracle per family") {
  for (const BasisSet& b :
       {hermite_basis(3), legendre_basis(3), jacobi_basis(3, 1.0, 1.0), jacobi_basis(3, 5.0, 3.0)}) {
    const auto t = galerkin_tensor(b, 1);
    const auto d = t.dense();
    const int n = b.size();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
          const double oracle = dense_entry_1d(b, {j, k, i});
          CHECK(d[(j * n + k) * n + i] == doctest::Approx(oracle).epsilon(1e-12).scale(1.0));
        }
  }
}

TEST_CASE("E^(3) spot check against the oracle") {
  const auto b = hermite_basis(3);
  const auto t = galerkin_tensor(b, 3);
  CHECK(t.monomial_order() == 3);
  const auto d = t.dense();
  const int n = b.size();
  // true-zero entries carry quadrature noise on both sides, so the
  // comparison is relative to the tensor's scale
  double scale = 1.0;
  for (double v : d) scale = std::max(scale, std::abs(v));
  std::mt19937 gen(99);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int j = pick(gen), k1 = pick(gen), k2 = pick(gen), k3 = pick(gen), i = pick(gen);
    const double oracle = dense_entry_1d(b, {j, k1, k2, k3, i});
    const std::size_t flat = (((static_cast<std::size_t>(j) * n + k1) * n + k2) * n + k3) * n + i;
    CHECK(d[flat] == doctest::Approx(oracle).epsilon(1e-12).scale(scale));
  }
}

TEST_CASE("multivariate tensor matches the tensor-grid oracle") {
  std::vector<PolyFamily1D> fams;
  fams.emplace_back(FamilyKind::Hermite);
  fams.emplace_back(FamilyKind::Jacobi, 1.0, 1.0);
  BasisSet b(std::move(fams), 2);
  const auto t = galerkin_tensor(b, 1);
  const auto d = t.dense();
  const int n = b.size();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        const double oracle = dense_entry_grid(b, {j, k, i});
        CHECK(d[(j * n + k) * n + i] == doctest::Approx(oracle).epsilon(1e-11).scale(1.0));
      }
}

TEST_CASE("galerkin entries: hermite selection rules") {
  const auto b = hermite_basis(4);
  const auto t = galerkin_tensor(b, 1);
  const auto d = t.dense();
  const int n = b.size();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        const bool odd = (j + k + i) % 2 != 0;
        const bool triangle = std::abs(j - k) <= i && i <= j + k;
        if (odd || !triangle) CHECK(d[(j * n + k) * n + i] == 0.0);
      }
}

TEST_CASE("galerkin entries symmetric under permutation of (j, k)") {
  const auto b = jacobi_basis(3, 0.5, 2.0);
  const auto t = galerkin_tensor(b, 1);
  const auto d = t.dense();
  const int n = b.size();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        CHECK(d[(j * n + k) * n + i] == d[(k * n + j) * n + i]);
}

TEST_CASE("moment tensors: first moment, diagonal second moment") {
  const auto b = hermite_basis(2);
  const auto m1 = moment_tensor(b, 1);
  const auto d1 = m1.dense();
  CHECK(d1[0] == 1.0);
  for (int i = 1; i < b.size(); ++i) CHECK(d1[i] == 0.0);

  const auto m2 = moment_tensor(b, 2);
  const auto d2 = m2.dense();
  const int n = b.size();
  std::vector<double> diag = {1.0, 1.0, 2.0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j)
        CHECK(d2[i * n + j] == doctest::Approx(diag[i]).epsilon(1e-13));
      else
        CHECK(d2[i * n + j] == 0.0);
    }
}

TEST_CASE("second-moment contraction equals sum of squared coefficients times norms") {
  const auto b = jacobi_basis(4, 2.0, 1.5);
  const auto m2 = moment_tensor(b, 2);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd coeffs(b.size());
    for (int i = 0; i < b.size(); ++i) coeffs[i] = u(gen);
    double expected = 0.0;
    for (int i = 0; i < b.size(); ++i) expected += coeffs[i] * coeffs[i] * b.norm(i);
    CHECK(m2.contract(coeffs) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("coefficient length mismatch raises") {
  const auto b = hermite_basis(2);
  const auto m2 = moment_tensor(b, 2);
  CHECK_THROWS_AS(m2.contract(Eigen::VectorXd::Zero(7)), Error);
}
