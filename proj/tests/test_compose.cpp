#include <doctest.h>

#include <cmath>
#include <random>

#include "pcekit/compose.hpp"

using namespace pcekit;

namespace {

const char* kDecayDoc = R"json({
  "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
  "parameters": [{"name": "a", "pdf": "beta", "data": [2, 2]}]
})json";

ExpandedSystem decay_system(int order) { return compose(load_system(kDecayDoc), order); }

}  // namespace

TEST_CASE("project_variable: dirac, affine uniform, beta mean") {
  const auto es = decay_system(3);
  const Eigen::VectorXd dirac = project_variable(Distribution::make_dirac(2), es.basis, -1);
  CHECK(dirac[0] == 2.0);
  CHECK(dirac.tail(3).cwiseAbs().maxCoeff() == 0.0);

  // uniform(0,1) on a Legendre germ: a = 0.5 + 0.5 xi
  const SystemDef uni = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 1, "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "uniform", "data": [0, 1]}]
  })json");
  const ExpandedSystem esu = compose(uni, 3);
  const Eigen::VectorXd au =
      project_variable(esu.def.parameters[0].dist, esu.basis, 0);
  CHECK(au[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(au[esu.basis.first_order_index(0)] == doctest::Approx(0.5).epsilon(1e-14));
  int nonzeros = 0;
  for (int i = 0; i < au.size(); ++i) nonzeros += au[i] != 0.0;
  CHECK(nonzeros == 2);

  // beta(4,6): mean 0.4 lands in the zeroth coefficient
  const ExpandedSystem es46 = update(es, "a", Distribution::make_beta(4, 6));
  const Eigen::VectorXd a46 =
      project_variable(es46.def.parameters[0].dist, es46.basis, 0);
  CHECK(a46[0] == doctest::Approx(0.4).epsilon(1e-13));

  CHECK_THROWS_AS(project_variable(Distribution::make_gaussian(0, 1), es.basis, 0), ComposeError);
}

TEST_CASE("compose: decay example structure") {
  const auto es = decay_system(3);
  CHECK(es.basis.n_xi() == 1);
  CHECK(es.pbasis() == 4);
  CHECK(es.galerkin_ready);
  REQUIRE(es.x0_hat.size() == 4);
  CHECK(es.x0_hat[0] == 2.0);
  CHECK(es.x0_hat.tail(3).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(es.state_terms.size() == 1);
  REQUIRE(es.state_terms[0].size() == 1);
  const GalerkinTerm& term = es.state_terms[0][0];
  CHECK(term.state_slots == std::vector<int>{0});
  CHECK(term.tensor->monomial_order() == 1);
  // ahat = -projection of a ~ B(2,2): mean 1/2, affine in the germ
  CHECK(term.ahat[0] == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(term.ahat_nz.size() == 2);
}

TEST_CASE("compose: all-dirac system degenerates to the nominal one") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 1.5, "rhs": "-a*x + 0.25*x"}],
    "parameters": [{"name": "a", "pdf": "dirac", "data": 2}]
  })json");
  const ExpandedSystem es = compose(sys, 3);
  CHECK(es.basis.n_xi() == 0);
  CHECK(es.pbasis() == 1);
  CHECK(es.x0_hat.size() == 1);
  CHECK(es.x0_hat[0] == 1.5);
  Eigen::VectorXd xhat(1), dxhat;
  xhat << 3.0;
  es.expanded_rhs(0.0, xhat, es.bind_inputs(), dxhat);
  CHECK(dxhat[0] == doctest::Approx(-2.0 * 3.0 + 0.25 * 3.0).epsilon(1e-15));
}

TEST_CASE("compose: cubic monomial gets an order-3 tensor") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 1, "rhs": "a*x^3"}],
    "parameters": [{"name": "a", "pdf": "uniform", "data": [0, 1]}]
  })json");
  const ExpandedSystem es = compose(sys, 3);
  REQUIRE(es.state_terms[0].size() == 1);
  const auto& term = es.state_terms[0][0];
  CHECK(term.state_slots == std::vector<int>{0, 0, 0});
  CHECK(term.tensor->monomial_order() == 3);
  CHECK(es.tensors.count(3) == 1);
}

TEST_CASE("compose rejects collocation-only systems with a pointer to the blocker") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 1, "rhs": "a/x"}],
    "parameters": [{"name": "a", "pdf": "uniform", "data": [0, 1]}]
  })json");
  CHECK_THROWS_WITH_AS(compose(sys, 2), doctest::Contains("collocation-only"), ComposeError);
  const ExpandedSystem es = compose(sys, 2, ComposeMode::CollocationOnly);
  CHECK(!es.galerkin_ready);
  CHECK(es.pbasis() == 3);
}

TEST_CASE("eval_expanded_rhs: deterministic reduction and zero state") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "dirac", "data": 0.5}]
  })json");
  const ExpandedSystem es = compose(sys, 3);
  // dirac-only system still has P-tilde = 1; embed in a 1-vector
  Eigen::VectorXd xhat(1);
  xhat << 2.0;
  const Eigen::VectorXd dx = eval_expanded_rhs(es, 0.0, xhat);
  CHECK(dx[0] == doctest::Approx(-1.0).epsilon(1e-15));

  const auto es_beta = decay_system(3);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(eval_expanded_rhs(es_beta, 0.0, zero).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eval_expanded_rhs matches a dense Kronecker-style loop") {
  // x' = -a x with a ~ U(0,1): ahat = [-1/2, -1/2, 0, ...] exactly
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "uniform", "data": [0, 1]}]
  })json");
  const ExpandedSystem es = compose(sys, 2);
  const int pb = es.pbasis();
  const auto dense = galerkin_tensor(es.basis, 1).dense();
  Eigen::VectorXd ahat = Eigen::VectorXd::Zero(pb);
  ahat[0] = -0.5;
  ahat[1] = -0.5;

  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd xhat(pb);
    for (int i = 0; i < pb; ++i) xhat[i] = u(gen);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(pb);
    for (int j = 0; j < pb; ++j)
      for (int k = 0; k < pb; ++k)
        for (int i = 0; i < pb; ++i)
          expected[i] += ahat[j] * xhat[k] * dense[(j * pb + k) * pb + i];
    const Eigen::VectorXd got = eval_expanded_rhs(es, 0.0, xhat);
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("expanded rhs is linear in the coefficients for first-order systems") {
  const auto es = decay_system(3);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x1(4), x2(4);
    for (int i = 0; i < 4; ++i) {
      x1[i] = u(gen);
      x2[i] = u(gen);
    }
    const double c1 = u(gen), c2 = u(gen);
    const Eigen::VectorXd lhs = eval_expanded_rhs(es, 0.0, c1 * x1 + c2 * x2);
    const Eigen::VectorXd rhs =
        c1 * eval_expanded_rhs(es, 0.0, x1) + c2 * eval_expanded_rhs(es, 0.0, x2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("products of uncertain parameters project onto the joint basis") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 1, "rhs": "a*b*x"}],
    "parameters": [{"name": "a", "pdf": "uniform", "data": [0, 1]},
                    {"name": "b", "pdf": "uniform", "data": [1, 3]}]
  })json");
  const ExpandedSystem es = compose(sys, 2);
  const auto& term = es.state_terms[0][0];
  // a*b = (1/2 + xi_a/2)(2 + xi_b): coefficients on 1, xi_a, xi_b, xi_a xi_b
  const int i_a = es.basis.first_order_index(0);
  const int i_b = es.basis.first_order_index(1);
  CHECK(term.ahat[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(term.ahat[i_a] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(term.ahat[i_b] == doctest::Approx(0.5).epsilon(1e-13));
  // the (1,1) multi-index sits after the (2,0) one in graded-lex order
  int i_ab = -1;
  for (int i = 0; i < es.pbasis(); ++i)
    if (es.basis.indices()[i] == MultiIndex{1, 1}) i_ab = i;
  REQUIRE(i_ab >= 0);
  CHECK(term.ahat[i_ab] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("update: minimal re-projection equals a full recompose") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "gaussian", "data": [1, 0.04], "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "uniform", "data": [0, 1]}]
  })json");
  const ExpandedSystem es = compose(sys, 3);

  SystemDef sys2 = sys;
  sys2.parameters[0].dist = Distribution::make_uniform(0.25, 0.75);
  const ExpandedSystem recomposed = compose(sys2, 3);
  const ExpandedSystem updated = update(es, "a", Distribution::make_uniform(0.25, 0.75));

  CHECK((updated.x0_hat - recomposed.x0_hat).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(updated.state_terms[0].size() == recomposed.state_terms[0].size());
  for (std::size_t t = 0; t < updated.state_terms[0].size(); ++t)
    CHECK((updated.state_terms[0][t].ahat - recomposed.state_terms[0][t].ahat)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  // tensors are reused, not rebuilt
  CHECK(updated.tensors.at(1).get() == es.tensors.at(1).get());

  // updating the state's initial condition follows the same path
  const ExpandedSystem up_ic = update(es, "x", Distribution::make_gaussian(2, 0.04));
  CHECK(up_ic.x0_hat[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("update: beta shape change rebuilds the weight-dependent tables") {
  const auto es = decay_system(3);
  const ExpandedSystem updated = update(es, "a", Distribution::make_beta(4, 6));

  SystemDef sys2 = es.def;
  sys2.parameters[0].dist = Distribution::make_beta(4, 6);
  const ExpandedSystem recomposed = compose(sys2, 3);

  CHECK(updated.state_terms[0][0].ahat[0] == doctest::Approx(-0.4).epsilon(1e-13));
  for (std::size_t t = 0; t < updated.state_terms[0].size(); ++t)
    CHECK((updated.state_terms[0][t].ahat - recomposed.state_terms[0][t].ahat)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  const auto du = updated.tensors.at(1)->dense();
  const auto dr = recomposed.tensors.at(1)->dense();
  REQUIRE(du.size() == dr.size());
  for (std::size_t i = 0; i < du.size(); ++i) CHECK(du[i] == doctest::Approx(dr[i]).epsilon(1e-12));
}

TEST_CASE("update: idempotence, dirac value change, family-change rejection") {
  const auto es = decay_system(3);
  const ExpandedSystem same = update(es, "a", Distribution::make_beta(2, 2));
  CHECK((same.x0_hat - es.x0_hat).cwiseAbs().maxCoeff() == 0.0);
  CHECK((same.state_terms[0][0].ahat - es.state_terms[0][0].ahat).cwiseAbs().maxCoeff() == 0.0);

  const ExpandedSystem moved = update(es, "x", Distribution::make_dirac(5));
  CHECK(moved.x0_hat[0] == 5.0);
  CHECK(moved.x0_hat.tail(3).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_WITH_AS(update(es, "a", Distribution::make_gaussian(0, 1)),
                       doctest::Contains("recompose"), ComposeError);
  CHECK_THROWS_AS(update(es, "nope", Distribution::make_dirac(1)), ComposeError);
}

TEST_CASE("dirac parameter values fold into the term coefficients") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 1, "rhs": "-a*b*x"}],
    "parameters": [{"name": "a", "pdf": "dirac", "data": 0.5},
                    {"name": "b", "pdf": "uniform", "data": [0, 2]}]
  })json");
  const ExpandedSystem es = compose(sys, 2);
  const auto& term = es.state_terms[0][0];
  // -0.5 * b with b = 1 + xi: ahat = [-0.5, -0.5, 0]
  CHECK(term.ahat[0] == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(term.ahat[1] == doctest::Approx(-0.5).epsilon(1e-13));

  const ExpandedSystem upd = update(es, "a", Distribution::make_dirac(2.0));
  CHECK(upd.state_terms[0][0].ahat[0] == doctest::Approx(-2.0).epsilon(1e-13));
}
