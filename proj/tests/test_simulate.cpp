#include <doctest.h>

#include <cmath>

#include "pcekit/simulate.hpp"

using namespace pcekit;

namespace {

const char* kDecayDoc = R"json({
  "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
  "parameters": [{"name": "a", "pdf": "beta", "data": [2, 2]}]
})json";

const char* kForcedDoc = R"json({
  "states": [{"name": "x", "pdf": "dirac", "data": 0, "rhs": "-x + u"}],
  "inputs": [{"name": "u", "rhs": "piecewise(u_t, u_v, t)",
              "u_t": [0, 1, 2, 3, 4], "u_v": [0, 0, 0, 0, 0]}]
})json";

SimOptions fast_opts(double tf, double dt) {
  SimOptions o;
  o.tf = tf;
  o.dt = dt;
  return o;
}

}  // namespace

TEST_CASE("piecewise semantics") {
  Eigen::VectorXd t(5), v(5);
  t << 0, 1, 2, 3, 4;
  v << 1, 2, 3, 4, 5;
  CHECK(piecewise(t, v, 2.5) == 3.0);
  CHECK(piecewise(t, v, 0.0) == 1.0);
  CHECK(piecewise(t, v, 10.0) == 5.0);  // hold-last extrapolation
  CHECK(piecewise(t, v, 1.0) == 2.0);   // left-closed segments
  CHECK_THROWS_AS(piecewise(t, v, -0.5), Error);
  Eigen::VectorXd bad(2);
  bad << 1, 1;
  CHECK_THROWS_AS(piecewise(bad, bad, 1.0), Error);
}

TEST_CASE("integrate: exponential decay to 1e-8 at tight tolerance") {
  SimOptions opts = fast_opts(1.0, 0.01);
  opts.rel_tol = 1e-9;
  opts.abs_tol = 1e-12;
  const RhsFn rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const Trajectory traj = integrate(rhs, y0, opts);
  CHECK(traj.times.size() == 101);
  CHECK(std::abs(traj.values(100, 0) - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("integrate: constants stay exactly constant") {
  const RhsFn rhs = [](double, const Eigen::VectorXd&, Eigen::VectorXd& dy) { dy.setZero(); };
  Eigen::VectorXd y0(2);
  y0 << 3.25, -7.5;
  const Trajectory traj = integrate(rhs, y0, fast_opts(2.0, 0.1));
  for (int k = 0; k < traj.times.size(); ++k) {
    CHECK(traj.values(k, 0) == 3.25);
    CHECK(traj.values(k, 1) == -7.5);
  }
}

TEST_CASE("integrate: rotation conserves the norm over one period") {
  const RhsFn rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(2);
    dy[0] = -y[1];
    dy[1] = y[0];
  };
  Eigen::VectorXd y0(2);
  y0 << 1.0, 0.0;
  const Trajectory traj = integrate(rhs, y0, fast_opts(2 * M_PI, 2 * M_PI / 200));
  const double r = traj.values.row(traj.times.size() - 1).norm();
  CHECK(std::abs(r - 1.0) < 1e-7);
}

TEST_CASE("integrate: output grid matches t0:dt:tf") {
  const RhsFn rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  const Trajectory traj = integrate(rhs, y0, fast_opts(1.0, 0.005));
  CHECK(traj.times.size() == 201);
  CHECK(traj.times[0] == 0.0);
  CHECK(traj.times[200] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("integrate: non-finite derivatives raise with the failure time") {
  const RhsFn rhs = [](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy.resize(1);
    dy[0] = t < 0.5 ? -y[0] : std::numeric_limits<double>::quiet_NaN();
  };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  CHECK_THROWS_AS(integrate(rhs, y0, fast_opts(1.0, 0.01)), IntegrationError);
}

TEST_CASE("integrate: fixed-step solvers run on the grid") {
  const RhsFn rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  SimOptions opts = fast_opts(1.0, 0.001);
  opts.solver = SolverKind::RK4;
  CHECK(std::abs(integrate(rhs, y0, opts).values(1000, 0) - std::exp(-1.0)) < 1e-10);
  opts.solver = SolverKind::Euler;
  CHECK(std::abs(integrate(rhs, y0, opts).values(1000, 0) - std::exp(-1.0)) < 1e-3);
}

TEST_CASE("solver convergence: halving tolerances changes the result less than the coarser one") {
  const ExpandedSystem es = compose(load_system(kDecayDoc), 3);
  SimOptions coarse = fast_opts(1.0, 0.005);
  coarse.rel_tol = 1e-6;
  coarse.abs_tol = 1e-8;
  SimOptions fine = coarse;
  fine.rel_tol = 5e-7;
  fine.abs_tol = 5e-9;
  const Trajectory a = sim_galerkin(es, coarse);
  const Trajectory b = sim_galerkin(es, fine);
  const double diff = (a.values - b.values).cwiseAbs().maxCoeff();
  CHECK(diff < coarse.rel_tol);
}

TEST_CASE("sample_basis and sample_variables") {
  const ExpandedSystem es = compose(load_system(kDecayDoc), 3);
  Rng rng(kDefaultSeed);
  const Eigen::MatrixXd germ = sample_basis(es, 2000, rng);
  REQUIRE(germ.rows() == 1);
  CHECK(germ.minCoeff() >= -1.0);
  CHECK(germ.maxCoeff() <= 1.0);

  Rng rng2(kDefaultSeed);
  const Eigen::MatrixXd vars = sample_variables(es, 2000, rng2);
  CHECK(vars.minCoeff() >= 0.0);
  CHECK(vars.maxCoeff() <= 1.0);
  CHECK(vars.row(0).mean() == doctest::Approx(0.5).epsilon(0.05));
  // the physical samples are the affine image of the germ samples
  CHECK((vars.row(0) - (germ.row(0).array() * 0.5 + 0.5).matrix()).cwiseAbs().maxCoeff() == 0.0);

  // deterministic system: no germ rows
  const ExpandedSystem det = compose(load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 1, "rhs": "-x"}]
  })json"),
                                     2);
  Rng rng3(1);
  CHECK(sample_basis(det, 5, rng3).rows() == 0);
  CHECK(sample_variables(det, 5, rng3).rows() == 0);

  // hermite germ: unit variance within 5 standard errors
  const ExpandedSystem gauss = compose(load_system(R"json({
    "states": [{"name": "x", "pdf": "gaussian", "data": [0, 1], "rhs": "-x"}]
  })json"),
                                       2);
  Rng rng4(7);
  const Eigen::MatrixXd g = sample_basis(gauss, 100000, rng4);
  const double var = g.row(0).array().square().mean();
  CHECK(std::abs(var - 1.0) < 5 * std::sqrt(2.0 / 100000.0));
}

TEST_CASE("sim_galerkin: all-dirac system equals the nominal solution") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "dirac", "data": 0.5}]
  })json");
  const ExpandedSystem es = compose(sys, 3);
  const Trajectory traj = sim_galerkin(es, fast_opts(1.0, 0.01));
  for (int k = 0; k <= 100; ++k) {
    const double expected = 2.0 * std::exp(-0.5 * traj.times[k]);
    CHECK(traj.values(k, 0) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("sim_galerkin: input overrides change the trajectory") {
  const ExpandedSystem es = compose(load_system(kForcedDoc), 2);
  const Trajectory still = sim_galerkin(es, fast_opts(5.0, 0.05));
  CHECK(still.values.cwiseAbs().maxCoeff() == 0.0);  // zero input, zero start

  InputOverrides overrides;
  Eigen::VectorXd uv(5);
  uv << 1, 2, 3, 4, 5;
  overrides["u_v"] = uv;
  const Trajectory forced = sim_galerkin(es, fast_opts(5.0, 0.05), overrides);
  CHECK(forced.values.col(0).maxCoeff() > 0.5);

  InputOverrides bad;
  bad["w_v"] = uv;
  CHECK_THROWS_AS(sim_galerkin(es, fast_opts(1.0, 0.1), bad), SchemaError);
}

TEST_CASE("sim_collocation: exact recovery of an affine solution manifold") {
  // x' = 0 with x(0) ~ U(0,1): x(t; xi) = 1/2 + xi/2 exactly, so regression
  // must reproduce [1/2, 1/2, 0, ...] at every time step.
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "uniform", "data": [0, 1], "rhs": "0"}]
  })json");
  const ExpandedSystem es = compose(sys, 3);
  Rng rng(3);
  const Eigen::MatrixXd samples = sample_basis(es, 50, rng);
  const Trajectory traj = sim_collocation(es, fast_opts(1.0, 0.1), samples);
  for (int k = 0; k < traj.times.size(); ++k) {
    CHECK(traj.values(k, 0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(traj.values(k, 1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(traj.values(k, 2)) < 1e-10);
    CHECK(std::abs(traj.values(k, 3)) < 1e-10);
  }
}

TEST_CASE("sim_collocation: sample-count and rank preconditions") {
  const ExpandedSystem es = compose(load_system(kDecayDoc), 3);
  Rng rng(4);
  const Eigen::MatrixXd few = sample_basis(es, 3, rng);  // P-tilde is 4
  CHECK_THROWS_WITH_AS(sim_collocation(es, fast_opts(1.0, 0.1), few),
                       doctest::Contains("at least"), Error);
  // four copies of one sample: rank 1
  Eigen::MatrixXd degenerate(1, 4);
  degenerate.setConstant(0.3);
  CHECK_THROWS_WITH_AS(sim_collocation(es, fast_opts(1.0, 0.1), degenerate),
                       doctest::Contains("rank"), Error);
}

TEST_CASE("sim_montecarlo: dirac-only systems give identical trajectories") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "dirac", "data": 0.5}]
  })json");
  const ExpandedSystem es = compose(sys, 2);
  const Eigen::MatrixXd samples(0, 5);
  const auto trajs = sim_montecarlo(es, fast_opts(1.0, 0.1), samples);
  REQUIRE(trajs.size() == 5);
  for (const auto& t : trajs) CHECK((t.values - trajs[0].values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sim_montecarlo: single sample at the mean matches the mean-parameter run") {
  const ExpandedSystem es = compose(load_system(kDecayDoc), 2);
  Eigen::MatrixXd sample(1, 1);
  sample(0, 0) = 0.5;  // mean of B(2,2)
  const auto mc = sim_montecarlo(es, fast_opts(1.0, 0.01), sample);

  const SystemDef fixed = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "dirac", "data": 0.5}]
  })json");
  const Trajectory nominal = sim_galerkin(compose(fixed, 2), fast_opts(1.0, 0.01));
  CHECK((mc[0].values.col(0) - nominal.values.col(0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simulation paths are deterministic under a fixed seed") {
  const ExpandedSystem es = compose(load_system(kDecayDoc), 2);
  Rng rng_a(kDefaultSeed), rng_b(kDefaultSeed);
  const Eigen::MatrixXd sa = sample_variables(es, 20, rng_a);
  const Eigen::MatrixXd sb = sample_variables(es, 20, rng_b);
  CHECK((sa - sb).cwiseAbs().maxCoeff() == 0.0);
  const auto ta = sim_montecarlo(es, fast_opts(1.0, 0.05), sa);
  const auto tb = sim_montecarlo(es, fast_opts(1.0, 0.05), sb);
  for (std::size_t s = 0; s < ta.size(); ++s)
    CHECK((ta[s].values - tb[s].values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("output coefficient series evaluates polynomial outputs on coefficients") {
  const SystemDef sys = load_system(R"json({
    "states": [{"name": "x", "pdf": "dirac", "data": 2, "rhs": "-a*x"}],
    "parameters": [{"name": "a", "pdf": "beta", "data": [2, 2]}],
    "outputs": [{"name": "y", "rhs": "2*x"}, {"name": "z", "rhs": "x^2"}]
  })json");
  const ExpandedSystem es = compose(sys, 3);
  const Trajectory traj = sim_galerkin(es, fast_opts(1.0, 0.1));
  const Eigen::MatrixXd y = output_coefficient_series(es, traj, 0);
  CHECK((y - 2.0 * traj.values).cwiseAbs().maxCoeff() < 1e-12);
  // quadratic output: zeroth coefficient at t=0 is E[x(0)^2] = 4
  const Eigen::MatrixXd z = output_coefficient_series(es, traj, 1);
  CHECK(z(0, 0) == doctest::Approx(4.0).epsilon(1e-10));
}
