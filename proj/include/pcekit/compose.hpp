#pragma once

#include <Eigen/Core>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pcekit/modelir.hpp"
#include "pcekit/pcebasis.hpp"

namespace pcekit {

/// Assignment of one germ dimension to an uncertain variable.
struct GermAssignment {
  std::string name;
  bool is_parameter = false;  // otherwise a state initial condition
  int slot = 0;               // index into parameters / states
  Distribution dist;
};

/// Germ dimensions in their canonical order: non-Dirac parameters in
/// declaration order, then non-Dirac initial conditions in declaration
/// order. Each uncertain variable owns exactly one dimension.
struct GermMap {
  std::vector<GermAssignment> vars;
  int size() const { return static_cast<int>(vars.size()); }
  int dim_of(const std::string& name) const;
};

/// One Galerkin-projected monomial of a state (or output) right-hand side:
///   contribution_i = factor(t) * sum_j ahat_j * E^(p)_j [x_block(k_1) x ... x x_block(k_p)]_i
/// where factor(t) collects the deterministic input and time powers and
/// ahat carries the numeric coefficient and projected parameter factors.
struct GalerkinTerm {
  std::vector<int> state_slots;  // p entries, state index per factor
  Eigen::VectorXd ahat;
  std::vector<std::pair<int, double>> ahat_nz;     // cached nonzeros of ahat
  std::vector<std::pair<int, int>> input_factors;  // (input index, power)
  int time_power = 0;
  std::shared_ptr<const CoeffTensor> tensor;
};

/// Fast nominal-path monomial with names resolved to value-array slots
/// (states first, then parameters).
struct CompiledMonomial {
  double coeff = 0.0;
  std::vector<std::pair<int, int>> var_pows;
  std::vector<std::pair<int, int>> input_pows;
  int time_power = 0;
};

enum class ComposeMode {
  Galerkin,         // require expandable states, build tensors and terms
  CollocationOnly,  // basis + germs + initial conditions only
};

/// Input override values for simulation, keyed by the extra-field name
/// (e.g. {"u_v": [1,2,3,4,5]}).
using InputOverrides = std::map<std::string, Eigen::VectorXd>;

/// Inputs with overrides applied, ready for evaluation at a time point.
class BoundInputs {
 public:
  BoundInputs() = default;
  BoundInputs(const std::vector<InputDef>& inputs, const InputOverrides& overrides);
  int size() const { return static_cast<int>(inputs_.size()); }
  double eval(int input, double t) const;
  void eval_all(double t, std::vector<double>& out) const;

 private:
  std::vector<InputDef> inputs_;  // extra fields merged with overrides
};

/// The Galerkin-expanded deterministic system. Immutable after compose();
/// evaluation entry points are const and safe to call concurrently.
struct ExpandedSystem {
  SystemDef def;
  int order;
  BasisSet basis;
  GermMap germs;
  Eigen::VectorXd x0_hat;  // n_states * P-tilde, state-major
  std::vector<std::vector<GalerkinTerm>> state_terms;   // empty when collocation-only
  std::vector<std::vector<GalerkinTerm>> output_terms;  // empty entry per blocked output
  std::map<int, std::shared_ptr<const CoeffTensor>> tensors;  // by monomial order p
  bool galerkin_ready = false;

  // nominal system, compiled for the collocation / Monte Carlo paths
  std::vector<std::vector<CompiledMonomial>> nominal_poly;  // empty slot: AST fallback

  int n_states() const { return static_cast<int>(def.states.size()); }
  int n_parameters() const { return static_cast<int>(def.parameters.size()); }
  int pbasis() const { return basis.size(); }

  BoundInputs bind_inputs(const InputOverrides& overrides = {}) const;

  /// Derivative of the expanded state vector (Galerkin path).
  void expanded_rhs(double t, const Eigen::VectorXd& xhat, const BoundInputs& inputs,
                    Eigen::VectorXd& dxhat) const;

  /// Nominal right-hand side at physical state/parameter values.
  void nominal_rhs(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& params,
                   const BoundInputs& inputs, Eigen::VectorXd& dx) const;

  /// Coefficients of one output evaluated on expanded coefficients.
  Eigen::VectorXd output_coeffs(int output, double t, const Eigen::VectorXd& xhat,
                                const BoundInputs& inputs) const;

  /// Nominal output value at physical states/parameters.
  double output_value(int output, double t, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& params, const BoundInputs& inputs) const;

  /// Physical parameter vector for one germ sample (Dirac values filled in).
  Eigen::VectorXd realize_parameters(const Eigen::VectorXd& germ) const;
  /// Physical initial state for one germ sample.
  Eigen::VectorXd realize_initial(const Eigen::VectorXd& germ) const;
};

/// Projection of a scalar distribution onto the basis along its germ
/// dimension (pass germ_dim = -1 for Dirac): ahat_j = <v, phi_j>/<phi_j,phi_j>.
/// Affine variables produce exactly two nonzeros.
Eigen::VectorXd project_variable(const Distribution& d, const BasisSet& b, int germ_dim);

/// Build the expanded system of a given PCE order.
ExpandedSystem compose(const SystemDef& sys, int order,
                       ComposeMode mode = ComposeMode::Galerkin);

/// Evaluate the expanded right-hand side (convenience wrapper).
Eigen::VectorXd eval_expanded_rhs(const ExpandedSystem& es, double t, const Eigen::VectorXd& xhat,
                                  const InputOverrides& overrides = {});

/// Re-project one variable's coefficients with new distribution data of the
/// same family. Rebuilds basis tensors only when the germ weight itself
/// changes (beta-family shape changes); otherwise tensors are reused
/// untouched. Result matches a full recompose entrywise.
ExpandedSystem update(const ExpandedSystem& es, const std::string& name,
                      const Distribution& dist);

}  // namespace pcekit
