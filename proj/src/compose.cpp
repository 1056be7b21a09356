#include "pcekit/compose.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pcekit {

namespace {

constexpr double kCoeffZero = 1e-14;  // relative snap threshold for projections

void snap_small(Eigen::VectorXd& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) < kCoeffZero * scale) v[i] = 0.0;
}

/// <(off + scale*xi)^power, phi_n> under the germ weight, exact quadrature.
double affine_power_inner(const PolyFamily1D& f, double off, double scale, int power, int n) {
  const int degree = power + n;
  const auto& rule = f.gauss_rule(degree / 2 + 1);
  double acc = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    double g = 1.0;
    for (int k = 0; k < power; ++k) g *= off + scale * rule.nodes[q];
    acc += rule.weights[q] * g * f.eval(n, rule.nodes[q]);
  }
  return acc;
}

struct ParamFactor {
  double off;
  double scale;
  int power;
};

/// ahat for one monomial's deterministic-plus-stochastic prefactor:
/// coeff times a product of affine germ maps raised to powers, projected
/// per dimension (the joint weight factorizes over germs).
Eigen::VectorXd project_factor_product(double coeff, const std::map<int, ParamFactor>& per_dim,
                                       const BasisSet& b) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(b.size());
  for (int j = 0; j < b.size(); ++j) {
    const MultiIndex& idx = b.indices()[j];
    bool supported = true;
    for (int d = 0; d < b.n_xi() && supported; ++d)
      if (idx[d] != 0 && !per_dim.count(d)) supported = false;
    if (!supported) continue;
    double val = coeff;
    for (const auto& [d, fac] : per_dim) {
      const auto& fam = b.family(d);
      const int n = idx[d];
      val *= affine_power_inner(fam, fac.off, fac.scale, fac.power, n) / fam.norm(n);
    }
    v[j] = val;
  }
  snap_small(v);
  return v;
}

std::vector<std::pair<int, double>> nonzeros(const Eigen::VectorXd& v) {
  std::vector<std::pair<int, double>> nz;
  for (int i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) nz.emplace_back(i, v[i]);
  return nz;
}

std::vector<GalerkinTerm> build_terms(
    const PolyExpr& poly, const SystemDef& def, const BasisSet& basis, const GermMap& germs,
    std::map<int, std::shared_ptr<const CoeffTensor>>& tensor_cache) {
  std::vector<GalerkinTerm> terms;
  for (const Monomial& m : poly.monomials) {
    GalerkinTerm term;
    double coeff = m.coeff;
    std::map<int, ParamFactor> per_dim;
    for (const auto& [name, power] : m.powers) {
      if (int s = def.state_index(name); s >= 0) {
        for (int k = 0; k < power; ++k) term.state_slots.push_back(s);
        continue;
      }
      const int p_idx = def.parameter_index(name);
      const Distribution& dist = def.parameters[p_idx].dist;
      if (dist.is_deterministic()) {
        for (int k = 0; k < power; ++k) coeff *= dist.value;
        continue;
      }
      const auto [off, scale] = dist.germ_affine_map();
      per_dim[germs.dim_of(name)] = ParamFactor{off, scale, power};
    }
    term.ahat = project_factor_product(coeff, per_dim, basis);
    term.ahat_nz = nonzeros(term.ahat);
    for (const auto& [name, power] : m.input_powers)
      term.input_factors.emplace_back(def.input_index(name), power);
    term.time_power = m.time_power;

    const int p = static_cast<int>(term.state_slots.size());
    auto it = tensor_cache.find(p);
    if (it == tensor_cache.end())
      it = tensor_cache.emplace(p, std::make_shared<CoeffTensor>(galerkin_tensor(basis, p))).first;
    term.tensor = it->second;
    terms.push_back(std::move(term));
  }
  return terms;
}

std::vector<CompiledMonomial> compile_nominal(const PolyExpr& poly, const SystemDef& def) {
  std::vector<CompiledMonomial> out;
  const int n_states = static_cast<int>(def.states.size());
  for (const Monomial& m : poly.monomials) {
    CompiledMonomial c;
    c.coeff = m.coeff;
    for (const auto& [name, power] : m.powers) {
      if (int s = def.state_index(name); s >= 0)
        c.var_pows.emplace_back(s, power);
      else
        c.var_pows.emplace_back(n_states + def.parameter_index(name), power);
    }
    for (const auto& [name, power] : m.input_powers)
      c.input_pows.emplace_back(def.input_index(name), power);
    c.time_power = m.time_power;
    out.push_back(std::move(c));
  }
  return out;
}

/// Fill everything that depends on the distributions' data: initial
/// conditions, term projections, nominal compilation. Reuses the passed
/// tensor cache so update() keeps existing tensors.
void populate(ExpandedSystem& es, ComposeMode mode) {
  const SystemDef& def = es.def;
  const int pb = es.basis.size();
  es.x0_hat.resize(def.states.size() * pb);
  for (std::size_t s = 0; s < def.states.size(); ++s)
    es.x0_hat.segment(s * pb, pb) =
        project_variable(def.states[s].initial, es.basis, es.germs.dim_of(def.states[s].name));

  es.state_terms.clear();
  es.output_terms.clear();
  es.nominal_poly.assign(def.states.size(), {});
  for (std::size_t s = 0; s < def.states.size(); ++s)
    if (def.states[s].poly) es.nominal_poly[s] = compile_nominal(*def.states[s].poly, def);

  if (mode != ComposeMode::Galerkin) {
    es.galerkin_ready = false;
    return;
  }
  for (const StateDef& s : def.states)
    es.state_terms.push_back(build_terms(*s.poly, def, es.basis, es.germs, es.tensors));
  for (const OutputDef& o : def.outputs) {
    if (o.poly)
      es.output_terms.push_back(build_terms(*o.poly, def, es.basis, es.germs, es.tensors));
    else
      es.output_terms.emplace_back();
  }
  es.galerkin_ready = true;
}

void contract_terms(const std::vector<GalerkinTerm>& terms, const Eigen::VectorXd& xhat, int pb,
                    double t, const std::vector<double>& input_vals, double* out) {
  for (const GalerkinTerm& term : terms) {
    double factor = 1.0;
    for (int k = 0; k < term.time_power; ++k) factor *= t;
    for (const auto& [input, power] : term.input_factors)
      for (int k = 0; k < power; ++k) factor *= input_vals[input];
    if (factor == 0.0) continue;
    const int p = static_cast<int>(term.state_slots.size());
    for (const auto& [j, aj] : term.ahat_nz) {
      const double w = aj * factor;
      const auto slice = term.tensor->slice(j);
      for (std::size_t e = 0; e < slice.size(); ++e) {
        double prod = w * slice.value[e];
        const auto k = slice.k(e);
        for (int f = 0; f < p; ++f) prod *= xhat[term.state_slots[f] * pb + k[f]];
        out[slice.i[e]] += prod;
      }
    }
  }
}

}  // namespace

int GermMap::dim_of(const std::string& name) const {
  for (std::size_t d = 0; d < vars.size(); ++d)
    if (vars[d].name == name) return static_cast<int>(d);
  return -1;
}

BoundInputs::BoundInputs(const std::vector<InputDef>& inputs, const InputOverrides& overrides)
    : inputs_(inputs) {
  for (const auto& [key, value] : overrides) {
    bool found = false;
    for (InputDef& u : inputs_) {
      auto it = u.extra.find(key);
      if (it != u.extra.end()) {
        it->second = value;
        found = true;
      }
    }
    if (!found)
      throw SchemaError("input override '" + key + "' does not match any input field");
  }
}

double BoundInputs::eval(int input, double t) const {
  const InputDef& u = inputs_.at(input);
  EvalContext ctx;
  ctx.scalar = [&](const std::string& name) -> double {
    if (name == "t") return t;
    auto it = u.extra.find(name);
    if (it != u.extra.end() && it->second.size() == 1) return it->second[0];
    throw SchemaError("input '" + u.name + "': '" + name + "' is not a scalar field");
  };
  ctx.vector = [&](const std::string& name) -> const Eigen::VectorXd* {
    auto it = u.extra.find(name);
    return it == u.extra.end() ? nullptr : &it->second;
  };
  return eval_ast(u.rhs.root, u.rhs.text, ctx);
}

void BoundInputs::eval_all(double t, std::vector<double>& out) const {
  out.resize(inputs_.size());
  for (std::size_t i = 0; i < inputs_.size(); ++i) out[i] = eval(static_cast<int>(i), t);
}

Eigen::VectorXd project_variable(const Distribution& d, const BasisSet& b, int germ_dim) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(b.size());
  const auto [off, scale] = d.germ_affine_map();
  if (d.is_deterministic() || germ_dim < 0) {
    if (!d.is_deterministic())
      throw ComposeError("project_variable: non-deterministic variable needs a germ dimension");
    v[0] = off;
    return v;
  }
  if (germ_dim >= b.n_xi()) throw ComposeError("project_variable: germ dimension out of range");
  const PolyFamily1D& fam = b.family(germ_dim);
  if (!PolyFamily1D::for_distribution(d, 0).same_weight(fam))
    throw ComposeError("project_variable: germ family does not match the distribution");
  std::map<int, ParamFactor> per_dim{{germ_dim, ParamFactor{off, scale, 1}}};
  return project_factor_product(1.0, per_dim, b);
}

ExpandedSystem compose(const SystemDef& sys, int order, ComposeMode mode) {
  if (order < 0) throw ComposeError("compose: order must be >= 0");
  if (mode == ComposeMode::Galerkin && !sys.galerkin_ok())
    throw ComposeError("collocation-only system: right-hand side contains '" +
                       sys.first_blocker() + "'; use the collocation or Monte Carlo path");

  GermMap germs;
  std::vector<PolyFamily1D> families;
  auto assign = [&](const std::string& name, bool is_param, int slot, const Distribution& dist) {
    if (dist.is_deterministic()) return;
    germs.vars.push_back(GermAssignment{name, is_param, slot, dist});
    families.push_back(PolyFamily1D::for_distribution(dist));
  };
  for (std::size_t i = 0; i < sys.parameters.size(); ++i)
    assign(sys.parameters[i].name, true, static_cast<int>(i), sys.parameters[i].dist);
  for (std::size_t i = 0; i < sys.states.size(); ++i)
    assign(sys.states[i].name, false, static_cast<int>(i), sys.states[i].initial);

  ExpandedSystem es{.def = sys,
                    .order = order,
                    .basis = BasisSet(std::move(families), order),
                    .germs = std::move(germs)};
  populate(es, mode);
  return es;
}

BoundInputs ExpandedSystem::bind_inputs(const InputOverrides& overrides) const {
  return BoundInputs(def.inputs, overrides);
}

void ExpandedSystem::expanded_rhs(double t, const Eigen::VectorXd& xhat, const BoundInputs& inputs,
                                  Eigen::VectorXd& dxhat) const {
  if (!galerkin_ready) throw ComposeError("system was not composed for the Galerkin path");
  const int pb = pbasis();
  if (xhat.size() != n_states() * pb)
    throw Error("expanded_rhs: state vector length mismatch");
  dxhat.setZero(xhat.size());
  std::vector<double> input_vals;
  inputs.eval_all(t, input_vals);
  for (int s = 0; s < n_states(); ++s)
    contract_terms(state_terms[s], xhat, pb, t, input_vals, dxhat.data() + s * pb);
}

void ExpandedSystem::nominal_rhs(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& params,
                                 const BoundInputs& inputs, Eigen::VectorXd& dx) const {
  const int ns = n_states();
  dx.resize(ns);
  std::array<double, 16> input_buf;
  std::vector<double> input_heap;
  double* input_vals = input_buf.data();
  if (inputs.size() > 16) {
    input_heap.resize(inputs.size());
    input_vals = input_heap.data();
  }
  for (int i = 0; i < inputs.size(); ++i) input_vals[i] = inputs.eval(i, t);

  auto var_value = [&](int slot) { return slot < ns ? x[slot] : params[slot - ns]; };
  for (int s = 0; s < ns; ++s) {
    if (!nominal_poly[s].empty() || def.states[s].poly) {
      double acc = 0.0;
      for (const CompiledMonomial& m : nominal_poly[s]) {
        double term = m.coeff;
        for (const auto& [slot, power] : m.var_pows)
          for (int k = 0; k < power; ++k) term *= var_value(slot);
        for (const auto& [input, power] : m.input_pows)
          for (int k = 0; k < power; ++k) term *= input_vals[input];
        for (int k = 0; k < m.time_power; ++k) term *= t;
        acc += term;
      }
      dx[s] = acc;
    } else {
      // collocation-only state: interpret the expression tree directly
      EvalContext ctx;
      ctx.scalar = [&](const std::string& name) -> double {
        if (name == "t") return t;
        if (int i = def.state_index(name); i >= 0) return x[i];
        if (int i = def.parameter_index(name); i >= 0) return params[i];
        if (int i = def.input_index(name); i >= 0) return input_vals[i];
        throw SchemaError("unknown identifier '" + name + "'");
      };
      dx[s] = eval_ast(def.states[s].rhs.root, def.states[s].rhs.text, ctx);
    }
  }
}

Eigen::VectorXd ExpandedSystem::output_coeffs(int output, double t, const Eigen::VectorXd& xhat,
                                              const BoundInputs& inputs) const {
  if (!galerkin_ready) throw ComposeError("system was not composed for the Galerkin path");
  if (output < 0 || output >= static_cast<int>(def.outputs.size()))
    throw Error("output index out of range");
  if (!def.outputs[output].poly)
    throw ComposeError("output '" + def.outputs[output].name +
                       "' is not Galerkin-expandable ('" + def.outputs[output].galerkin_blocker +
                       "')");
  const int pb = pbasis();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(pb);
  std::vector<double> input_vals;
  inputs.eval_all(t, input_vals);
  contract_terms(output_terms[output], xhat, pb, t, input_vals, y.data());
  return y;
}

double ExpandedSystem::output_value(int output, double t, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& params,
                                    const BoundInputs& inputs) const {
  const OutputDef& o = def.outputs.at(output);
  EvalContext ctx;
  ctx.scalar = [&](const std::string& name) -> double {
    if (name == "t") return t;
    if (int i = def.state_index(name); i >= 0) return x[i];
    if (int i = def.parameter_index(name); i >= 0) return params[i];
    if (int i = def.input_index(name); i >= 0) return inputs.eval(i, t);
    throw SchemaError("unknown identifier '" + name + "'");
  };
  return eval_ast(o.rhs.root, o.rhs.text, ctx);
}

Eigen::VectorXd ExpandedSystem::realize_parameters(const Eigen::VectorXd& germ) const {
  Eigen::VectorXd params(n_parameters());
  for (int i = 0; i < n_parameters(); ++i) {
    const Distribution& d = def.parameters[i].dist;
    if (d.is_deterministic()) {
      params[i] = d.value;
    } else {
      const auto [off, scale] = d.germ_affine_map();
      params[i] = off + scale * germ[germs.dim_of(def.parameters[i].name)];
    }
  }
  return params;
}

Eigen::VectorXd ExpandedSystem::realize_initial(const Eigen::VectorXd& germ) const {
  Eigen::VectorXd x0(n_states());
  for (int i = 0; i < n_states(); ++i) {
    const Distribution& d = def.states[i].initial;
    if (d.is_deterministic()) {
      x0[i] = d.value;
    } else {
      const auto [off, scale] = d.germ_affine_map();
      x0[i] = off + scale * germ[germs.dim_of(def.states[i].name)];
    }
  }
  return x0;
}

Eigen::VectorXd eval_expanded_rhs(const ExpandedSystem& es, double t, const Eigen::VectorXd& xhat,
                                  const InputOverrides& overrides) {
  Eigen::VectorXd dxhat;
  es.expanded_rhs(t, xhat, es.bind_inputs(overrides), dxhat);
  return dxhat;
}

ExpandedSystem update(const ExpandedSystem& es, const std::string& name,
                      const Distribution& dist) {
  SystemDef def = es.def;
  Distribution* target = nullptr;
  if (int i = def.parameter_index(name); i >= 0)
    target = &def.parameters[i].dist;
  else if (int i = def.state_index(name); i >= 0)
    target = &def.states[i].initial;
  else
    throw ComposeError("update: unknown variable '" + name + "'");

  if (target->kind != dist.kind)
    throw ComposeError("update: '" + name + "' changes distribution family from " +
                       dist_kind_name(target->kind) + " to " + dist_kind_name(dist.kind) +
                       "; recompose the system instead");

  const bool weight_changed =
      !dist.is_deterministic() &&
      !PolyFamily1D::for_distribution(*target, 0).same_weight(
          PolyFamily1D::for_distribution(dist, 0));
  *target = dist;
  if (weight_changed) {
    // beta-family shape change alters the germ weight and with it every
    // tensor; only a full recompose is exact
    return compose(def, es.order, es.galerkin_ready ? ComposeMode::Galerkin
                                                    : ComposeMode::CollocationOnly);
  }
  ExpandedSystem out = es;
  out.def = std::move(def);
  for (GermAssignment& g : out.germs.vars)
    if (g.name == name) g.dist = dist;
  populate(out, es.galerkin_ready ? ComposeMode::Galerkin : ComposeMode::CollocationOnly);
  return out;
}

}  // namespace pcekit
