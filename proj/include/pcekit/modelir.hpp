#pragma once

#include <Eigen/Core>

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pcekit/distributions.hpp"
#include "pcekit/errors.hpp"

namespace pcekit {

// ---------------------------------------------------------------------------
// Expression syntax tree

struct SourceSpan {
  int begin = 0;
  int end = 0;
};

/// Parsed expression node. The grammar covers identifiers, decimal literals,
/// + - * / ^ ( ) and call syntax; which constructs are *admissible* depends
/// on where the expression appears (see lower_to_poly and input validation).
struct Ast {
  enum class Kind { Number, Ident, Add, Sub, Mul, Div, Pow, Neg, Call };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string name;  // Ident and Call
  std::vector<Ast> children;
  SourceSpan span;
};

/// Expression with its source text kept for diagnostics and re-evaluation.
struct ParsedExpr {
  std::string text;
  Ast root;
};

/// Syntax-only parse. Throws SchemaError on malformed input.
ParsedExpr parse_ast(const std::string& text);

/// Name environment for numeric AST evaluation. piecewise/sin/cos/exp are
/// built in; piecewise takes two vector-valued names and a scalar expression.
struct EvalContext {
  std::function<double(const std::string&)> scalar;
  std::function<const Eigen::VectorXd*(const std::string&)> vector =
      [](const std::string&) -> const Eigen::VectorXd* { return nullptr; };
};

double eval_ast(const Ast& node, const std::string& source, const EvalContext& ctx);

// ---------------------------------------------------------------------------
// Canonical polynomial form

/// One canonical monomial: coefficient times powers of states/parameters,
/// with deterministic time factors (inputs, t) kept separate so they never
/// enter Galerkin tensors.
struct Monomial {
  double coeff = 0.0;
  std::map<std::string, int> powers;        // states and parameters only
  std::map<std::string, int> input_powers;  // inputs, as opaque factors
  int time_power = 0;

  bool same_key(const Monomial& o) const {
    return powers == o.powers && input_powers == o.input_powers && time_power == o.time_power;
  }
};

/// Canonical form: monomials sorted, like terms merged, zero terms removed.
struct PolyExpr {
  std::vector<Monomial> monomials;

  double eval(const std::function<double(const std::string&)>& value_of, double t) const;
  std::string print() const;
  bool operator==(const PolyExpr&) const = default;
};

bool operator==(const Monomial& a, const Monomial& b);

/// Name sets used to classify identifiers while lowering.
struct SymbolTable {
  std::set<std::string> states;
  std::set<std::string> parameters;
  std::set<std::string> inputs;
};

/// Lower a parsed expression to canonical monomials. Throws SchemaError for
/// unresolved identifiers and NotGalerkinExpandable for non-polynomial
/// constructs (division by a variable, non-integer exponent, calls).
PolyExpr lower_to_poly(const ParsedExpr& expr, const SymbolTable& symbols);

/// parse + lower in one step.
PolyExpr parse_expression(const std::string& text, const SymbolTable& symbols);

// ---------------------------------------------------------------------------
// System definition

struct StateDef {
  std::string name;
  Distribution initial;
  ParsedExpr rhs;
  std::optional<PolyExpr> poly;    // set when Galerkin-expandable
  std::string galerkin_blocker;    // offending subexpression otherwise
};

struct ParamDef {
  std::string name;
  Distribution dist;
};

struct InputDef {
  std::string name;
  ParsedExpr rhs;
  std::map<std::string, Eigen::VectorXd> extra;  // free-form numeric fields
};

struct OutputDef {
  std::string name;
  ParsedExpr rhs;
  std::optional<PolyExpr> poly;
  std::string galerkin_blocker;
};

/// Parsed and validated declarative model. Immutable after load.
struct SystemDef {
  std::vector<StateDef> states;
  std::vector<ParamDef> parameters;
  std::vector<InputDef> inputs;
  std::vector<OutputDef> outputs;

  bool galerkin_ok() const;
  /// First blocking subexpression for diagnostics, empty if expandable.
  std::string first_blocker() const;

  int state_index(const std::string& name) const;
  int parameter_index(const std::string& name) const;
  int input_index(const std::string& name) const;
  const Distribution* distribution_of(const std::string& name) const;

  SymbolTable symbols() const;
};

/// Load from the JSON document schema: top-level arrays `states`,
/// `parameters`, `inputs`, `outputs`; entries carry `name`, `pdf` + `data`
/// (states and parameters), `rhs` (states, inputs, outputs) and free-form
/// numeric-array fields on inputs. Errors name the JSON path.
SystemDef load_system(const std::string& json_text);
SystemDef load_system_file(const std::string& path);

}  // namespace pcekit
