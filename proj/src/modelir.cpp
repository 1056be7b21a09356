#include "pcekit/modelir.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcekit/piecewise.hpp"

namespace pcekit {

namespace {

std::string format_coeff(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Lexer

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };
  Kind kind = Kind::End;
  double number = 0.0;
  std::string text;
  int begin = 0;
  int end = 0;
};

std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token tok;
    tok.begin = static_cast<int>(i);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = src.c_str() + i;
      char* endp = nullptr;
      tok.number = std::strtod(start, &endp);
      if (endp == start)
        throw SchemaError("expression: cannot read number at position " + std::to_string(i) +
                          " in '" + src + "'");
      i += endp - start;
      tok.kind = Token::Kind::Number;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      tok.kind = Token::Kind::Ident;
      tok.text = src.substr(i, j - i);
      i = j;
    } else {
      switch (c) {
        case '+': tok.kind = Token::Kind::Plus; break;
        case '-': tok.kind = Token::Kind::Minus; break;
        case '*': tok.kind = Token::Kind::Star; break;
        case '/': tok.kind = Token::Kind::Slash; break;
        case '^': tok.kind = Token::Kind::Caret; break;
        case '(': tok.kind = Token::Kind::LParen; break;
        case ')': tok.kind = Token::Kind::RParen; break;
        case ',': tok.kind = Token::Kind::Comma; break;
        default:
          throw SchemaError("expression: unexpected character '" + std::string(1, c) +
                            "' at position " + std::to_string(i) + " in '" + src + "'");
      }
      ++i;
    }
    tok.end = static_cast<int>(i);
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Token::Kind::End;
  end.begin = end.end = static_cast<int>(src.size());
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser
//
//   expr   := term  (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := primary ('^' unary)?            (right-associative)
//   primary:= number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

class ExprParser {
 public:
  explicit ExprParser(const std::string& src) : src_(src), toks_(tokenize(src)) {}

  Ast parse() {
    Ast root = expr();
    if (peek().kind != Token::Kind::End)
      throw SchemaError("expression: unexpected trailing input at position " +
                        std::to_string(peek().begin) + " in '" + src_ + "'");
    return root;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }
  bool accept(Token::Kind k) {
    if (peek().kind == k) {
      ++pos_;
      return true;
    }
    return false;
  }

  Ast make(Ast::Kind kind, std::vector<Ast> children, int begin, int end) {
    Ast n;
    n.kind = kind;
    n.children = std::move(children);
    n.span = {begin, end};
    return n;
  }

  Ast expr() {
    Ast lhs = term();
    while (peek().kind == Token::Kind::Plus || peek().kind == Token::Kind::Minus) {
      const bool plus = take().kind == Token::Kind::Plus;
      Ast rhs = term();
      const int b = lhs.span.begin, e = rhs.span.end;
      lhs = make(plus ? Ast::Kind::Add : Ast::Kind::Sub, {std::move(lhs), std::move(rhs)}, b, e);
    }
    return lhs;
  }

  Ast term() {
    Ast lhs = unary();
    while (peek().kind == Token::Kind::Star || peek().kind == Token::Kind::Slash) {
      const bool mul = take().kind == Token::Kind::Star;
      Ast rhs = unary();
      const int b = lhs.span.begin, e = rhs.span.end;
      lhs = make(mul ? Ast::Kind::Mul : Ast::Kind::Div, {std::move(lhs), std::move(rhs)}, b, e);
    }
    return lhs;
  }

  Ast unary() {
    if (peek().kind == Token::Kind::Minus) {
      const Token minus = take();
      Ast inner = unary();
      const int e = inner.span.end;
      return make(Ast::Kind::Neg, {std::move(inner)}, minus.begin, e);
    }
    return power();
  }

  Ast power() {
    Ast base = primary();
    if (accept(Token::Kind::Caret)) {
      Ast exp = unary();
      const int b = base.span.begin, e = exp.span.end;
      return make(Ast::Kind::Pow, {std::move(base), std::move(exp)}, b, e);
    }
    return base;
  }

  Ast primary() {
    const Token tok = take();
    switch (tok.kind) {
      case Token::Kind::Number: {
        Ast n;
        n.kind = Ast::Kind::Number;
        n.number = tok.number;
        n.span = {tok.begin, tok.end};
        return n;
      }
      case Token::Kind::Ident: {
        if (accept(Token::Kind::LParen)) {
          std::vector<Ast> args;
          if (peek().kind != Token::Kind::RParen) {
            args.push_back(expr());
            while (accept(Token::Kind::Comma)) args.push_back(expr());
          }
          if (peek().kind != Token::Kind::RParen)
            throw SchemaError("expression: missing ')' after arguments of '" + tok.text +
                              "' in '" + src_ + "'");
          const Token close = take();
          Ast n;
          n.kind = Ast::Kind::Call;
          n.name = tok.text;
          n.children = std::move(args);
          n.span = {tok.begin, close.end};
          return n;
        }
        Ast n;
        n.kind = Ast::Kind::Ident;
        n.name = tok.text;
        n.span = {tok.begin, tok.end};
        return n;
      }
      case Token::Kind::LParen: {
        Ast inner = expr();
        if (peek().kind != Token::Kind::RParen)
          throw SchemaError("expression: missing ')' at position " + std::to_string(peek().begin) +
                            " in '" + src_ + "'");
        const Token close = take();
        inner.span = {tok.begin, close.end};
        return inner;
      }
      default:
        throw SchemaError("expression: unexpected token at position " + std::to_string(tok.begin) +
                          " in '" + src_ + "'");
    }
  }

  const std::string& src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string span_text(const std::string& src, SourceSpan span) {
  return src.substr(span.begin, span.end - span.begin);
}

// ---------------------------------------------------------------------------
// Lowering to canonical monomials

class Lowerer {
 public:
  Lowerer(const std::string& src, const SymbolTable& symbols) : src_(src), symbols_(symbols) {}

  std::vector<Monomial> lower(const Ast& n) {
    switch (n.kind) {
      case Ast::Kind::Number: {
        Monomial m;
        m.coeff = n.number;
        return {m};
      }
      case Ast::Kind::Ident: {
        Monomial m;
        m.coeff = 1.0;
        if (symbols_.states.count(n.name) || symbols_.parameters.count(n.name)) {
          m.powers[n.name] = 1;
        } else if (symbols_.inputs.count(n.name)) {
          m.input_powers[n.name] = 1;
        } else if (n.name == "t") {
          m.time_power = 1;
        } else {
          throw SchemaError("unknown identifier '" + n.name + "' in '" + src_ + "'");
        }
        return {m};
      }
      case Ast::Kind::Add: {
        auto a = lower(n.children[0]);
        auto b = lower(n.children[1]);
        a.insert(a.end(), b.begin(), b.end());
        return a;
      }
      case Ast::Kind::Sub: {
        auto a = lower(n.children[0]);
        auto b = lower(n.children[1]);
        for (auto& m : b) m.coeff = -m.coeff;
        a.insert(a.end(), b.begin(), b.end());
        return a;
      }
      case Ast::Kind::Neg: {
        auto a = lower(n.children[0]);
        for (auto& m : a) m.coeff = -m.coeff;
        return a;
      }
      case Ast::Kind::Mul:
        return product(lower(n.children[0]), lower(n.children[1]));
      case Ast::Kind::Div: {
        auto denom = lower(n.children[1]);
        if (denom.size() != 1 || !denom[0].powers.empty() || !denom[0].input_powers.empty() ||
            denom[0].time_power != 0)
          throw NotGalerkinExpandable(
              "not Galerkin-expandable: division by a variable in '" +
                  span_text(src_, n.children[1].span) + "'",
              span_text(src_, n.children[1].span));
        if (denom[0].coeff == 0.0)
          throw SchemaError("division by zero in '" + src_ + "'");
        auto a = lower(n.children[0]);
        for (auto& m : a) m.coeff /= denom[0].coeff;
        return a;
      }
      case Ast::Kind::Pow: {
        const Ast& exp = n.children[1];
        if (exp.kind != Ast::Kind::Number || std::floor(exp.number) != exp.number)
          throw NotGalerkinExpandable(
              "not Galerkin-expandable: non-integer exponent in '" + span_text(src_, n.span) + "'",
              span_text(src_, n.span));
        const int e = static_cast<int>(exp.number);
        if (e < 1)
          throw NotGalerkinExpandable(
              "not Galerkin-expandable: exponent must be >= 1 in '" + span_text(src_, n.span) +
                  "'",
              span_text(src_, n.span));
        if (e > 32) throw SchemaError("exponent too large in '" + span_text(src_, n.span) + "'");
        auto base = lower(n.children[0]);
        auto acc = base;
        for (int k = 1; k < e; ++k) acc = product(acc, base);
        return acc;
      }
      case Ast::Kind::Call:
        throw NotGalerkinExpandable(
            "not Galerkin-expandable: function of a state or parameter in '" +
                span_text(src_, n.span) + "'",
            span_text(src_, n.span));
    }
    return {};
  }

 private:
  static std::vector<Monomial> product(const std::vector<Monomial>& a,
                                       const std::vector<Monomial>& b) {
    std::vector<Monomial> out;
    out.reserve(a.size() * b.size());
    for (const auto& ma : a)
      for (const auto& mb : b) {
        Monomial m;
        m.coeff = ma.coeff * mb.coeff;
        m.powers = ma.powers;
        for (const auto& [k, v] : mb.powers) m.powers[k] += v;
        m.input_powers = ma.input_powers;
        for (const auto& [k, v] : mb.input_powers) m.input_powers[k] += v;
        m.time_power = ma.time_power + mb.time_power;
        out.push_back(std::move(m));
      }
    return out;
  }

  const std::string& src_;
  const SymbolTable& symbols_;
};

bool key_less(const Monomial& a, const Monomial& b) {
  if (a.powers != b.powers) return a.powers < b.powers;
  if (a.input_powers != b.input_powers) return a.input_powers < b.input_powers;
  return a.time_power < b.time_power;
}

PolyExpr canonicalize(std::vector<Monomial> monomials) {
  std::sort(monomials.begin(), monomials.end(), key_less);
  PolyExpr out;
  for (auto& m : monomials) {
    if (!out.monomials.empty() && out.monomials.back().same_key(m))
      out.monomials.back().coeff += m.coeff;
    else
      out.monomials.push_back(std::move(m));
  }
  std::erase_if(out.monomials, [](const Monomial& m) { return m.coeff == 0.0; });
  return out;
}

}  // namespace

bool operator==(const Monomial& a, const Monomial& b) {
  return a.coeff == b.coeff && a.same_key(b);
}

ParsedExpr parse_ast(const std::string& text) {
  ParsedExpr p;
  p.text = text;
  p.root = ExprParser(text).parse();
  return p;
}

PolyExpr lower_to_poly(const ParsedExpr& expr, const SymbolTable& symbols) {
  return canonicalize(Lowerer(expr.text, symbols).lower(expr.root));
}

PolyExpr parse_expression(const std::string& text, const SymbolTable& symbols) {
  return lower_to_poly(parse_ast(text), symbols);
}

double PolyExpr::eval(const std::function<double(const std::string&)>& value_of, double t) const {
  double acc = 0.0;
  for (const auto& m : monomials) {
    double term = m.coeff;
    for (const auto& [name, p] : m.powers) term *= std::pow(value_of(name), p);
    for (const auto& [name, p] : m.input_powers) term *= std::pow(value_of(name), p);
    for (int k = 0; k < m.time_power; ++k) term *= t;
    acc += term;
  }
  return acc;
}

std::string PolyExpr::print() const {
  if (monomials.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    const Monomial& m = monomials[i];
    std::string factors;
    auto add_factor = [&](const std::string& name, int p) {
      if (!factors.empty()) factors += "*";
      factors += name;
      if (p > 1) factors += "^" + std::to_string(p);
    };
    for (const auto& [name, p] : m.powers) add_factor(name, p);
    for (const auto& [name, p] : m.input_powers) add_factor(name, p);
    if (m.time_power > 0) add_factor("t", m.time_power);

    const double mag = std::abs(m.coeff);
    const bool negative = std::signbit(m.coeff);
    std::string body;
    if (factors.empty())
      body = format_coeff(mag);
    else if (mag == 1.0)
      body = factors;
    else
      body = format_coeff(mag) + "*" + factors;

    if (i == 0)
      out = negative ? "-" + body : body;
    else
      out += (negative ? " - " : " + ") + body;
  }
  return out;
}

double eval_ast(const Ast& node, const std::string& source, const EvalContext& ctx) {
  switch (node.kind) {
    case Ast::Kind::Number: return node.number;
    case Ast::Kind::Ident: return ctx.scalar(node.name);
    case Ast::Kind::Add:
      return eval_ast(node.children[0], source, ctx) + eval_ast(node.children[1], source, ctx);
    case Ast::Kind::Sub:
      return eval_ast(node.children[0], source, ctx) - eval_ast(node.children[1], source, ctx);
    case Ast::Kind::Mul:
      return eval_ast(node.children[0], source, ctx) * eval_ast(node.children[1], source, ctx);
    case Ast::Kind::Div:
      return eval_ast(node.children[0], source, ctx) / eval_ast(node.children[1], source, ctx);
    case Ast::Kind::Pow:
      return std::pow(eval_ast(node.children[0], source, ctx),
                      eval_ast(node.children[1], source, ctx));
    case Ast::Kind::Neg: return -eval_ast(node.children[0], source, ctx);
    case Ast::Kind::Call: {
      if (node.name == "piecewise") {
        if (node.children.size() != 3)
          throw SchemaError("piecewise expects (times, values, t) in '" + source + "'");
        const Ast& tv = node.children[0];
        const Ast& vv = node.children[1];
        if (tv.kind != Ast::Kind::Ident || vv.kind != Ast::Kind::Ident)
          throw SchemaError("piecewise arguments 1 and 2 must name vector fields in '" + source +
                            "'");
        const Eigen::VectorXd* times = ctx.vector(tv.name);
        const Eigen::VectorXd* values = ctx.vector(vv.name);
        if (!times) throw SchemaError("unknown vector '" + tv.name + "' in '" + source + "'");
        if (!values) throw SchemaError("unknown vector '" + vv.name + "' in '" + source + "'");
        return piecewise(*times, *values, eval_ast(node.children[2], source, ctx));
      }
      if (node.children.size() != 1)
        throw SchemaError("function '" + node.name + "' expects one argument in '" + source + "'");
      const double arg = eval_ast(node.children[0], source, ctx);
      if (node.name == "sin") return std::sin(arg);
      if (node.name == "cos") return std::cos(arg);
      if (node.name == "exp") return std::exp(arg);
      throw SchemaError("unknown function '" + node.name + "' in '" + source +
                        "' (allowed: piecewise, sin, cos, exp)");
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// System definition loading

namespace {

using nlohmann::json;

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

const std::set<std::string> kReservedNames = {"t", "piecewise", "sin", "cos", "exp"};

std::string require_name(const json& entry, const std::string& path) {
  if (!entry.contains("name"))
    throw SchemaError(path + ": missing required field 'name'");
  if (!entry["name"].is_string())
    throw SchemaError(path + ".name: must be a string");
  const std::string name = entry["name"].get<std::string>();
  if (!valid_identifier(name))
    throw SchemaError(path + ".name: '" + name + "' is not a valid identifier");
  if (kReservedNames.count(name))
    throw SchemaError(path + ".name: '" + name + "' is reserved");
  return name;
}

Distribution read_distribution(const json& entry, const std::string& path) {
  if (!entry.contains("pdf")) throw SchemaError(path + ": missing required field 'pdf'");
  if (!entry["pdf"].is_string()) throw SchemaError(path + ".pdf: must be a string");
  if (!entry.contains("data")) throw SchemaError(path + ": missing required field 'data'");
  std::vector<double> data;
  if (entry["data"].is_number()) {
    data.push_back(entry["data"].get<double>());
  } else if (entry["data"].is_array()) {
    for (const auto& v : entry["data"]) {
      if (!v.is_number()) throw SchemaError(path + ".data: entries must be numbers");
      data.push_back(v.get<double>());
    }
  } else {
    throw SchemaError(path + ".data: must be a number or an array of numbers");
  }
  try {
    return Distribution::from_pdf_data(entry["pdf"].get<std::string>(), data);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::string require_rhs(const json& entry, const std::string& path) {
  if (!entry.contains("rhs")) throw SchemaError(path + ": missing required field 'rhs'");
  if (!entry["rhs"].is_string()) throw SchemaError(path + ".rhs: must be a string");
  return entry["rhs"].get<std::string>();
}

// Identifier use check for input expressions: only the input's own extra
// fields and t may appear; calls are restricted to the whitelist.
void validate_input_ast(const Ast& node, const InputDef& input, const std::string& path) {
  switch (node.kind) {
    case Ast::Kind::Ident:
      if (node.name != "t" && !input.extra.count(node.name))
        throw SchemaError(path + ".rhs: unknown identifier '" + node.name +
                          "' (inputs may reference their own fields and t)");
      return;
    case Ast::Kind::Call: {
      if (node.name != "piecewise" && node.name != "sin" && node.name != "cos" &&
          node.name != "exp")
        throw SchemaError(path + ".rhs: unknown function '" + node.name + "'");
      if (node.name == "piecewise") {
        if (node.children.size() != 3)
          throw SchemaError(path + ".rhs: piecewise expects (times, values, t)");
        for (int a : {0, 1}) {
          const Ast& arg = node.children[a];
          if (arg.kind != Ast::Kind::Ident || !input.extra.count(arg.name))
            throw SchemaError(path + ".rhs: piecewise argument " + std::to_string(a + 1) +
                              " must name one of the input's vector fields");
        }
        validate_input_ast(node.children[2], input, path);
        return;
      }
      for (const Ast& c : node.children) validate_input_ast(c, input, path);
      return;
    }
    default:
      for (const Ast& c : node.children) validate_input_ast(c, input, path);
  }
}

}  // namespace

bool SystemDef::galerkin_ok() const {
  for (const auto& s : states)
    if (!s.poly) return false;
  return true;
}

std::string SystemDef::first_blocker() const {
  for (const auto& s : states)
    if (!s.poly) return s.galerkin_blocker;
  return {};
}

int SystemDef::state_index(const std::string& name) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == name) return static_cast<int>(i);
  return -1;
}

int SystemDef::parameter_index(const std::string& name) const {
  for (std::size_t i = 0; i < parameters.size(); ++i)
    if (parameters[i].name == name) return static_cast<int>(i);
  return -1;
}

int SystemDef::input_index(const std::string& name) const {
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (inputs[i].name == name) return static_cast<int>(i);
  return -1;
}

const Distribution* SystemDef::distribution_of(const std::string& name) const {
  if (int i = parameter_index(name); i >= 0) return &parameters[i].dist;
  if (int i = state_index(name); i >= 0) return &states[i].initial;
  return nullptr;
}

SymbolTable SystemDef::symbols() const {
  SymbolTable t;
  for (const auto& s : states) t.states.insert(s.name);
  for (const auto& p : parameters) t.parameters.insert(p.name);
  for (const auto& i : inputs) t.inputs.insert(i.name);
  return t;
}

SystemDef load_system(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("document root must be a JSON object");

  auto section = [&](const char* key) -> json {
    if (!doc.contains(key)) return json::array();
    if (!doc[key].is_array()) throw SchemaError(std::string(key) + ": must be an array");
    return doc[key];
  };

  SystemDef sys;
  std::set<std::string> seen;
  auto claim_name = [&](const std::string& name, const std::string& path) {
    if (!seen.insert(name).second)
      throw SchemaError(path + ".name: duplicate name '" + name + "'");
  };

  const json jstates = section("states");
  if (jstates.empty()) throw SchemaError("states: at least one state is required");
  for (std::size_t i = 0; i < jstates.size(); ++i) {
    const std::string path = "states[" + std::to_string(i) + "]";
    StateDef s;
    s.name = require_name(jstates[i], path);
    claim_name(s.name, path);
    s.initial = read_distribution(jstates[i], path);
    s.rhs.text = require_rhs(jstates[i], path);
    sys.states.push_back(std::move(s));
  }

  const json jparams = section("parameters");
  for (std::size_t i = 0; i < jparams.size(); ++i) {
    const std::string path = "parameters[" + std::to_string(i) + "]";
    ParamDef p;
    p.name = require_name(jparams[i], path);
    claim_name(p.name, path);
    p.dist = read_distribution(jparams[i], path);
    sys.parameters.push_back(std::move(p));
  }

  const json jinputs = section("inputs");
  for (std::size_t i = 0; i < jinputs.size(); ++i) {
    const std::string path = "inputs[" + std::to_string(i) + "]";
    InputDef u;
    u.name = require_name(jinputs[i], path);
    claim_name(u.name, path);
    u.rhs.text = require_rhs(jinputs[i], path);
    for (const auto& [key, val] : jinputs[i].items()) {
      if (key == "name" || key == "rhs") continue;
      Eigen::VectorXd vec;
      if (val.is_number()) {
        vec.resize(1);
        vec[0] = val.get<double>();
      } else if (val.is_array()) {
        vec.resize(val.size());
        for (std::size_t k = 0; k < val.size(); ++k) {
          if (!val[k].is_number())
            throw SchemaError(path + "." + key + ": entries must be numbers");
          vec[k] = val[k].get<double>();
        }
      } else {
        throw SchemaError(path + "." + key + ": input fields must be numbers or numeric arrays");
      }
      u.extra.emplace(key, std::move(vec));
    }
    sys.inputs.push_back(std::move(u));
  }

  const json joutputs = section("outputs");
  for (std::size_t i = 0; i < joutputs.size(); ++i) {
    const std::string path = "outputs[" + std::to_string(i) + "]";
    OutputDef o;
    o.name = require_name(joutputs[i], path);
    claim_name(o.name, path);
    o.rhs.text = require_rhs(joutputs[i], path);
    sys.outputs.push_back(std::move(o));
  }

  // All names are known; parse and classify every right-hand side.
  const SymbolTable symbols = sys.symbols();
  for (std::size_t i = 0; i < sys.states.size(); ++i) {
    const std::string path = "states[" + std::to_string(i) + "].rhs";
    StateDef& s = sys.states[i];
    try {
      s.rhs = parse_ast(s.rhs.text);
      s.poly = lower_to_poly(s.rhs, symbols);
    } catch (const NotGalerkinExpandable& e) {
      s.galerkin_blocker = e.subexpression;  // collocation-only state
    } catch (const SchemaError& e) {
      throw SchemaError(path + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < sys.inputs.size(); ++i) {
    const std::string path = "inputs[" + std::to_string(i) + "]";
    InputDef& u = sys.inputs[i];
    try {
      u.rhs = parse_ast(u.rhs.text);
    } catch (const SchemaError& e) {
      throw SchemaError(path + ".rhs: " + e.what());
    }
    validate_input_ast(u.rhs.root, u, path);
  }
  for (std::size_t i = 0; i < sys.outputs.size(); ++i) {
    const std::string path = "outputs[" + std::to_string(i) + "].rhs";
    OutputDef& o = sys.outputs[i];
    try {
      o.rhs = parse_ast(o.rhs.text);
      o.poly = lower_to_poly(o.rhs, symbols);
    } catch (const NotGalerkinExpandable& e) {
      o.galerkin_blocker = e.subexpression;
    } catch (const SchemaError& e) {
      throw SchemaError(path + ": " + e.what());
    }
  }
  return sys;
}

SystemDef load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open system definition file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_system(buf.str());
}

}  // namespace pcekit
