#include "ompfuzz/ast.hpp"

#include <cstdlib>
#include <string>

namespace ompfuzz {

std::string_view to_string(Precision p) { return p == Precision::Single ? "single" : "double"; }

std::string_view c_type(Precision p) { return p == Precision::Single ? "float" : "double"; }

std::string_view to_string(ParamKind k) {
  switch (k) {
    case ParamKind::IntScalar: return "int-scalar";
    case ParamKind::FpScalar: return "fp-scalar";
    case ParamKind::FpArray: return "fp-array";
  }
  return "?";
}

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "?";
}

std::string_view to_string(AssignOp op) {
  switch (op) {
    case AssignOp::Set: return "=";
    case AssignOp::AddSet: return "+=";
    case AssignOp::SubSet: return "-=";
    case AssignOp::MulSet: return "*=";
    case AssignOp::DivSet: return "/=";
  }
  return "?";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Gt: return ">";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Le: return "<=";
  }
  return "?";
}

std::string_view to_string(ReductionOp op) { return op == ReductionOp::Add ? "+" : "*"; }

std::string FpConstant::text() const {
  const std::string digits = std::to_string(mantissa);
  std::string out;
  if (negative) out += '-';
  out += digits.substr(0, 1);
  out += '.';
  out += digits.substr(1);
  out += 'E';
  out += exponent < 0 ? '-' : '+';
  const int mag = exponent < 0 ? -exponent : exponent;
  if (mag < 10) out += '0';
  out += std::to_string(mag);
  return out;
}

double FpConstant::value() const { return std::strtod(text().c_str(), nullptr); }

int term_count(const Expression& e) {
  struct Visitor {
    int operator()(const Term&) const { return 1; }
    int operator()(const Paren& p) const { return term_count(*p.inner); }
    int operator()(const BinOp& b) const { return term_count(*b.lhs) + term_count(*b.rhs); }
    int operator()(const MathCall& m) const { return term_count(*m.arg); }
  };
  return std::visit(Visitor{}, e.node);
}

bool is_nesting_block(const Statement& s) {
  return std::holds_alternative<IfBlock>(s.node) || std::holds_alternative<ForLoop>(s.node) ||
         std::holds_alternative<OmpParallel>(s.node);
}

Expression make_term(Term t) { return Expression{std::move(t)}; }
Expression make_var(std::string name) { return make_term(Term{VarRef{std::move(name)}}); }
Expression make_const(FpConstant c) { return make_term(Term{c}); }

}  // namespace ompfuzz
