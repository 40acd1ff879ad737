#include <doctest.h>

#include "ompfuzz/ast.hpp"
#include "ompfuzz/emit.hpp"

using namespace ompfuzz;

TEST_CASE("constant spelling") {
  CHECK(FpConstant{false, 12345, 4}.text() == "1.2345E+04");
  CHECK(FpConstant{true, 10000, -20}.text() == "-1.0000E-20");
  CHECK(FpConstant{false, 99999, 0}.text() == "9.9999E+00");
  CHECK(FpConstant{false, 12345, 4}.value() == 12345.0);
}

TEST_CASE("term count and reads") {
  Expression e{BinOp{ArithOp::Add, make_var("a"),
                     Expression{Paren{Expression{BinOp{ArithOp::Mul, make_const({}),
                                                       make_term(Term{ArrayAccess{"arr", LoopIndexSub{"i_1"}}})}}}}}};
  CHECK(term_count(e) == 3);
  std::vector<std::string> reads;
  for_each_read(e, [&](const std::string& n) { reads.push_back(n); });
  CHECK(reads == std::vector<std::string>{"a", "arr"});
}

TEST_CASE("deep copy keeps value semantics") {
  Expression e{MathCall{"sin", make_var("x")}};
  Expression copy = e;
  std::get<VarRef>(std::get<Term>(std::get<MathCall>(copy.node).arg->node).value).name = "y";
  CHECK(emit_expression(e) == "std::sin(x)");
  CHECK(emit_expression(copy) == "std::sin(y)");
  CHECK_FALSE(e == copy);
}

TEST_CASE("nesting blocks") {
  CHECK(is_nesting_block(Statement{IfBlock{}}));
  CHECK(is_nesting_block(Statement{ForLoop{}}));
  CHECK(is_nesting_block(Statement{OmpParallel{}}));
  CHECK_FALSE(is_nesting_block(Statement{Critical{}}));
  CHECK_FALSE(is_nesting_block(Statement{Assignment{}}));
}
