#include <doctest.h>

#include "ompfuzz/emit.hpp"
#include "ompfuzz/generator.hpp"
#include "ompfuzz/process.hpp"
#include "ompfuzz/toolchain.hpp"
#include "support.hpp"

using namespace ompfuzz;

namespace {

Expression bin(ArithOp op, Expression a, Expression b) { return Expression{BinOp{op, std::move(a), std::move(b)}}; }

}  // namespace

TEST_CASE("expression text follows the tree") {
  const auto a = make_var("a");
  const auto b = make_var("b");
  const auto c = make_var("c");
  CHECK(emit_expression(bin(ArithOp::Add, a, bin(ArithOp::Mul, b, c))) == "a + b * c");
  CHECK(emit_expression(bin(ArithOp::Mul, bin(ArithOp::Add, a, b), c)) == "(a + b) * c");
  CHECK(emit_expression(bin(ArithOp::Sub, a, bin(ArithOp::Sub, b, c))) == "a - (b - c)");
  CHECK(emit_expression(bin(ArithOp::Sub, bin(ArithOp::Sub, a, b), c)) == "a - b - c");
  CHECK(emit_expression(bin(ArithOp::Div, a, bin(ArithOp::Mul, b, c))) == "a / (b * c)");
  CHECK(emit_expression(Expression{Paren{bin(ArithOp::Add, a, b)}}) == "(a + b)");
  CHECK(emit_expression(bin(ArithOp::Add, a, make_const({true, 12000, -3}))) == "a + -1.2000E-03");
  CHECK(emit_expression(make_term(Term{ArrayAccess{"v", IntParamSub{"n"}}})) == "v[static_cast<unsigned>(n) % 1u]");
}

TEST_CASE("emitted program shape") {
  auto p = evaluation_params(7, 3);
  bool saw_region = false;
  for (std::uint64_t s = 0; s < 60 && !saw_region; ++s) {
    p.rng_seed = s;
    const Program prog = generate_program(p);
    const std::string src = emit_source(prog, p);
    CHECK(src.find("void compute(double* comp_out") != std::string::npos);
    CHECK(src.find("std::chrono::microseconds") != std::string::npos);
    CHECK(src.find("comp=%.17g") != std::string::npos);
    CHECK(src.find("time_us=%lld") != std::string::npos);
    CHECK(src.find("private()") == std::string::npos);
    CHECK(src.find("firstprivate()") == std::string::npos);
    if (support::features(prog).parallel > 0) {
      saw_region = true;
      CHECK(src.find("num_threads(7)") != std::string::npos);
      CHECK(src.find("#pragma omp for") != std::string::npos);
    }
  }
  CHECK(saw_region);
}

TEST_CASE("invalid programs are refused") {
  Program p;
  p.params = {{"var_1", ParamKind::FpScalar, Precision::Double}};
  p.body.statements.push_back(Statement{Assignment{CompTarget{}, AssignOp::Set, make_var("undeclared")}});
  CHECK_THROWS_AS(emit_source(p, evaluation_params(2, 0)), EmitError);
}

TEST_CASE("hand-built program compiles and prints the contract") {
  const auto tcs = support::openmp_toolchains("-O2");
  if (tcs.empty()) {
    MESSAGE("no OpenMP compiler available");
    return;
  }
  GeneratorParams gp;
  gp.num_threads = 3;
  gp.array_size = 16;
  Program p;
  p.params = {{"var_1", ParamKind::IntScalar, Precision::Double}, {"var_2", ParamKind::FpArray, Precision::Double}};
  OmpParallel r;
  r.num_threads = 3;
  r.reduction = ReductionOp::Add;
  ForLoop l;
  l.index = "i_1";
  l.bound_param = "var_1";
  l.omp_for = true;
  l.body.statements.push_back(
      Statement{Assignment{CompTarget{}, AssignOp::AddSet, make_term(Term{ArrayAccess{"var_2", LoopIndexSub{"i_1"}}})}});
  r.body.statements.push_back(Statement{std::move(l)});
  p.body.statements.push_back(Statement{std::move(r)});

  support::TempDir dir;
  const auto src = dir.path() / "t.cpp";
  support::write_file(src, emit_source(p, gp));
  const auto res = compile(src, tcs[0], dir.path() / "t");
  INFO(res.diagnostics);
  REQUIRE(res.ok);
  ProcessOptions opts;
  opts.timeout = std::chrono::seconds(20);
  const auto run = run_process({(dir.path() / "t").string(), "10", "0x1.8p+0"}, opts);
  CHECK(run.exit_code == 0);
  CHECK(run.out.rfind("comp=15\ntime_us=", 0) == 0);
  const auto bad = run_process({(dir.path() / "t").string(), "17", "1"}, opts);
  CHECK(bad.exit_code == 2);
  const auto arity = run_process({(dir.path() / "t").string(), "3"}, opts);
  CHECK(arity.exit_code == 2);
}
