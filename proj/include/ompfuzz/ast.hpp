#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ompfuzz {

// Deep-copying owning pointer; gives recursive AST nodes value semantics.
template <typename T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

enum class Precision { Single, Double };
enum class ParamKind { IntScalar, FpScalar, FpArray };

enum class ArithOp { Add, Sub, Mul, Div };
enum class AssignOp { Set, AddSet, SubSet, MulSet, DivSet };
enum class CmpOp { Lt, Gt, Eq, Ne, Ge, Le };
enum class ReductionOp { Add, Mul };

std::string_view to_string(Precision p);
std::string_view to_string(ParamKind k);
std::string_view to_string(ArithOp op);
std::string_view to_string(AssignOp op);
std::string_view to_string(CmpOp op);
std::string_view to_string(ReductionOp op);
std::string_view c_type(Precision p);

inline constexpr std::string_view kCompName = "comp";
inline constexpr std::string_view kThreadIdName = "thread_id";

struct ParamDecl {
  std::string name;
  ParamKind kind = ParamKind::FpScalar;
  Precision precision = Precision::Double;  // ignored for IntScalar

  bool operator==(const ParamDecl&) const = default;
};

// ---- subscripts -----------------------------------------------------------

/// Bare loop index; safe because loop bounds never exceed the array length.
struct LoopIndexSub {
  std::string index;
  bool operator==(const LoopIndexSub&) const = default;
};
/// Integer parameter reduced modulo the array length.
struct IntParamSub {
  std::string param;
  bool operator==(const IntParamSub&) const = default;
};
/// The thread number of the calling thread; write targets only.
struct ThreadIdSub {
  bool operator==(const ThreadIdSub&) const = default;
};
using Subscript = std::variant<LoopIndexSub, IntParamSub, ThreadIdSub>;

// ---- expressions ----------------------------------------------------------

struct Expression;

struct VarRef {
  std::string name;  // kCompName for the accumulator
  bool operator==(const VarRef&) const = default;
};
struct ArrayAccess {
  std::string array;
  Subscript index;
  bool operator==(const ArrayAccess&) const = default;
};
/// Decimal literal sign * d.dddd * 10^exponent, kept as integers so the
/// emitted spelling never depends on printf rounding.
struct FpConstant {
  bool negative = false;
  int mantissa = 10000;  // five significant digits, 10000..99999
  int exponent = 0;
  bool operator==(const FpConstant&) const = default;
  [[nodiscard]] std::string text() const;
  [[nodiscard]] double value() const;
};

struct Term {
  std::variant<VarRef, ArrayAccess, FpConstant> value;
  bool operator==(const Term&) const = default;
};
struct Paren {
  Box<Expression> inner;
  bool operator==(const Paren&) const = default;
};
struct BinOp {
  ArithOp op;
  Box<Expression> lhs;
  Box<Expression> rhs;
  bool operator==(const BinOp&) const = default;
};
struct MathCall {
  std::string function;
  Box<Expression> arg;
  bool operator==(const MathCall&) const = default;
};

struct Expression {
  std::variant<Term, Paren, BinOp, MathCall> node;
  bool operator==(const Expression&) const = default;
};

struct BoolExpression {
  std::string lhs;
  CmpOp op = CmpOp::Lt;
  Expression rhs;
  bool operator==(const BoolExpression&) const = default;
};

/// Number of leaf terms.
int term_count(const Expression& e);

/// Calls fn(name) for every scalar variable and array read by e.
template <typename Fn>
void for_each_read(const Expression& e, Fn&& fn) {
  if (const auto* t = std::get_if<Term>(&e.node)) {
    if (const auto* v = std::get_if<VarRef>(&t->value)) {
      fn(v->name);
    } else if (const auto* a = std::get_if<ArrayAccess>(&t->value)) {
      fn(a->array);
    }
  } else if (const auto* p = std::get_if<Paren>(&e.node)) {
    for_each_read(*p->inner, fn);
  } else if (const auto* b = std::get_if<BinOp>(&e.node)) {
    for_each_read(*b->lhs, fn);
    for_each_read(*b->rhs, fn);
  } else if (const auto* m = std::get_if<MathCall>(&e.node)) {
    for_each_read(*m->arg, fn);
  }
}

// ---- statements -----------------------------------------------------------

struct Statement;

struct Block {
  std::vector<Statement> statements;
  bool operator==(const Block&) const;
};

struct CompTarget {
  bool operator==(const CompTarget&) const = default;
};
struct VarTarget {
  std::string name;
  bool operator==(const VarTarget&) const = default;
};
struct ArrayTarget {
  std::string array;
  Subscript index;
  bool operator==(const ArrayTarget&) const = default;
};
using AssignTarget = std::variant<CompTarget, VarTarget, ArrayTarget>;

struct Assignment {
  AssignTarget target;
  AssignOp op = AssignOp::Set;
  Expression expr;
  bool operator==(const Assignment&) const = default;
};

struct TempDecl {
  Precision precision = Precision::Double;
  std::string name;
  Expression init;
  bool operator==(const TempDecl&) const = default;
};

struct IfBlock {
  BoolExpression cond;
  Block body;
  bool operator==(const IfBlock&) const = default;
};

struct ForLoop {
  std::string index;
  int bound = 1;            // trip count when bound_param is empty
  std::string bound_param;  // integer parameter used as the trip count
  bool omp_for = false;
  Block body;
  bool operator==(const ForLoop&) const = default;
};

struct OmpParallel {
  std::vector<std::string> private_vars;
  std::vector<std::string> firstprivate_vars;
  std::optional<ReductionOp> reduction;
  int num_threads = 1;
  Block body;
  bool operator==(const OmpParallel&) const = default;
};

struct Critical {
  Block body;
  bool operator==(const Critical&) const = default;
};

struct Statement {
  std::variant<Assignment, TempDecl, IfBlock, ForLoop, OmpParallel, Critical> node;
  bool operator==(const Statement&) const = default;
};

inline bool Block::operator==(const Block& other) const { return statements == other.statements; }

struct Program {
  std::vector<ParamDecl> params;
  Block body;
  std::uint64_t seed = 0;
  bool operator==(const Program&) const = default;
};

// Small helpers shared by the generator passes.
template <typename T>
const T* as(const Statement& s) {
  return std::get_if<T>(&s.node);
}
template <typename T>
T* as(Statement& s) {
  return std::get_if<T>(&s.node);
}

/// True for statements that open a nested block level (if, for, parallel).
bool is_nesting_block(const Statement& s);

Expression make_term(Term t);
Expression make_var(std::string name);
Expression make_const(FpConstant c);

}  // namespace ompfuzz
