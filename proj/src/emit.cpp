#include "ompfuzz/emit.hpp"

#include <sstream>

#include "ompfuzz/validate.hpp"

namespace ompfuzz {

namespace {

int precedence(const Expression& e) {
  if (const auto* b = std::get_if<BinOp>(&e.node)) return b->op == ArithOp::Add || b->op == ArithOp::Sub ? 1 : 2;
  return 3;
}

class Emitter {
 public:
  explicit Emitter(int array_size) : array_size_(array_size) {}

  std::string subscript(const Subscript& s) const {
    if (const auto* l = std::get_if<LoopIndexSub>(&s)) return l->index;
    if (const auto* p = std::get_if<IntParamSub>(&s))
      return "static_cast<unsigned>(" + p->param + ") % " + std::to_string(array_size_) + "u";
    return std::string(kThreadIdName);
  }

  std::string expr(const Expression& e) const {
    if (const auto* t = std::get_if<Term>(&e.node)) {
      if (const auto* v = std::get_if<VarRef>(&t->value)) return v->name;
      if (const auto* a = std::get_if<ArrayAccess>(&t->value)) return a->array + "[" + subscript(a->index) + "]";
      return std::get<FpConstant>(t->value).text();
    }
    if (const auto* p = std::get_if<Paren>(&e.node)) return "(" + expr(*p->inner) + ")";
    if (const auto* m = std::get_if<MathCall>(&e.node)) return "std::" + m->function + "(" + expr(*m->arg) + ")";
    const auto& b = std::get<BinOp>(e.node);
    const int mine = precedence(e);
    std::string lhs = expr(*b.lhs);
    std::string rhs = expr(*b.rhs);
    if (precedence(*b.lhs) < mine) lhs = "(" + lhs + ")";
    if (precedence(*b.rhs) <= mine && std::holds_alternative<BinOp>(b.rhs->node)) rhs = "(" + rhs + ")";
    return lhs + " " + std::string(to_string(b.op)) + " " + rhs;
  }

  void block(const Block& b, int indent) {
    for (const auto& s : b.statements) statement(s, indent);
  }

  std::string text() const { return out_.str(); }

 private:
  int array_size_;
  std::ostringstream out_;

  std::ostream& line(int indent) { return out_ << std::string(static_cast<std::size_t>(indent) * 2, ' '); }

  static bool uses_thread_id(const Block& b) {
    for (const auto& s : b.statements) {
      if (const auto* a = as<Assignment>(s)) {
        if (const auto* t = std::get_if<ArrayTarget>(&a->target); t && std::holds_alternative<ThreadIdSub>(t->index))
          return true;
      } else if (const auto* i = as<IfBlock>(s)) {
        if (uses_thread_id(i->body)) return true;
      } else if (const auto* f = as<ForLoop>(s)) {
        if (uses_thread_id(f->body)) return true;
      } else if (const auto* c = as<Critical>(s)) {
        if (uses_thread_id(c->body)) return true;
      }
    }
    return false;
  }

  static std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return out;
  }

  void statement(const Statement& s, int indent) {
    if (const auto* a = as<Assignment>(s)) {
      std::string target;
      if (std::holds_alternative<CompTarget>(a->target)) {
        target = kCompName;
      } else if (const auto* v = std::get_if<VarTarget>(&a->target)) {
        target = v->name;
      } else {
        const auto& t = std::get<ArrayTarget>(a->target);
        target = t.array + "[" + subscript(t.index) + "]";
      }
      line(indent) << target << " " << to_string(a->op) << " " << expr(a->expr) << ";\n";
    } else if (const auto* d = as<TempDecl>(s)) {
      line(indent) << c_type(d->precision) << " " << d->name << " = " << expr(d->init) << ";\n";
    } else if (const auto* i = as<IfBlock>(s)) {
      line(indent) << "if (" << i->cond.lhs << " " << to_string(i->cond.op) << " " << expr(i->cond.rhs) << ") {\n";
      block(i->body, indent + 1);
      line(indent) << "}\n";
    } else if (const auto* f = as<ForLoop>(s)) {
      if (f->omp_for) line(indent) << "#pragma omp for\n";
      const std::string bound = f->bound_param.empty() ? std::to_string(f->bound) : f->bound_param;
      line(indent) << "for (int " << f->index << " = 0; " << f->index << " < " << bound << "; ++" << f->index
                   << ") {\n";
      block(f->body, indent + 1);
      line(indent) << "}\n";
    } else if (const auto* r = as<OmpParallel>(s)) {
      std::string pragma = "#pragma omp parallel default(shared)";
      if (!r->private_vars.empty()) pragma += " private(" + join(r->private_vars) + ")";
      if (!r->firstprivate_vars.empty()) pragma += " firstprivate(" + join(r->firstprivate_vars) + ")";
      if (r->reduction) pragma += " reduction(" + std::string(to_string(*r->reduction)) + ": comp)";
      pragma += " num_threads(" + std::to_string(r->num_threads) + ")";
      line(indent) << pragma << "\n";
      line(indent) << "{\n";
      if (uses_thread_id(r->body)) line(indent + 1) << "int " << kThreadIdName << " = omp_get_thread_num();\n";
      block(r->body, indent + 1);
      line(indent) << "}\n";
    } else if (const auto* c = as<Critical>(s)) {
      line(indent) << "#pragma omp critical\n";
      line(indent) << "{\n";
      block(c->body, indent + 1);
      line(indent) << "}\n";
    }
  }
};

void set_threads(Block& b, int n) {
  for (auto& s : b.statements) {
    if (auto* r = as<OmpParallel>(s)) {
      r->num_threads = n;
      set_threads(r->body, n);
    } else if (auto* i = as<IfBlock>(s)) {
      set_threads(i->body, n);
    } else if (auto* f = as<ForLoop>(s)) {
      set_threads(f->body, n);
    } else if (auto* c = as<Critical>(s)) {
      set_threads(c->body, n);
    }
  }
}

std::string param_type(const ParamDecl& p) {
  if (p.kind == ParamKind::IntScalar) return "int";
  std::string t(c_type(p.precision));
  return p.kind == ParamKind::FpArray ? t + "*" : t;
}

}  // namespace

std::string emit_expression(const Expression& e) { return Emitter(1).expr(e); }

std::string emit_source(const Program& program, const GeneratorParams& params) {
  if (const auto violations = validate_program(program, params); !violations.empty())
    throw EmitError("program does not validate:\n" + format_violations(violations));

  Block body = program.body;
  set_threads(body, params.num_threads);
  Emitter kernel(params.array_size);
  kernel.block(body, 1);

  const int n = params.array_size;
  std::ostringstream src;
  src << "#include <chrono>\n#include <cmath>\n#include <cstdio>\n#include <cstdlib>\n#include <omp.h>\n\n";

  src << "void compute(double* comp_out";
  for (const auto& p : program.params) src << ", " << param_type(p) << " " << p.name;
  src << ") {\n  double comp = 0.0;\n" << kernel.text() << "  *comp_out = comp;\n}\n\n";

  src << "static int parse_int(const char* text) {\n"
      << "  char* end = nullptr;\n"
      << "  long v = std::strtol(text, &end, 10);\n"
      << "  if (end == text || *end != '\\0' || v < 1 || v > " << n << ") {\n"
      << "    std::fprintf(stderr, \"integer argument out of range: %s\\n\", text);\n"
      << "    std::exit(2);\n"
      << "  }\n"
      << "  return static_cast<int>(v);\n"
      << "}\n\n";

  src << "int main(int argc, char** argv) {\n";
  src << "  if (argc != " << program.params.size() + 1 << ") {\n"
      << "    std::fprintf(stderr, \"expected " << program.params.size() << " arguments\\n\");\n"
      << "    return 2;\n"
      << "  }\n";
  for (std::size_t k = 0; k < program.params.size(); ++k) {
    const auto& p = program.params[k];
    const std::string arg = "argv[" + std::to_string(k + 1) + "]";
    const std::string conv = p.precision == Precision::Single ? "std::strtof(" + arg + ", nullptr)"
                                                              : "std::strtod(" + arg + ", nullptr)";
    switch (p.kind) {
      case ParamKind::IntScalar:
        src << "  int " << p.name << " = parse_int(" << arg << ");\n";
        break;
      case ParamKind::FpScalar:
        src << "  " << c_type(p.precision) << " " << p.name << " = " << conv << ";\n";
        break;
      case ParamKind::FpArray: {
        const std::string t(c_type(p.precision));
        src << "  " << t << "* " << p.name << " = new " << t << "[" << n << "];\n"
            << "  {\n"
            << "    " << t << " seed = " << conv << ";\n"
            << "    for (int k = 0; k < " << n << "; ++k) " << p.name << "[k] = seed;\n"
            << "  }\n";
        break;
      }
    }
  }
  src << "  double comp = 0.0;\n"
      << "  auto start = std::chrono::steady_clock::now();\n"
      << "  compute(&comp";
  for (const auto& p : program.params) src << ", " << p.name;
  src << ");\n"
      << "  auto stop = std::chrono::steady_clock::now();\n"
      << "  long long elapsed = static_cast<long long>(\n"
      << "      std::chrono::duration_cast<std::chrono::microseconds>(stop - start).count());\n"
      << "  std::printf(\"comp=%.17g\\n\", comp);\n"
      << "  std::printf(\"time_us=%lld\\n\", elapsed);\n";
  for (const auto& p : program.params)
    if (p.kind == ParamKind::FpArray) src << "  delete[] " << p.name << ";\n";
  src << "  return 0;\n}\n";
  return src.str();
}

}  // namespace ompfuzz
