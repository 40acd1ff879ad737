#include "ompfuzz/validate.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "ompfuzz/generator.hpp"

namespace ompfuzz {

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::UndeclaredIdentifier: return "undeclared-identifier";
    case Rule::DuplicateDeclaration: return "duplicate-declaration";
    case Rule::TypeMismatch: return "type-mismatch";
    case Rule::NestingDepth: return "nesting-depth";
    case Rule::BlockLines: return "block-lines";
    case Rule::SiblingBlocks: return "sibling-blocks";
    case Rule::EmptyBlock: return "empty-block";
    case Rule::ExpressionSize: return "expression-size";
    case Rule::MathCall: return "math-call";
    case Rule::LoopBound: return "loop-bound";
    case Rule::Subscript: return "subscript";
    case Rule::OmpForPlacement: return "omp-for-placement";
    case Rule::NestedParallel: return "nested-parallel";
    case Rule::ParallelShape: return "parallel-shape";
    case Rule::CriticalPlacement: return "critical-placement";
    case Rule::Clause: return "clause";
    case Rule::PrivateUninitialized: return "private-uninitialized";
    case Rule::ReductionUpdate: return "reduction-update";
    case Rule::UnprotectedWrite: return "unprotected-write";
    case Rule::UnprotectedRead: return "unprotected-read";
    case Rule::IterationDependence: return "iteration-dependence";
    case Rule::ArrayWrite: return "array-write";
    case Rule::ScratchArrayRead: return "scratch-array-read";
    case Rule::Params: return "params";
  }
  return "?";
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream out;
  for (const auto& v : violations) out << to_string(v.rule) << " at " << v.location << ": " << v.message << '\n';
  return out.str();
}

namespace {

enum class SymKind { FpScalar, IntScalar, FpArray, LoopIndex };
// Declaration site relative to the enclosing parallel region.
enum class Zone { Outer, Prologue, LoopBody, Critical };

struct Sym {
  SymKind kind;
  Zone zone = Zone::Outer;
};

struct RegionInfo {
  const OmpParallel* node = nullptr;
  DataSharing sharing;
  std::set<std::string, std::less<>> written_shared;
  std::set<std::string, std::less<>> assigned_privates;
};

struct Ctx {
  int depth = 0;
  int region_loops = 0;  // for loops enclosing this point inside the region
  bool in_critical = false;
  std::string loc = "body";
};

class Validator {
 public:
  Validator(const Program& program, const GeneratorParams& params) : program_(program), params_(params) {}

  std::vector<Violation> run() {
    scopes_.emplace_back();
    std::set<std::string> names;
    for (const auto& p : program_.params) {
      if (!names.insert(p.name).second || p.name == kCompName || p.name == kThreadIdName)
        add(Rule::DuplicateDeclaration, "params", "parameter '" + p.name + "' declared twice or reserved");
      SymKind k = p.kind == ParamKind::IntScalar ? SymKind::IntScalar
                  : p.kind == ParamKind::FpArray ? SymKind::FpArray
                                                 : SymKind::FpScalar;
      scopes_.back()[p.name] = Sym{k, Zone::Outer};
      declared_.insert(p.name);
    }
    if (program_.params.empty()) add(Rule::Params, "params", "program declares no parameters");
    block(program_.body, Ctx{});
    for (const auto& a : scratch_arrays_) {
      if (read_arrays_.contains(a))
        add(Rule::ScratchArrayRead, "program", "array '" + a + "' is written through thread_id and also read");
    }
    return std::move(out_);
  }

 private:
  const Program& program_;
  const GeneratorParams& params_;
  std::vector<Violation> out_;
  std::vector<std::map<std::string, Sym, std::less<>>> scopes_;
  std::set<std::string, std::less<>> declared_;
  std::set<std::string, std::less<>> scratch_arrays_;
  std::set<std::string, std::less<>> read_arrays_;
  std::optional<RegionInfo> region_;

  void add(Rule r, std::string loc, std::string msg) { out_.push_back({r, std::move(loc), std::move(msg)}); }

  const Sym* lookup(std::string_view name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  Zone current_zone(const Ctx& ctx) const {
    if (!region_) return Zone::Outer;
    if (ctx.in_critical) return Zone::Critical;
    return ctx.region_loops > 0 ? Zone::LoopBody : Zone::Prologue;
  }

  void declare(const std::string& name, SymKind kind, const Ctx& ctx) {
    if (!declared_.insert(name).second || name == kCompName || name == kThreadIdName) {
      // Loop indices may be reused by sibling loops; only shadowing is an error.
      if (!(kind == SymKind::LoopIndex && lookup(name) == nullptr)) {
        add(Rule::DuplicateDeclaration, ctx.loc, "'" + name + "' redeclared");
      }
    }
    scopes_.back()[name] = Sym{kind, current_zone(ctx)};
  }

  SharingAttr attr(const std::string& name) const {
    auto it = region_->sharing.find(name);
    return it == region_->sharing.end() ? SharingAttr::Shared : it->second;
  }

  // ---- reads ------------------------------------------------------------

  void scalar_read(const std::string& name, const Ctx& ctx) {
    if (name == kCompName) {
      if (!region_) return;
      if (region_->node->reduction) {
        add(Rule::ReductionUpdate, ctx.loc, "comp read inside a reduction region");
      } else if (!ctx.in_critical && region_->written_shared.contains(name)) {
        add(Rule::UnprotectedRead, ctx.loc, "comp read outside a critical section while the region updates it");
      }
      return;
    }
    if (name == kThreadIdName) {
      add(Rule::IterationDependence, ctx.loc, "thread_id used as a value");
      return;
    }
    const Sym* s = lookup(name);
    if (s == nullptr) {
      add(Rule::UndeclaredIdentifier, ctx.loc, "'" + name + "' is not in scope");
      return;
    }
    switch (s->kind) {
      case SymKind::FpArray:
        add(Rule::TypeMismatch, ctx.loc, "array '" + name + "' used as a scalar");
        return;
      case SymKind::LoopIndex:
        add(Rule::IterationDependence, ctx.loc, "loop index '" + name + "' used as a value");
        return;
      default: break;
    }
    if (!region_ || s->zone != Zone::Outer) return;
    const SharingAttr a = attr(name);
    if (a == SharingAttr::Private && !region_->assigned_privates.contains(name)) {
      add(Rule::PrivateUninitialized, ctx.loc, "private '" + name + "' read before assignment");
    } else if (a == SharingAttr::Shared && !ctx.in_critical && region_->written_shared.contains(name)) {
      add(Rule::UnprotectedRead, ctx.loc, "shared '" + name + "' read outside a critical section");
    }
  }

  void subscript(const Subscript& sub, bool is_write, const Ctx& ctx) {
    if (const auto* l = std::get_if<LoopIndexSub>(&sub)) {
      const Sym* s = lookup(l->index);
      if (s == nullptr || s->kind != SymKind::LoopIndex)
        add(Rule::Subscript, ctx.loc, "subscript '" + l->index + "' is not an enclosing loop index");
    } else if (const auto* p = std::get_if<IntParamSub>(&sub)) {
      const Sym* s = lookup(p->param);
      if (s == nullptr || s->kind != SymKind::IntScalar)
        add(Rule::Subscript, ctx.loc, "subscript '" + p->param + "' is not an integer parameter");
    } else {
      if (!region_) add(Rule::Subscript, ctx.loc, "thread_id subscript outside a parallel region");
      if (!is_write) add(Rule::Subscript, ctx.loc, "thread_id subscript on a read");
    }
  }

  void expr_reads(const Expression& e, const Ctx& ctx) {
    if (const auto* t = std::get_if<Term>(&e.node)) {
      if (const auto* v = std::get_if<VarRef>(&t->value)) {
        scalar_read(v->name, ctx);
      } else if (const auto* a = std::get_if<ArrayAccess>(&t->value)) {
        const Sym* s = lookup(a->array);
        if (s == nullptr) {
          add(Rule::UndeclaredIdentifier, ctx.loc, "'" + a->array + "' is not in scope");
        } else if (s->kind != SymKind::FpArray) {
          add(Rule::TypeMismatch, ctx.loc, "'" + a->array + "' subscripted but not an array");
        }
        read_arrays_.insert(a->array);
        subscript(a->index, false, ctx);
      }
    } else if (const auto* p = std::get_if<Paren>(&e.node)) {
      expr_reads(*p->inner, ctx);
    } else if (const auto* b = std::get_if<BinOp>(&e.node)) {
      expr_reads(*b->lhs, ctx);
      expr_reads(*b->rhs, ctx);
    } else if (const auto* m = std::get_if<MathCall>(&e.node)) {
      if (!params_.math_func_allowed) {
        add(Rule::MathCall, ctx.loc, "math call while math functions are disabled");
      } else if (std::find(params_.math_functions.begin(), params_.math_functions.end(), m->function) ==
                 params_.math_functions.end()) {
        add(Rule::MathCall, ctx.loc, "function '" + m->function + "' is not in the configured list");
      }
      expr_reads(*m->arg, ctx);
    }
  }

  void expression(const Expression& e, const Ctx& ctx) {
    const int terms = term_count(e);
    if (terms > params_.max_expression_size)
      add(Rule::ExpressionSize, ctx.loc,
          std::to_string(terms) + " terms exceed max_expression_size " +
              std::to_string(params_.max_expression_size));
    expr_reads(e, ctx);
  }

  // ---- writes -----------------------------------------------------------

  void comp_write(const Assignment& a, const Ctx& ctx) {
    if (!region_) return;
    if (const auto r = region_->node->reduction) {
      const bool ok = *r == ReductionOp::Add ? (a.op == AssignOp::AddSet || a.op == AssignOp::SubSet)
                                             : (a.op == AssignOp::MulSet || a.op == AssignOp::DivSet);
      if (!ok) add(Rule::ReductionUpdate, ctx.loc, "comp update does not match the reduction operator");
      if (ctx.region_loops == 0)
        add(Rule::ReductionUpdate, ctx.loc, "comp updated outside the worksharing loop (once per thread)");
    } else if (!ctx.in_critical) {
      add(Rule::UnprotectedWrite, ctx.loc, "comp written without a reduction clause or critical section");
    }
  }

  void var_write(const Assignment& a, const std::string& name, const Ctx& ctx) {
    const Sym* s = lookup(name);
    if (s == nullptr) {
      add(Rule::UndeclaredIdentifier, ctx.loc, "'" + name + "' is not in scope");
      return;
    }
    if (s->kind != SymKind::FpScalar) {
      add(Rule::TypeMismatch, ctx.loc, "'" + name + "' is not an assignable floating-point scalar");
      return;
    }
    if (!region_) return;
    const Zone here = current_zone(ctx);
    if (s->zone == Zone::Outer) {
      const SharingAttr at = attr(name);
      if (at == SharingAttr::Shared) {
        if (!ctx.in_critical) {
          add(Rule::UnprotectedWrite, ctx.loc, "shared '" + name + "' written outside a critical section");
        } else {
          add(Rule::IterationDependence, ctx.loc, "shared '" + name + "' carries state between iterations");
        }
        return;
      }
      if (here != Zone::Prologue) {
        add(Rule::IterationDependence, ctx.loc,
            "'" + name + "' is per-thread state written inside the worksharing loop");
        return;
      }
      if (at == SharingAttr::Private && !region_->assigned_privates.contains(name)) {
        if (a.op != AssignOp::Set)
          add(Rule::PrivateUninitialized, ctx.loc, "private '" + name + "' updated before assignment");
        region_->assigned_privates.insert(name);
      }
      return;
    }
    if (s->zone == here) return;
    // Declared in an outer zone of the same region.
    if (here == Zone::Critical) {
      add(Rule::IterationDependence, ctx.loc, "'" + name + "' written in a critical section but declared outside it");
    } else {
      add(Rule::IterationDependence, ctx.loc, "'" + name + "' written inside the worksharing loop but declared outside it");
    }
  }

  void assignment(const Assignment& a, const Ctx& ctx) {
    expression(a.expr, ctx);
    if (std::holds_alternative<CompTarget>(a.target)) {
      comp_write(a, ctx);
    } else if (const auto* v = std::get_if<VarTarget>(&a.target)) {
      var_write(a, v->name, ctx);
    } else {
      const auto& t = std::get<ArrayTarget>(a.target);
      const Sym* s = lookup(t.array);
      if (s == nullptr) {
        add(Rule::UndeclaredIdentifier, ctx.loc, "'" + t.array + "' is not in scope");
      } else if (s->kind != SymKind::FpArray) {
        add(Rule::TypeMismatch, ctx.loc, "'" + t.array + "' subscripted but not an array");
      }
      subscript(t.index, true, ctx);
      if (!region_ || !std::holds_alternative<ThreadIdSub>(t.index)) {
        if (region_ && !ctx.in_critical)
          add(Rule::UnprotectedWrite, ctx.loc, "shared array '" + t.array + "' written without thread_id subscript");
        else
          add(Rule::ArrayWrite, ctx.loc, "arrays are written only as arr[thread_id] inside parallel regions");
      }
      if (a.op != AssignOp::Set) add(Rule::ScratchArrayRead, ctx.loc, "compound update reads array '" + t.array + "'");
      scratch_arrays_.insert(t.array);
    }
  }

  // ---- blocks -----------------------------------------------------------

  void block(const Block& b, const Ctx& ctx, bool region_body = false) {
    if (b.statements.empty()) add(Rule::EmptyBlock, ctx.loc, "block has no statements");
    int lines = 0;
    int children = 0;
    for (const auto& s : b.statements) {
      if (is_nesting_block(s)) {
        ++children;
      } else {
        ++lines;
      }
    }
    if (lines > params_.max_lines_in_block)
      add(Rule::BlockLines, ctx.loc,
          std::to_string(lines) + " lines exceed max_lines_in_block " + std::to_string(params_.max_lines_in_block));
    if (children > params_.max_same_level_blocks)
      add(Rule::SiblingBlocks, ctx.loc,
          std::to_string(children) + " child blocks exceed max_same_level_blocks " +
              std::to_string(params_.max_same_level_blocks));

    scopes_.emplace_back();
    for (std::size_t k = 0; k < b.statements.size(); ++k) {
      Ctx here = ctx;
      here.loc = ctx.loc + "[" + std::to_string(k) + "]";
      statement(b.statements[k], here, region_body, region_body && k + 1 == b.statements.size());
    }
    scopes_.pop_back();
  }

  void nested_depth(const Ctx& ctx) {
    if (ctx.depth + 1 > params_.max_nesting_levels)
      add(Rule::NestingDepth, ctx.loc,
          "nesting level " + std::to_string(ctx.depth + 1) + " exceeds max_nesting_levels " +
              std::to_string(params_.max_nesting_levels));
  }

  void statement(const Statement& s, const Ctx& ctx, bool in_region_body, bool last_in_region_body) {
    if (in_region_body && is_nesting_block(s) && !last_in_region_body)
      add(Rule::ParallelShape, ctx.loc, "parallel region body holds a block before its worksharing loop");
    if (in_region_body && last_in_region_body) {
      const auto* f = as<ForLoop>(s);
      if (f == nullptr || !f->omp_for)
        add(Rule::ParallelShape, ctx.loc, "parallel region body must end with an omp for loop");
    }

    if (const auto* a = as<Assignment>(s)) {
      assignment(*a, ctx);
    } else if (const auto* d = as<TempDecl>(s)) {
      expression(d->init, ctx);
      declare(d->name, SymKind::FpScalar, ctx);
    } else if (const auto* i = as<IfBlock>(s)) {
      nested_depth(ctx);
      Ctx cond = ctx;
      cond.loc += ".if";
      if (const Sym* lhs = lookup(i->cond.lhs); lhs != nullptr && lhs->kind == SymKind::IntScalar) {
        // integer parameters are read-only everywhere
      } else {
        scalar_read(i->cond.lhs, cond);
      }
      expression(i->cond.rhs, cond);
      Ctx body = cond;
      body.depth += 1;
      body.loc += ".body";
      block(i->body, body);
    } else if (const auto* f = as<ForLoop>(s)) {
      for_loop(*f, ctx, in_region_body);
    } else if (const auto* r = as<OmpParallel>(s)) {
      parallel(*r, ctx);
    } else if (const auto* c = as<Critical>(s)) {
      if (!region_ || ctx.region_loops == 0)
        add(Rule::CriticalPlacement, ctx.loc, "critical section outside a for loop of a parallel region");
      if (ctx.in_critical) add(Rule::CriticalPlacement, ctx.loc, "nested critical section");
      Ctx body = ctx;
      body.in_critical = true;
      body.loc += ".critical.body";
      block(c->body, body);
    }
  }

  void for_loop(const ForLoop& f, const Ctx& ctx, bool in_region_body) {
    nested_depth(ctx);
    Ctx body = ctx;
    body.loc += ".for";
    if (f.bound_param.empty()) {
      if (f.bound < 1 || f.bound > params_.array_size)
        add(Rule::LoopBound, body.loc, "bound " + std::to_string(f.bound) + " outside [1, array_size]");
    } else {
      const Sym* s = lookup(f.bound_param);
      if (s == nullptr || s->kind != SymKind::IntScalar)
        add(Rule::LoopBound, body.loc, "bound '" + f.bound_param + "' is not an integer parameter");
    }
    if (f.omp_for && !in_region_body)
      add(Rule::OmpForPlacement, body.loc, "omp for loop is not an immediate child of a parallel region");
    if (region_) body.region_loops += 1;
    body.depth += 1;
    body.loc += ".body";
    scopes_.emplace_back();
    Ctx decl = ctx;
    if (region_) decl.region_loops += 1;
    declare(f.index, SymKind::LoopIndex, decl);
    block(f.body, body);
    scopes_.pop_back();
  }

  void parallel(const OmpParallel& r, const Ctx& ctx) {
    nested_depth(ctx);
    Ctx body = ctx;
    body.loc += ".parallel";
    if (region_) {
      add(Rule::NestedParallel, body.loc, "parallel region nested inside another");
      return;
    }
    if (r.num_threads < 1) add(Rule::Clause, body.loc, "num_threads must be positive");

    RegionInfo info;
    info.node = &r;
    std::vector<VisibleVar> visible{{std::string(kCompName), VisibleKind::Comp}};
    std::set<std::string, std::less<>> seen;
    for (const auto& frame : scopes_) {
      for (const auto& [name, sym] : frame) {
        VisibleKind k = sym.kind == SymKind::FpScalar    ? VisibleKind::FpScalar
                        : sym.kind == SymKind::IntScalar ? VisibleKind::IntScalar
                        : sym.kind == SymKind::FpArray   ? VisibleKind::FpArray
                                                         : VisibleKind::LoopIndex;
        visible.push_back({name, k});
      }
    }
    auto clause_check = [&](const std::vector<std::string>& names, bool priv) {
      for (const auto& n : names) {
        if (!seen.insert(n).second) add(Rule::Clause, body.loc, "'" + n + "' listed in more than one clause");
        if (n == kCompName) {
          add(Rule::Clause, body.loc, "comp may only appear in the reduction clause");
          continue;
        }
        const Sym* s = lookup(n);
        if (s == nullptr) {
          add(Rule::Clause, body.loc, "clause variable '" + n + "' is not in scope");
        } else if (s->kind == SymKind::LoopIndex) {
          add(Rule::Clause, body.loc, "loop index '" + n + "' listed in a data-sharing clause");
        } else if (priv && s->kind != SymKind::FpScalar) {
          add(Rule::Clause, body.loc, "private '" + n + "' would be an uninitialised pointer or count");
        }
      }
    };
    clause_check(r.private_vars, true);
    clause_check(r.firstprivate_vars, false);
    info.sharing = region_data_sharing(r, visible);

    std::set<std::string, std::less<>> shared;
    for (const auto& [name, a] : info.sharing)
      if (a == SharingAttr::Shared) shared.insert(name);
    collect_shared_writes(r.body, shared, info.written_shared);
    region_ = std::move(info);

    Ctx inner = body;
    inner.depth += 1;
    inner.region_loops = 0;
    inner.in_critical = false;
    inner.loc += ".body";
    bool has_loop = false;
    for (const auto& s : r.body.statements)
      if (const auto* f = as<ForLoop>(s); f && f->omp_for) has_loop = true;
    if (!has_loop) add(Rule::ParallelShape, inner.loc, "parallel region without an omp for loop");

    // Privates must be initialised before the worksharing loop reads them.
    block(r.body, inner, true);
    for (const auto& p : r.private_vars)
      if (!region_->assigned_privates.contains(p))
        add(Rule::PrivateUninitialized, body.loc, "private '" + p + "' is never initialised in the prologue");
    region_.reset();
  }

  static void collect_shared_writes(const Block& b, const std::set<std::string, std::less<>>& shared,
                                    std::set<std::string, std::less<>>& out) {
    for (const auto& s : b.statements) {
      if (const auto* a = as<Assignment>(s)) {
        if (std::holds_alternative<CompTarget>(a->target)) {
          if (shared.contains(kCompName)) out.emplace(kCompName);
        } else if (const auto* v = std::get_if<VarTarget>(&a->target)) {
          if (shared.contains(v->name)) out.insert(v->name);
        }
      } else if (const auto* i = as<IfBlock>(s)) {
        collect_shared_writes(i->body, shared, out);
      } else if (const auto* f = as<ForLoop>(s)) {
        collect_shared_writes(f->body, shared, out);
      } else if (const auto* c = as<Critical>(s)) {
        collect_shared_writes(c->body, shared, out);
      }
    }
  }
};

}  // namespace

std::vector<Violation> validate_program(const Program& program, const GeneratorParams& params) {
  return Validator(program, params).run();
}

}  // namespace ompfuzz
