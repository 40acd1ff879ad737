#include "ompfuzz/generator.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ompfuzz/race.hpp"

namespace ompfuzz {

std::string_view to_string(SharingAttr a) {
  switch (a) {
    case SharingAttr::Shared: return "shared";
    case SharingAttr::Private: return "private";
    case SharingAttr::FirstPrivate: return "firstprivate";
    case SharingAttr::Reduction: return "reduction";
  }
  return "?";
}

DataSharing assign_data_sharing(const OmpParallel& region, std::span<const VisibleVar> visible, Rng& rng,
                                int max_private) {
  static constexpr std::array kScalarChoices{SharingAttr::Shared, SharingAttr::Private,
                                             SharingAttr::FirstPrivate};
  static constexpr std::array kCopyChoices{SharingAttr::Shared, SharingAttr::FirstPrivate};

  DataSharing out;
  int privates = 0;
  for (const auto& v : visible) {
    SharingAttr attr = SharingAttr::Shared;
    switch (v.kind) {
      case VisibleKind::Comp:
        attr = region.reduction ? SharingAttr::Reduction : SharingAttr::Shared;
        break;
      case VisibleKind::LoopIndex:
        attr = SharingAttr::Shared;
        break;
      case VisibleKind::IntScalar:
      case VisibleKind::FpArray:
        attr = kCopyChoices[rng.index(kCopyChoices.size())];
        break;
      case VisibleKind::FpScalar:
        attr = kScalarChoices[rng.index(kScalarChoices.size())];
        if (attr == SharingAttr::Private && privates++ >= max_private) attr = SharingAttr::FirstPrivate;
        break;
    }
    out.emplace(v.name, attr);
  }
  out[std::string(kCompName)] = region.reduction ? SharingAttr::Reduction : SharingAttr::Shared;
  return out;
}

DataSharing region_data_sharing(const OmpParallel& region, std::span<const VisibleVar> visible) {
  DataSharing out;
  for (const auto& v : visible) out.emplace(v.name, SharingAttr::Shared);
  for (const auto& n : region.private_vars) out[n] = SharingAttr::Private;
  for (const auto& n : region.firstprivate_vars) out[n] = SharingAttr::FirstPrivate;
  out[std::string(kCompName)] = region.reduction ? SharingAttr::Reduction : SharingAttr::Shared;
  return out;
}

namespace {

// Where a statement sits relative to the (at most one) enclosing parallel
// region. Prologue is the region body before its worksharing loop.
enum class Zone { Serial, Prologue, LoopBody, Critical };

struct Var {
  std::string name;
  VisibleKind kind;
  Precision precision = Precision::Double;
  Zone zone = Zone::Serial;
  bool scratch = false;  // arrays written through thread_id; never read
};

struct RegionState {
  DataSharing sharing;
  std::optional<ReductionOp> reduction;
  std::set<std::string, std::less<>> assigned_privates;
};

struct Site {
  int depth = 0;       // nesting level of the block being filled
  int loop_depth = 0;  // enclosing for loops
  Zone zone = Zone::Serial;
};

enum class SimpleKind { TempDecl, AssignComp, AssignVar, ScratchWrite, Critical };
enum class BlockKind { Run, If, For, Parallel };
enum class TermKind { Constant, FpVar, Array };

class Builder {
 public:
  explicit Builder(const GeneratorParams& params) : p_(params), rng_(params.rng_seed) {}

  Program build() {
    Program program;
    program.seed = p_.rng_seed;
    scopes_.emplace_back();
    const int n_params = static_cast<int>(rng_.uniform_int(1, p_.max_params));
    for (int k = 0; k < n_params; ++k) {
      ParamDecl decl;
      decl.name = fresh_name();
      decl.kind = static_cast<ParamKind>(rng_.uniform_int(0, 2));
      decl.precision = random_precision();
      Var var{decl.name, VisibleKind::FpScalar, decl.precision, Zone::Serial, false};
      if (decl.kind == ParamKind::IntScalar) {
        var.kind = VisibleKind::IntScalar;
        decl.precision = Precision::Double;
      } else if (decl.kind == ParamKind::FpArray) {
        var.kind = VisibleKind::FpArray;
        var.scratch = rng_.bernoulli(0.5);
      }
      scopes_.back().push_back(var);
      program.params.push_back(std::move(decl));
    }
    program.body = gen_block(Site{}, /*top_level=*/true);
    scopes_.pop_back();
    return program;
  }

 private:
  const GeneratorParams& p_;
  Rng rng_;
  std::vector<std::vector<Var>> scopes_;
  RegionState* region_ = nullptr;
  int next_var_ = 1;

  std::string fresh_name() { return "var_" + std::to_string(next_var_++); }
  Precision random_precision() { return rng_.bernoulli(0.5) ? Precision::Single : Precision::Double; }

  template <typename Pred>
  std::vector<const Var*> collect(Pred pred) const {
    std::vector<const Var*> out;
    for (const auto& frame : scopes_)
      for (const auto& v : frame)
        if (pred(v)) out.push_back(&v);
    return out;
  }

  SharingAttr attr_of(const Var& v) const {
    auto it = region_->sharing.find(v.name);
    return it == region_->sharing.end() ? SharingAttr::Shared : it->second;
  }

  bool fp_readable(const Var& v, const Site& site) const {
    if (v.kind != VisibleKind::FpScalar) return false;
    if (site.zone == Zone::Serial || v.zone != Zone::Serial) return true;
    if (attr_of(v) == SharingAttr::Private) return region_->assigned_privates.contains(v.name);
    return true;
  }

  bool fp_writable(const Var& v, const Site& site) const {
    if (v.kind != VisibleKind::FpScalar) return false;
    switch (site.zone) {
      case Zone::Serial: return true;
      case Zone::Prologue:
        if (v.zone == Zone::Prologue) return true;
        if (v.zone != Zone::Serial) return false;
        if (attr_of(v) == SharingAttr::FirstPrivate) return true;
        return attr_of(v) == SharingAttr::Private && region_->assigned_privates.contains(v.name);
      case Zone::LoopBody: return v.zone == Zone::LoopBody;
      case Zone::Critical: return v.zone == Zone::Critical;
    }
    return false;
  }

  // comp may be read where no other thread can be updating it.
  bool comp_readable(const Site& site) const {
    if (site.zone == Zone::Serial) return true;
    return site.zone == Zone::Critical && !region_->reduction;
  }

  bool comp_assignable(const Site& site) const {
    return site.zone == Zone::Serial || site.zone == Zone::LoopBody || site.zone == Zone::Critical;
  }

  std::vector<Subscript> read_subscripts() const {
    std::vector<Subscript> out;
    for (const Var* v : collect([](const Var& x) { return x.kind == VisibleKind::LoopIndex; }))
      out.emplace_back(LoopIndexSub{v->name});
    for (const Var* v : collect([](const Var& x) { return x.kind == VisibleKind::IntScalar; }))
      out.emplace_back(IntParamSub{v->name});
    return out;
  }

  // ---- expressions ------------------------------------------------------

  FpConstant random_constant() {
    FpConstant c;
    c.negative = rng_.bernoulli(0.5);
    c.mantissa = static_cast<int>(rng_.uniform_int(10000, 99999));
    c.exponent = static_cast<int>(rng_.uniform_int(-20, 20));
    return c;
  }

  Expression gen_term(const Site& site, bool allow_comp) {
    auto fp_vars = collect([&](const Var& v) { return fp_readable(v, site); });
    const bool comp_ok = allow_comp || comp_readable(site);
    auto arrays = collect([](const Var& v) { return v.kind == VisibleKind::FpArray && !v.scratch; });
    auto subs = read_subscripts();

    std::vector<TermKind> kinds{TermKind::Constant};
    if (!fp_vars.empty() || comp_ok) kinds.push_back(TermKind::FpVar);
    if (!arrays.empty() && !subs.empty()) kinds.push_back(TermKind::Array);

    Expression term;
    switch (kinds[rng_.index(kinds.size())]) {
      case TermKind::Constant:
        term = make_const(random_constant());
        break;
      case TermKind::FpVar: {
        std::vector<std::string> names;
        for (const Var* v : fp_vars) names.push_back(v->name);
        if (comp_ok) names.emplace_back(kCompName);
        term = make_var(names[rng_.index(names.size())]);
        break;
      }
      case TermKind::Array: {
        const Var* arr = arrays[rng_.index(arrays.size())];
        term = make_term(Term{ArrayAccess{arr->name, subs[rng_.index(subs.size())]}});
        break;
      }
    }
    if (p_.math_func_allowed && rng_.bernoulli(p_.math_func_probability)) {
      const auto& fn = p_.math_functions[rng_.index(p_.math_functions.size())];
      term = Expression{MathCall{fn, std::move(term)}};
    }
    return term;
  }

  Expression gen_tree(int terms, const Site& site, bool allow_comp) {
    if (terms == 1) return gen_term(site, allow_comp);
    const int left = static_cast<int>(rng_.uniform_int(1, terms - 1));
    auto op = static_cast<ArithOp>(rng_.uniform_int(0, 3));
    Expression lhs = gen_tree(left, site, allow_comp);
    Expression rhs = gen_tree(terms - left, site, allow_comp);
    Expression e{BinOp{op, std::move(lhs), std::move(rhs)}};
    if (rng_.bernoulli(0.5)) e = Expression{Paren{std::move(e)}};
    return e;
  }

  Expression gen_expr(const Site& site, bool allow_comp = false) {
    const int terms = static_cast<int>(rng_.uniform_int(1, p_.max_expression_size));
    return gen_tree(terms, site, allow_comp);
  }

  std::vector<std::string> bool_lhs_candidates(const Site& site) const {
    std::vector<std::string> out;
    for (const Var* v : collect([&](const Var& x) { return fp_readable(x, site); })) out.push_back(v->name);
    for (const Var* v : collect([](const Var& x) { return x.kind == VisibleKind::IntScalar; }))
      out.push_back(v->name);
    if (comp_readable(site)) out.emplace_back(kCompName);
    return out;
  }

  // ---- statements -------------------------------------------------------

  AssignOp comp_update_op(const Site& site) {
    if (site.zone != Zone::Serial && region_->reduction) {
      const bool additive = *region_->reduction == ReductionOp::Add;
      const bool first = rng_.bernoulli(0.5);
      if (additive) return first ? AssignOp::AddSet : AssignOp::SubSet;
      return first ? AssignOp::MulSet : AssignOp::DivSet;
    }
    return static_cast<AssignOp>(rng_.uniform_int(0, 4));
  }

  Statement gen_temp_decl(const Site& site) {
    TempDecl decl;
    decl.precision = random_precision();
    decl.init = gen_expr(site);
    decl.name = fresh_name();
    scopes_.back().push_back(Var{decl.name, VisibleKind::FpScalar, decl.precision, site.zone, false});
    return Statement{std::move(decl)};
  }

  Statement gen_simple(Site site) {
    auto writable = collect([&](const Var& v) { return fp_writable(v, site); });
    auto scratch = collect([](const Var& v) { return v.kind == VisibleKind::FpArray && v.scratch; });

    std::vector<SimpleKind> kinds{SimpleKind::TempDecl};
    if (comp_assignable(site)) kinds.push_back(SimpleKind::AssignComp);
    if (!writable.empty()) kinds.push_back(SimpleKind::AssignVar);
    const bool in_region = site.zone == Zone::Prologue || site.zone == Zone::LoopBody;
    if (in_region && !scratch.empty()) kinds.push_back(SimpleKind::ScratchWrite);
    if (site.zone == Zone::LoopBody) kinds.push_back(SimpleKind::Critical);

    switch (kinds[rng_.index(kinds.size())]) {
      case SimpleKind::TempDecl:
        return gen_temp_decl(site);
      case SimpleKind::AssignComp: {
        Assignment a;
        a.target = CompTarget{};
        a.op = comp_update_op(site);
        // Unprotected comp updates in a non-reduction loop body may read comp;
        // enforce_race_freedom wraps them in a critical section.
        const bool allow_comp = site.zone == Zone::LoopBody && !region_->reduction;
        a.expr = gen_expr(site, allow_comp);
        return Statement{std::move(a)};
      }
      case SimpleKind::AssignVar: {
        Assignment a;
        a.target = VarTarget{writable[rng_.index(writable.size())]->name};
        a.op = static_cast<AssignOp>(rng_.uniform_int(0, 4));
        a.expr = gen_expr(site);
        return Statement{std::move(a)};
      }
      case SimpleKind::ScratchWrite: {
        Assignment a;
        a.target = ArrayTarget{scratch[rng_.index(scratch.size())]->name, ThreadIdSub{}};
        a.op = AssignOp::Set;
        a.expr = gen_expr(site);
        return Statement{std::move(a)};
      }
      case SimpleKind::Critical: {
        Site inner = site;
        inner.zone = Zone::Critical;
        return Statement{Critical{gen_block(inner, false)}};
      }
    }
    return gen_temp_decl(site);
  }

  Statement gen_final_comp_update() {
    Assignment a;
    a.target = CompTarget{};
    a.op = static_cast<AssignOp>(rng_.uniform_int(0, 4));
    a.expr = gen_expr(Site{});
    return Statement{std::move(a)};
  }

  bool parallel_eligible(const Site& site) const {
    return site.zone == Zone::Serial && site.depth + 2 <= p_.max_nesting_levels &&
           p_.max_same_level_blocks >= 1;
  }

  ForLoop loop_head(const Site& site) {
    ForLoop loop;
    loop.index = "i_" + std::to_string(site.loop_depth + 1);
    auto ints = collect([](const Var& v) { return v.kind == VisibleKind::IntScalar; });
    if (!ints.empty() && rng_.bernoulli(0.5)) {
      loop.bound_param = ints[rng_.index(ints.size())]->name;
      loop.bound = 0;
    } else {
      loop.bound = static_cast<int>(rng_.uniform_int(1, p_.array_size));
    }
    return loop;
  }

  Statement gen_for(const Site& site) {
    ForLoop loop = loop_head(site);
    Site inner{site.depth + 1, site.loop_depth + 1, site.zone};
    scopes_.emplace_back();
    scopes_.back().push_back(Var{loop.index, VisibleKind::LoopIndex, Precision::Double, site.zone, false});
    loop.body = gen_block(inner, false);
    scopes_.pop_back();
    return Statement{std::move(loop)};
  }

  Statement gen_if(const Site& site) {
    auto lhs = bool_lhs_candidates(site);
    IfBlock blk;
    blk.cond.lhs = lhs[rng_.index(lhs.size())];
    blk.cond.op = static_cast<CmpOp>(rng_.uniform_int(0, 5));
    blk.cond.rhs = gen_expr(site);
    blk.body = gen_block(Site{site.depth + 1, site.loop_depth, site.zone}, false);
    return Statement{std::move(blk)};
  }

  Statement gen_parallel(const Site& site) {
    OmpParallel region;
    region.num_threads = p_.num_threads;
    if (rng_.bernoulli(0.5)) region.reduction = rng_.bernoulli(0.5) ? ReductionOp::Add : ReductionOp::Mul;

    std::vector<VisibleVar> visible{{std::string(kCompName), VisibleKind::Comp}};
    for (const Var* v : collect([](const Var&) { return true; })) visible.push_back({v->name, v->kind});
    RegionState state;
    state.reduction = region.reduction;
    state.sharing = assign_data_sharing(region, visible, rng_, p_.max_lines_in_block);
    for (const auto& v : visible) {
      auto attr = state.sharing.at(v.name);
      if (attr == SharingAttr::Private) region.private_vars.push_back(v.name);
      if (attr == SharingAttr::FirstPrivate) region.firstprivate_vars.push_back(v.name);
    }
    region_ = &state;

    Site prologue{site.depth + 1, site.loop_depth, Zone::Prologue};
    scopes_.emplace_back();
    const int n_private = static_cast<int>(region.private_vars.size());
    const int lines = static_cast<int>(rng_.uniform_int(std::max(1, n_private), p_.max_lines_in_block));
    for (const auto& name : region.private_vars) {
      Assignment init;
      init.target = VarTarget{name};
      init.op = AssignOp::Set;
      init.expr = gen_expr(prologue);
      state.assigned_privates.insert(name);
      region.body.statements.push_back(Statement{std::move(init)});
    }
    for (int k = n_private; k < lines; ++k) region.body.statements.push_back(gen_simple(prologue));

    ForLoop loop = loop_head(site);
    loop.omp_for = true;
    scopes_.emplace_back();
    scopes_.back().push_back(Var{loop.index, VisibleKind::LoopIndex, Precision::Double, Zone::LoopBody, false});
    loop.body = gen_block(Site{site.depth + 2, site.loop_depth + 1, Zone::LoopBody}, false);
    scopes_.pop_back();
    region.body.statements.push_back(Statement{std::move(loop)});

    scopes_.pop_back();
    region_ = nullptr;
    return Statement{std::move(region)};
  }

  Block gen_block(const Site& site, bool top_level) {
    Block block;
    scopes_.emplace_back();
    int lines = static_cast<int>(rng_.uniform_int(1, p_.max_lines_in_block));
    if (top_level) --lines;  // reserved for the closing comp update
    int children = site.depth < p_.max_nesting_levels
                       ? static_cast<int>(rng_.uniform_int(0, p_.max_same_level_blocks))
                       : 0;
    for (;;) {
      std::vector<BlockKind> kinds;
      if (lines > 0) kinds.push_back(BlockKind::Run);
      if (children > 0) {
        if (!bool_lhs_candidates(site).empty()) kinds.push_back(BlockKind::If);
        kinds.push_back(BlockKind::For);
        if (parallel_eligible(site)) kinds.push_back(BlockKind::Parallel);
      }
      if (kinds.empty()) break;
      switch (kinds[rng_.index(kinds.size())]) {
        case BlockKind::Run: {
          const int run = static_cast<int>(rng_.uniform_int(1, lines));
          for (int k = 0; k < run; ++k) block.statements.push_back(gen_simple(site));
          lines -= run;
          break;
        }
        case BlockKind::If:
          block.statements.push_back(gen_if(site));
          --children;
          break;
        case BlockKind::For:
          block.statements.push_back(gen_for(site));
          --children;
          break;
        case BlockKind::Parallel:
          block.statements.push_back(gen_parallel(site));
          --children;
          break;
      }
    }
    if (top_level) block.statements.push_back(gen_final_comp_update());
    scopes_.pop_back();
    return block;
  }
};

}  // namespace

Program generate_program(const GeneratorParams& params) {
  params.validate();
  Builder builder(params);
  return enforce_race_freedom(builder.build());
}

}  // namespace ompfuzz
